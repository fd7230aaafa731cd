//! Deterministic redistribution of per-cell chemistry problems between
//! concurrent workers.
//!
//! Every iteration each worker publishes its estimated load, all workers
//! derive the same [`BalancePlan`] from the gathered estimates, overloaded
//! workers ship their most expensive problems to underloaded ones, guests
//! are solved remotely, and the solutions travel back. Because the solver
//! is a pure function of the problem, a guest solution is bit-identical to
//! the one a local solve would have produced.
//!
//! Problems and solutions cross worker boundaries only as byte buffers in
//! the fixed-width little-endian layout documented on [`encode_problems`]
//! and [`encode_solutions`], so an alternate transport can interoperate.

use crate::clock::thread_cpu_seconds;
use crate::kinetics::{CompositionVector, Mechanism};
use crate::odesolver::{integrate, IntegratorStats, JacobianMode, OdeError, ToleranceSpec};
use std::sync::mpsc::{channel, Receiver, Sender};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BalancerError {
    #[error("channel to worker {peer} is closed")]
    ChannelClosed { peer: usize },
    #[error("protocol error: expected {expected:?} from worker {from}, got {got}")]
    Protocol { from: usize, expected: MessageKind, got: u8 },
    #[error("decode error at byte {offset}: {msg}")]
    Decode { offset: usize, msg: String },
    #[error("solve failed for cell {cell_id}: {source}")]
    Solve { cell_id: u64, source: OdeError },
}

/// One cell's chemistry problem, self-contained for shipping.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemistryProblem {
    pub cell_id: u64,
    pub phi: CompositionVector,
    /// Pressure, Pa.
    pub pressure: f64,
    /// Integration interval, s.
    pub dt: f64,
    /// Expected solve cost, seconds; from the previous iteration's
    /// measurement, or a uniform guess on the first iteration.
    pub cost_estimate: f64,
}

/// The solved state for one cell plus the measured cost that seeds the
/// next iteration's estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemistrySolution {
    pub cell_id: u64,
    pub phi_new: CompositionVector,
    pub measured_cost: f64,
    pub stats: IntegratorStats,
}

/// Estimated total cost per worker, indexed by rank.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector(pub Vec<f64>);

impl LoadVector {
    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.0.iter().sum::<f64>() / self.0.len() as f64
        }
    }
}

/// A planned shipment of whole problems from one rank to another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub cells: Vec<u64>,
}

/// The full redistribution for one iteration. Derived deterministically
/// from the gathered loads and cost lists, so every worker computes the
/// identical plan without further coordination.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BalancePlan {
    pub transfers: Vec<Transfer>,
}

impl BalancePlan {
    pub fn is_empty(&self) -> bool {
        self.transfers.is_empty()
    }
}

/// Fraction of the mean below which a transfer is dropped as churn.
pub const CHURN_THRESHOLD: f64 = 0.02;

/// Compute the redistribution plan.
///
/// `costs[r]` lists rank r's problems as `(cell_id, cost)` sorted by
/// descending cost (ties by ascending cell id). Workers above the mean
/// load are paired greedily with workers below it, both sides ordered by
/// distance from the mean (ties by ascending rank), and the sender ships
/// its most expensive problems first. A problem moves only if its cost
/// fits inside both the sender's remaining surplus and the receiver's
/// remaining deficit, so no estimated load ever crosses the mean and the
/// estimated maximum cannot increase. A pairing whose total shipped cost
/// is at most [`CHURN_THRESHOLD`] times the mean is suppressed entirely.
pub fn compute_plan(loads: &LoadVector, costs: &[Vec<(u64, f64)>]) -> BalancePlan {
    let p = loads.0.len();
    assert_eq!(costs.len(), p);
    let mu = loads.mean();
    if mu <= 0.0 {
        return BalancePlan::default();
    }
    let slack = 1e-9 * mu;

    let mut surplus: Vec<(usize, f64)> = Vec::new();
    let mut deficit: Vec<(usize, f64)> = Vec::new();
    for (r, &load) in loads.0.iter().enumerate() {
        if load > mu {
            surplus.push((r, load - mu));
        } else if load < mu {
            deficit.push((r, mu - load));
        }
    }
    let by_gap = |a: &(usize, f64), b: &(usize, f64)| {
        b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0))
    };
    surplus.sort_by(by_gap);
    deficit.sort_by(by_gap);

    let mut taken: Vec<Vec<bool>> = costs.iter().map(|c| vec![false; c.len()]).collect();
    let mut rs: Vec<f64> = surplus.iter().map(|&(_, s)| s).collect();
    let mut rd: Vec<f64> = deficit.iter().map(|&(_, d)| d).collect();
    let mut plan = BalancePlan::default();
    let (mut i, mut j) = (0usize, 0usize);
    while i < surplus.len() && j < deficit.len() {
        let sender = surplus[i].0;
        let receiver = deficit[j].0;
        let mut picked: Vec<usize> = Vec::new();
        let mut total = 0.0;
        for (idx, &(_, cost)) in costs[sender].iter().enumerate() {
            if taken[sender][idx] {
                continue;
            }
            if cost <= rs[i] - total + slack && cost <= rd[j] - total + slack {
                picked.push(idx);
                total += cost;
            }
        }
        if total > CHURN_THRESHOLD * mu {
            for &idx in &picked {
                taken[sender][idx] = true;
            }
            rs[i] -= total;
            rd[j] -= total;
            plan.transfers.push(Transfer {
                from: sender,
                to: receiver,
                cells: picked.iter().map(|&idx| costs[sender][idx].0).collect(),
            });
        }
        // advance whichever side has less room left; guarantees progress
        // even when nothing fit
        if rd[j] <= rs[i] {
            j += 1;
        } else {
            i += 1;
        }
    }
    plan
}

/// Bottleneck metric: maximum busy time over the mean. 1 means perfectly
/// balanced; P means one worker did everything. All-zero input is defined
/// as balanced.
pub fn imbalance_ratio(busy: &[f64]) -> f64 {
    assert!(!busy.is_empty());
    assert!(busy.iter().all(|&t| t >= 0.0));
    let mean = busy.iter().sum::<f64>() / busy.len() as f64;
    if mean == 0.0 {
        return 1.0;
    }
    busy.iter().cloned().fold(0.0, f64::max) / mean
}

// --- wire format ---------------------------------------------------------

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], BalancerError> {
        if self.pos + n > self.buf.len() {
            return Err(BalancerError::Decode {
                offset: self.pos,
                msg: format!("need {n} bytes, {} left", self.buf.len() - self.pos),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, BalancerError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, BalancerError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Size in bytes of one encoded problem record for `n_species` species.
pub fn problem_record_size(n_species: usize) -> usize {
    8 * (5 + n_species - 1)
}

/// Size in bytes of one encoded solution record for `n_species` species.
pub fn solution_record_size(n_species: usize) -> usize {
    8 * (8 + n_species)
}

/// Serialize problems: a u64 record count, then per record the fields
/// `cell_id: u64, dt: f64, pressure: f64, T: f64, Y[0..N-1]: f64,
/// cost_estimate: f64`, all little-endian.
pub fn encode_problems(problems: &[ChemistryProblem]) -> Vec<u8> {
    let n = problems.first().map_or(0, |p| p.phi.y.len() + 1);
    let mut buf = Vec::with_capacity(8 + problems.len() * problem_record_size(n.max(1)));
    put_u64(&mut buf, problems.len() as u64);
    for p in problems {
        put_u64(&mut buf, p.cell_id);
        put_f64(&mut buf, p.dt);
        put_f64(&mut buf, p.pressure);
        put_f64(&mut buf, p.phi.t);
        for &y in &p.phi.y {
            put_f64(&mut buf, y);
        }
        put_f64(&mut buf, p.cost_estimate);
    }
    buf
}

pub fn decode_problems(buf: &[u8], n_species: usize) -> Result<Vec<ChemistryProblem>, BalancerError> {
    let mut r = Reader::new(buf);
    let count = r.u64()? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let cell_id = r.u64()?;
        let dt = r.f64()?;
        let pressure = r.f64()?;
        let t = r.f64()?;
        let mut y = Vec::with_capacity(n_species - 1);
        for _ in 0..n_species - 1 {
            y.push(r.f64()?);
        }
        let cost_estimate = r.f64()?;
        out.push(ChemistryProblem {
            cell_id,
            phi: CompositionVector { t, y },
            pressure,
            dt,
            cost_estimate,
        });
    }
    if r.pos != buf.len() {
        return Err(BalancerError::Decode {
            offset: r.pos,
            msg: format!("{} trailing bytes", buf.len() - r.pos),
        });
    }
    Ok(out)
}

/// Serialize solutions: a u64 record count, then per record `cell_id:
/// u64, T: f64, Y[0..N-1]: f64, measured_cost: f64, steps_accepted,
/// steps_rejected, rhs_evals, jacobian_evals, lu_factorizations (all
/// u64), cpu_time: f64`, little-endian.
pub fn encode_solutions(solutions: &[ChemistrySolution]) -> Vec<u8> {
    let n = solutions.first().map_or(1, |s| s.phi_new.y.len() + 1);
    let mut buf = Vec::with_capacity(8 + solutions.len() * solution_record_size(n));
    put_u64(&mut buf, solutions.len() as u64);
    for s in solutions {
        put_u64(&mut buf, s.cell_id);
        put_f64(&mut buf, s.phi_new.t);
        for &y in &s.phi_new.y {
            put_f64(&mut buf, y);
        }
        put_f64(&mut buf, s.measured_cost);
        put_u64(&mut buf, s.stats.steps_accepted);
        put_u64(&mut buf, s.stats.steps_rejected);
        put_u64(&mut buf, s.stats.rhs_evals);
        put_u64(&mut buf, s.stats.jacobian_evals);
        put_u64(&mut buf, s.stats.lu_factorizations);
        put_f64(&mut buf, s.stats.cpu_time);
    }
    buf
}

pub fn decode_solutions(buf: &[u8], n_species: usize) -> Result<Vec<ChemistrySolution>, BalancerError> {
    let mut r = Reader::new(buf);
    let count = r.u64()? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let cell_id = r.u64()?;
        let t = r.f64()?;
        let mut y = Vec::with_capacity(n_species - 1);
        for _ in 0..n_species - 1 {
            y.push(r.f64()?);
        }
        let measured_cost = r.f64()?;
        let stats = IntegratorStats {
            steps_accepted: r.u64()?,
            steps_rejected: r.u64()?,
            rhs_evals: r.u64()?,
            jacobian_evals: r.u64()?,
            lu_factorizations: r.u64()?,
            cpu_time: r.f64()?,
        };
        out.push(ChemistrySolution {
            cell_id,
            phi_new: CompositionVector { t, y },
            measured_cost,
            stats,
        });
    }
    if r.pos != buf.len() {
        return Err(BalancerError::Decode {
            offset: r.pos,
            msg: format!("{} trailing bytes", buf.len() - r.pos),
        });
    }
    Ok(out)
}

// --- messaging -----------------------------------------------------------

/// Tag identifying what a message payload contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    CostList = 0,
    Problems = 1,
    Solutions = 2,
}

impl MessageKind {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(MessageKind::CostList),
            1 => Some(MessageKind::Problems),
            2 => Some(MessageKind::Solutions),
            _ => None,
        }
    }
}

/// Reliable, ordered, point-to-point messaging between a fixed group of
/// workers. Any transport with these guarantees can stand in for the
/// bundled in-process one.
pub trait Messenger {
    fn rank(&self) -> usize;
    fn world_size(&self) -> usize;
    fn send(&mut self, to: usize, kind: MessageKind, payload: &[u8]) -> Result<(), BalancerError>;
    /// Blocks until the next message from `from` arrives; errors if the
    /// kind does not match `expected`.
    fn recv(&mut self, from: usize, expected: MessageKind) -> Result<Vec<u8>, BalancerError>;

    /// Every worker contributes a payload and receives all P payloads
    /// indexed by rank. Barrier semantics: returns only after every
    /// worker has contributed.
    fn all_gather(&mut self, payload: &[u8]) -> Result<Vec<Vec<u8>>, BalancerError> {
        let p = self.world_size();
        let me = self.rank();
        for to in 0..p {
            if to != me {
                self.send(to, MessageKind::CostList, payload)?;
            }
        }
        let mut out = vec![Vec::new(); p];
        out[me] = payload.to_vec();
        for from in 0..p {
            if from != me {
                out[from] = self.recv(from, MessageKind::CostList)?;
            }
        }
        Ok(out)
    }
}

/// In-process messenger over std mpsc channels, one ordered channel per
/// directed worker pair. Construct the whole group at once and hand one
/// endpoint to each worker thread.
pub struct ThreadMessenger {
    rank: usize,
    /// senders[to] feeds the (rank -> to) channel; entry for self unused.
    senders: Vec<Option<Sender<(u8, Vec<u8>)>>>,
    /// receivers[from] drains the (from -> rank) channel.
    receivers: Vec<Option<Receiver<(u8, Vec<u8>)>>>,
}

impl ThreadMessenger {
    pub fn group(p: usize) -> Vec<ThreadMessenger> {
        assert!(p >= 1);
        let mut tx: Vec<Vec<Option<Sender<_>>>> = (0..p).map(|_| (0..p).map(|_| None).collect()).collect();
        let mut rx: Vec<Vec<Option<Receiver<_>>>> = (0..p).map(|_| (0..p).map(|_| None).collect()).collect();
        for from in 0..p {
            for to in 0..p {
                if from != to {
                    let (s, r) = channel();
                    tx[from][to] = Some(s);
                    rx[to][from] = Some(r);
                }
            }
        }
        let mut group = Vec::with_capacity(p);
        for (rank, (senders, receivers)) in tx.into_iter().zip(rx).enumerate() {
            group.push(ThreadMessenger { rank, senders, receivers });
        }
        group
    }
}

impl Messenger for ThreadMessenger {
    fn rank(&self) -> usize {
        self.rank
    }

    fn world_size(&self) -> usize {
        self.senders.len()
    }

    fn send(&mut self, to: usize, kind: MessageKind, payload: &[u8]) -> Result<(), BalancerError> {
        let s = self.senders[to].as_ref().expect("send to self");
        s.send((kind as u8, payload.to_vec()))
            .map_err(|_| BalancerError::ChannelClosed { peer: to })
    }

    fn recv(&mut self, from: usize, expected: MessageKind) -> Result<Vec<u8>, BalancerError> {
        let r = self.receivers[from].as_ref().expect("recv from self");
        let (kind, payload) = r
            .recv()
            .map_err(|_| BalancerError::ChannelClosed { peer: from })?;
        if MessageKind::from_byte(kind) != Some(expected) {
            return Err(BalancerError::Protocol { from, expected, got: kind });
        }
        Ok(payload)
    }
}

// --- the balanced iteration ----------------------------------------------

/// What one worker did during a balanced iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IterationTiming {
    /// Thread CPU seconds spent solving chemistry (local plus guest).
    pub busy_seconds: f64,
    pub local_solves: usize,
    pub guest_solves: usize,
    pub problems_sent: usize,
    pub problems_received: usize,
}

fn solve_one(
    m: &Mechanism,
    p: &ChemistryProblem,
    tol: ToleranceSpec,
    mode: JacobianMode,
) -> Result<ChemistrySolution, BalancerError> {
    let (phi_new, stats) = integrate(m, &p.phi, p.pressure, p.dt, tol, mode)
        .map_err(|source| BalancerError::Solve { cell_id: p.cell_id, source })?;
    Ok(ChemistrySolution {
        cell_id: p.cell_id,
        phi_new,
        measured_cost: stats.cpu_time,
        stats,
    })
}

/// Run one synchronized load-balanced chemistry iteration.
///
/// Phases: gather every worker's `(cell_id, cost)` list; derive the plan
/// locally (identical everywhere); ship planned problems; solve local
/// problems then guests; return guest solutions to their origins. The
/// returned solutions cover exactly this worker's submitted cells, and
/// each is bit-identical to a local solve because the solver is pure.
pub fn run_balanced_iteration<M: Messenger>(
    m: &Mechanism,
    problems: &[ChemistryProblem],
    messenger: &mut M,
    tol: ToleranceSpec,
    mode: JacobianMode,
) -> Result<(Vec<ChemistrySolution>, IterationTiming), BalancerError> {
    let p_workers = messenger.world_size();
    let me = messenger.rank();
    let n_species = m.n_species();

    // phase 1: publish (cell_id, cost) sorted by descending cost, ties
    // by ascending cell id, so everyone sees identical ordering
    let mut my_costs: Vec<(u64, f64)> = problems.iter().map(|p| (p.cell_id, p.cost_estimate)).collect();
    my_costs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut payload = Vec::with_capacity(8 + 16 * my_costs.len());
    put_u64(&mut payload, my_costs.len() as u64);
    for &(id, c) in &my_costs {
        put_u64(&mut payload, id);
        put_f64(&mut payload, c);
    }
    let gathered = messenger.all_gather(&payload)?;
    let mut costs: Vec<Vec<(u64, f64)>> = Vec::with_capacity(p_workers);
    for buf in &gathered {
        let mut r = Reader::new(buf);
        let count = r.u64()? as usize;
        let mut list = Vec::with_capacity(count);
        for _ in 0..count {
            let id = r.u64()?;
            let c = r.f64()?;
            list.push((id, c));
        }
        costs.push(list);
    }
    let loads = LoadVector(costs.iter().map(|l| l.iter().map(|&(_, c)| c).sum()).collect());

    // phase 2: identical plan on every worker
    let plan = compute_plan(&loads, &costs);

    // phase 3: ship outgoing problems, collect incoming guests
    let mut timing = IterationTiming::default();
    let mut shipped_ids: Vec<u64> = Vec::new();
    for tr in plan.transfers.iter().filter(|t| t.from == me) {
        let outgoing: Vec<ChemistryProblem> = tr
            .cells
            .iter()
            .map(|id| problems.iter().find(|p| p.cell_id == *id).expect("planned cell not owned").clone())
            .collect();
        shipped_ids.extend_from_slice(&tr.cells);
        timing.problems_sent += outgoing.len();
        messenger.send(tr.to, MessageKind::Problems, &encode_problems(&outgoing))?;
    }
    let mut guests: Vec<(usize, Vec<ChemistryProblem>)> = Vec::new();
    for tr in plan.transfers.iter().filter(|t| t.to == me) {
        let buf = messenger.recv(tr.from, MessageKind::Problems)?;
        let list = decode_problems(&buf, n_species)?;
        timing.problems_received += list.len();
        guests.push((tr.from, list));
    }

    // phase 4: solve kept locals, then guests
    let t_busy = thread_cpu_seconds();
    let mut own_solutions: Vec<ChemistrySolution> = Vec::new();
    for p in problems.iter().filter(|p| !shipped_ids.contains(&p.cell_id)) {
        own_solutions.push(solve_one(m, p, tol, mode)?);
        timing.local_solves += 1;
    }
    let mut guest_solutions: Vec<(usize, Vec<ChemistrySolution>)> = Vec::new();
    for (origin, list) in &guests {
        let mut sols = Vec::with_capacity(list.len());
        for p in list {
            sols.push(solve_one(m, p, tol, mode)?);
            timing.guest_solves += 1;
        }
        guest_solutions.push((*origin, sols));
    }
    timing.busy_seconds = thread_cpu_seconds() - t_busy;

    // phase 5: return guest solutions, collect our own
    for (origin, sols) in &guest_solutions {
        messenger.send(*origin, MessageKind::Solutions, &encode_solutions(sols))?;
    }
    for tr in plan.transfers.iter().filter(|t| t.from == me) {
        let buf = messenger.recv(tr.to, MessageKind::Solutions)?;
        own_solutions.extend(decode_solutions(&buf, n_species)?);
    }
    Ok((own_solutions, timing))
}
