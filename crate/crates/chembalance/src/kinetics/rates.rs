//! Arrhenius rate constants, law-of-mass-action production rates, and
//! the constant-pressure adiabatic reactor right-hand side.

use super::thermo::{cp_from, h_from, s_from};
use super::{
    CompositionVector, KineticsError, Mechanism, ReactionSpec, P_ATM, R_UNIVERSAL,
};
use crate::dense::DenseMatrix;

/// Forward rate constant in the mechanism-file unit convention
/// (mol, cm3, s): `k_f = A T^b exp(-Ea/(R_cal T))`.
pub fn rate_constant(r: &ReactionSpec, t: f64) -> f64 {
    assert!(t > 0.0, "temperature must be positive");
    r.a_input * t.powf(r.b) * (-r.t_act / t).exp()
}

/// Reverse rate constant from thermodynamic reversibility,
/// `k_r = k_f / K_c`, in the same unit convention as the `k_f` passed in
/// (mol-cm3 rate-law units).
pub fn reverse_rate_constant(m: &Mechanism, r: &ReactionSpec, t: f64, k_f: f64) -> Result<f64, KineticsError> {
    assert!(r.reversible, "reverse rate of an irreversible reaction");
    let mut h = vec![0.0; m.n_species()];
    let mut s = vec![0.0; m.n_species()];
    thermo_tables(m, t, None, &mut h, &mut s, None)?;
    // standard-state concentration in mol/cm3
    let c0 = P_ATM / (R_UNIVERSAL * t) * 1e-3;
    Ok(k_f / equilibrium_kc(r, t, &h, &s, c0))
}

/// K_c for a reaction given per-species molar enthalpies/entropies and the
/// standard-state concentration `c0` (in whatever concentration unit the
/// caller works in).
pub(crate) fn equilibrium_kc(r: &ReactionSpec, t: f64, h: &[f64], s: &[f64], c0: f64) -> f64 {
    let mut ds = 0.0;
    let mut dh = 0.0;
    for &(i, n) in &r.products {
        ds += n as f64 * s[i];
        dh += n as f64 * h[i];
    }
    for &(i, n) in &r.reactants {
        ds -= n as f64 * s[i];
        dh -= n as f64 * h[i];
    }
    let kp = (ds / R_UNIVERSAL - dh / (R_UNIVERSAL * t)).exp();
    kp * c0.powi(r.delta_nu)
}

/// Scratch buffers reused across evaluations so the integrator's inner
/// loop allocates nothing.
#[derive(Debug, Clone)]
pub struct RateWorkspace {
    pub(crate) yfull: Vec<f64>,
    pub(crate) conc: Vec<f64>,
    pub(crate) cp: Vec<f64>,
    pub(crate) h: Vec<f64>,
    pub(crate) s: Vec<f64>,
    pub(crate) dcp: Vec<f64>,
    pub(crate) wdot: Vec<f64>,
    // Jacobian accumulation
    pub(crate) dwdot_dc: DenseMatrix,
    pub(crate) dwdot_dt: Vec<f64>,
    pub(crate) drho_dy: Vec<f64>,
    pub(crate) dclip: Vec<f64>,
    pub(crate) dq_dc: Vec<f64>,
    pub(crate) chain_u: Vec<f64>,
}

impl RateWorkspace {
    pub fn new(m: &Mechanism) -> Self {
        let n = m.n_species();
        RateWorkspace {
            yfull: vec![0.0; n],
            conc: vec![0.0; n],
            cp: vec![0.0; n],
            h: vec![0.0; n],
            s: vec![0.0; n],
            dcp: vec![0.0; n],
            wdot: vec![0.0; n],
            dwdot_dc: DenseMatrix::zeros(n),
            dwdot_dt: vec![0.0; n],
            drho_dy: vec![0.0; n.saturating_sub(1)],
            dclip: vec![0.0; n],
            dq_dc: vec![0.0; n],
            chain_u: vec![0.0; n],
        }
    }
}

/// Fill per-species thermo tables at temperature `t`. Any of the output
/// slices may be skipped by passing `None`.
pub(crate) fn thermo_tables(
    m: &Mechanism,
    t: f64,
    mut cp: Option<&mut [f64]>,
    h: &mut [f64],
    s: &mut [f64],
    mut dcp: Option<&mut [f64]>,
) -> Result<(), KineticsError> {
    for (i, sp) in m.species.iter().enumerate() {
        let p = &sp.thermo;
        if t < p.t_low || t > p.t_high {
            return Err(KineticsError::TemperatureOutOfRange {
                species: sp.name.clone(),
                t,
                t_low: p.t_low,
                t_high: p.t_high,
            });
        }
        let a = p.coeffs(t);
        h[i] = h_from(a, t);
        s[i] = s_from(a, t);
        if let Some(cp) = cp.as_deref_mut() {
            cp[i] = cp_from(a, t);
        }
        if let Some(dcp) = dcp.as_deref_mut() {
            dcp[i] = super::thermo::dcp_dt_from(a, t);
        }
    }
    Ok(())
}

/// Mixture density and species concentrations from a raw state slice.
///
/// Negative stored mass fractions are clipped to zero for the
/// concentration evaluation only; `dclip` records which components were
/// clipped (0 there, 1 elsewhere) for the Jacobian chain rule.
pub(crate) fn concentrations(m: &Mechanism, state: &[f64], p: f64, ws: &mut RateWorkspace) -> f64 {
    let n = m.n_species();
    let t = state[0];
    let mut sum = 0.0;
    for i in 0..n - 1 {
        ws.yfull[i] = state[1 + i];
        sum += state[1 + i];
    }
    ws.yfull[n - 1] = 1.0 - sum;
    let mut s_sum = 0.0;
    for i in 0..n {
        let yc = ws.yfull[i].max(0.0);
        ws.dclip[i] = if ws.yfull[i] < 0.0 { 0.0 } else { 1.0 };
        ws.conc[i] = yc / m.species[i].molecular_weight;
        s_sum += ws.conc[i];
    }
    let rho = p / (R_UNIVERSAL * t * s_sum);
    for c in ws.conc.iter_mut() {
        *c *= rho;
    }
    rho
}

#[inline]
fn powu(x: f64, n: u32) -> f64 {
    match n {
        1 => x,
        2 => x * x,
        _ => x.powi(n as i32),
    }
}

/// Net rate of progress for one reaction at the given concentrations,
/// including the third-body factor. Returns (Q, q_net, m_factor, kf, kr).
pub(crate) fn rate_of_progress(
    r: &ReactionSpec,
    t: f64,
    conc: &[f64],
    h: &[f64],
    s: &[f64],
) -> (f64, f64, f64, f64, f64) {
    let kf = r.a_si * t.powf(r.b) * (-r.t_act / t).exp();
    let kr = if r.reversible {
        let c0 = P_ATM / (R_UNIVERSAL * t);
        kf / equilibrium_kc(r, t, h, s, c0)
    } else {
        0.0
    };
    let mut qf = kf;
    for &(i, n) in &r.reactants {
        qf *= powu(conc[i], n);
    }
    let mut qr = kr;
    if r.reversible {
        for &(i, n) in &r.products {
            qr *= powu(conc[i], n);
        }
    } else {
        qr = 0.0;
    }
    let m_factor = match &r.third_body {
        Some(eff) => eff.iter().zip(conc).map(|(e, c)| e * c).sum(),
        None => 1.0,
    };
    let q_net = qf - qr;
    (m_factor * q_net, q_net, m_factor, kf, kr)
}

/// Molar production rates into `ws.wdot`, kmol/(m3 s). Returns density.
pub(crate) fn production_rates_state(
    m: &Mechanism,
    state: &[f64],
    p: f64,
    ws: &mut RateWorkspace,
) -> Result<f64, KineticsError> {
    let t = state[0];
    if !(t > 0.0) {
        return Err(KineticsError::Invalid(format!("non-positive temperature {t}")));
    }
    let rho = concentrations(m, state, p, ws);
    let needs_thermo = m.reactions.iter().any(|r| r.reversible);
    if needs_thermo {
        let RateWorkspace { h, s, .. } = ws;
        thermo_tables(m, t, None, h, s, None)?;
    }
    ws.wdot.fill(0.0);
    for r in &m.reactions {
        let (q, _, _, _, _) = rate_of_progress(r, t, &ws.conc, &ws.h, &ws.s);
        for &(i, n) in &r.products {
            ws.wdot[i] += n as f64 * q;
        }
        for &(i, n) in &r.reactants {
            ws.wdot[i] -= n as f64 * q;
        }
    }
    Ok(rho)
}

/// Molar production rate per species, kmol/(m3 s).
pub fn production_rates(
    m: &Mechanism,
    phi: &CompositionVector,
    p: f64,
) -> Result<Vec<f64>, KineticsError> {
    let mut ws = RateWorkspace::new(m);
    production_rates_state(m, &phi.to_state(), p, &mut ws)?;
    Ok(ws.wdot.clone())
}

/// Right-hand side of the constant-pressure reactor ODE in the state
/// layout `[T, Y_1..Y_{N-1}]`; writes into `out`.
pub(crate) fn rhs_state(
    m: &Mechanism,
    state: &[f64],
    p: f64,
    ws: &mut RateWorkspace,
    out: &mut [f64],
) -> Result<(), KineticsError> {
    let n = m.n_species();
    let t = state[0];
    let rho = production_rates_state(m, state, p, ws)?;
    {
        let RateWorkspace { cp, h, s, .. } = ws;
        thermo_tables(m, t, Some(cp), h, s, None)?;
    }
    let mut cp_mass = 0.0;
    let mut heat = 0.0;
    for i in 0..n {
        cp_mass += ws.yfull[i] * ws.cp[i] / m.species[i].molecular_weight;
        heat += ws.h[i] * ws.wdot[i];
    }
    out[0] = -heat / (rho * cp_mass);
    for i in 0..n - 1 {
        out[1 + i] = ws.wdot[i] * m.species[i].molecular_weight / rho;
    }
    Ok(())
}

/// Time derivative of the composition vector: `dT/dt` followed by
/// `dY_i/dt` for the stored species.
pub fn rhs(m: &Mechanism, phi: &CompositionVector, p: f64) -> Result<Vec<f64>, KineticsError> {
    let mut ws = RateWorkspace::new(m);
    let mut out = vec![0.0; m.state_dim()];
    rhs_state(m, &phi.to_state(), p, &mut ws, &mut out)?;
    Ok(out)
}
