//! Compute a redistribution plan for a skewed per-worker load and show
//! the estimated imbalance before and after the transfers.

use chembalance::balancer::{compute_plan, imbalance_ratio, LoadVector};

fn main() {
    // four workers; worker 1 owns an ignition front and is 6x busier
    let costs: Vec<Vec<(u64, f64)>> = vec![
        (0..8).map(|k| (k, 0.5)).collect(),
        {
            let mut v: Vec<(u64, f64)> = (100..108).map(|k| (k, 3.0)).collect();
            v.extend((108..112).map(|k| (k, 1.0)));
            v
        },
        (200..208).map(|k| (k, 0.4)).collect(),
        (300..308).map(|k| (k, 0.3)).collect(),
    ];
    let loads = LoadVector(costs.iter().map(|c| c.iter().map(|x| x.1).sum()).collect());
    println!("loads before: {:?}", loads.0);
    println!("imbalance before: {:.3}", imbalance_ratio(&loads.0));

    let plan = compute_plan(&loads, &costs);
    let mut after = loads.0.clone();
    for t in &plan.transfers {
        let moved: f64 = t
            .cells
            .iter()
            .map(|id| costs[t.from].iter().find(|c| c.0 == *id).unwrap().1)
            .sum();
        println!(
            "worker {} -> worker {}: cells {:?} ({:.1} cost units)",
            t.from, t.to, t.cells, moved
        );
        after[t.from] -= moved;
        after[t.to] += moved;
    }
    println!("loads after:  {:?}", after);
    println!("imbalance after:  {:.3}", imbalance_ratio(&after));
}
