//! Rayon drivers for counting and for independent chains.

use num_bigint::BigUint;
use rayon::prelude::*;

use dimer_core::chain::{ChainError, ChainState, HeatMap};
use dimer_core::covering::{count_with, split_first_branch, Constraint, Covering};
use dimer_core::Lattice;

/// Splits the search tree until there are at least `target` subproblems or
/// no subproblem branches any more.
pub fn split(lat: &Lattice, root: Constraint, target: usize) -> Vec<Constraint> {
    let mut parts = vec![root];
    while parts.len() < target {
        let next: Vec<Constraint> = parts.iter().flat_map(|c| split_first_branch(lat, c)).collect();
        if next.len() <= parts.len() {
            return next;
        }
        parts = next;
    }
    parts
}

pub fn count_parallel(lat: &Lattice, constraint: Constraint) -> BigUint {
    let target = 4 * rayon::current_num_threads();
    split(lat, constraint, target)
        .par_iter()
        .map(|c| count_with(lat, c))
        .reduce(BigUint::default, |a, b| a + b)
}

pub struct ChainRun {
    pub samples: Vec<Covering>,
    pub heatmap: HeatMap,
}

#[derive(Clone, Copy, Debug)]
pub struct ChainPlan {
    pub seed: u64,
    pub burnin: u64,
    pub thin: u64,
    pub count: usize,
    pub keep: bool,
}

/// Runs `chains` chains on streams `0..chains` of one seed. Results are in
/// stream order.
pub fn run_chains(
    lat: &Lattice,
    start: &Covering,
    chains: usize,
    plan: ChainPlan,
) -> Result<Vec<ChainRun>, ChainError> {
    (0..chains as u64)
        .into_par_iter()
        .map(|stream| {
            let mut ch = ChainState::new(lat, start.clone(), plan.seed, stream)?;
            let mut heatmap = HeatMap::default();
            let mut samples = Vec::new();
            ch.for_each_sample(plan.burnin, plan.thin, plan.count, |c| {
                heatmap.record(lat, c);
                if plan.keep {
                    samples.push(c.clone());
                }
            });
            Ok(ChainRun { samples, heatmap })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dimer_core::build_rectangle;
    use dimer_core::chain::default_start;
    use dimer_core::covering::count_exact;

    #[test]
    fn split_counts_sum() {
        let lat = build_rectangle(3, 2).unwrap();
        let parts = split(&lat, Constraint::default(), 16);
        assert!(parts.len() >= 16);
        let total: BigUint = parts.iter().map(|c| count_with(&lat, c)).sum();
        assert_eq!(total, count_exact(&lat));
        assert_eq!(count_parallel(&lat, Constraint::default()), BigUint::from(160u32));
    }

    #[test]
    fn chains_are_ordered_and_repeatable() {
        let lat = build_rectangle(3, 2).unwrap();
        let start = default_start(&lat).unwrap();
        let plan = ChainPlan {
            seed: 9,
            burnin: 50,
            thin: 2,
            count: 20,
            keep: true,
        };
        let a = run_chains(&lat, &start, 3, plan).unwrap();
        let b = run_chains(&lat, &start, 3, plan).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.samples, y.samples);
            assert_eq!(x.heatmap, y.heatmap);
        }
        let solo = ChainState::new(&lat, start, 9, 1).unwrap().sample(50, 2, 20);
        assert_eq!(a[1].samples, solo);
    }
}
