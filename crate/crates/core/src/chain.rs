//! Lazy random local-move chain on coverings.
//!
//! Each step proposes a site uniformly from the site list and applies the
//! move if it is applicable, otherwise holds. Moves are involutions and the
//! proposal is symmetric, so the uniform law on coverings is stationary.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covering::{enumerate, Covering};
use crate::lattice::{EdgeId, Lattice};
use crate::moves::{apply_in_place, list_sites, MoveSite};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("the lattice has no dimer covering")]
    NoCovering,
    #[error("the lattice has no move sites")]
    NoSites,
}

/// The first covering in enumeration order.
pub fn default_start(lat: &Lattice) -> Result<Covering, ChainError> {
    enumerate(lat).next().ok_or(ChainError::NoCovering)
}

pub struct ChainState<'a> {
    lat: &'a Lattice,
    sites: Vec<MoveSite>,
    current: Covering,
    rng: ChaCha8Rng,
    steps: u64,
}

impl<'a> ChainState<'a> {
    /// A chain over all move sites. `stream` separates chains that share a
    /// seed.
    pub fn new(lat: &'a Lattice, start: Covering, seed: u64, stream: u64) -> Result<Self, ChainError> {
        Self::with_sites(lat, list_sites(lat), start, seed, stream)
    }

    pub fn with_sites(
        lat: &'a Lattice,
        sites: Vec<MoveSite>,
        start: Covering,
        seed: u64,
        stream: u64,
    ) -> Result<Self, ChainError> {
        if sites.is_empty() {
            return Err(ChainError::NoSites);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(ChainState {
            lat,
            sites,
            current: start,
            rng,
            steps: 0,
        })
    }

    pub fn current(&self) -> &Covering {
        &self.current
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn sites(&self) -> &[MoveSite] {
        &self.sites
    }

    /// One proposal. Returns whether the state changed.
    pub fn step(&mut self) -> bool {
        let i = self.rng.gen_range(0..self.sites.len());
        self.steps += 1;
        let moved = apply_in_place(self.lat, &mut self.current, &self.sites[i]).expect("site of this lattice");
        debug_assert_eq!(
            self.current.impurities(self.lat).len(),
            self.lat.impurity_budget().unwrap_or(0)
        );
        moved
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Runs `burnin` steps, records the state, then records again after
    /// every further `thin` steps until `count` states are held.
    pub fn sample(&mut self, burnin: u64, thin: u64, count: usize) -> Vec<Covering> {
        let mut out = Vec::with_capacity(count);
        self.for_each_sample(burnin, thin, count, |c| out.push(c.clone()));
        out
    }

    pub fn for_each_sample(&mut self, burnin: u64, thin: u64, count: usize, mut f: impl FnMut(&Covering)) {
        self.run(burnin);
        for i in 0..count {
            if i > 0 {
                self.run(thin);
            }
            f(&self.current);
        }
    }

    /// Impurity heat map of the samples, without storing them.
    pub fn heatmap(&mut self, burnin: u64, thin: u64, count: usize) -> HeatMap {
        let lat = self.lat;
        let mut map = HeatMap::default();
        self.for_each_sample(burnin, thin, count, |c| map.record(lat, c));
        map
    }
}

/// Per-edge impurity hit counts over a set of samples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeatMap {
    pub hits: BTreeMap<EdgeId, u64>,
    pub samples: u64,
}

impl HeatMap {
    pub fn record(&mut self, lat: &Lattice, cov: &Covering) {
        for e in cov.impurities(lat) {
            *self.hits.entry(e).or_insert(0) += 1;
        }
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &HeatMap) {
        for (&e, &h) in &other.hits {
            *self.hits.entry(e).or_insert(0) += h;
        }
        self.samples += other.samples;
    }

    pub fn frequency(&self, e: EdgeId) -> BigRational {
        let h = self.hits.get(&e).copied().unwrap_or(0);
        BigRational::new(h.into(), self.samples.max(1).into())
    }

    pub fn frequency_f64(&self, e: EdgeId) -> f64 {
        self.hits.get(&e).copied().unwrap_or(0) as f64 / self.samples.max(1) as f64
    }

    /// Sum of all frequencies: the mean impurity count per sample.
    pub fn total_frequency(&self) -> BigRational {
        let h: u64 = self.hits.values().sum();
        BigRational::new(h.into(), self.samples.max(1).into())
    }
}

pub fn heatmap(lat: &Lattice, samples: &[Covering]) -> HeatMap {
    let mut map = HeatMap::default();
    for c in samples {
        map.record(lat, c);
    }
    map
}

/// Total variation distance between the empirical law of `samples` and the
/// uniform law on `states` states.
pub fn tv_to_uniform(samples: &[Covering], states: usize) -> f64 {
    let mut counts: BTreeMap<&Covering, u64> = BTreeMap::new();
    for c in samples {
        *counts.entry(c).or_insert(0) += 1;
    }
    let n = samples.len() as f64;
    let u = 1.0 / states as f64;
    let seen: f64 = counts.values().map(|&c| libm::fabs(c as f64 / n - u)).sum();
    let unseen = states.saturating_sub(counts.len()) as f64 * u;
    (seen + unseen) / 2.0
}
