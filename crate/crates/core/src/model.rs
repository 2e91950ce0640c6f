//! Population state and single-step dynamics.
//!
//! Sites are 0-based here; site 0 is the initial mutant. Anything written to
//! disk or printed for a user is 1-based.
//!
//! One step: mother and father are drawn independently and uniformly from all
//! `N` sites, the dying site is drawn uniformly from the non-advantaged sites.
//! Parents may coincide with each other and with the dying site. The offspring
//! inherits the selected allele from the mother, so the population gains a
//! carrier exactly when the mother is advantaged. At the neutral locus the
//! offspring's ancestral weight is the mean of its parents' weights, taken
//! before the replacement.

use rand::Rng;

use crate::error::{Error, Result};

/// Largest `N` for which the full `N×N` ancestry matrix may be tracked.
pub const DEFAULT_FULL_MATRIX_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationConfig {
    pub size: usize,
    pub full_matrix_mode: bool,
    pub full_matrix_limit: usize,
    pub max_steps: u64,
}

impl PopulationConfig {
    /// Weights-only configuration with the default step cap.
    pub fn new(size: usize) -> Self {
        Self {
            size,
            full_matrix_mode: false,
            full_matrix_limit: DEFAULT_FULL_MATRIX_LIMIT,
            max_steps: default_max_steps(size),
        }
    }

    pub fn with_full_matrix(mut self, on: bool) -> Self {
        self.full_matrix_mode = on;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::InvalidConfig(format!(
                "population size must be at least 2, got {}",
                self.size
            )));
        }
        if self.full_matrix_mode && self.size > self.full_matrix_limit {
            return Err(Error::InvalidConfig(format!(
                "full matrix mode needs N <= {}, got {}",
                self.full_matrix_limit, self.size
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// `50·N·ln N + 1000`. The expected fixation time is `Σ_{k<N} N/k ≈ N ln N`.
pub fn default_max_steps(size: usize) -> u64 {
    let n = size.max(1) as f64;
    (50.0 * n * n.ln()).ceil() as u64 + 1000
}

/// One reproduction event, as 0-based site indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepEvent {
    pub mother: usize,
    pub father: usize,
    pub killed: usize,
}

impl StepEvent {
    pub fn new(mother: usize, father: usize, killed: usize) -> Self {
        Self {
            mother,
            father,
            killed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    time: u64,
    advantaged: Vec<bool>,
    /// Non-advantaged sites, unordered; `slot[i]` is the position of site `i`
    /// in this list (meaningless for advantaged sites).
    disadvantaged: Vec<usize>,
    slot: Vec<usize>,
    /// `weight1[i] = A_n(i, 1)`.
    weight1: Vec<f64>,
    /// Row-major `A_n`, present in full matrix mode.
    weights_full: Option<Vec<f64>>,
}

impl PopulationState {
    pub fn new(config: &PopulationConfig) -> Result<Self> {
        config.validate()?;
        let n = config.size;
        let mut advantaged = vec![false; n];
        advantaged[0] = true;
        let mut weight1 = vec![0.0; n];
        weight1[0] = 1.0;
        let weights_full = config.full_matrix_mode.then(|| {
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                a[i * n + i] = 1.0;
            }
            a
        });
        Ok(Self {
            time: 0,
            advantaged,
            disadvantaged: (1..n).collect(),
            slot: (0..n).map(|i| i.saturating_sub(1)).collect(),
            weight1,
            weights_full,
        })
    }

    /// Builds an arbitrary state, for conditional-step experiments and tests.
    ///
    /// `advantaged` must contain site 0's flag like any other; no relation to
    /// reachability from the initial state is checked.
    pub fn from_parts(advantaged: Vec<bool>, weight1: Vec<f64>) -> Result<Self> {
        let n = advantaged.len();
        if n < 2 || weight1.len() != n {
            return Err(Error::InvalidConfig(format!(
                "need matching lengths >= 2, got {} flags and {} weights",
                n,
                weight1.len()
            )));
        }
        if !advantaged.iter().any(|&a| a) {
            return Err(Error::InvalidConfig("at least one site must be advantaged".into()));
        }
        if let Some(w) = weight1.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidConfig(format!("weight {w} outside [0, 1]")));
        }
        let mut slot = vec![0; n];
        let mut disadvantaged = Vec::new();
        for (i, &adv) in advantaged.iter().enumerate() {
            if !adv {
                slot[i] = disadvantaged.len();
                disadvantaged.push(i);
            }
        }
        Ok(Self {
            time: 0,
            advantaged,
            disadvantaged,
            slot,
            weight1,
            weights_full: None,
        })
    }

    pub fn size(&self) -> usize {
        self.advantaged.len()
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// `Y_n`, the number of advantaged sites.
    pub fn n_advantaged(&self) -> usize {
        self.size() - self.disadvantaged.len()
    }

    pub fn is_fixed(&self) -> bool {
        self.disadvantaged.is_empty()
    }

    pub fn is_advantaged(&self, site: usize) -> bool {
        self.advantaged[site]
    }

    pub fn advantaged(&self) -> &[bool] {
        &self.advantaged
    }

    pub fn weight1(&self) -> &[f64] {
        &self.weight1
    }

    /// Row-major `N×N` ancestry matrix, if tracked.
    pub fn weights_full(&self) -> Option<&[f64]> {
        self.weights_full.as_deref()
    }

    /// `M_n(1)`: total weight of the initial mutant.
    pub fn total_weight(&self) -> f64 {
        self.weight1.iter().sum()
    }

    /// Draws mother, father, then the dying site, in that order.
    pub fn sample_step<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<StepEvent> {
        if self.is_fixed() {
            return Err(Error::Fixated { size: self.size() });
        }
        let n = self.size();
        let mother = rng.random_range(0..n);
        let father = rng.random_range(0..n);
        let killed = self.disadvantaged[rng.random_range(0..self.disadvantaged.len())];
        Ok(StepEvent {
            mother,
            father,
            killed,
        })
    }

    /// Applies `event`, returning whether `Y` jumped.
    pub fn apply_step(&mut self, event: StepEvent) -> Result<bool> {
        let n = self.size();
        let StepEvent {
            mother,
            father,
            killed,
        } = event;
        if mother >= n || father >= n || killed >= n {
            return Err(Error::InconsistentEvent(format!(
                "site out of range in {event:?} for N = {n}"
            )));
        }
        if self.advantaged[killed] {
            return Err(Error::InconsistentEvent(format!(
                "site {} is advantaged and cannot die",
                killed + 1
            )));
        }

        self.weight1[killed] = 0.5 * (self.weight1[mother] + self.weight1[father]);

        if let Some(a) = self.weights_full.as_mut() {
            let row: Vec<f64> = (0..n)
                .map(|j| 0.5 * (a[mother * n + j] + a[father * n + j]))
                .collect();
            a[killed * n..(killed + 1) * n].copy_from_slice(&row);
        }

        let jumped = self.advantaged[mother];
        if jumped {
            self.promote(killed);
        }
        self.time += 1;
        Ok(jumped)
    }

    fn promote(&mut self, site: usize) {
        self.advantaged[site] = true;
        let pos = self.slot[site];
        self.disadvantaged.swap_remove(pos);
        if let Some(&moved) = self.disadvantaged.get(pos) {
            self.slot[moved] = pos;
        }
    }

    /// `(B, C)`: weight of the mutant among advantaged and non-advantaged sites.
    pub fn weight_split(&self) -> (f64, f64) {
        self.weight1
            .iter()
            .zip(&self.advantaged)
            .fold((0.0, 0.0), |(b, c), (&w, &adv)| {
                if adv {
                    (b + w, c)
                } else {
                    (b, c + w)
                }
            })
    }
}
