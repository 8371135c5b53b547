//! The two noisy quality estimations: author self-assessment used for
//! journal targeting, and referee review whose precision degrades with the
//! referee's per-round workload.

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use thiserror::Error;

use crate::rng::Stream;
use crate::Real;

pub const DEFAULT_Q_FLOOR: f64 = 0.1;
pub const DEFAULT_REFEREES_PER_MANUSCRIPT: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActorError {
    #[error("referee pool of size {size} cannot supply {required} distinct referees")]
    PoolTooSmall { size: usize, required: usize },
}

/// Author estimation noise: multiplicative Gaussian with mean 1 and variance
/// `alpha / max(q, q_floor)^lambda`. `alpha == 0` switches noise off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationParams<F> {
    pub alpha: F,
    pub lambda: F,
    /// Variance clamp: below this quality the variance stops growing.
    pub q_floor: F,
}

impl<F: Float> EstimationParams<F> {
    pub fn new(alpha: F, lambda: F, q_floor: F) -> Self {
        debug_assert!(alpha >= F::zero() && lambda >= F::zero() && q_floor > F::zero());
        Self { alpha, lambda, q_floor }
    }

    /// Noise variance at quality `q`; strictly decreasing in `q` above the floor.
    pub fn variance(&self, q: F) -> F {
        self.alpha / q.max(self.q_floor).powf(self.lambda)
    }
}

/// Review noise: multiplicative Gaussian with mean 1 and variance
/// `beta * k^gamma` for a referee currently holding `k` assignments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReviewParams<F> {
    pub beta: F,
    pub gamma_exp: F,
    pub referees_per_manuscript: usize,
}

impl<F: Float> ReviewParams<F> {
    pub fn new(beta: F, gamma_exp: F, referees_per_manuscript: usize) -> Self {
        debug_assert!(beta >= F::zero() && gamma_exp > F::zero() && referees_per_manuscript >= 1);
        Self { beta, gamma_exp, referees_per_manuscript }
    }

    /// Noise variance at load `k`; strictly increasing in `k` when `beta > 0`.
    pub fn variance(&self, load: u32) -> F {
        self.beta * F::from(load).unwrap().powf(self.gamma_exp)
    }
}

/// Author's noisy self-estimate of a manuscript's quality, clamped at zero.
pub fn estimate_quality<F>(true_quality: F, params: &EstimationParams<F>, rng: &mut Stream) -> F
where
    F: Float,
    StandardNormal: Distribution<F>,
{
    if params.alpha == F::zero() {
        return true_quality;
    }
    let sigma = params.variance(true_quality).sqrt();
    let noise = Normal::new(F::one(), sigma).expect("finite sigma").sample(rng);
    (true_quality * noise).max(F::zero())
}

/// Referee workload counters for the current round.
#[derive(Debug, Clone)]
pub struct RefereePool {
    loads: Vec<u32>,
}

impl RefereePool {
    pub fn new(size: usize) -> Self {
        Self { loads: vec![0; size] }
    }

    pub fn size(&self) -> usize {
        self.loads.len()
    }

    pub fn loads(&self) -> &[u32] {
        &self.loads
    }

    pub fn load(&self, referee: usize) -> u32 {
        self.loads[referee]
    }

    /// Loads count assignments within the current round only.
    pub fn reset(&mut self) {
        self.loads.iter_mut().for_each(|l| *l = 0);
    }
}

/// Draw a distinct referee panel per manuscript, uniformly without
/// replacement, incrementing each chosen referee's load. Panels are drawn in
/// list order, so identical streams reproduce identical assignments.
pub fn assign_referees(
    pool: &mut RefereePool,
    manuscript_count: usize,
    referees_per_manuscript: usize,
    rng: &mut Stream,
) -> Result<Vec<Vec<usize>>, ActorError> {
    let size = pool.size();
    if size < referees_per_manuscript {
        return Err(ActorError::PoolTooSmall { size, required: referees_per_manuscript });
    }
    let mut panels = Vec::with_capacity(manuscript_count);
    for _ in 0..manuscript_count {
        let mut panel: Vec<usize> = Vec::with_capacity(referees_per_manuscript);
        while panel.len() < referees_per_manuscript {
            let candidate = rng.random_range(0..size);
            if !panel.contains(&candidate) {
                panel.push(candidate);
            }
        }
        for &r in &panel {
            pool.loads[r] += 1;
        }
        panels.push(panel);
    }
    Ok(panels)
}

/// Scores reported by the two referees of one manuscript.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReviewScores {
    pub score_1: Real,
    pub score_2: Real,
    /// Arithmetic mean of the two scores; the journal ranks on this.
    pub aggregate: Real,
    pub referee_1: usize,
    pub referee_2: usize,
}

/// Two independent noisy reviews of one manuscript. `loads` must already
/// include the current assignment (each k ≥ 1).
pub fn review_manuscript(
    true_quality: Real,
    referees: (usize, usize),
    loads: (u32, u32),
    params: &ReviewParams<Real>,
    rng: &mut Stream,
) -> ReviewScores {
    debug_assert!(loads.0 >= 1 && loads.1 >= 1);
    let mut score = |load: u32| -> Real {
        if params.beta == 0.0 {
            return true_quality;
        }
        let sigma = params.variance(load).sqrt();
        let noise: Real = Normal::new(1.0, sigma).expect("finite sigma").sample(rng);
        (true_quality * noise).max(0.0)
    };
    let score_1 = score(loads.0);
    let score_2 = score(loads.1);
    ReviewScores {
        score_1,
        score_2,
        aggregate: 0.5 * (score_1 + score_2),
        referee_1: referees.0,
        referee_2: referees.1,
    }
}
