//! Latent manuscript quality: a positively skewed gamma distribution whose
//! upper tail is calibrated so the expected number of high-quality
//! manuscripts per batch stays fixed while the batch size varies.

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01, StandardNormal};
use thiserror::Error;

use crate::market::JournalId;
use crate::numeric::{bisect, reg_lower_gamma, reg_upper_gamma};
use crate::rng::Stream;
use crate::Real;

/// Shape values are searched on a log grid inside this bracket.
const SHAPE_LO: f64 = 1e-3;
const SHAPE_CAP: f64 = 1e6;
const GRID_POINTS: usize = 240;
const MAX_BISECT_ITER: usize = 200;
const TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("mean must be positive and finite, got {0}")]
    InvalidMean(f64),
    #[error("shape must be positive and finite, got {0}")]
    InvalidShape(f64),
    #[error("threshold ({threshold}) must exceed the mean ({mean}); the high-quality tail is a minority")]
    ThresholdNotAboveMean { threshold: f64, mean: f64 },
    #[error("target high-quality count must be positive")]
    DegenerateTarget,
    #[error("batch size must be positive")]
    EmptyBatch,
    #[error(
        "requested tail mass {requested:.6} is not achievable; feasible range is (0, {max_achievable:.6}) \
         for this mean/threshold pair"
    )]
    InfeasibleTail { requested: f64, max_achievable: f64 },
    #[error("calibrated shape would exceed the cap {cap:e}")]
    ShapeCapExceeded { cap: f64 },
    #[error("bisection left residual {residual:e} above tolerance {tolerance:e}")]
    NoConvergence { residual: f64, tolerance: f64 },
}

/// Gamma quality distribution with a calibration record.
///
/// Invariant: `shape * scale == mean` (the mean is held fixed and the shape
/// carries all the calibration freedom).
#[derive(Debug, Clone, PartialEq)]
pub struct QualityDistribution<F> {
    mean: F,
    shape: F,
    scale: F,
    high_quality_threshold: F,
    target_high_count: u32,
}

impl<F: Float> QualityDistribution<F> {
    /// Direct constructor for a known shape; used by tests and diagnostics.
    pub fn with_mean_shape(
        mean: F,
        shape: F,
        high_quality_threshold: F,
        target_high_count: u32,
    ) -> Result<Self, CalibrationError> {
        if !(mean.is_finite() && mean > F::zero()) {
            return Err(CalibrationError::InvalidMean(mean.to_f64().unwrap_or(f64::NAN)));
        }
        if !(shape.is_finite() && shape > F::zero()) {
            return Err(CalibrationError::InvalidShape(shape.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self {
            mean,
            shape,
            scale: mean / shape,
            high_quality_threshold,
            target_high_count,
        })
    }

    /// Solve for the gamma shape (at fixed mean) whose tail mass above
    /// `threshold` equals `target_high_count / n`.
    ///
    /// The tail is unimodal in the shape: it peaks at a small shape and then
    /// decreases strictly. The root is taken on the decreasing branch, which
    /// is the branch the fixed-count construction calls for (larger shape,
    /// milder skew); a second root can exist at extreme skew below the peak.
    pub fn calibrate(
        mean: F,
        target_high_count: u32,
        n: u32,
        threshold: F,
    ) -> Result<Self, CalibrationError> {
        if !(mean.is_finite() && mean > F::zero()) {
            return Err(CalibrationError::InvalidMean(mean.to_f64().unwrap_or(f64::NAN)));
        }
        if target_high_count == 0 {
            return Err(CalibrationError::DegenerateTarget);
        }
        if n == 0 {
            return Err(CalibrationError::EmptyBatch);
        }
        if !threshold.is_finite() || threshold <= mean {
            return Err(CalibrationError::ThresholdNotAboveMean {
                threshold: threshold.to_f64().unwrap_or(f64::NAN),
                mean: mean.to_f64().unwrap_or(f64::NAN),
            });
        }
        let p_star = F::from(target_high_count).unwrap() / F::from(n).unwrap();
        let tail_at = |shape: F| -> F { reg_upper_gamma(shape, shape * threshold / mean) };

        // Log-grid scan for the peak of the tail over the full bracket.
        let lo = F::from(SHAPE_LO).unwrap();
        let cap = F::from(SHAPE_CAP).unwrap();
        let ratio = (cap / lo).ln() / F::from((GRID_POINTS - 1) as f64).unwrap();
        let mut peak_idx = 0usize;
        let mut peak_tail = F::neg_infinity();
        let grid: Vec<F> = (0..GRID_POINTS)
            .map(|i| lo * (ratio * F::from(i as f64).unwrap()).exp())
            .collect();
        for (i, &k) in grid.iter().enumerate() {
            let t = tail_at(k);
            if t > peak_tail {
                peak_tail = t;
                peak_idx = i;
            }
        }
        // Sharpen the peak by ternary search between its grid neighbours.
        let mut a = grid[peak_idx.saturating_sub(1)];
        let mut b = grid[(peak_idx + 1).min(GRID_POINTS - 1)];
        for _ in 0..80 {
            let third = (b - a) / F::from(3.0).unwrap();
            let m1 = a + third;
            let m2 = b - third;
            if tail_at(m1) < tail_at(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        let peak_shape = (a + b) / F::from(2.0).unwrap();
        let max_tail = tail_at(peak_shape).max(peak_tail);

        let half = F::from(0.5).unwrap();
        let feasible_max = max_tail.min(half);
        if p_star >= feasible_max {
            return Err(CalibrationError::InfeasibleTail {
                requested: p_star.to_f64().unwrap_or(f64::NAN),
                max_achievable: feasible_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        if tail_at(cap) >= p_star {
            return Err(CalibrationError::ShapeCapExceeded { cap: SHAPE_CAP });
        }

        let shape = bisect(peak_shape, cap, MAX_BISECT_ITER, |k| tail_at(k) - p_star);
        let residual = (tail_at(shape) - p_star).abs().to_f64().unwrap_or(f64::NAN);
        if residual >= TAIL_TOLERANCE {
            return Err(CalibrationError::NoConvergence {
                residual,
                tolerance: TAIL_TOLERANCE,
            });
        }
        Ok(Self {
            mean,
            shape,
            scale: mean / shape,
            high_quality_threshold: threshold,
            target_high_count,
        })
    }

    pub fn mean(&self) -> F {
        self.mean
    }

    pub fn shape(&self) -> F {
        self.shape
    }

    pub fn scale(&self) -> F {
        self.scale
    }

    pub fn high_quality_threshold(&self) -> F {
        self.high_quality_threshold
    }

    pub fn target_high_count(&self) -> u32 {
        self.target_high_count
    }

    pub fn std_dev(&self) -> F {
        self.shape.sqrt() * self.scale
    }

    /// Gamma skewness 2/√shape; positive for every valid shape.
    pub fn skewness(&self) -> F {
        F::from(2.0).unwrap() / self.shape.sqrt()
    }

    /// Upper tail mass P(q ≥ threshold); 1 at or below zero, monotone
    /// non-increasing in the threshold.
    pub fn tail_mass(&self, threshold: F) -> F {
        if threshold <= F::zero() {
            return F::one();
        }
        reg_upper_gamma(self.shape, threshold / self.scale)
    }

    pub fn cdf(&self, x: F) -> F {
        if x <= F::zero() {
            return F::zero();
        }
        reg_lower_gamma(self.shape, x / self.scale)
    }

    pub fn pdf(&self, x: F) -> F {
        if x <= F::zero() {
            return F::zero();
        }
        let k = self.shape;
        let log_pdf = (k - F::one()) * x.ln() - x / self.scale
            - crate::numeric::ln_gamma(k)
            - k * self.scale.ln();
        log_pdf.exp()
    }

    /// Inverse CDF by bisection; `p` must lie in [0, 1).
    pub fn quantile(&self, p: F) -> F {
        assert!(p >= F::zero() && p < F::one(), "quantile needs p in [0, 1)");
        if p == F::zero() {
            return F::zero();
        }
        // Expand the upper bound until it covers p.
        let mut hi = self.mean + self.std_dev() * F::from(8.0).unwrap();
        while self.cdf(hi) <= p {
            hi = hi * F::from(2.0).unwrap();
        }
        bisect(F::zero(), hi, MAX_BISECT_ITER, |x| self.cdf(x) - p)
    }
}

impl<F> QualityDistribution<F>
where
    F: Float,
    StandardNormal: Distribution<F>,
    Exp1: Distribution<F>,
    Open01: Distribution<F>,
{
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        Gamma::new(self.shape, self.scale)
            .expect("validated parameters")
            .sample(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ManuscriptId(pub u64);

impl std::fmt::Display for ManuscriptId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "m{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManuscriptState {
    Pending,
    UnderReview,
    Accepted,
    Abandoned,
}

/// One unit of work flowing through the pipeline.
#[derive(Debug, Clone)]
pub struct Manuscript {
    pub id: ManuscriptId,
    pub true_quality: Real,
    /// Refreshed every round before targeting; 0 until first estimated.
    pub author_estimate: Real,
    pub rejection_count: u32,
    pub rejected_by: Vec<JournalId>,
    pub state: ManuscriptState,
    pub accepted_by: Option<JournalId>,
    pub birth_round: u32,
}

impl Manuscript {
    pub fn new(id: ManuscriptId, true_quality: Real, birth_round: u32) -> Self {
        Self {
            id,
            true_quality,
            author_estimate: 0.0,
            rejection_count: 0,
            rejected_by: Vec::new(),
            state: ManuscriptState::Pending,
            accepted_by: None,
            birth_round,
        }
    }
}

/// Draw a fresh batch of `n` pending manuscripts. Ids are allocated from
/// `next_id`, so they are globally unique and monotone in creation order.
pub fn generate_manuscripts(
    dist: &QualityDistribution<Real>,
    n: u32,
    round: u32,
    next_id: &mut u64,
    rng: &mut Stream,
) -> Vec<Manuscript> {
    let gamma = Gamma::new(dist.shape(), dist.scale()).expect("validated parameters");
    (0..n)
        .map(|_| {
            let id = ManuscriptId(*next_id);
            *next_id += 1;
            Manuscript::new(id, gamma.sample(rng), round)
        })
        .collect()
}
