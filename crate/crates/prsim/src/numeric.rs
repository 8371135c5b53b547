//! Scalar-generic numeric kernel: gamma special functions, root bracketing,
//! and the small set of statistics the simulator and its tests rely on.
//!
//! Everything here is generic over [`num_traits::Float`] so the same code
//! serves `f32` and `f64`; the crate root pins the concrete alias used by
//! the simulation.

use num_traits::Float;

/// Lanczos coefficients (g = 7, n = 9).
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn f<F: Float>(x: f64) -> F {
    F::from(x).expect("constant representable in scalar type")
}

/// Natural log of the gamma function, valid for `x > 0`.
pub fn ln_gamma<F: Float>(x: F) -> F {
    let half = f::<F>(0.5);
    let pi = f::<F>(std::f64::consts::PI);
    if x < half {
        // Reflection: ln Γ(x) = ln(π / sin(πx)) − ln Γ(1 − x)
        return (pi / (pi * x).sin()).ln() - ln_gamma(F::one() - x);
    }
    let x = x - F::one();
    let mut acc = f::<F>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + f::<F>(c) / (x + f::<F>(i as f64));
    }
    let g = f::<F>(7.5);
    let t = x + g;
    let ln_sqrt_two_pi = f::<F>(0.918_938_533_204_672_7);
    ln_sqrt_two_pi + (x + half) * t.ln() - t + acc.ln()
}

const MAX_SERIES_ITER: usize = 400;

/// Regularized lower incomplete gamma function P(a, x).
pub fn reg_lower_gamma<F: Float>(a: F, x: F) -> F {
    debug_assert!(a > F::zero() && x >= F::zero());
    if x == F::zero() {
        return F::zero();
    }
    if x < a + F::one() {
        lower_series(a, x)
    } else {
        F::one() - upper_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma function Q(a, x) = 1 − P(a, x).
pub fn reg_upper_gamma<F: Float>(a: F, x: F) -> F {
    debug_assert!(a > F::zero() && x >= F::zero());
    if x == F::zero() {
        return F::one();
    }
    if x < a + F::one() {
        F::one() - lower_series(a, x)
    } else {
        upper_continued_fraction(a, x)
    }
}

fn lower_series<F: Float>(a: F, x: F) -> F {
    let mut ap = a;
    let mut term = a.recip();
    let mut sum = term;
    for _ in 0..MAX_SERIES_ITER {
        ap = ap + F::one();
        term = term * x / ap;
        sum = sum + term;
        if term.abs() < sum.abs() * F::epsilon() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn upper_continued_fraction<F: Float>(a: F, x: F) -> F {
    let tiny = F::min_positive_value() / F::epsilon();
    let mut b = x + F::one() - a;
    let mut c = tiny.recip();
    let mut d = b.recip();
    let mut h = d;
    let mut i = F::one();
    for _ in 0..MAX_SERIES_ITER {
        let an = -i * (i - a);
        b = b + f::<F>(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let del = d * c;
        h = h * del;
        if (del - F::one()).abs() < F::epsilon() {
            break;
        }
        i = i + F::one();
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Standard normal CDF via the chi-square tail identity
/// Φ(−x) = Q(1/2, x²/2) / 2 for x ≥ 0.
pub fn normal_cdf<F: Float>(x: F) -> F {
    let half = f::<F>(0.5);
    let tail = reg_upper_gamma(half, x * x * half) * half;
    if x >= F::zero() {
        F::one() - tail
    } else {
        tail
    }
}

/// Bisection on a bracketing interval. `func` must change sign on `[lo, hi]`;
/// iterates until the bracket collapses to adjacent floats or `max_iter`.
pub fn bisect<F: Float>(mut lo: F, mut hi: F, max_iter: usize, func: impl Fn(F) -> F) -> F {
    let two = f::<F>(2.0);
    let rising = func(hi) >= func(lo);
    for _ in 0..max_iter {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = func(mid);
        let go_right = if rising { v < F::zero() } else { v > F::zero() };
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

pub fn mean<F: Float>(values: &[F]) -> F {
    if values.is_empty() {
        return F::zero();
    }
    let sum = values.iter().fold(F::zero(), |acc, &v| acc + v);
    sum / f::<F>(values.len() as f64)
}

/// Unbiased sample variance (n − 1 denominator); zero for fewer than two points.
pub fn sample_variance<F: Float>(values: &[F]) -> F {
    if values.len() < 2 {
        return F::zero();
    }
    let m = mean(values);
    let ss = values
        .iter()
        .fold(F::zero(), |acc, &v| acc + (v - m) * (v - m));
    ss / f::<F>((values.len() - 1) as f64)
}

pub fn std_dev<F: Float>(values: &[F]) -> F {
    sample_variance(values).sqrt()
}

/// Sample skewness: m3 / m2^(3/2) with population central moments.
pub fn skewness<F: Float>(values: &[F]) -> F {
    let n = f::<F>(values.len() as f64);
    let m = mean(values);
    let mut m2 = F::zero();
    let mut m3 = F::zero();
    for &v in values {
        let d = v - m;
        m2 = m2 + d * d;
        m3 = m3 + d * d * d;
    }
    m2 = m2 / n;
    m3 = m3 / n;
    m3 / m2.powf(f::<F>(1.5))
}

/// Ranks with ties assigned their average rank (1-based).
fn ranks<F: Float>(values: &[F]) -> Vec<F> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN in ranks"));
    let mut out = vec![F::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = f::<F>((i + j + 2) as f64 / 2.0);
        for &idx in &order[i..=j] {
            out[idx] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average-rank tie handling.
pub fn spearman<F: Float>(xs: &[F], ys: &[F]) -> F {
    assert_eq!(xs.len(), ys.len(), "spearman inputs must be equal length");
    assert!(xs.len() >= 2, "spearman needs at least two points");
    let rx = ranks(xs);
    let ry = ranks(ys);
    let mx = mean(&rx);
    let my = mean(&ry);
    let mut cov = F::zero();
    let mut vx = F::zero();
    let mut vy = F::zero();
    for i in 0..rx.len() {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        cov = cov + dx * dy;
        vx = vx + dx * dx;
        vy = vy + dy * dy;
    }
    cov / (vx * vy).sqrt()
}

/// Two-sided Kolmogorov–Smirnov statistic of a sample against an analytic CDF.
pub fn ks_statistic<F: Float>(samples: &mut [F], cdf: impl Fn(F) -> F) -> F {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in samples"));
    let n = f::<F>(samples.len() as f64);
    let mut d = F::zero();
    for (i, &x) in samples.iter().enumerate() {
        let fx = cdf(x);
        let hi = f::<F>((i + 1) as f64) / n - fx;
        let lo = fx - f::<F>(i as f64) / n;
        d = d.max(hi.abs()).max(lo.abs());
    }
    d
}
