//! Independent reference implementations used as oracles by the integration
//! suites. Nothing here calls the library's incomplete-gamma or selection
//! code paths.

#![allow(dead_code)]

/// Adaptive Simpson quadrature with interval-halving error control.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        recurse(f, a, fa, m, fm, flm, left, tol * 0.5, depth - 1)
            + recurse(f, m, fm, b, fb, frm, right, tol * 0.5, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(&f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Gamma upper tail mass by quadrature of the unnormalized density
/// x^(shape−1)·e^(−x/scale); the normalizer is integrated numerically too,
/// so no gamma-function code is shared with the implementation under test.
pub fn quad_gamma_tail(shape: f64, scale: f64, threshold: f64) -> f64 {
    assert!(shape >= 1.0, "quadrature oracle handles shape >= 1 only");
    let density = move |x: f64| {
        if x <= 0.0 {
            if shape == 1.0 && x == 0.0 {
                return 1.0;
            }
            return 0.0;
        }
        ((shape - 1.0) * x.ln() - x / scale).exp()
    };
    let mean = shape * scale;
    let sd = shape.sqrt() * scale;
    let upper = (mean + 60.0 * sd).max(threshold + 60.0 * sd);
    let tail = adaptive_simpson(&density, threshold, upper, 1e-12);
    let total = adaptive_simpson(&density, 0.0, upper, 1e-12);
    tail / total
}

/// Calibration oracle: scan shapes on a fine grid until the quadrature tail
/// brackets the target, then bisect on the quadrature evaluations.
pub fn oracle_calibrate(mean: f64, p_star: f64, threshold: f64) -> (f64, f64) {
    let tail_at = |shape: f64| quad_gamma_tail(shape, mean / shape, threshold);
    let mut lo = 1.0;
    let mut hi = 0.0;
    let mut prev = tail_at(lo);
    assert!(prev > p_star, "grid must start above the target tail mass");
    let mut k = lo;
    while k < 400.0 {
        k += 0.25;
        let t = tail_at(k);
        if t <= p_star {
            hi = k;
            lo = k - 0.25;
            break;
        }
        prev = t;
        lo = k;
    }
    let _ = prev;
    assert!(hi > 0.0, "no bracketing pair found up to shape 400");
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail_at(mid) > p_star {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let shape = 0.5 * (lo + hi);
    (shape, mean / shape)
}

/// Exhaustive top-k membership: an item is selected iff fewer than `k` items
/// strictly dominate it under (score desc, id asc). No sorting involved.
pub fn brute_force_top_k(items: &[(u64, f64)], k: usize) -> Vec<u64> {
    items
        .iter()
        .filter(|(id, score)| {
            let dominators = items
                .iter()
                .filter(|(oid, os)| *os > *score || (*os == *score && oid < id))
                .count();
            dominators < k
        })
        .map(|(id, _)| *id)
        .collect()
}

/// Standard normal pdf, for clamp-bias formulas in the statistical checks.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionStatus {
    Pass,
    Fail,
}

/// One line per criterion, then panic on failure so the harness records it.
pub fn report(number: u32, name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let suffix = if detail.is_empty() { String::new() } else { format!(" — {detail}") };
    println!("criterion {number} ({name}): {status}{suffix}");
    assert!(ok, "criterion {number} ({name}) failed{suffix}");
}
