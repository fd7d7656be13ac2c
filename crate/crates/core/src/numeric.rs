//! Small numerical toolbox: adaptive quadrature, golden-section search,
//! monotone bisection, and summary statistics.

use crate::error::{Error, Result};

/// Golden ratio constant used by the section search.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
///
/// Recursion splits an interval until the local Richardson error estimate
/// drops below the scaled tolerance. `abs_tol`/`rel_tol` follow the usual
/// convention: an interval is accepted when the estimated error is below
/// `abs_tol + rel_tol * |integral so far|`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    label: &str,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Integration(format!(
            "{label}: bad interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut evals = 0usize;
    let out = simpson_step(
        f, a, b, fa, fm, fb, whole, abs_tol, rel_tol, 50, &mut evals, label,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    abs_tol: f64,
    rel_tol: f64,
    depth: u32,
    evals: &mut usize,
    label: &str,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    if *evals > 4_000_000 {
        return Err(Error::Integration(format!(
            "{label}: evaluation budget exhausted on [{a}, {b}]"
        )));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let tol = abs_tol + rel_tol * (left + right).abs();
    if depth == 0 {
        if delta.abs() > 15.0 * tol.max(f64::EPSILON) {
            return Err(Error::Integration(format!(
                "{label}: max recursion depth at [{a}, {b}], err {:.3e}",
                delta.abs() / 15.0
            )));
        }
        return Ok(left + right + delta / 15.0);
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let lv = simpson_step(
        f,
        a,
        m,
        fa,
        flm,
        fm,
        left,
        abs_tol / 2.0,
        rel_tol,
        depth - 1,
        evals,
        label,
    )?;
    let rv = simpson_step(
        f,
        m,
        b,
        fm,
        frm,
        fb,
        right,
        abs_tol / 2.0,
        rel_tol,
        depth - 1,
        evals,
        label,
    )?;
    Ok(lv + rv)
}

/// Minimize a univariate function on `[lo, hi]` by golden-section search.
///
/// Returns `(x_min, f(x_min))`. The caller is responsible for the function
/// being (approximately) unimodal on the bracket; with multimodal input the
/// result is a local minimum. `x_tol` is the bracket width at termination.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, x_tol: f64) -> (f64, f64) {
    debug_assert!(hi >= lo);
    if hi - lo <= x_tol {
        let x = 0.5 * (lo + hi);
        return (x, f(x));
    }
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > x_tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    // include the endpoints so a boundary minimum is never missed
    let xm = 0.5 * (a + b);
    let fm = f(xm);
    let mut best = (xm, fm);
    for (x, v) in [(lo, f(lo)), (hi, f(hi))] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Coarse scan followed by golden-section refinement.
///
/// Evaluates `f` at `scan_points + 1` equispaced points, then refines around
/// the best sample. Guards against multimodal objectives that a bare
/// golden-section would mishandle.
pub fn scan_then_golden<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    scan_points: usize,
    x_tol: f64,
) -> (f64, f64) {
    if hi - lo <= x_tol {
        let x = 0.5 * (lo + hi);
        return (x, f(x));
    }
    let n = scan_points.max(2);
    let step = (hi - lo) / n as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::INFINITY;
    for i in 0..=n {
        let v = f(lo + step * i as f64);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    golden_section_min(f, a, b, x_tol)
}

/// Find the smallest `x` in `[lo, hi]` with `f(x) <= target` for a
/// non-increasing `f`, by bisection. Returns `hi` if `f` stays above the
/// target on the whole interval.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, target: f64) -> f64 {
    let mut a = lo;
    let mut b = hi;
    if f(a) <= target {
        return a;
    }
    if f(b) > target {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) <= target {
            b = m;
        } else {
            a = m;
        }
        if (b - a) <= 1e-9 * b.abs().max(1.0) {
            break;
        }
    }
    b
}

/// Nodes and weights of the 32-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_32() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = 32usize;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            // Chebyshev-like initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre P_n(x) and derivative by recurrence
                let mut p0 = 1.0f64;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

/// Fixed-order Gauss-Legendre integral of `f` on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre_32()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Mean of a slice; 0 for empty input.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than two points.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

/// Linear-interpolated quantile of an unsorted slice, q in [0, 1].
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in quantile input"));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < v.len() {
        v[i] * (1.0 - frac) + v[i + 1] * frac
    } else {
        v[i]
    }
}
