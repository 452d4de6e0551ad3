//! Deterministic reductions and finite-difference helpers shared by the
//! physics modules and the test suites.

use num_complex::Complex64 as C64;

/// Below this length a sum is evaluated sequentially; above it the slice is
/// split in half recursively. The split points depend only on the length, so
/// the result is bit-identical regardless of caller parallelism.
const PAIRWISE_LEAF: usize = 64;

/// Cascade (pairwise) summation with a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Cascade summation for complex values, same split order as [`pairwise_sum`].
pub fn pairwise_sum_c64(xs: &[C64]) -> C64 {
    if xs.len() <= PAIRWISE_LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_c64(&xs[..mid]) + pairwise_sum_c64(&xs[mid..])
}

/// Plain two-point central difference, error `O(h^2)`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Three-level Richardson extrapolation of the central difference at a single
/// base step, error `O(h^6)`.
pub fn richardson_central<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    let d1 = central_difference(f, x, h);
    let d2 = central_difference(f, x, h / 2.0);
    let d3 = central_difference(f, x, h / 4.0);
    let t2 = (4.0 * d2 - d1) / 3.0;
    let t3 = (4.0 * d3 - d2) / 3.0;
    (16.0 * t3 - t2) / 15.0
}

/// Step sizes swept by [`swept_derivative`]. Large enough to stay clear of
/// cancellation noise, small enough that the `O(h^6)` truncation term is
/// negligible for the smooth symbols differentiated here.
pub const DERIVATIVE_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Richardson-extrapolated derivative swept over [`DERIVATIVE_STEPS`].
/// Returns the mean of the pair of step sizes whose extrapolations agree
/// best, which certifies the quoted accuracy without knowing the scale of
/// higher derivatives in advance.
pub fn swept_derivative<F: Fn(f64) -> f64>(f: &F, x: f64) -> f64 {
    let vals: Vec<f64> = DERIVATIVE_STEPS
        .iter()
        .map(|&h| richardson_central(f, x, h))
        .collect();
    let mut best = (f64::INFINITY, 0usize, 1usize);
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            let d = (vals[i] - vals[j]).abs();
            if d < best.0 {
                best = (d, i, j);
            }
        }
    }
    0.5 * (vals[best.1] + vals[best.2])
}

/// Ordinary least squares line fit `y = intercept + slope * x`.
/// Returns `(intercept, slope, slope_std_err)`.
///
/// The slope standard error follows the usual residual-variance estimate;
/// it is zero when fewer than three points are supplied.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let sxx: Vec<f64> = xs.iter().map(|&x| (x - mx) * (x - mx)).collect();
    let sxy: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .collect();
    let sxx = pairwise_sum(&sxx);
    let sxy = pairwise_sum(&sxy);
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if xs.len() < 3 {
        return (intercept, slope, 0.0);
    }
    let res: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .collect();
    let s2 = pairwise_sum(&res) / (n - 2.0);
    (intercept, slope, (s2 / sxx).sqrt())
}

/// Least-squares convergence order: the slope of `log(err)` against
/// `log(h)`. Pairs with non-positive error (already at the rounding floor)
/// are dropped.
pub fn order_fit(hs: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(errs)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    assert!(pts.len() >= 2, "order fit needs at least two usable points");
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    linear_fit(&xs, &ys).1
}

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64) * 0.1).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9 * naive.abs());
    }

    #[test]
    fn pairwise_is_independent_of_how_caller_chunks() {
        // Splitting depends only on slice length, so identical input gives
        // identical bits no matter what the surrounding code does.
        let xs: Vec<f64> = (0..4097).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let a = pairwise_sum(&xs);
        let b = pairwise_sum(&xs);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn richardson_nails_transcendental_derivatives() {
        let f = |x: f64| (2.0 * x).sin() * x.exp();
        let exact = |x: f64| x.exp() * ((2.0 * x).sin() + 2.0 * (2.0 * x).cos());
        for &x in &[0.3, 1.0, 2.5] {
            let d = swept_derivative(&f, x);
            assert!((d - exact(x)).abs() < 1e-10, "x={x}: {d} vs {}", exact(x));
        }
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 - 1.25 * x).collect();
        let (a, b, se) = linear_fit(&xs, &ys);
        assert!((a - 3.0).abs() < 1e-12);
        assert!((b + 1.25).abs() < 1e-12);
        assert!(se < 1e-12);
    }

    #[test]
    fn order_fit_sees_quadratic_scaling() {
        let hs: Vec<f64> = (0..6).map(|k| 0.1 / 2f64.powi(k)).collect();
        let errs: Vec<f64> = hs.iter().map(|&h| 7.0 * h * h).collect();
        assert!((order_fit(&hs, &errs) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn power_of_two_detection() {
        assert!(is_power_of_two(1));
        assert!(is_power_of_two(4096));
        assert!(!is_power_of_two(0));
        assert!(!is_power_of_two(1000));
    }
}
