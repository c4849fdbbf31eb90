//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The caller seeds the initial partition with known breakpoints (kinks in
//! the integrand); the interval with the largest error estimate is bisected
//! until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of bisections allowed on top of the seeded partition.
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub n_intervals: usize,
    pub n_evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken on position so the bisection order is reproducible
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    Ok(Segment {
        a,
        b,
        value,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Integrates `f` over `[a, b]`, seeding the partition with `breakpoints`.
///
/// Breakpoints outside the open interval are ignored.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            n_intervals: 0,
            n_evals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(lo);
    edges.extend(points);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        heap.push(kronrod(&f, w[0], w[1])?);
    }
    let mut n_evals = 15 * heap.len();

    let totals = |heap: &BinaryHeap<Segment>| {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };

    let mut bisections = 0;
    loop {
        let (value, error) = totals(&heap);
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol {
            return Ok(QuadResult {
                value: sign * value,
                error,
                n_intervals: heap.len(),
                n_evals,
            });
        }
        if bisections >= opts.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                max_subdivisions: opts.max_subdivisions,
                error,
            });
        }
        let worst = heap.pop().expect("partition is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            return Err(Error::QuadratureNonConvergence {
                max_subdivisions: opts.max_subdivisions,
                error,
            });
        }
        heap.push(kronrod(&f, worst.a, mid)?);
        heap.push(kronrod(&f, mid, worst.b)?);
        n_evals += 30;
        bisections += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(rel_tol: f64) -> QuadOptions {
        QuadOptions {
            rel_tol,
            abs_tol: 0.0,
            max_subdivisions: 60,
        }
    }

    #[test]
    fn polynomial_is_exact() {
        // K15 integrates degree-22 polynomials exactly
        let r = integrate(|x| x.powi(9) - 3.0 * x * x, 0.0, 2.0, &[], opts(1e-12)).unwrap();
        assert!((r.value - (102.4 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_seeded_breakpoint() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], opts(1e-12)).unwrap();
        assert_eq!(r.n_intervals, 2);
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn kinked_integrand_without_breakpoint_still_converges() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[], opts(1e-10)).unwrap();
        assert!((r.value - 0.29).abs() < 1e-10);
        assert!(r.n_intervals > 1);
    }

    #[test]
    fn peaked_integrand() {
        let exact = 2.0 * (1.0f64 / 0.01).atan() / 0.01;
        let r = integrate(|x| 1.0 / (x * x + 1e-4), -1.0, 1.0, &[], opts(1e-10)).unwrap();
        assert!(((r.value - exact) / exact).abs() < 1e-10);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let r = integrate(|x: f64| x.exp(), 1.0, 0.0, &[], opts(1e-12)).unwrap();
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn zero_integrand() {
        let r = integrate(|_| 0.0, 0.0, 1.0, &[0.5], opts(1e-10)).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = integrate(
            |x: f64| (1.0 / x.max(1e-300)).sin(),
            0.0,
            1.0,
            &[],
            QuadOptions {
                rel_tol: 1e-14,
                abs_tol: 0.0,
                max_subdivisions: 5,
            },
        );
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn non_finite_is_reported() {
        let r = integrate(|_| f64::NAN, 0.0, 1.0, &[], opts(1e-10));
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
