//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! The embedded 4th-order solution drives step-size control and the
//! Hairer–Wanner 4th-order interpolant is stored for every accepted step so
//! that callers can evaluate the solution anywhere in the integrated span.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Debug, Clone)]
struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        std::array::from_fn(|i| r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i]))))
    }
}

/// Piecewise-polynomial solution over `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    t_start: f64,
    t_end: f64,
    y_start: [f64; N],
    y_end: [f64; N],
    steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn final_state(&self) -> [f64; N] {
        self.y_end
    }

    /// Evaluates the interpolant; `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if !(t >= self.t_start && t <= self.t_end) {
            return None;
        }
        if t == self.t_start {
            return Some(self.y_start);
        }
        if t == self.t_end {
            return Some(self.y_end);
        }
        let idx = self
            .steps
            .partition_point(|s| s.t0 + s.h < t)
            .min(self.steps.len() - 1);
        Some(self.steps[idx].eval(t))
    }

    /// Accepted step end points with their node values, in time order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, [f64; N])> + '_ {
        std::iter::once((self.t_start, self.y_start)).chain(
            self.steps
                .iter()
                .map(|s| (s.t0 + s.h, s.eval(s.t0 + s.h))),
        )
    }
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    opts: &OdeOptions,
) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = opts.abs_tol + opts.rel_tol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn initial_step<const N: usize, F>(f: &F, t0: f64, y0: &[f64; N], k1: &[f64; N], opts: &OdeOptions, span: f64) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let scale = |i: usize| opts.abs_tol + opts.rel_tol * y0[i].abs();
    let d0 = ((0..N).map(|i| (y0[i] / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d1 = ((0..N).map(|i| (k1[i] / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1 = axpy(y0, h0, &[(1.0, k1)]);
    let k2 = f(t0 + h0, &y1);
    let d2 = ((0..N).map(|i| ((k2[i] - k1[i]) / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` and keeps dense output.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: OdeOptions,
) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    assert!(t_end >= t0, "integration must run forward in time");
    let mut sol = DenseSolution {
        t_start: t0,
        t_end,
        y_start: y0,
        y_end: y0,
        steps: Vec::new(),
    };
    if t_end == t0 {
        return Ok(sol);
    }

    let span = t_end - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&f, t0, &y0, &k1, &opts, span);

    for _ in 0..MAX_STEPS {
        if t + 1.01 * h >= t_end {
            h = t_end - t;
        }
        if h <= f64::EPSILON * t.abs().max(span) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y1);

        let err: [f64; N] = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err_norm = error_norm(&err, &y, &y1, &opts);
        if !err_norm.is_finite() {
            return Err(Error::NonFinite(format!("ODE error estimate at t = {t}")));
        }

        if err_norm <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let coeffs = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                }),
            ];
            sol.steps.push(DenseStep { t0: t, h, coeffs });

            let last = t + h >= t_end;
            t = if last { t_end } else { t + h };
            y = y1;
            k1 = k7;
            if last {
                sol.y_end = y;
                return Ok(sol);
            }
            let fac = SAFETY * err_norm.max(1e-10).powf(-0.2);
            h *= fac.clamp(FAC_MIN, FAC_MAX);
        } else {
            let fac = SAFETY * err_norm.powf(-0.2);
            h *= fac.clamp(FAC_MIN, 1.0);
        }
    }
    Err(Error::StepSizeUnderflow { t, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> OdeOptions {
        OdeOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
        }
    }

    #[test]
    fn exponential_decay() {
        let sol = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, opts()).unwrap();
        let end = sol.final_state()[0];
        assert!((end - (-5.0f64).exp()).abs() < 1e-12);
        for k in 0..=50 {
            let t = k as f64 * 0.1;
            let y = sol.eval(t).unwrap()[0];
            assert!((y - (-t).exp()).abs() < 1e-11, "t={t} y={y}");
        }
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let w = 3.0;
        let sol = integrate(
            |_, y: &[f64; 2]| [y[1], -w * w * y[0]],
            0.0,
            [1.0, 0.0],
            10.0,
            opts(),
        )
        .unwrap();
        let max_err = (0..=1000)
            .map(|k| {
                let t = k as f64 * 0.01;
                (sol.eval(t).unwrap()[0] - (w * t).cos()).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_err < 1e-10, "max_err = {max_err}");
    }

    #[test]
    fn outside_span_is_none() {
        let sol = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, opts()).unwrap();
        assert!(sol.eval(-0.1).is_none());
        assert!(sol.eval(1.1).is_none());
        assert_eq!(sol.eval(0.0).unwrap(), [1.0]);
    }

    #[test]
    fn zero_length_span() {
        let sol = integrate(|_, y: &[f64; 1]| [y[0]], 2.0, [3.0], 2.0, opts()).unwrap();
        assert_eq!(sol.eval(2.0).unwrap(), [3.0]);
        assert_eq!(sol.n_steps(), 0);
    }
}
