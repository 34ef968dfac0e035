//! Small numerical kernels shared by the lab modules: FFT wrappers, quadrature,
//! least squares, fixed-step Runge–Kutta, finite-difference stencils and
//! smooth cut-off functions.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    // Plans are cached per thread; scratch buffers never cross tasks.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalised forward DFT, `X_k = Σ_j x_j e^{-2πi jk/n}`, in place.
pub fn fft_forward(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Inverse DFT normalised by `1/n`, in place.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
}

/// Log-domain accumulator for sums of positive terms given by their logarithms.
///
/// The running maximum is shifted out as terms arrive, so `exp` is only ever
/// applied to non-positive arguments.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self { max: f64::NEG_INFINITY, scaled: 0.0 }
    }

    pub fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            self.scaled = self.scaled * (self.max - log_term).exp() + 1.0;
            self.max = log_term;
        } else {
            self.scaled += (log_term - self.max).exp();
        }
    }

    /// `add` with a signed weight `c >= 0` folded in as `ln c`.
    pub fn add_weighted(&mut self, log_term: f64, weight: f64) {
        if weight > 0.0 {
            self.add(log_term + weight.ln());
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        } else {
            self.scaled += other.scaled * (other.max - self.max).exp();
        }
    }

    /// Logarithm of the accumulated sum (`-inf` when empty).
    pub fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }

    /// Largest single log-term seen so far.
    pub fn max_term(&self) -> f64 {
        self.max
    }
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Composite Simpson rule; falls back to the trapezoid rule for an odd number of intervals.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 3 || n.is_multiple_of(2) {
        return trapezoid(values, h);
    }
    let inner: f64 = values[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (values[0] + inner + values[n - 1])
}

/// Trapezoid weights for `n` uniform samples with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    if n > 0 {
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
    }
    w
}

/// Least squares `min ‖A c − y‖` by modified Gram–Schmidt QR.
/// `columns[j]` is the j-th column of `A`.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let m = y.len();
    let p = columns.len();
    let mut q: Vec<Vec<f64>> = columns.to_vec();
    let mut r = vec![vec![0.0; p]; p];
    for j in 0..p {
        for i in 0..j {
            let dot: f64 = (0..m).map(|k| q[i][k] * q[j][k]).sum();
            r[i][j] = dot;
            for k in 0..m {
                q[j][k] -= dot * q[i][k];
            }
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        r[j][j] = norm;
        if norm > 0.0 {
            q[j].iter_mut().for_each(|v| *v /= norm);
        }
    }
    let qty: Vec<f64> = (0..p).map(|j| (0..m).map(|k| q[j][k] * y[k]).sum()).collect();
    let mut c = vec![0.0; p];
    for j in (0..p).rev() {
        let s: f64 = (j + 1..p).map(|i| r[j][i] * c[i]).sum();
        c[j] = if r[j][j] != 0.0 { (qty[j] - s) / r[j][j] } else { 0.0 };
    }
    c
}

/// One classical RK4 step for an autonomous-in-form system `y' = f(t, y)`.
pub fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let add = |a: &[f64; N], b: &[f64; N], s: f64| {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(t + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Sixth-order centred first derivative at the middle of a 7-point window.
pub fn d1_central6(w: [f64; 7], h: f64) -> f64 {
    (-w[0] + 9.0 * w[1] - 45.0 * w[2] + 45.0 * w[4] - 9.0 * w[5] + w[6]) / (60.0 * h)
}

/// Sixth-order centred second derivative at the middle of a 7-point window.
pub fn d2_central6(w: [f64; 7], h: f64) -> f64 {
    (2.0 * w[0] - 27.0 * w[1] + 270.0 * w[2] - 490.0 * w[3] + 270.0 * w[4] - 27.0 * w[5]
        + 2.0 * w[6])
        / (180.0 * h * h)
}

/// Sixth-order centred first derivative for complex samples.
pub fn d1_central6_c(w: [Complex64; 7], h: f64) -> Complex64 {
    (-w[0] + 9.0 * w[1] - 45.0 * w[2] + 45.0 * w[4] - 9.0 * w[5] + w[6]) / (60.0 * h)
}

/// Golden-section search for the maximiser of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Smooth compactly supported bump `exp(1 - 1/(1 - s²))` on `|s| < 1`, 1 at `s = 0`.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Derivative of [`bump`] with respect to `s`.
pub fn bump_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - s * s;
        -2.0 * s / (d * d) * bump(s)
    }
}

fn transition(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// C^∞ step: 0 for `s <= 0`, 1 for `s >= 1`.
pub fn smooth_step(s: f64) -> f64 {
    let a = transition(s);
    let b = transition(1.0 - s);
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_prime(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let a = transition(s);
    let b = transition(1.0 - s);
    let da = a / (s * s);
    let db = -b / ((1.0 - s) * (1.0 - s));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// Second derivative of [`smooth_step`], by a centred difference of the analytic first derivative.
pub fn smooth_step_second(s: f64) -> f64 {
    let h = 1e-5;
    (smooth_step_prime(s + h) - smooth_step_prime(s - h)) / (2.0 * h)
}
