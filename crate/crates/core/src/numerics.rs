//! Small scalar numerics shared across modules: adaptive Simpson quadrature,
//! an embedded Runge-Kutta integrator for scalar ODEs, bisection, and the
//! Bessel function needed for radially symmetric eigenmodes.

/// First positive zero of the Bessel function J0.
pub const BESSEL_J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // below the rounding level of the local contribution refinement is noise
    let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= (15.0 * tol).max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Outcome of integrating a scalar ODE forward in time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarOdeTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Set when the solution crossed the escape threshold before the horizon.
    pub escaped_at: Option<f64>,
}

/// Dormand-Prince 5(4) integration of `y' = rhs(t, y)` from `(t0, y0)` to `t_end`
/// with mixed absolute/relative tolerance `tol`. Integration stops early once
/// `|y|` exceeds `escape`.
pub fn integrate_scalar_ode<F>(rhs: F, t0: f64, y0: f64, t_end: f64, tol: f64, escape: f64) -> ScalarOdeTrace
where
    F: Fn(f64, f64) -> f64,
{
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut t = t0;
    let mut y = y0;
    let mut times = vec![t];
    let mut values = vec![y];
    let span = t_end - t0;
    if span <= 0.0 {
        return ScalarOdeTrace { times, values, escaped_at: None };
    }
    let mut h = (span * 1e-3).min(1e-2);
    let mut k = [0.0; 7];
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        for stage in 0..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                yi += h * A[stage][j] * kj;
            }
            k[stage] = rhs(t + C[stage] * h, yi);
        }
        let mut y5 = y;
        let mut y4 = y;
        for i in 0..7 {
            y5 += h * B5[i] * k[i];
            y4 += h * B4[i] * k[i];
        }
        let scale = tol * (1.0 + y.abs().max(y5.abs()));
        let err = (y5 - y4).abs() / scale;
        if err <= 1.0 || h < 1e-15 * (1.0 + t.abs()) {
            t += h;
            y = y5;
            times.push(t);
            values.push(y);
            if !y.is_finite() || y.abs() > escape {
                return ScalarOdeTrace { times, values, escaped_at: Some(t) };
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    ScalarOdeTrace { times, values, escaped_at: None }
}

/// Bisection for a sign change of `f` on `[lo, hi]`; returns the bracket midpoint
/// after `iters` halvings, or `None` when `f(lo)` and `f(hi)` share a sign.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Bessel function of the first kind of order zero, by its power series.
/// Accurate to machine precision for |x| ≤ 6, which covers every use here.
pub fn bessel_j0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= -q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// C∞ transition from 0 (z ≤ 0) to 1 (z ≥ 1).
pub fn smooth_step(z: f64) -> f64 {
    fn bump(z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else {
            (-1.0 / z).exp()
        }
    }
    let a = bump(z);
    let b = bump(1.0 - z);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// `count` equispaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|i| if i + 1 == count { b } else { a + (b - a) * i as f64 / (count - 1) as f64 })
            .collect(),
    }
}

/// `max(u, 0)^e` with exact shortcuts for the common integer exponents.
#[inline]
pub fn pow_nonneg(u: f64, e: f64) -> f64 {
    let u = u.max(0.0);
    if e == 1.0 {
        u
    } else if e == 2.0 {
        u * u
    } else if u == 0.0 {
        0.0
    } else {
        u.powf(e)
    }
}
