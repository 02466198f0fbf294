//! Scalar quadrature: adaptive Simpson and tanh-sinh (double exponential),
//! each with a log-space variant for integrands spanning thousands of orders
//! of magnitude.

/// Adaptive Simpson with combined absolute/relative tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, atol: f64, rtol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        atol: f64,
        rtol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if depth == 0 || err.abs() <= 15.0 * (atol + rtol * (left + right).abs()) {
            return left + right + err / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, atol / 2.0, rtol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, atol / 2.0, rtol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, atol, rtol, 48)
}

/// One tanh-sinh abscissa at parameter t: offset of the node from the
/// nearest endpoint of [-1, 1] (the node is 1 - offset for t > 0, offset - 1
/// for t < 0) together with its weight. The offset form stays exact near the
/// endpoints where 1 - tanh underflows.
#[inline]
fn ts_node(t: f64) -> (f64, f64) {
    let s = t.sinh();
    let c = t.cosh();
    let z = std::f64::consts::FRAC_PI_2 * s.abs();
    // 1 - tanh(z) = 2 / (1 + e^{2z})
    let offset = 2.0 / (1.0 + (2.0 * z).exp());
    let sech = 1.0 / z.cosh();
    let w = std::f64::consts::FRAC_PI_2 * c * sech * sech;
    (offset, w)
}

const TS_TMAX: f64 = 4.5;
const TS_MIN_LEVEL: u32 = 3;

fn ts_levels(max_level: u32) -> impl Iterator<Item = (u32, f64, Vec<f64>)> {
    (0..=max_level).map(|level| {
        let h = 0.5f64.powi(level as i32);
        let ts: Vec<f64> = if level == 0 {
            // all integer abscissas, including t = 0
            let mut v = vec![0.0];
            let mut j = 1;
            while j as f64 <= TS_TMAX {
                v.push(j as f64);
                v.push(-(j as f64));
                j += 1;
            }
            v
        } else {
            // odd multiples of h are new to this level
            let mut v = Vec::new();
            let mut j = 1u64;
            while (j as f64) * h <= TS_TMAX {
                v.push(j as f64 * h);
                v.push(-(j as f64) * h);
                j += 2;
            }
            v
        };
        (level, h, ts)
    })
}

/// Tanh-sinh quadrature of `f` over [a, b], relative tolerance `rtol`,
/// doubling node density up to `max_level`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rtol: f64, max_level: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let (offset, w) = ts_node(t);
        let x = if t >= 0.0 { b - half * offset } else { a + half * offset };
        let v = f(x);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };
    let mut sum = 0.0;
    let mut prev = f64::NAN;
    let mut estimate = f64::NAN;
    for (level, h, ts) in ts_levels(max_level) {
        for t in ts {
            sum += eval(t);
        }
        estimate = sum * h * half;
        if level >= TS_MIN_LEVEL {
            if (estimate - prev).abs() <= rtol * estimate.abs() {
                return estimate;
            }
        }
        prev = estimate;
    }
    estimate
}

/// Tanh-sinh quadrature of a nonnegative integrand given by its natural log.
///
/// `ln_f(x)` returns ln f(x) (NEG_INFINITY where f vanishes); the return
/// value is ln of the integral over [a, b]. All accumulation happens in log
/// space, so the integrand may span thousands of orders of magnitude.
pub fn tanh_sinh_ln<F: Fn(f64) -> f64>(ln_f: &F, a: f64, b: f64, rtol: f64, max_level: u32) -> f64 {
    assert!(b > a);
    let half = 0.5 * (b - a);
    // ln of weighted term at abscissa t
    let term = |t: f64| -> f64 {
        let (offset, w) = ts_node(t);
        let x = if t >= 0.0 { b - half * offset } else { a + half * offset };
        ln_f(x) + w.ln()
    };
    let mut terms: Vec<f64> = Vec::new();
    let mut prev = f64::NAN;
    let mut estimate = f64::NAN;
    for (level, h, ts) in ts_levels(max_level) {
        for t in ts {
            terms.push(term(t));
        }
        estimate = ln_sum(&terms) + h.ln() + half.ln();
        if level >= TS_MIN_LEVEL && (estimate - prev).abs() <= rtol {
            return estimate;
        }
        prev = estimate;
    }
    estimate
}

/// log-sum-exp over a slice of ln-terms.
fn ln_sum(terms: &[f64]) -> f64 {
    let hi = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = terms.iter().map(|&t| (t - hi).exp()).sum();
    hi + s.ln()
}

/// Compensated (Kahan) summation; reduction-order stable to roundoff.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
