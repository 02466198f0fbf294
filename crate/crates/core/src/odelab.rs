//! The diffusion-free oscillator y'' + y (e^{4 pi y^2} - 1) = 0: exact first
//! integral, Verlet/RK4 integration, period and hitting-time quadrature with
//! inverse-square-root endpoint singularities, the two integral lemmas, and
//! the decoherence computation.
//!
//! All singular quadratures run in the substituted variable u = sqrt(4 pi) y
//! where the first integral reads u'^2 = (e^{u0^2} - u0^2) - (e^{u^2} - u^2),
//! and in log space, so amplitudes up to u0^2 ~ 10^6 are routine.

use crate::error::{Error, Result};
use crate::logscalar::{ln1mexp, LogScalar};
use crate::quadrature::{adaptive_simpson, tanh_sinh_ln};
use crate::{FOUR_PI, OVERFLOW_GUARD};

/// Restoring force f(y) = y (e^{4 pi y^2} - 1).
pub fn force(y: f64) -> Result<f64> {
    let a = FOUR_PI * y * y;
    if a > OVERFLOW_GUARD {
        return Err(Error::Overflow {
            context: "force: use force_ln".into(),
            value: a,
            guard: OVERFLOW_GUARD,
        });
    }
    Ok(y * a.exp_m1())
}

/// Log-space force for arbitrarily large |y|.
pub fn force_ln(y: f64) -> LogScalar {
    if y == 0.0 {
        return LogScalar::ZERO;
    }
    let a = FOUR_PI * y * y;
    LogScalar::new(y.signum() as i8, y.abs().ln() + a + ln1mexp(-a))
}

/// Potential F(y) = (e^{4 pi y^2} - 1 - 4 pi y^2) / (8 pi), with F' = force.
pub fn potential_f(y: f64) -> Result<f64> {
    let a = FOUR_PI * y * y;
    if a > OVERFLOW_GUARD {
        return Err(Error::Overflow {
            context: "potential_f: use potential_f_ln".into(),
            value: a,
            guard: OVERFLOW_GUARD,
        });
    }
    Ok((a.exp_m1() - a) / (2.0 * FOUR_PI))
}

/// Log-space potential.
pub fn potential_f_ln(y: f64) -> LogScalar {
    if y == 0.0 {
        return LogScalar::ZERO;
    }
    let a = FOUR_PI * y * y;
    if a <= 40.0 {
        return LogScalar::from_f64((a.exp_m1() - a) / (2.0 * FOUR_PI));
    }
    // e^a - 1 - a = e^a (1 - (1 + a) e^{-a})
    let ln = a + (-(1.0 + a) * (-a).exp()).ln_1p() - (2.0 * FOUR_PI).ln();
    LogScalar::from_ln(ln)
}

/// First integral H(y, v) = v^2 + 2 F(y), conserved along trajectories.
pub fn first_integral(y: f64, v: f64) -> Result<f64> {
    Ok(v * v + 2.0 * potential_f(y)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeState {
    pub y: f64,
    pub v: f64,
    pub t: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Symplectic, time-reversible; the default.
    Verlet,
    /// Classical Runge-Kutta; cross-check oracle only.
    Rk4,
}

#[derive(Clone, Debug)]
pub struct OdeTrajectory {
    pub samples: Vec<OdeState>,
    pub method: Method,
    pub dt: f64,
    /// |H(t) - H(0)| / max(H(0), eps) per sample.
    pub h_drift: Vec<f64>,
}

/// Integrate from (y0, 0) for time `t_end` with fixed step `dt`.
pub fn integrate(y0: f64, t_end: f64, dt: f64, method: Method) -> Result<OdeTrajectory> {
    if FOUR_PI * y0 * y0 > 600.0 {
        return Err(Error::Overflow {
            context: "integrate: amplitude beyond the plain-real pipeline".into(),
            value: FOUR_PI * y0 * y0,
            guard: 600.0,
        });
    }
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::Precondition(format!("bad time step {dt}")));
    }
    let steps = (t_end / dt).abs().round() as usize;
    let dt = if t_end < 0.0 { -dt.abs() } else { dt.abs() };
    let mut y = y0;
    let mut v = 0.0;
    let mut t = 0.0;
    let h0 = first_integral(y, v)?;
    let href = h0.abs().max(f64::MIN_POSITIVE);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut h_drift = Vec::with_capacity(steps + 1);
    samples.push(OdeState { y, v, t });
    h_drift.push(0.0);
    for _ in 0..steps {
        match method {
            Method::Verlet => {
                let vh = v - 0.5 * dt * force(y)?;
                y += dt * vh;
                v = vh - 0.5 * dt * force(y)?;
            }
            Method::Rk4 => {
                let f = |y: f64, v: f64| -> Result<(f64, f64)> { Ok((v, -force(y)?)) };
                let (k1y, k1v) = f(y, v)?;
                let (k2y, k2v) = f(y + 0.5 * dt * k1y, v + 0.5 * dt * k1v)?;
                let (k3y, k3v) = f(y + 0.5 * dt * k2y, v + 0.5 * dt * k2v)?;
                let (k4y, k4v) = f(y + dt * k3y, v + dt * k3v)?;
                y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            }
        }
        t += dt;
        samples.push(OdeState { y, v, t });
        h_drift.push((first_integral(y, v)? - h0).abs() / href);
    }
    Ok(OdeTrajectory {
        samples,
        method,
        dt,
        h_drift,
    })
}

/// Resume an existing state backwards: used by the reversal self-check.
pub fn integrate_from(state: OdeState, t_span: f64, dt: f64) -> Result<OdeState> {
    let steps = (t_span / dt).abs().round() as usize;
    let dt = if t_span < 0.0 { -dt.abs() } else { dt.abs() };
    let mut y = state.y;
    let mut v = state.v;
    for _ in 0..steps {
        let vh = v - 0.5 * dt * force(y)?;
        y += dt * vh;
        v = vh - 0.5 * dt * force(y)?;
    }
    Ok(OdeState {
        y,
        v,
        t: state.t + dt * steps as f64,
    })
}

/// ln of P'(u) = 2u (e^{u^2} - 1) for u > 0.
fn ln_p_prime(u: f64) -> f64 {
    let a = u * u;
    (2.0 * u).ln() + a + ln1mexp(-a)
}

/// ln of the descent-time integral in the substituted variable:
/// J(u0, u1) = int_{u1}^{u0} du / sqrt((e^{u0^2} - u0^2) - (e^{u^2} - u^2)),
/// 0 <= u1 < u0. The substitution u = u0 - w^2 removes the inverse-sqrt
/// endpoint singularity; the denominator difference is assembled in log
/// space so no cancellation occurs at any amplitude.
fn descent_time_ln(u0: f64, u1: f64) -> f64 {
    debug_assert!(u0 > u1 && u1 >= 0.0);
    let u0sq = u0 * u0;
    let ln_pp = ln_p_prime(u0);
    let w_end = (u0 - u1).sqrt();
    let ln_g = move |w: f64| -> f64 {
        let wsq = w * w;
        let ln_delta = 2.0 * w.ln() + (2.0 * u0 - wsq).ln(); // delta = u0^2 - u^2 > 0
        if ln_delta < -60.0 {
            // D ~ P'(u0) w^2: the integrand is locally the constant 2/sqrt(P'(u0))
            return std::f64::consts::LN_2 - 0.5 * ln_pp;
        }
        let delta = ln_delta.exp();
        // A1 = e^{u0^2} - e^{u^2} = e^{u0^2} (1 - e^{-delta})
        let ln_a1 = u0sq + if ln_delta < -36.0 { ln_delta } else { ln1mexp(-delta) };
        // D = A1 - delta, with A1 > delta always
        let r = ln_delta - ln_a1;
        let ln_d = if r < -36.0 { ln_a1 } else { ln_a1 + ln1mexp(r) };
        std::f64::consts::LN_2 + w.ln() - 0.5 * ln_d
    };
    tanh_sinh_ln(&ln_g, 0.0, w_end, 1e-10, 12)
}

/// Oscillation period from the turning point y0 > 0, by singular quadrature:
/// T = 4 int_0^{y0} dz / sqrt(2 (F(y0) - F(z))). Log-space value.
pub fn period_ln(y0: f64) -> Result<LogScalar> {
    if y0 <= 0.0 {
        return Err(Error::Precondition(format!(
            "no oscillation from amplitude {y0}"
        )));
    }
    let u0 = FOUR_PI.sqrt() * y0;
    Ok(LogScalar::from_ln(
        (4.0f64).ln() + descent_time_ln(u0, 0.0),
    ))
}

/// Plain-real period; errors out where the plain pipeline would be
/// meaningless (4 pi y0^2 > 600).
pub fn period(y0: f64) -> Result<f64> {
    if FOUR_PI * y0 * y0 > 600.0 {
        return Err(Error::Overflow {
            context: "period: use period_ln".into(),
            value: FOUR_PI * y0 * y0,
            guard: 600.0,
        });
    }
    Ok(period_ln(y0)?.to_f64())
}

/// Time for the solution started at (y0, 0) to first reach level y1,
/// 0 <= y1 < y0. Log-space value.
pub fn time_to_level_ln(y0: f64, y1: f64) -> Result<LogScalar> {
    if !(0.0 <= y1 && y1 < y0) {
        return Err(Error::Precondition(format!(
            "time_to_level needs 0 <= y1 < y0, got y0 = {y0}, y1 = {y1}"
        )));
    }
    if y1 == y0 {
        return Ok(LogScalar::ZERO);
    }
    let s = FOUR_PI.sqrt();
    Ok(LogScalar::from_ln(descent_time_ln(s * y0, s * y1)))
}

pub fn time_to_level(y0: f64, y1: f64) -> Result<f64> {
    if FOUR_PI * y0 * y0 > 600.0 {
        return Err(Error::Overflow {
            context: "time_to_level: use time_to_level_ln".into(),
            value: FOUR_PI * y0 * y0,
            guard: 600.0,
        });
    }
    if y1 == y0 {
        return Ok(0.0);
    }
    Ok(time_to_level_ln(y0, y1)?.to_f64())
}

/// I(a,k) = int_{e^{-k/2}}^1 r e^{(4a^2/k) log^2 r} dr and its bound
/// 2 e^{(a^2-1)k}.
#[derive(Clone, Copy, Debug)]
pub struct LemmaIResult {
    pub value: f64,
    pub bound: LogScalar,
}

pub fn lemma_i(a: f64, k: u32) -> Result<LemmaIResult> {
    if a < 1.0 || k < 1 {
        return Err(Error::Precondition(format!(
            "lemma_i needs a >= 1 and k >= 1, got a = {a}, k = {k}"
        )));
    }
    let kf = k as f64;
    let peak = (a * a - 1.0) * kf;
    if peak > OVERFLOW_GUARD {
        return Err(Error::Overflow {
            context: "lemma_i value not representable; compare against the bound in log space"
                .into(),
            value: peak,
            guard: OVERFLOW_GUARD,
        });
    }
    // substitution r = e^{-s}: integral of e^{(4a^2/k)s^2 - 2s} over [0, k/2]
    let c = 4.0 * a * a / kf;
    let value = adaptive_simpson(&|s: f64| (c * s * s - 2.0 * s).exp(), 0.0, kf / 2.0, 1e-12, 1e-12);
    Ok(LemmaIResult {
        value,
        bound: LogScalar::from_ln(std::f64::consts::LN_2 + peak),
    })
}

/// Both sides of the hitting-time estimate
/// int_0^A du / sqrt((e^{A^2}-A^2)-(e^{u^2}-u^2))
///   <= e^{-A^2/2} [A - 1/A + A/(A^2-1)] / sqrt(1 - 2/e).
#[derive(Clone, Copy, Debug)]
pub struct LemmaT3Result {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn lemma_t3(a_param: f64) -> Result<LemmaT3Result> {
    if a_param <= 1.0 {
        return Err(Error::Precondition(format!(
            "lemma_t3 needs A > 1, got {a_param}"
        )));
    }
    let lhs = descent_time_ln(a_param, 0.0).exp();
    let c = 1.0 / (1.0 - 2.0 / std::f64::consts::E).sqrt();
    let rhs = c
        * (-a_param * a_param / 2.0).exp()
        * (a_param - 1.0 / a_param + a_param / (a_param * a_param - 1.0));
    Ok(LemmaT3Result { lhs, rhs })
}

/// Everything the decoherence construction produces at one (k, eta).
#[derive(Clone, Debug)]
pub struct DecoherenceReport {
    pub k: u32,
    pub eta: f64,
    /// Initial amplitudes (1 + 1/k) sqrt(k/4pi) and sqrt(k/4pi).
    pub phi0: f64,
    pub psi0: f64,
    /// Hitting time of the level phi0 - 1/phi0, plain and log.
    pub t_k: f64,
    pub ln_t_k: f64,
    /// t_k e^{k/2} sqrt(k): the scale-free form of the hitting time.
    pub t_k_scaled: f64,
    /// Oscillation period of phi, plain and log.
    pub big_t_k: f64,
    pub ln_big_t_k: f64,
    /// T_k e^{(k/2)(1+1/k)^2} / sqrt(k): the scale-free period envelope.
    pub big_t_k_scaled: f64,
    pub phi_tk: f64,
    pub psi_tk: f64,
    pub vel_phi_sq: LogScalar,
    pub vel_psi_sq: LogScalar,
    /// |d/dt (phi - psi)(t_k)|^2.
    pub gap_sq: LogScalar,
    pub gap_over_ek: f64,
    /// (|vel_phi| + |vel_psi|) e^{-k/2}.
    pub vel_sum_over_ek_half: f64,
    /// (pi/4) eta^2 e^{-k} gap_sq: lower bound for the velocity-gap L2 norm
    /// on the agreement ball.
    pub cone_l2_lower: f64,
    /// t_k <= (eta/2) e^{-k/2}.
    pub tk_bound_ok: bool,
    /// The asymptotic construction applies (positive level, t_k < T_k/4,
    /// t_k below psi's quarter period).
    pub valid: bool,
}

/// Full decoherence computation; all large quantities handled in log space,
/// velocities recovered from the first integral (no time stepping).
pub fn decoherence(k: u32, eta: f64) -> Result<DecoherenceReport> {
    if k < 8 {
        return Err(Error::Precondition(format!(
            "decoherence needs k >= 8, got {k}"
        )));
    }
    if !(0.0 < eta && eta < 1.0) {
        return Err(Error::Precondition(format!("eta must lie in (0,1), got {eta}")));
    }
    let kf = k as f64;
    let sqrt4pi = FOUR_PI.sqrt();
    let phi0 = (1.0 + 1.0 / kf) * (kf / FOUR_PI).sqrt();
    let psi0 = (kf / FOUR_PI).sqrt();
    let u0_phi = sqrt4pi * phi0; // = (1 + 1/k) sqrt(k)
    let u0_psi = kf.sqrt();
    let level = phi0 - 1.0 / phi0;

    let invalid = |report_reason: &str| -> DecoherenceReport {
        let _ = report_reason;
        DecoherenceReport {
            k,
            eta,
            phi0,
            psi0,
            t_k: f64::NAN,
            ln_t_k: f64::NAN,
            t_k_scaled: f64::NAN,
            big_t_k: f64::NAN,
            ln_big_t_k: f64::NAN,
            big_t_k_scaled: f64::NAN,
            phi_tk: level,
            psi_tk: f64::NAN,
            vel_phi_sq: LogScalar::ZERO,
            vel_psi_sq: LogScalar::ZERO,
            gap_sq: LogScalar::ZERO,
            gap_over_ek: f64::NAN,
            vel_sum_over_ek_half: f64::NAN,
            cone_l2_lower: f64::NAN,
            tk_bound_ok: false,
            valid: false,
        }
    };

    if level <= 0.0 {
        // k <= 10: phi0 <= 1, no positive level to hit
        return Ok(invalid("level nonpositive"));
    }
    let u1_phi = sqrt4pi * level; // = u0_phi - 4 pi / u0_phi

    let ln_tk = descent_time_ln(u0_phi, u1_phi);
    let ln_tq_phi = descent_time_ln(u0_phi, 0.0);
    let ln_big_t = (4.0f64).ln() + ln_tq_phi;
    let ln_tq_psi = descent_time_ln(u0_psi, 0.0);
    if !(ln_tk < ln_tq_phi && ln_tk < ln_tq_psi) {
        return Ok(invalid("hitting time beyond a quarter period"));
    }

    // psi(t_k) by bisection on the level: descent time is strictly
    // decreasing in the level, so bisection is unconditionally safe.
    let mut lo = 0.0f64;
    let mut hi = u0_psi;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let t_mid = if mid >= u0_psi {
            f64::NEG_INFINITY
        } else {
            descent_time_ln(u0_psi, mid)
        };
        if t_mid > ln_tk {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u_psi_tk = 0.5 * (lo + hi);
    let psi_tk = u_psi_tk / sqrt4pi;

    // velocity^2 from the first integral: ydot^2 = (P(u0) - P(u)) / (4 pi)
    let p_diff = |u0: f64, u: f64| -> LogScalar {
        // e^{u0^2} - e^{u^2} - (u0^2 - u^2), as a LogScalar
        let exp_part = LogScalar::from_ln(u0 * u0 + ln1mexp(u * u - u0 * u0));
        let poly_part = LogScalar::from_f64(u0 * u0 - u * u);
        exp_part - poly_part
    };
    let four_pi_ls = LogScalar::from_f64(FOUR_PI);
    let vel_phi_sq = p_diff(u0_phi, u1_phi) / four_pi_ls;
    let vel_psi_sq = p_diff(u0_psi, u_psi_tk) / four_pi_ls;
    let gap = vel_phi_sq.sqrt() - vel_psi_sq.sqrt();
    let gap_sq = gap * gap;

    let gap_over_ek = (gap_sq.ln_abs() - kf).exp() * gap_sq.sign() as f64;
    let vel_sum = vel_phi_sq.sqrt() + vel_psi_sq.sqrt();
    let vel_sum_over_ek_half = (vel_sum.ln_abs() - kf / 2.0).exp();
    let cone_l2_lower = std::f64::consts::FRAC_PI_4 * eta * eta * gap_over_ek;
    let tk_bound_ok = ln_tk <= (eta / 2.0).ln() - kf / 2.0;

    Ok(DecoherenceReport {
        k,
        eta,
        phi0,
        psi0,
        t_k: ln_tk.exp(),
        ln_t_k: ln_tk,
        t_k_scaled: (ln_tk + kf / 2.0).exp() * kf.sqrt(),
        big_t_k: ln_big_t.exp(),
        ln_big_t_k: ln_big_t,
        big_t_k_scaled: (ln_big_t + (kf / 2.0) * (1.0 + 1.0 / kf).powi(2)).exp() / kf.sqrt(),
        phi_tk: level,
        psi_tk,
        vel_phi_sq,
        vel_psi_sq,
        gap_sq,
        gap_over_ek,
        vel_sum_over_ek_half,
        cone_l2_lower,
        tk_bound_ok,
        valid: true,
    })
}
