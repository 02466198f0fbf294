//! The Moser-Trudinger concentrating family f_k and the initial data built
//! from it, with closed-form reference values.
//!
//! The profile is the three-piece radial function
//!
//! ```text
//! f_k(x) = sqrt(k/4pi)            |x| <= e^{-k/2}
//!          -log|x| / sqrt(k pi)   e^{-k/2} <= |x| <= 1
//!          0                      |x| >= 1
//! ```
//!
//! scaled into a support disk and multiplied by a family-dependent amplitude.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, GridField};
use crate::logscalar::{ln1mexp, LogScalar};
use crate::quadrature::adaptive_simpson;
use crate::spectral::WaveState;
use crate::FOUR_PI;

/// Amplitude variants of the family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Amplitude {
    /// f_k as is.
    Plain,
    /// (1 + 1/k) f_k.
    Plus,
    /// (1 - 2a/k) f_k(a x); the support scale becomes 1/a.
    MinusScaled { a: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct ConcentratorSpec {
    pub k: u32,
    pub eta: f64,
    pub center: (f64, f64),
    pub amplitude: Amplitude,
}

impl ConcentratorSpec {
    pub fn new(k: u32, eta: f64, center: (f64, f64), amplitude: Amplitude) -> Result<Self> {
        if k < 2 {
            return Err(Error::Precondition(format!("concentrator needs k >= 2, got {k}")));
        }
        if let Amplitude::MinusScaled { a } = amplitude {
            if a <= 1.0 {
                return Err(Error::Precondition(format!("scale a must exceed 1, got {a}")));
            }
            if (1.0 - 2.0 * a / k as f64).abs() < 1e-14 {
                return Err(Error::Precondition(format!(
                    "amplitude factor 1 - 2a/k vanishes at k = {k}, a = {a}"
                )));
            }
        } else if !(0.0 < eta && eta < 1.0) {
            return Err(Error::Precondition(format!("eta must lie in (0,1), got {eta}")));
        }
        let spec = ConcentratorSpec { k, eta, center, amplitude };
        let r = spec.scale();
        let (cx, cy) = center;
        if cx - r <= 0.0 || cx + r >= 1.0 || cy - r <= 0.0 || cy + r >= 1.0 {
            return Err(Error::Domain(format!(
                "support disk B(({cx}, {cy}), {r}) leaves the unit square"
            )));
        }
        Ok(spec)
    }

    /// Support radius: eta, or 1/a for the minus_scaled family.
    pub fn scale(&self) -> f64 {
        match self.amplitude {
            Amplitude::MinusScaled { a } => 1.0 / a,
            _ => self.eta,
        }
    }

    /// Multiplier in front of the profile.
    pub fn amplitude_factor(&self) -> f64 {
        let k = self.k as f64;
        match self.amplitude {
            Amplitude::Plain => 1.0,
            Amplitude::Plus => 1.0 + 1.0 / k,
            Amplitude::MinusScaled { a } => 1.0 - 2.0 * a / k,
        }
    }

    /// Plateau height amplitude_factor * sqrt(k/4pi).
    pub fn plateau_value(&self) -> f64 {
        self.amplitude_factor() * (self.k as f64 / FOUR_PI).sqrt()
    }

    /// Plateau radius in physical units: scale * e^{-k/2}.
    pub fn plateau_radius(&self) -> f64 {
        self.scale() * (-(self.k as f64) / 2.0).exp()
    }

    /// Whether a grid resolves the plateau (h <= plateau radius / 2).
    pub fn plateau_resolved(&self, grid: Grid2D) -> bool {
        grid.h() <= self.plateau_radius() / 2.0
    }
}

/// The unscaled radial profile f_k at radius r (support radius 1).
pub fn fk_profile(k: u32, r: f64) -> f64 {
    let kf = k as f64;
    if r >= 1.0 {
        0.0
    } else if r <= (-kf / 2.0).exp() {
        (kf / FOUR_PI).sqrt()
    } else {
        -r.ln() / (kf * std::f64::consts::PI).sqrt()
    }
}

/// Nodewise samples of the amplitude-scaled profile.
pub fn build_fk(spec: &ConcentratorSpec, grid: Grid2D) -> GridField {
    let amp = spec.amplitude_factor();
    let inv_scale = 1.0 / spec.scale();
    let (cx, cy) = spec.center;
    GridField::from_fn(grid, |x, y| {
        let r = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() * inv_scale;
        amp * fk_profile(spec.k, r)
    })
}

/// Closed-form and quadrature reference values for a spec.
#[derive(Clone, Copy, Debug)]
pub struct AnalyticReference {
    /// ||grad u||^2 in closed form: amplitude_factor^2 (scale-invariant).
    pub dirichlet_sq: f64,
    /// Upper bound amp^2 scale^2 / (2k) for ||u||^2_{L2}.
    pub l2_sq_bound: f64,
    /// int (e^{4 pi u^2} - 1) dx by adaptive radial quadrature.
    pub mt_functional: f64,
}

/// Exact squared L2 norm:
/// amp^2 scale^2 (1/2k) (1 - e^{-k} (k+1)).
pub fn l2_norm_sq_exact(spec: &ConcentratorSpec) -> f64 {
    let k = spec.k as f64;
    let amp = spec.amplitude_factor();
    let s = spec.scale();
    amp * amp * s * s / (2.0 * k) * (1.0 - (-k).exp() * (k + 1.0))
}

/// Annulus integral int_0^{k/2} (e^{(4 amp^2 / k) s^2} - 1) e^{-2s} ds
/// (the r = e^{-s} substitution flattens the log^2 integrand).
fn annulus_integral(k: f64, amp: f64) -> f64 {
    let c = 4.0 * amp * amp / k;
    adaptive_simpson(
        &|s: f64| (c * s * s - 2.0 * s).exp() - (-2.0 * s).exp(),
        0.0,
        k / 2.0,
        1e-12,
        1e-12,
    )
}

pub fn analytic_reference(spec: &ConcentratorSpec) -> AnalyticReference {
    let k = spec.k as f64;
    let amp = spec.amplitude_factor();
    let s = spec.scale();
    let dirichlet_sq = amp * amp;
    let l2_sq_bound = amp * amp * s * s / (2.0 * k);
    // (1/4pi) * mt = s^2 (annulus/2 + (e^{(amp^2-1)k} - e^{-k})/4)
    let plateau = ((amp * amp - 1.0) * k).exp() - (-k).exp();
    let mt_functional = FOUR_PI * s * s * (annulus_integral(k, amp) / 2.0 + plateau / 4.0);
    AnalyticReference {
        dirichlet_sq,
        l2_sq_bound,
        mt_functional,
    }
}

/// Quadrature-pipeline total energy of the static state (u, 0):
/// amp^2 + (1/4pi) mt - ||u||^2_{L2}. Exact up to the 1e-12 radial
/// quadrature; no grid involved.
pub fn quadrature_energy(spec: &ConcentratorSpec) -> f64 {
    let r = analytic_reference(spec);
    r.dirichlet_sq + r.mt_functional / FOUR_PI - l2_norm_sq_exact(spec)
}

/// Initial datum of the supercritical growth experiment:
/// u = (1 - 2a/k) f_k(a .) centered in the square, velocity 0, t = 0.
pub fn supercritical_growth_data(k: u32, a: f64, grid: Grid2D) -> Result<WaveState> {
    let spec = ConcentratorSpec::new(k, 0.5, (0.5, 0.5), Amplitude::MinusScaled { a })?;
    let u = build_fk(&spec, grid);
    WaveState::new_grid(u, GridField::zeros(grid), 0.0)
}

/// Closed-form cone lower bound for the dual norm of the nonlinearity on the
/// free-wave solution with minus_scaled data:
/// plateau nonlinearity value x (e^{-k/2}/a)^{2/q + 1/p}, in log space.
///
/// `p` and `q` may be `f64::INFINITY`.
pub fn dual_strichartz_lower_bound(k: u32, a: f64, p: f64, q: f64) -> Result<LogScalar> {
    if k < 4 {
        return Err(Error::Precondition(format!("k >= 4 required, got {k}")));
    }
    if a <= 1.0 {
        return Err(Error::Precondition(format!("a > 1 required, got {a}")));
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    if !(p >= 1.0 && q >= 1.0) || inv_p + 2.0 * inv_q > 2.0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "inadmissible exponents: need p,q >= 1 and 1/p + 2/q <= 2, got p = {p}, q = {q}"
        )));
    }
    let kf = k as f64;
    let amp = 1.0 - 2.0 * a / kf;
    if amp.abs() < 1e-14 {
        return Err(Error::Precondition(format!(
            "amplitude factor vanishes at k = {k}, a = {a}"
        )));
    }
    // |f(plateau)| = |amp| sqrt(k/4pi) (e^{amp^2 k} - 1)
    let x = amp * amp * kf;
    let ln_fp = (amp.abs() * (kf / FOUR_PI).sqrt()).ln() + x + ln1mexp(-x);
    let measure_exp = 2.0 * inv_q + inv_p;
    Ok(LogScalar::from_ln(ln_fp + measure_exp * (-kf / 2.0 - a.ln())))
}
