//! Backward light cones: section masks, restricted energies, discrete
//! residuals of the energy-flux and u-multiplier identities, and the
//! finite-speed-of-propagation agreement test between the PDE and the
//! plateau ODE.

use crate::concentrators::{build_fk, Amplitude, ConcentratorSpec};
use crate::error::{Error, Result};
use crate::functionals::energy_density_with_exponent;
use crate::grid::{Grid2D, GridField};
use crate::odelab;
use crate::pdesolver::{nonlinearity, run, SolverConfig};
use crate::quadrature::kahan_sum;
use crate::spectral::{forward_transform, gradient, WaveState};

/// Backward cone with apex (x0, apex_time); the section at time t < apex_time
/// has radius apex_time - t.
#[derive(Clone, Copy, Debug)]
pub struct ConeSpec {
    pub apex: (f64, f64),
    pub apex_time: f64,
}

/// Boolean section membership on a grid.
#[derive(Clone, Debug)]
pub struct Mask {
    grid: Grid2D,
    inside: Vec<bool>,
}

impl Mask {
    pub fn full(grid: Grid2D) -> Self {
        Mask {
            grid,
            inside: vec![true; grid.len()],
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Discrete area: h^2 x node count.
    pub fn area(&self) -> f64 {
        self.grid.h() * self.grid.h() * self.count() as f64
    }

    pub fn is_superset_of(&self, other: &Mask) -> bool {
        self.inside
            .iter()
            .zip(&other.inside)
            .all(|(a, b)| *a || !*b)
    }
}

/// Section D at time-before-apex `t` (radius t): nodes with |x - apex| < t.
pub fn cone_mask(spec: &ConeSpec, t: f64, grid: Grid2D) -> Result<Mask> {
    if t <= 0.0 {
        return Err(Error::Precondition(format!(
            "section radius must be positive, got {t}"
        )));
    }
    let (cx, cy) = spec.apex;
    let n = grid.n();
    let mut inside = vec![false; grid.len()];
    for i in 0..n {
        let dx = grid.coord(i) - cx;
        for j in 0..n {
            let dy = grid.coord(j) - cy;
            inside[grid.idx(i, j)] = (dx * dx + dy * dy).sqrt() < t;
        }
    }
    Ok(Mask { grid, inside })
}

/// h^2-weighted energy inside the mask.
pub fn restricted_energy(s: &WaveState, mask: &Mask, exponent: f64) -> Result<f64> {
    if s.grid() != mask.grid {
        return Err(Error::Config("state and mask on different grids".into()));
    }
    let density = energy_density_with_exponent(s, exponent)?;
    let h2 = mask.grid.h() * mask.grid.h();
    Ok(h2
        * kahan_sum(
            density
                .values()
                .iter()
                .zip(&mask.inside)
                .filter(|(_, &m)| m)
                .map(|(v, _)| *v),
        ))
}

/// Per-snapshot fields a cone diagnostic needs.
struct SnapFields {
    t: f64,
    u: GridField,
    v: GridField,
    gx: GridField,
    gy: GridField,
}

fn snap_fields(states: &[WaveState], s_time: f64, t_time: f64) -> Result<Vec<SnapFields>> {
    let eps = 1e-12;
    let mut out: Vec<SnapFields> = Vec::new();
    for s in states {
        let t = s.time();
        if t < s_time - eps || t > t_time + eps {
            continue;
        }
        let u = s.u_grid();
        let v = s.v_grid();
        let c = forward_transform(&u);
        let (gx, gy) = gradient(&c);
        out.push(SnapFields { t, u, v, gx, gy });
    }
    out.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    if out.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least two snapshots inside [{s_time}, {t_time}]"
        )));
    }
    Ok(out)
}

/// Outcome of a flux-identity check.
#[derive(Clone, Debug)]
pub struct FluxReport {
    /// Cone energy at S minus cone energy at T (nonnegative in the continuum).
    pub lhs: f64,
    /// Shell-discretized mantle integral of |n u_t - grad u|^2 + potential.
    pub rhs: f64,
    /// |lhs - rhs| / max(|lhs|, |rhs|); 0 when both sides vanish.
    pub rel_residual: f64,
    /// Cone energy per retained snapshot (for monotonicity checks).
    pub cone_energies: Vec<(f64, f64)>,
    /// Attached when the snapshot spacing is coarse against the grid.
    pub resolution_warning: Option<String>,
}

/// Discrete residual of the energy-flux identity between times S < T
/// (both below the apex time). Mantle integrals are approximated by volume
/// shells between consecutive section radii.
pub fn flux_identity_residual(
    states: &[WaveState],
    exponent: f64,
    spec: &ConeSpec,
    s_time: f64,
    t_time: f64,
) -> Result<FluxReport> {
    if !(s_time < t_time && t_time <= spec.apex_time) {
        return Err(Error::Precondition(format!(
            "need S < T <= apex time, got S = {s_time}, T = {t_time}, apex = {}",
            spec.apex_time
        )));
    }
    let snaps = snap_fields(states, s_time, t_time)?;
    let grid = snaps[0].u.grid();
    let h = grid.h();
    let h2 = h * h;
    let n = grid.n();
    let (cx, cy) = spec.apex;

    let radius = |t: f64| spec.apex_time - t;
    let pot = |u: f64| -> f64 {
        if exponent == 0.0 {
            0.0
        } else {
            let a = exponent * u * u;
            (a.exp_m1() - a) / exponent
        }
    };
    // q = |n u_t - grad u|^2 + potential, the mantle integrand
    let q_at = |f: &SnapFields, i: usize, j: usize| -> f64 {
        let dx = grid.coord(i) - cx;
        let dy = grid.coord(j) - cy;
        let r = (dx * dx + dy * dy).sqrt();
        let (nx, ny) = if r > 0.0 { (dx / r, dy / r) } else { (0.0, 0.0) };
        let idx = grid.idx(i, j);
        let v = f.v.values()[idx];
        let ax = nx * v - f.gx.values()[idx];
        let ay = ny * v - f.gy.values()[idx];
        ax * ax + ay * ay + pot(f.u.values()[idx])
    };
    let cone_energy = |f: &SnapFields, rho: f64| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            let dx = grid.coord(i) - cx;
            for j in 0..n {
                let dy = grid.coord(j) - cy;
                if (dx * dx + dy * dy).sqrt() < rho {
                    let idx = grid.idx(i, j);
                    let v = f.v.values()[idx];
                    let gx = f.gx.values()[idx];
                    let gy = f.gy.values()[idx];
                    sum += v * v + gx * gx + gy * gy + pot(f.u.values()[idx]);
                }
            }
        }
        h2 * sum
    };

    let cone_energies: Vec<(f64, f64)> = snaps
        .iter()
        .map(|f| (f.t, cone_energy(f, radius(f.t))))
        .collect();
    let lhs = cone_energies.first().unwrap().1 - cone_energies.last().unwrap().1;

    let mut rhs = 0.0;
    for w in snaps.windows(2) {
        let (f0, f1) = (&w[0], &w[1]);
        let (r_out, r_in) = (radius(f0.t), radius(f1.t));
        for i in 0..n {
            let dx = grid.coord(i) - cx;
            for j in 0..n {
                let dy = grid.coord(j) - cy;
                let r = (dx * dx + dy * dy).sqrt();
                if r > r_in && r <= r_out {
                    rhs += 0.5 * h2 * (q_at(f0, i, j) + q_at(f1, i, j));
                }
            }
        }
    }

    let scale = lhs.abs().max(rhs.abs());
    let rel_residual = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
    let max_dt = snaps
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .fold(0.0f64, f64::max);
    let resolution_warning = (max_dt > 4.0 * h).then(|| {
        format!("snapshot spacing {max_dt:.3e} is coarse against the grid spacing {h:.3e}")
    });
    Ok(FluxReport {
        lhs,
        rhs,
        rel_residual,
        cone_energies,
        resolution_warning,
    })
}

/// Outcome of a multiplier-identity check.
#[derive(Clone, Debug)]
pub struct MultiplierReport {
    /// int_{D(T)} u u_t - int_{D(S)} u u_t.
    pub boundary_term: f64,
    /// Space-time cone integral of |grad u|^2 - u_t^2 + u f(u).
    pub bulk_term: f64,
    /// Mantle shell integral of u (u_t - du/dn).
    pub mantle_term: f64,
    /// |sum of terms| / max term magnitude; 0 for the zero solution.
    pub rel_residual: f64,
    pub resolution_warning: Option<String>,
}

/// Discrete residual of the u-multiplier identity on the truncated cone.
pub fn multiplier_identity_residual(
    states: &[WaveState],
    exponent: f64,
    spec: &ConeSpec,
    s_time: f64,
    t_time: f64,
) -> Result<MultiplierReport> {
    if !(s_time < t_time && t_time <= spec.apex_time) {
        return Err(Error::Precondition(format!(
            "need S < T <= apex time, got S = {s_time}, T = {t_time}, apex = {}",
            spec.apex_time
        )));
    }
    let snaps = snap_fields(states, s_time, t_time)?;
    let grid = snaps[0].u.grid();
    let h = grid.h();
    let h2 = h * h;
    let n = grid.n();
    let (cx, cy) = spec.apex;
    let radius = |t: f64| spec.apex_time - t;

    let section_uv = |f: &SnapFields, rho: f64| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            let dx = grid.coord(i) - cx;
            for j in 0..n {
                let dy = grid.coord(j) - cy;
                if (dx * dx + dy * dy).sqrt() < rho {
                    let idx = grid.idx(i, j);
                    sum += f.u.values()[idx] * f.v.values()[idx];
                }
            }
        }
        h2 * sum
    };
    let boundary_term = section_uv(snaps.last().unwrap(), radius(snaps.last().unwrap().t))
        - section_uv(&snaps[0], radius(snaps[0].t));

    // bulk: trapezoid in time over the section integrals of
    // |grad u|^2 - u_t^2 + u^2 (e^{alpha u^2} - 1)
    let bulk_density = |f: &SnapFields| -> f64 {
        let rho = radius(f.t);
        let fu = nonlinearity(&f.u, exponent, crate::OVERFLOW_GUARD).unwrap_or_else(|_| {
            GridField::zeros(grid)
        });
        let mut sum = 0.0;
        for i in 0..n {
            let dx = grid.coord(i) - cx;
            for j in 0..n {
                let dy = grid.coord(j) - cy;
                if (dx * dx + dy * dy).sqrt() < rho {
                    let idx = grid.idx(i, j);
                    let v = f.v.values()[idx];
                    let gx = f.gx.values()[idx];
                    let gy = f.gy.values()[idx];
                    sum += gx * gx + gy * gy - v * v + f.u.values()[idx] * fu.values()[idx];
                }
            }
        }
        h2 * sum
    };
    let mut bulk_term = 0.0;
    let sections: Vec<f64> = snaps.iter().map(bulk_density).collect();
    for (w, pair) in snaps.windows(2).zip(sections.windows(2)) {
        let dt = w[1].t - w[0].t;
        bulk_term += 0.5 * dt * (pair[0] + pair[1]);
    }

    // mantle shells of u (u_t - du/dn)
    let mantle_at = |f: &SnapFields, i: usize, j: usize| -> f64 {
        let dx = grid.coord(i) - cx;
        let dy = grid.coord(j) - cy;
        let r = (dx * dx + dy * dy).sqrt();
        let (nx, ny) = if r > 0.0 { (dx / r, dy / r) } else { (0.0, 0.0) };
        let idx = grid.idx(i, j);
        f.u.values()[idx]
            * (f.v.values()[idx] - (nx * f.gx.values()[idx] + ny * f.gy.values()[idx]))
    };
    let mut mantle_term = 0.0;
    for w in snaps.windows(2) {
        let (f0, f1) = (&w[0], &w[1]);
        let (r_out, r_in) = (radius(f0.t), radius(f1.t));
        for i in 0..n {
            let dx = grid.coord(i) - cx;
            for j in 0..n {
                let dy = grid.coord(j) - cy;
                let r = (dx * dx + dy * dy).sqrt();
                if r > r_in && r <= r_out {
                    mantle_term += 0.5 * h2 * (mantle_at(f0, i, j) + mantle_at(f1, i, j));
                }
            }
        }
    }

    let resid = boundary_term + bulk_term + mantle_term;
    let scale = boundary_term
        .abs()
        .max(bulk_term.abs())
        .max(mantle_term.abs());
    let rel_residual = if scale == 0.0 { 0.0 } else { resid.abs() / scale };
    let max_dt = snaps
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .fold(0.0f64, f64::max);
    let resolution_warning = (max_dt > 4.0 * h).then(|| {
        format!("snapshot spacing {max_dt:.3e} is coarse against the grid spacing {h:.3e}")
    });
    Ok(MultiplierReport {
        boundary_term,
        bulk_term,
        mantle_term,
        rel_residual,
        resolution_warning,
    })
}

/// Finite-speed-of-propagation check: the PDE with concentrated plateau data
/// must track the plateau ODE at the center while the backward cone from the
/// plateau ball still covers it.
#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub k: u32,
    pub eta: f64,
    pub n: usize,
    /// Comparison window [0, 0.8 eta e^{-k/2}] (extended for the control).
    pub window: f64,
    pub max_deviation: f64,
    /// Center value / ODE pairs per snapshot.
    pub series: Vec<(f64, f64, f64)>,
    /// Whether the grid resolves the plateau.
    pub resolved: bool,
    /// Set for the zero-exponent control: the linear flow must depart from
    /// the constant ODE once the kink information reaches the center.
    pub negative_control: bool,
    pub regimes_differ: bool,
}

pub fn pde_ode_agreement(k: u32, eta: f64, grid: Grid2D, exponent: f64) -> Result<AgreementReport> {
    if k > 8 {
        return Err(Error::Precondition(format!(
            "grid-resolvable plateau needs k <= 8, got {k}"
        )));
    }
    let spec = ConcentratorSpec::new(k, eta, (0.5, 0.5), Amplitude::Plain)?;
    let resolved = spec.plateau_resolved(grid);
    let negative_control = exponent == 0.0;
    let plateau_time = spec.plateau_radius();
    let window = if negative_control {
        3.0 * plateau_time
    } else {
        0.8 * plateau_time
    };

    let u0 = build_fk(&spec, grid);
    let state = WaveState::new_grid(u0, GridField::zeros(grid), 0.0)?;
    let mut cfg = SolverConfig::for_grid(grid, window);
    cfg.exponent = exponent;
    let steps = (window / cfg.dt).ceil().max(4.0) as usize;
    cfg.dt = window / steps as f64;
    cfg.snapshot_every = 1;
    let result = run(&state, &cfg)?;
    if let Some(reason) = &result.truncated {
        return Err(Error::Precondition(format!("PDE run truncated: {reason}")));
    }

    // plateau ODE from psi(0) = sqrt(k/4pi), high-resolution Verlet
    let psi0 = (k as f64 / crate::FOUR_PI).sqrt();
    let ode = if exponent == 0.0 {
        None
    } else {
        Some(odelab::integrate(psi0, window, cfg.dt / 64.0, odelab::Method::Verlet)?)
    };

    let mut series = Vec::with_capacity(result.snapshots.len());
    let mut max_deviation = 0.0f64;
    for (i, s) in result.snapshots.iter().enumerate() {
        let t = s.time();
        let center = s.u_grid().interpolate(0.5, 0.5);
        let psi = match &ode {
            Some(tr) => {
                let idx = ((t / window) * (tr.samples.len() - 1) as f64).round() as usize;
                tr.samples[idx.min(tr.samples.len() - 1)].y
            }
            None => psi0,
        };
        let dev = (center - psi).abs();
        if i == 0 {
            // deviation vanishes at t = 0 by construction (up to interpolation)
            debug_assert!(dev < 1e-10);
        }
        max_deviation = max_deviation.max(dev);
        series.push((t, center, psi));
    }

    let regimes_differ = negative_control && max_deviation > 0.05 * psi0;
    Ok(AgreementReport {
        k,
        eta,
        n: grid.n(),
        window,
        max_deviation,
        series,
        resolved,
        negative_control,
        regimes_differ,
    })
}
