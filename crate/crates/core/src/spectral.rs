//! Laplacian eigenbasis on the unit square: grid <-> spectral transforms, the
//! band projector, the exact free-wave propagator and the Dirichlet norm.
//!
//! Dirichlet basis: e_{mk}(x,y) = 2 sin(m pi x) sin(k pi y), m,k = 1..n,
//! eigenvalue lambda^2 = pi^2 (m^2 + k^2). Neumann basis: tensor cosines
//! with the constant mode at half weight, m,k = 0..n-1. Both are exactly
//! orthonormal in the h^2-weighted node inner product, so the discrete
//! transforms are unitary and Parseval holds to roundoff.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Grid2D, GridField};
use crate::quadrature::kahan_sum;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// Coefficients in the Laplacian eigenbasis.
///
/// Dirichlet: entry `(m-1)*n + (k-1)` multiplies e_{mk}. Neumann: entry
/// `m*n + k` multiplies the (m,k) cosine mode, m,k starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid2D) -> Self {
        SpectralField {
            grid,
            coeffs: vec![0.0; grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid2D, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Config(format!(
                "coefficient length {} does not match grid {}x{}",
                coeffs.len(),
                grid.n(),
                grid.n()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Unit coefficient on a single mode. Dirichlet modes are 1-based,
    /// Neumann modes 0-based.
    pub fn unit_mode(grid: Grid2D, m: usize, k: usize) -> Result<Self> {
        let mut s = Self::zeros(grid);
        let (mi, ki) = match grid.bc() {
            BoundaryKind::Dirichlet => {
                if m < 1 || k < 1 || m > grid.n() || k > grid.n() {
                    return Err(Error::Config(format!("Dirichlet mode ({m},{k}) out of range")));
                }
                (m - 1, k - 1)
            }
            BoundaryKind::Neumann => {
                if m >= grid.n() || k >= grid.n() {
                    return Err(Error::Config(format!("Neumann mode ({m},{k}) out of range")));
                }
                (m, k)
            }
        };
        s.coeffs[mi * grid.n() + ki] = 1.0;
        Ok(s)
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// lambda^2 of the mode stored at flat index `idx`.
    #[inline]
    pub fn eigenvalue_sq_at(&self, idx: usize) -> f64 {
        let n = self.grid.n();
        let (i, j) = (idx / n, idx % n);
        match self.grid.bc() {
            BoundaryKind::Dirichlet => {
                let (m, k) = ((i + 1) as f64, (j + 1) as f64);
                PI * PI * (m * m + k * k)
            }
            BoundaryKind::Neumann => {
                let (m, k) = (i as f64, j as f64);
                PI * PI * (m * m + k * k)
            }
        }
    }

    /// Sum of squared coefficients = squared L2 norm of the field.
    pub fn l2_norm_sq(&self) -> f64 {
        kahan_sum(self.coeffs.iter().map(|c| c * c))
    }
}

/// In-place square transpose.
fn transpose(n: usize, data: &mut [f64]) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// DST-I along contiguous rows: row -> S with S[m-1] = sum_i row[i-1] sin(pi i m/(n+1)).
fn dst1_rows(n: usize, data: &mut [f64]) {
    let l = 2 * (n + 1);
    let fft = plan(l);
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_mut(n) {
        buf[0] = Complex::new(0.0, 0.0);
        buf[n + 1] = Complex::new(0.0, 0.0);
        for i in 0..n {
            buf[i + 1] = Complex::new(row[i], 0.0);
            buf[l - 1 - i] = Complex::new(-row[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for m in 0..n {
            row[m] = -0.5 * buf[m + 1].im;
        }
    }
}

/// Cosine synthesis along contiguous rows at Dirichlet interior nodes:
/// row of coefficients a_1..a_n -> C[i-1] = sum_m a_m cos(pi i m/(n+1)).
fn cos_synth_rows(n: usize, data: &mut [f64]) {
    let l = 2 * (n + 1);
    let fft = plan(l);
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_mut(n) {
        buf[0] = Complex::new(0.0, 0.0);
        buf[n + 1] = Complex::new(0.0, 0.0);
        for m in 0..n {
            buf[m + 1] = Complex::new(row[m], 0.0);
            buf[l - 1 - m] = Complex::new(row[m], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n {
            row[i] = 0.5 * buf[i + 1].re;
        }
    }
}

/// DCT-II along contiguous rows at Neumann midpoint nodes:
/// row -> C[m] = sum_i row[i] cos(pi m (i + 1/2)/n), m = 0..n-1.
fn dct2_rows(n: usize, data: &mut [f64]) {
    let l = 4 * n;
    let fft = plan(l);
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_mut(n) {
        buf.fill(Complex::new(0.0, 0.0));
        for i in 0..n {
            buf[2 * i + 1] = Complex::new(row[i], 0.0);
            buf[l - 1 - 2 * i] = Complex::new(row[i], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for m in 0..n {
            row[m] = 0.5 * buf[m].re;
        }
    }
}

/// Cosine synthesis at Neumann midpoint nodes:
/// coefficients b_0..b_{n-1} -> f[i] = sum_m b_m cos(pi m (i + 1/2)/n).
fn cos_synth_mid_rows(n: usize, data: &mut [f64]) {
    let l = 4 * n;
    let fft = plan(l);
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_mut(n) {
        buf.fill(Complex::new(0.0, 0.0));
        buf[0] = Complex::new(row[0], 0.0);
        for m in 1..n {
            buf[m] = Complex::new(0.5 * row[m], 0.0);
            buf[l - m] = Complex::new(0.5 * row[m], 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n {
            row[i] = buf[2 * i + 1].re;
        }
    }
}

/// Sine synthesis at Neumann midpoint nodes:
/// coefficients a_1..a_{n-1} (a[0] unused) -> f[i] = sum_m a_m sin(pi m (i + 1/2)/n).
fn sin_synth_mid_rows(n: usize, data: &mut [f64]) {
    let l = 4 * n;
    let fft = plan(l);
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_mut(n) {
        buf.fill(Complex::new(0.0, 0.0));
        for m in 1..n {
            buf[m] = Complex::new(0.0, 0.5 * row[m]);
            buf[l - m] = Complex::new(0.0, -0.5 * row[m]);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n {
            row[i] = buf[2 * i + 1].re;
        }
    }
}

fn apply_both_axes(n: usize, data: &mut [f64], f: fn(usize, &mut [f64])) {
    f(n, data); // along y (contiguous)
    transpose(n, data);
    f(n, data); // along x
    transpose(n, data);
}

/// Expand a grid field in the eigenbasis. Exact inverse of
/// [`inverse_transform`] up to roundoff.
pub fn forward_transform(f: &GridField) -> SpectralField {
    let grid = f.grid();
    let n = grid.n();
    let mut data = f.values().to_vec();
    match grid.bc() {
        BoundaryKind::Dirichlet => {
            apply_both_axes(n, &mut data, dst1_rows);
            let s = 2.0 * grid.h() * grid.h();
            for c in &mut data {
                *c *= s;
            }
        }
        BoundaryKind::Neumann => {
            apply_both_axes(n, &mut data, dct2_rows);
            // c_{mk} = h^2 w_m w_k C_{mk}, w_0 = 1, w_m = sqrt(2)
            let h2 = grid.h() * grid.h();
            let s2 = std::f64::consts::SQRT_2;
            for m in 0..n {
                let wm = if m == 0 { 1.0 } else { s2 };
                for k in 0..n {
                    let wk = if k == 0 { 1.0 } else { s2 };
                    data[m * n + k] *= h2 * wm * wk;
                }
            }
        }
    }
    SpectralField { grid, coeffs: data }
}

/// Evaluate the eigenexpansion on the grid nodes.
pub fn inverse_transform(c: &SpectralField) -> GridField {
    let grid = c.grid();
    let n = grid.n();
    let mut data = c.coeffs().to_vec();
    match grid.bc() {
        BoundaryKind::Dirichlet => {
            apply_both_axes(n, &mut data, dst1_rows);
            for v in &mut data {
                *v *= 2.0;
            }
        }
        BoundaryKind::Neumann => {
            let s2 = std::f64::consts::SQRT_2;
            for m in 0..n {
                let wm = if m == 0 { 1.0 } else { s2 };
                for k in 0..n {
                    let wk = if k == 0 { 1.0 } else { s2 };
                    data[m * n + k] *= wm * wk;
                }
            }
            apply_both_axes(n, &mut data, cos_synth_mid_rows);
        }
    }
    GridField::from_values(grid, data).expect("sizes match by construction")
}

/// Nodewise gradient (u_x, u_y) of the eigenexpansion, via differentiated
/// synthesis (spectral accuracy).
pub fn gradient(c: &SpectralField) -> (GridField, GridField) {
    let grid = c.grid();
    let n = grid.n();
    match grid.bc() {
        BoundaryKind::Dirichlet => {
            // u = sum c 2 sin(m pi x) sin(k pi y)
            // u_x = 2 sum (m pi c) cos(m pi x) sin(k pi y)
            let mut gx = vec![0.0; n * n];
            let mut gy = vec![0.0; n * n];
            for m in 0..n {
                let fm = (m + 1) as f64 * PI;
                for k in 0..n {
                    let fk = (k + 1) as f64 * PI;
                    gx[m * n + k] = fm * c.coeffs[m * n + k];
                    gy[m * n + k] = fk * c.coeffs[m * n + k];
                }
            }
            // gx: sine synthesis in y, cosine synthesis in x
            dst1_rows(n, &mut gx);
            transpose(n, &mut gx);
            cos_synth_rows(n, &mut gx);
            transpose(n, &mut gx);
            // gy: cosine synthesis in y, sine synthesis in x
            cos_synth_rows(n, &mut gy);
            transpose(n, &mut gy);
            dst1_rows(n, &mut gy);
            transpose(n, &mut gy);
            for v in gx.iter_mut().chain(gy.iter_mut()) {
                *v *= 2.0;
            }
            (
                GridField::from_values(grid, gx).unwrap(),
                GridField::from_values(grid, gy).unwrap(),
            )
        }
        BoundaryKind::Neumann => {
            // u = sum c w_m w_k cos cos; u_x = -sum (m pi c w_m w_k) sin(m pi x) cos(k pi y)
            let s2 = std::f64::consts::SQRT_2;
            let mut gx = vec![0.0; n * n];
            let mut gy = vec![0.0; n * n];
            for m in 0..n {
                let wm = if m == 0 { 1.0 } else { s2 };
                for k in 0..n {
                    let wk = if k == 0 { 1.0 } else { s2 };
                    let b = c.coeffs[m * n + k] * wm * wk;
                    gx[m * n + k] = -(m as f64) * PI * b;
                    gy[m * n + k] = -(k as f64) * PI * b;
                }
            }
            // gx: cos synthesis along y, sin synthesis along x
            cos_synth_mid_rows(n, &mut gx);
            transpose(n, &mut gx);
            sin_synth_mid_rows(n, &mut gx);
            transpose(n, &mut gx);
            // gy: sin synthesis along y, cos synthesis along x
            sin_synth_mid_rows(n, &mut gy);
            transpose(n, &mut gy);
            cos_synth_mid_rows(n, &mut gy);
            transpose(n, &mut gy);
            (
                GridField::from_values(grid, gx).unwrap(),
                GridField::from_values(grid, gy).unwrap(),
            )
        }
    }
}

/// Band projector: keeps modes with lambda in [lambda, lambda + width).
pub fn chi_projector(c: &SpectralField, lambda: f64, width: f64) -> Result<SpectralField> {
    if lambda < 0.0 || width <= 0.0 {
        return Err(Error::Precondition(format!(
            "chi_projector needs lambda >= 0 and width > 0, got ({lambda}, {width})"
        )));
    }
    let mut out = c.clone();
    for idx in 0..out.coeffs.len() {
        let l = out.eigenvalue_sq_at(idx).sqrt();
        if !(l >= lambda && l < lambda + width) {
            out.coeffs[idx] = 0.0;
        }
    }
    Ok(out)
}

/// H^1_D seminorm squared: sum lambda^2 c^2.
pub fn dirichlet_norm_sq(c: &SpectralField) -> f64 {
    kahan_sum(
        c.coeffs
            .iter()
            .enumerate()
            .map(|(idx, v)| c.eigenvalue_sq_at(idx) * v * v),
    )
}

/// Displacement/velocity pair under the wave flow; both components share one
/// grid and one representation.
#[derive(Clone, Debug)]
pub enum WaveState {
    Grid { u: GridField, v: GridField, t: f64 },
    Spectral { u: SpectralField, v: SpectralField, t: f64 },
}

impl WaveState {
    pub fn new_grid(u: GridField, v: GridField, t: f64) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(Error::Config("u and v on different grids".into()));
        }
        Ok(WaveState::Grid { u, v, t })
    }

    pub fn new_spectral(u: SpectralField, v: SpectralField, t: f64) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(Error::Config("u and v on different grids".into()));
        }
        Ok(WaveState::Spectral { u, v, t })
    }

    pub fn grid(&self) -> Grid2D {
        match self {
            WaveState::Grid { u, .. } => u.grid(),
            WaveState::Spectral { u, .. } => u.grid(),
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            WaveState::Grid { t, .. } | WaveState::Spectral { t, .. } => *t,
        }
    }

    pub fn set_time(&mut self, time: f64) {
        match self {
            WaveState::Grid { t, .. } | WaveState::Spectral { t, .. } => *t = time,
        }
    }

    pub fn to_spectral(&self) -> WaveState {
        match self {
            WaveState::Spectral { .. } => self.clone(),
            WaveState::Grid { u, v, t } => WaveState::Spectral {
                u: forward_transform(u),
                v: forward_transform(v),
                t: *t,
            },
        }
    }

    pub fn to_grid(&self) -> WaveState {
        match self {
            WaveState::Grid { .. } => self.clone(),
            WaveState::Spectral { u, v, t } => WaveState::Grid {
                u: inverse_transform(u),
                v: inverse_transform(v),
                t: *t,
            },
        }
    }

    /// Displacement on the grid (transforming if needed).
    pub fn u_grid(&self) -> GridField {
        match self {
            WaveState::Grid { u, .. } => u.clone(),
            WaveState::Spectral { u, .. } => inverse_transform(u),
        }
    }

    /// Velocity on the grid (transforming if needed).
    pub fn v_grid(&self) -> GridField {
        match self {
            WaveState::Grid { v, .. } => v.clone(),
            WaveState::Spectral { v, .. } => inverse_transform(v),
        }
    }
}

/// Exact linear evolution by dt: per-mode rotation
/// c <- cos(lambda dt) c + sin(lambda dt)/lambda d,
/// d <- -lambda sin(lambda dt) c + cos(lambda dt) d,
/// with the lambda = 0 (Neumann constant) mode taking c <- c + dt d.
pub fn free_propagate(s: &WaveState, dt: f64) -> WaveState {
    let spec = s.to_spectral();
    let (mut u, mut v, t) = match spec {
        WaveState::Spectral { u, v, t } => (u, v, t),
        WaveState::Grid { .. } => unreachable!(),
    };
    for idx in 0..u.coeffs.len() {
        let l2 = u.eigenvalue_sq_at(idx);
        let c = u.coeffs[idx];
        let d = v.coeffs[idx];
        if l2 == 0.0 {
            u.coeffs[idx] = c + dt * d;
        } else {
            let l = l2.sqrt();
            let (sin, cos) = (l * dt).sin_cos();
            u.coeffs[idx] = cos * c + sin / l * d;
            v.coeffs[idx] = -l * sin * c + cos * d;
        }
    }
    WaveState::Spectral { u, v, t: t + dt }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn rand_field(grid: Grid2D, seed: u64) -> GridField {
        let mut s = Stream::new(seed);
        let vals = (0..grid.len()).map(|_| s.next_symmetric()).collect();
        GridField::from_values(grid, vals).unwrap()
    }

    /// O(n^4) direct basis summation, the transform oracle.
    fn direct_forward(f: &GridField) -> Vec<f64> {
        let grid = f.grid();
        let n = grid.n();
        let h2 = grid.h() * grid.h();
        let mut out = vec![0.0; n * n];
        for mi in 0..n {
            for ki in 0..n {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let (x, y) = (grid.coord(i), grid.coord(j));
                        let basis = match grid.bc() {
                            BoundaryKind::Dirichlet => {
                                2.0 * ((mi + 1) as f64 * PI * x).sin()
                                    * ((ki + 1) as f64 * PI * y).sin()
                            }
                            BoundaryKind::Neumann => {
                                let wm = if mi == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                                let wk = if ki == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                                wm * wk * (mi as f64 * PI * x).cos() * (ki as f64 * PI * y).cos()
                            }
                        };
                        acc += f.at(i, j) * basis;
                    }
                }
                out[mi * n + ki] = h2 * acc;
            }
        }
        out
    }

    #[test]
    fn forward_matches_direct_summation_n8() {
        for bc in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
            let grid = Grid2D::new(8, bc).unwrap();
            let f = rand_field(grid, 11);
            let fast = forward_transform(&f);
            let direct = direct_forward(&f);
            for (a, b) in fast.coeffs().iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12, "{bc:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        for bc in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
            for n in [8, 17, 64] {
                let grid = Grid2D::new(n, bc).unwrap();
                let f = rand_field(grid, 3 + n as u64);
                let c = forward_transform(&f);
                let back = inverse_transform(&c);
                let scale = f.linf_norm();
                for (a, b) in back.values().iter().zip(f.values()) {
                    assert!((a - b).abs() <= 1e-12 * scale, "{bc:?} n={n}");
                }
                let p1 = f.l2_norm_sq();
                let p2 = c.l2_norm_sq();
                assert!((p1 - p2).abs() <= 1e-10 * p1, "{bc:?} n={n}: {p1} vs {p2}");
            }
        }
    }

    #[test]
    fn unit_mode_synthesizes_basis_function() {
        let grid = Grid2D::new(16, BoundaryKind::Dirichlet).unwrap();
        let c = SpectralField::unit_mode(grid, 2, 3).unwrap();
        let f = inverse_transform(&c);
        for i in 0..16 {
            for j in 0..16 {
                let want = 2.0 * (2.0 * PI * grid.coord(i)).sin() * (3.0 * PI * grid.coord(j)).sin();
                assert!((f.at(i, j) - want).abs() < 1e-12);
            }
        }
        // and the forward direction puts unit mass at (2,3)
        let back = forward_transform(&f);
        for (idx, v) in back.coeffs().iter().enumerate() {
            let want = if idx == (2 - 1) * 16 + (3 - 1) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_round_trips_to_zero() {
        let grid = Grid2D::new(8, BoundaryKind::Dirichlet).unwrap();
        let z = forward_transform(&GridField::zeros(grid));
        assert!(z.coeffs().iter().all(|&c| c == 0.0));
        let f = inverse_transform(&SpectralField::zeros(grid));
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_matches_analytic_single_mode() {
        let grid = Grid2D::new(32, BoundaryKind::Dirichlet).unwrap();
        let c = SpectralField::unit_mode(grid, 3, 2).unwrap();
        let (gx, gy) = gradient(&c);
        for i in 0..32 {
            for j in 0..32 {
                let (x, y) = (grid.coord(i), grid.coord(j));
                let wx = 2.0 * 3.0 * PI * (3.0 * PI * x).cos() * (2.0 * PI * y).sin();
                let wy = 2.0 * 2.0 * PI * (3.0 * PI * x).sin() * (2.0 * PI * y).cos();
                assert!((gx.at(i, j) - wx).abs() < 1e-10);
                assert!((gy.at(i, j) - wy).abs() < 1e-10);
            }
        }
        // Neumann: u = sqrt(2) cos(pi x) constant in y
        let gridn = Grid2D::new(32, BoundaryKind::Neumann).unwrap();
        let cn = SpectralField::unit_mode(gridn, 1, 0).unwrap();
        let (gx, gy) = gradient(&cn);
        for i in 0..32 {
            for j in 0..32 {
                let x = gridn.coord(i);
                let wx = -std::f64::consts::SQRT_2 * PI * (PI * x).sin();
                assert!((gx.at(i, j) - wx).abs() < 1e-10);
                assert!(gy.at(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn neumann_gradient_quadrature_is_exact() {
        // On midpoint nodes the sine/cosine products are exactly orthogonal,
        // so h^2 sum |grad u|^2 = sum lambda^2 c^2 to roundoff.
        let grid = Grid2D::new(24, BoundaryKind::Neumann).unwrap();
        let mut s = Stream::new(5);
        let mut c = SpectralField::zeros(grid);
        for idx in 0..grid.len() {
            c.coeffs_mut()[idx] = s.next_symmetric();
        }
        let (gx, gy) = gradient(&c);
        let direct = gx.l2_norm_sq() + gy.l2_norm_sq();
        let viaspec = dirichlet_norm_sq(&c);
        assert!(
            (direct - viaspec).abs() < 1e-10 * viaspec,
            "{direct} vs {viaspec}"
        );
    }

    #[test]
    fn dirichlet_gradient_quadrature_needs_boundary_strip() {
        // Interior nodes miss the boundary trace of (normal derivative)^2;
        // the trapezoid rule including boundary nodes restores exactness.
        let n = 16;
        let grid = Grid2D::new(n, BoundaryKind::Dirichlet).unwrap();
        let mut s = Stream::new(9);
        let mut c = SpectralField::zeros(grid);
        for idx in 0..grid.len() {
            c.coeffs_mut()[idx] = s.next_symmetric();
        }
        let (gx, gy) = gradient(&c);
        let interior = gx.l2_norm_sq() + gy.l2_norm_sq();
        let exact = dirichlet_norm_sq(&c);
        // boundary strip by direct summation of the normal derivative
        // (corners contribute zero: both partials vanish there)
        let h = grid.h();
        let mut strip = 0.0;
        for j in 0..n {
            let y = grid.coord(j);
            let mut d_x0 = 0.0;
            let mut d_x1 = 0.0;
            let mut d_y0 = 0.0;
            let mut d_y1 = 0.0;
            for m in 1..=n {
                for k in 1..=n {
                    let a = c.coeffs()[(m - 1) * n + (k - 1)];
                    let (fm, fk) = (m as f64 * PI, k as f64 * PI);
                    d_x0 += 2.0 * a * fm * (fk * y).sin();
                    d_x1 += 2.0 * a * fm * (fm).cos() * (fk * y).sin();
                    d_y0 += 2.0 * a * fk * (fm * y).sin();
                    d_y1 += 2.0 * a * fk * (fk).cos() * (fm * y).sin();
                }
            }
            strip += 0.5 * (d_x0 * d_x0 + d_x1 * d_x1 + d_y0 * d_y0 + d_y1 * d_y1);
        }
        let corrected = interior + h * h * strip;
        assert!(
            (corrected - exact).abs() < 1e-9 * exact,
            "corrected {corrected} vs exact {exact} (interior alone {interior})"
        );
        // and the interior-only quadrature really is O(h) short
        assert!(interior < exact);
    }

    #[test]
    fn chi_projector_band_selection() {
        let grid = Grid2D::new(8, BoundaryKind::Dirichlet).unwrap();
        let mut c = SpectralField::zeros(grid);
        c.coeffs_mut().fill(1.0);
        // identity when the band covers everything
        let all = chi_projector(&c, 0.0, 1e9).unwrap();
        assert_eq!(all.coeffs(), c.coeffs());
        // empty band
        let none = chi_projector(&c, 1e6, 1.0).unwrap();
        assert!(none.coeffs().iter().all(|&v| v == 0.0));
        // band around lambda_{11} = pi sqrt(2): only (1,1) survives
        let lone = chi_projector(&c, PI * std::f64::consts::SQRT_2 - 0.05, 0.1).unwrap();
        let survivors: Vec<usize> = lone
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(survivors, vec![0]);
    }

    #[test]
    fn chi_projector_idempotent_symmetric_partition() {
        let grid = Grid2D::new(12, BoundaryKind::Dirichlet).unwrap();
        let u = forward_transform(&rand_field(grid, 21));
        let v = forward_transform(&rand_field(grid, 22));
        let lam = 7.0;
        let pu = chi_projector(&u, lam, 1.0).unwrap();
        let ppu = chi_projector(&pu, lam, 1.0).unwrap();
        assert_eq!(pu.coeffs(), ppu.coeffs()); // exactly idempotent
        // symmetry <chi u, v> = <u, chi v>
        let pv = chi_projector(&v, lam, 1.0).unwrap();
        let dot = |a: &SpectralField, b: &SpectralField| {
            kahan_sum(a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y))
        };
        let lhs = dot(&pu, &v);
        let rhs = dot(&u, &pv);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        // partition of identity over consecutive bands
        let lmax = u.eigenvalue_sq_at(grid.len() - 1).sqrt();
        let mut acc = SpectralField::zeros(grid);
        let mut lo = 0.0;
        while lo < lmax + 1.0 {
            let band = chi_projector(&u, lo, 1.0).unwrap();
            for (a, b) in acc.coeffs_mut().iter_mut().zip(band.coeffs()) {
                *a += b;
            }
            lo += 1.0;
        }
        assert_eq!(acc.coeffs(), u.coeffs()); // exact: disjoint bands copy coefficients
    }

    #[test]
    fn propagate_identity_period_reversibility_group() {
        let grid = Grid2D::new(10, BoundaryKind::Dirichlet).unwrap();
        let u = forward_transform(&rand_field(grid, 31));
        let v = forward_transform(&rand_field(grid, 32));
        let s = WaveState::new_spectral(u, v, 0.0).unwrap();

        // dt = 0 is the identity
        let s0 = free_propagate(&s, 0.0);
        if let (WaveState::Spectral { u: u0, .. }, WaveState::Spectral { u: u1, .. }) = (&s, &s0) {
            assert_eq!(u0.coeffs(), u1.coeffs());
        }

        // single mode full period returns the initial state
        let lam11 = (2.0f64).sqrt() * PI;
        let single = WaveState::new_spectral(
            SpectralField::unit_mode(grid, 1, 1).unwrap(),
            SpectralField::zeros(grid),
            0.0,
        )
        .unwrap();
        let once = free_propagate(&single, 2.0 * PI / lam11);
        if let (WaveState::Spectral { u: a, .. }, WaveState::Spectral { u: b, .. }) = (&single, &once)
        {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).abs() < 1e-12);
            }
        }

        // reversibility and the group property
        let fwd_back = free_propagate(&free_propagate(&s, 0.37), -0.37);
        let ab = free_propagate(&free_propagate(&s, 0.21), 0.16);
        let direct = free_propagate(&s, 0.37);
        let get = |w: &WaveState| match w {
            WaveState::Spectral { u, v, .. } => (u.coeffs().to_vec(), v.coeffs().to_vec()),
            _ => unreachable!(),
        };
        let (su, sv) = get(&s);
        let (fu, fv) = get(&fwd_back);
        let (au, av) = get(&ab);
        let (du, dv) = get(&direct);
        let scale: f64 = su.iter().chain(&sv).fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..su.len() {
            assert!((su[i] - fu[i]).abs() <= 1e-12 * scale);
            assert!((sv[i] - fv[i]).abs() <= 1e-12 * scale);
            assert!((au[i] - du[i]).abs() <= 1e-12 * scale);
            assert!((av[i] - dv[i]).abs() <= 1e-12 * scale);
        }

        // linear energy lambda^2 c^2 + d^2 conserved
        let e = |w: &WaveState| match w {
            WaveState::Spectral { u, v, .. } => dirichlet_norm_sq(u) + v.l2_norm_sq(),
            _ => unreachable!(),
        };
        let e0 = e(&s);
        let e1 = e(&free_propagate(&s, 1.234));
        assert!((e0 - e1).abs() <= 1e-12 * e0);
    }

    #[test]
    fn neumann_constant_mode_drifts_linearly() {
        let grid = Grid2D::new(8, BoundaryKind::Neumann).unwrap();
        let u = SpectralField::zeros(grid);
        let v = SpectralField::unit_mode(grid, 0, 0).unwrap();
        let s = WaveState::new_spectral(u, v, 0.0).unwrap();
        let after = free_propagate(&s, 0.5);
        if let WaveState::Spectral { u, v, .. } = after {
            assert!((u.coeffs()[0] - 0.5).abs() < 1e-15);
            assert!((v.coeffs()[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dirichlet_norm_of_unit_modes() {
        let grid = Grid2D::new(8, BoundaryKind::Dirichlet).unwrap();
        let c = SpectralField::unit_mode(grid, 1, 1).unwrap();
        assert!((dirichlet_norm_sq(&c) - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(dirichlet_norm_sq(&SpectralField::zeros(grid)), 0.0);
    }
}
