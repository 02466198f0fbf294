//! Interior-node grids on the open unit square and real scalar fields on them.

use crate::error::{Error, Result};
use crate::quadrature::kahan_sum;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Zero trace; tensor sine eigenbasis, nodes i*h with h = 1/(n+1).
    Dirichlet,
    /// Zero normal derivative; tensor cosine eigenbasis, nodes (i-1/2)*h with h = 1/n.
    Neumann,
}

/// n interior nodes per axis on (0,1)^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid2D {
    n: usize,
    bc: BoundaryKind,
}

impl Grid2D {
    pub fn new(n: usize, bc: BoundaryKind) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!("grid needs n >= 4, got {n}")));
        }
        Ok(Grid2D { n, bc })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    /// Node spacing; the quadrature weight per node is h^2.
    pub fn h(&self) -> f64 {
        match self.bc {
            BoundaryKind::Dirichlet => 1.0 / (self.n as f64 + 1.0),
            BoundaryKind::Neumann => 1.0 / self.n as f64,
        }
    }

    /// Coordinate of node index i (0-based) along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        match self.bc {
            BoundaryKind::Dirichlet => (i as f64 + 1.0) * self.h(),
            BoundaryKind::Neumann => (i as f64 + 0.5) * self.h(),
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }
}

/// Real scalar field sampled on the interior nodes, row-major with the x
/// index outermost: `values[i*n + j] = f(x_i, y_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Grid2D) -> Self {
        GridField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!(
                "field length {} does not match grid {}x{}",
                values.len(),
                grid.n(),
                grid.n()
            )));
        }
        Ok(GridField { grid, values })
    }

    /// Sample `f(x, y)` at every node.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.coord(i);
            for j in 0..n {
                values.push(f(x, grid.coord(j)));
            }
        }
        GridField { grid, values }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let ix = self.grid.idx(i, j);
        self.values[ix] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// h^2-weighted squared L2 norm.
    pub fn l2_norm_sq(&self) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        h2 * kahan_sum(self.values.iter().map(|v| v * v))
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Bilinear interpolation at an arbitrary interior point.
    ///
    /// For points between the boundary and the first node row, Dirichlet
    /// fields interpolate against the implicit zero boundary value.
    pub fn interpolate(&self, x: f64, y: f64) -> f64 {
        let n = self.grid.n() as isize;
        let h = self.grid.h();
        let (fx, fy) = match self.grid.bc() {
            BoundaryKind::Dirichlet => (x / h - 1.0, y / h - 1.0),
            BoundaryKind::Neumann => (x / h - 0.5, y / h - 0.5),
        };
        let i0 = fx.floor() as isize;
        let j0 = fy.floor() as isize;
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let sample = |i: isize, j: isize| -> f64 {
            if i < 0 || j < 0 || i >= n || j >= n {
                match self.grid.bc() {
                    BoundaryKind::Dirichlet => 0.0,
                    // clamp for Neumann (zero normal derivative)
                    BoundaryKind::Neumann => {
                        let ic = i.clamp(0, n - 1) as usize;
                        let jc = j.clamp(0, n - 1) as usize;
                        self.at(ic, jc)
                    }
                }
            } else {
                self.at(i as usize, j as usize)
            }
        };
        (1.0 - tx) * (1.0 - ty) * sample(i0, j0)
            + tx * (1.0 - ty) * sample(i0 + 1, j0)
            + (1.0 - tx) * ty * sample(i0, j0 + 1)
            + tx * ty * sample(i0 + 1, j0 + 1)
    }

    pub fn map(mut self, f: impl Fn(f64) -> f64) -> Self {
        for v in &mut self.values {
            *v = f(*v);
        }
        self
    }

    pub fn scaled_add(&mut self, a: f64, other: &GridField) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
    }
}
