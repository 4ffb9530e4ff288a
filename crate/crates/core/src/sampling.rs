//! Sampling grids and the sample matrix whose columns are wavefunction samples.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::csv::Table;
use crate::error::{invalid, Result};
use crate::hydrogenic::{radial_wavefunction, RadialFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    ChebyshevLobatto,
}

/// Strictly increasing sample points with `points[0] = a` and `points[last] = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub kind: GridKind,
    pub points: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.a..=self.b).contains(&x)
    }
}

/// Builds a uniform or Chebyshev-Gauss-Lobatto grid on `[a, b]`.
pub fn make_grid(kind: GridKind, n_samples: usize, a: f64, b: f64) -> Result<Grid> {
    if n_samples < 2 {
        return invalid(format!("a grid needs at least 2 points, got {n_samples}"));
    }
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return invalid(format!("grid endpoints must satisfy a < b, got a={a} b={b}"));
    }
    let last = (n_samples - 1) as f64;
    let mut points: Vec<f64> = (0..n_samples)
        .map(|j| {
            let j = j as f64;
            match kind {
                GridKind::Uniform => a + j * (b - a) / last,
                GridKind::ChebyshevLobatto => a + (b - a) * (1.0 - (j * PI / last).cos()) / 2.0,
            }
        })
        .collect();
    points[0] = a;
    points[n_samples - 1] = b;
    if kind == GridKind::ChebyshevLobatto {
        // mirror the upper half so x_j + x_{N-1-j} = a + b holds to rounding
        for j in 1..n_samples / 2 {
            points[n_samples - 1 - j] = (a + b) - points[j];
        }
        if n_samples % 2 == 1 {
            points[n_samples / 2] = 0.5 * (a + b);
        }
    }
    Ok(Grid { kind, points, a, b })
}

/// Which function of the radius fills the sample matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// `R(r)` itself.
    Radial,
    /// The reduced radial function `y(r) = r R(r)`.
    Reduced,
}

/// `N_s × N_w` samples: row `i` is grid point `x_i`, column `j` is orbital `j`.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    pub values: DMatrix<f64>,
    pub grid: Grid,
    pub family: RadialFamily,
    pub representation: Representation,
}

impl SampleMatrix {
    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_functions(&self) -> usize {
        self.values.ncols()
    }

    /// Header `x,orb_1s,orb_2s,...`, one row per grid point.
    pub fn to_table(&self) -> Table {
        let header =
            std::iter::once("x".to_string()).chain(self.family.orbitals.iter().map(|o| format!("orb_{}", o.label())));
        let mut table = Table::new(header);
        for (i, &x) in self.grid.points.iter().enumerate() {
            table.push_numeric(std::iter::once(x).chain(self.values.row(i).iter().copied()));
        }
        table
    }
}

pub fn build_sample_matrix(family: &RadialFamily, grid: &Grid, representation: Representation) -> Result<SampleMatrix> {
    let mut values = DMatrix::zeros(grid.len(), family.len());
    for (j, orb) in family.orbitals.iter().enumerate() {
        for (i, &x) in grid.points.iter().enumerate() {
            let r = radial_wavefunction(orb, x)?;
            values[(i, j)] = match representation {
                Representation::Radial => r,
                Representation::Reduced => x * r,
            };
        }
    }
    Ok(SampleMatrix { values, grid: grid.clone(), family: family.clone(), representation })
}
