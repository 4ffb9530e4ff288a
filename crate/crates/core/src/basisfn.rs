//! Continuous basis functions obtained by polynomial interpolation of sampled
//! eigenvectors, evaluated in barycentric Lagrange form.
//!
//! Derivatives are not taken symbolically. The node differentiation matrix `D`
//! maps samples of the interpolant to samples of its derivative, so `D·s` and
//! `D²·s` are interpolated again with the same weights.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::csv::Table;
use crate::error::{invalid, Error, Result};
use crate::klcore::TruncatedBasis;
use crate::sampling::Grid;

/// How a [`BasisFunction`] is evaluated between its nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalScheme {
    Barycentric,
}

/// Interpolation nodes with barycentric weights and the first-derivative matrix.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub grid: Grid,
    pub weights: Vec<f64>,
    pub diff: DMatrix<f64>,
}

impl NodeSet {
    pub fn new(grid: &Grid) -> Result<Self> {
        let x = &grid.points;
        let n = x.len();
        if n < 2 {
            return invalid("interpolation needs at least 2 nodes");
        }
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("interpolation nodes must be distinct");
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("interpolation nodes"));
        }

        // capacity scaling keeps the products in range for large node counts
        let cap = 4.0 / (sorted[n - 1] - sorted[0]);
        let mut weights: Vec<f64> = (0..n)
            .map(|j| {
                let prod: f64 = (0..n).filter(|&k| k != j).map(|k| (x[j] - x[k]) * cap).product();
                1.0 / prod
            })
            .collect();
        let wmax = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        weights.iter_mut().for_each(|w| *w /= wmax);

        let mut diff = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                if i != j {
                    let d = weights[j] / weights[i] / (x[i] - x[j]);
                    diff[(i, j)] = d;
                    row_sum += d;
                }
            }
            diff[(i, i)] = -row_sum;
        }
        Ok(NodeSet { grid: grid.clone(), weights, diff })
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !self.grid.contains(x) {
            return Err(Error::OutOfDomain { x, a: self.grid.a, b: self.grid.b });
        }
        Ok(())
    }

    /// Barycentric formula of the second kind; exact at the nodes.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        self.check_domain(x)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.grid.points.iter().zip(&self.weights).zip(values) {
            let dx = x - xj;
            if dx == 0.0 {
                return Ok(fj);
            }
            let t = wj / dx;
            num += t * fj;
            den += t;
        }
        Ok(num / den)
    }
}

/// One interpolated mode with its first and second derivative samples.
#[derive(Debug, Clone)]
pub struct BasisFunction {
    pub nodes: Arc<NodeSet>,
    pub samples: Vec<f64>,
    pub mode_index: usize,
    pub scheme: EvalScheme,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl BasisFunction {
    pub fn new(grid: &Grid, samples: Vec<f64>, mode_index: usize) -> Result<Self> {
        Self::with_nodes(Arc::new(NodeSet::new(grid)?), samples, mode_index)
    }

    pub fn with_nodes(nodes: Arc<NodeSet>, samples: Vec<f64>, mode_index: usize) -> Result<Self> {
        if samples.len() != nodes.grid.len() {
            return Err(Error::DimensionMismatch(format!("{} samples for {} nodes", samples.len(), nodes.grid.len())));
        }
        let s = DVector::from_column_slice(&samples);
        let d1 = &nodes.diff * &s;
        let d2 = &nodes.diff * &d1;
        Ok(BasisFunction {
            nodes,
            samples,
            mode_index,
            scheme: EvalScheme::Barycentric,
            d1: d1.as_slice().to_vec(),
            d2: d2.as_slice().to_vec(),
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes.grid.a, self.nodes.grid.b)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.nodes.interpolate(&self.samples, x)
    }

    /// First (`order = 1`) or second (`order = 2`) derivative of the interpolant.
    pub fn eval_deriv(&self, x: f64, order: u8) -> Result<f64> {
        match order {
            1 => self.nodes.interpolate(&self.d1, x),
            2 => self.nodes.interpolate(&self.d2, x),
            _ => invalid(format!("derivative order must be 1 or 2, got {order}")),
        }
    }

    /// Derivative samples at the nodes (`D·s` or `D²·s`).
    pub fn node_derivatives(&self, order: u8) -> Result<&[f64]> {
        match order {
            1 => Ok(&self.d1),
            2 => Ok(&self.d2),
            _ => invalid(format!("derivative order must be 1 or 2, got {order}")),
        }
    }
}

/// One [`BasisFunction`] per retained mode, all sharing the same nodes.
pub fn interpolate(basis: &TruncatedBasis) -> Result<Vec<BasisFunction>> {
    let nodes = Arc::new(NodeSet::new(&basis.grid)?);
    (0..basis.m)
        .map(|i| BasisFunction::with_nodes(nodes.clone(), basis.vectors.column(i).iter().copied().collect(), i))
        .collect()
}

/// Interpolates arbitrary columns of `vectors` on `grid` (used for non-KL bases).
pub fn interpolate_columns(grid: &Grid, vectors: &DMatrix<f64>, m: usize) -> Result<Vec<BasisFunction>> {
    if m > vectors.ncols() {
        return invalid(format!("requested {m} columns from a matrix with {}", vectors.ncols()));
    }
    let nodes = Arc::new(NodeSet::new(grid)?);
    (0..m).map(|i| BasisFunction::with_nodes(nodes.clone(), vectors.column(i).iter().copied().collect(), i)).collect()
}

/// Dense table `x, phi_0(x), ..., phi_{M-1}(x)`.
pub fn tabulate(functions: &[BasisFunction], xs: &[f64]) -> Result<Table> {
    let header = std::iter::once("x".to_string()).chain(functions.iter().map(|f| format!("phi_{}", f.mode_index)));
    let mut table = Table::new(header);
    for &x in xs {
        let mut row = vec![x];
        for f in functions {
            row.push(f.eval(x)?);
        }
        table.push_numeric(row);
    }
    Ok(table)
}
