//! Spectral collocation of the regularized radial equation in a basis of
//! interpolated functions, residual diagnostics and energy scans.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basisfn::BasisFunction;
use crate::csv::{fmt_f64, Table};
use crate::error::{invalid, Error, Result};
use crate::hydrogenic::BoundaryValueProblem;

/// Relative size below which a boundary row counts as identically zero.
const DEGENERATE_ROW_TOL: f64 = 1e-14;
/// Boundary rows are scaled by this factor times the largest interior row norm
/// in least-squares mode.
const BOUNDARY_WEIGHT: f64 = 1e6;
/// A pivot below this fraction of the Frobenius norm marks the system singular.
const SINGULAR_TOL: f64 = 1e-14;
/// Interior points used to measure residual norms in [`energy_scan`].
pub const SCAN_DENSE_POINTS: usize = 200;

/// A boundary-value problem posed on a truncated basis with interior collocation points.
#[derive(Debug, Clone)]
pub struct CollocationProblem {
    pub bvp: BoundaryValueProblem,
    pub basis: Vec<BasisFunction>,
    /// Interior points, strictly inside `(a, b)`. The two boundary rows are implicit.
    pub collocation_points: Vec<f64>,
}

impl CollocationProblem {
    /// Chooses collocation points automatically.
    ///
    /// The interior nodes of the basis grid are used when they give at least
    /// `M` equations together with the non-trivial boundary rows. Otherwise a
    /// fresh uniform interior grid makes the system square.
    pub fn new(bvp: BoundaryValueProblem, basis: Vec<BasisFunction>) -> Result<Self> {
        check_basis(&bvp, &basis)?;
        let m = basis.len();
        let active = active_boundary_rows(&bvp, &basis)?;
        let nodes: Vec<f64> = basis[0].nodes.grid.points.iter().copied().filter(|&x| x > bvp.a && x < bvp.b).collect();
        let points = if nodes.len() + active >= m {
            nodes
        } else {
            let count = m.saturating_sub(active);
            let h = (bvp.b - bvp.a) / (count + 1) as f64;
            (1..=count).map(|j| bvp.a + j as f64 * h).collect()
        };
        Self::with_points(bvp, basis, points)
    }

    pub fn with_points(
        bvp: BoundaryValueProblem,
        basis: Vec<BasisFunction>,
        collocation_points: Vec<f64>,
    ) -> Result<Self> {
        check_basis(&bvp, &basis)?;
        if let Some(&x) = collocation_points.iter().find(|&&x| !(x > bvp.a && x < bvp.b)) {
            return invalid(format!("collocation point {x} is not inside ({}, {})", bvp.a, bvp.b));
        }
        let rows = collocation_points.len() + 2;
        if rows < basis.len() {
            return Err(Error::Underdetermined { rows, unknowns: basis.len() });
        }
        Ok(CollocationProblem { bvp, basis, collocation_points })
    }

    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn with_energy(&self, energy: f64) -> Self {
        CollocationProblem { bvp: self.bvp.with_energy(energy), ..self.clone() }
    }

    pub fn with_boundary_values(&self, y_a: f64, y_f: f64) -> Self {
        CollocationProblem { bvp: BoundaryValueProblem { y_a, y_f, ..self.bvp }, ..self.clone() }
    }

    /// `Σ c_i φ_i(x)`.
    pub fn combine(&self, coefficients: &[f64], x: f64, order: u8) -> Result<f64> {
        let mut y = 0.0;
        for (c, f) in coefficients.iter().zip(&self.basis) {
            y += c * match order {
                0 => f.eval(x)?,
                _ => f.eval_deriv(x, order)?,
            };
        }
        Ok(y)
    }
}

fn check_basis(bvp: &BoundaryValueProblem, basis: &[BasisFunction]) -> Result<()> {
    bvp.validate()?;
    if basis.is_empty() {
        return invalid("the collocation basis is empty");
    }
    for f in basis {
        let (lo, hi) = f.domain();
        if bvp.a < lo || bvp.b > hi {
            return invalid(format!(
                "basis function {} lives on [{lo}, {hi}], which does not cover [{}, {}]",
                f.mode_index, bvp.a, bvp.b
            ));
        }
    }
    Ok(())
}

fn basis_scale(basis: &[BasisFunction]) -> f64 {
    basis.iter().flat_map(|f| f.samples.iter()).fold(0.0f64, |m, v| m.max(v.abs()))
}

fn is_degenerate(row: &[f64], rhs: f64, scale: f64) -> bool {
    rhs == 0.0 && row.iter().all(|v| v.abs() <= DEGENERATE_ROW_TOL * scale)
}

/// Number of boundary rows that are not trivially `0 = 0` for this basis.
fn active_boundary_rows(bvp: &BoundaryValueProblem, basis: &[BasisFunction]) -> Result<usize> {
    let scale = basis_scale(basis);
    let mut active = 0;
    for (x, y) in [(bvp.a, bvp.y_a), (bvp.b, bvp.y_f)] {
        let row = basis.iter().map(|f| f.eval(x)).collect::<Result<Vec<_>>>()?;
        if !is_degenerate(&row, y, scale) {
            active += 1;
        }
    }
    Ok(active)
}

/// Collocation matrix and right-hand side: interior rows first, then the
/// boundary rows at `a` and `b`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub n_interior: usize,
}

pub fn assemble(problem: &CollocationProblem) -> Result<LinearSystem> {
    let m = problem.m();
    let n_interior = problem.collocation_points.len();
    let rows = n_interior + 2;
    if rows < m {
        return Err(Error::Underdetermined { rows, unknowns: m });
    }
    let bvp = &problem.bvp;
    let mut matrix = DMatrix::zeros(rows, m);
    let mut rhs = DVector::zeros(rows);
    for (j, &x) in problem.collocation_points.iter().enumerate() {
        let shift = bvp.potential(x) - bvp.energy;
        for (i, f) in problem.basis.iter().enumerate() {
            matrix[(j, i)] = -0.5 * f.eval_deriv(x, 2)? + shift * f.eval(x)?;
        }
    }
    for (i, f) in problem.basis.iter().enumerate() {
        matrix[(n_interior, i)] = f.eval(bvp.a)?;
        matrix[(n_interior + 1, i)] = f.eval(bvp.b)?;
    }
    rhs[n_interior] = bvp.y_a;
    rhs[n_interior + 1] = bvp.y_f;
    Ok(LinearSystem { matrix, rhs, n_interior })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Square system, LU with partial pivoting.
    Direct,
    /// Overdetermined system, Householder QR with weighted boundary rows.
    LeastSquares,
}

#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub coefficients: Vec<f64>,
    /// Ratio of the extreme singular values of the unweighted system after
    /// trivial boundary rows are dropped; infinite if the smallest one is zero.
    pub condition_estimate: f64,
    pub mode: SolveMode,
    pub dropped_boundary_rows: usize,
    pub problem: CollocationProblem,
}

impl SpectralSolution {
    pub fn value(&self, x: f64) -> Result<f64> {
        self.problem.combine(&self.coefficients, x, 0)
    }

    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        self.problem.combine(&self.coefficients, x, 2)
    }

    pub fn residual(&self, points: &[f64]) -> Result<Vec<f64>> {
        residual(self, points)
    }
}

pub fn solve(problem: &CollocationProblem) -> Result<SpectralSolution> {
    let system = assemble(problem)?;
    let m = problem.m();
    let scale = basis_scale(&problem.basis);

    let mut keep: Vec<usize> = (0..system.n_interior).collect();
    let mut boundary = Vec::new();
    for r in system.n_interior..system.matrix.nrows() {
        let row: Vec<f64> = system.matrix.row(r).iter().copied().collect();
        if !is_degenerate(&row, system.rhs[r], scale) {
            keep.push(r);
            boundary.push(r);
        }
    }
    let dropped = 2 - boundary.len();
    let rows = keep.len();
    if rows < m {
        return Err(Error::Underdetermined { rows, unknowns: m });
    }
    let a = system.matrix.select_rows(&keep);
    let b = system.rhs.select_rows(&keep);

    let sv = a.clone().svd(false, false).singular_values;
    let condition_estimate = sv.max() / sv.min();

    let (coefficients, mode) = if rows == m {
        let lu = a.clone().lu();
        check_pivots(&lu.u(), a.norm())?;
        let c = lu.solve(&b).ok_or(Error::Singular { pivot: 0.0, norm: a.norm() })?;
        (c, SolveMode::Direct)
    } else {
        let n_int = system.n_interior;
        let max_row = (0..n_int).map(|r| a.row(r).norm()).fold(0.0f64, f64::max);
        let weight = if max_row > 0.0 { BOUNDARY_WEIGHT * max_row } else { 1.0 };
        let mut aw = a;
        let mut bw = b;
        for r in n_int..rows {
            aw.row_mut(r).scale_mut(weight);
            bw[r] *= weight;
        }
        let norm = aw.norm();
        let qr = aw.qr();
        let r = qr.r();
        check_pivots(&r, norm)?;
        let qtb = qr.q().tr_mul(&bw);
        let c = r.solve_upper_triangular(&qtb).ok_or(Error::Singular { pivot: 0.0, norm })?;
        (c, SolveMode::LeastSquares)
    };
    if coefficients.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("collocation solve"));
    }
    Ok(SpectralSolution {
        coefficients: coefficients.as_slice().to_vec(),
        condition_estimate,
        mode,
        dropped_boundary_rows: dropped,
        problem: problem.clone(),
    })
}

/// Rejects a triangular factor whose smallest diagonal entry is below
/// [`SINGULAR_TOL`] times the norm of the factored matrix.
fn check_pivots(u: &DMatrix<f64>, norm: f64) -> Result<()> {
    let pivot = u.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if norm <= 0.0 || !norm.is_finite() || pivot.is_nan() || pivot < SINGULAR_TOL * norm {
        return Err(Error::Singular { pivot, norm });
    }
    Ok(())
}

/// `-y''/2 + V y - E y` of the represented function at each point.
pub fn residual(sol: &SpectralSolution, points: &[f64]) -> Result<Vec<f64>> {
    let bvp = &sol.problem.bvp;
    points
        .iter()
        .map(|&x| {
            if !(bvp.a..=bvp.b).contains(&x) {
                return Err(Error::OutOfDomain { x, a: bvp.a, b: bvp.b });
            }
            let y = sol.value(x)?;
            let d2 = sol.second_derivative(x)?;
            Ok(-0.5 * d2 + (bvp.potential(x) - bvp.energy) * y)
        })
        .collect()
}

/// `n` uniformly spaced points strictly inside `(a, b)`.
pub fn interior_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n + 1) as f64;
    (1..=n).map(|i| a + i as f64 * h).collect()
}

/// `n ≥ 2` uniformly spaced points on `[a, b]` including both ends.
pub fn uniform_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
    v[n - 1] = b;
    v
}

/// `‖y − y_ref‖₂ / ‖y_ref‖₂` over `n` uniform points on `[lo, hi]`;
/// `None` when the reference vanishes there.
pub fn relative_l2_error(
    sol: &SpectralSolution,
    reference: impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Option<f64>> {
    let mut num = 0.0;
    let mut den = 0.0;
    for x in uniform_points(lo, hi, n) {
        let r = reference(x)?;
        let d = sol.value(x)? - r;
        num += d * d;
        den += r * r;
    }
    Ok((den > 0.0).then(|| (num / den).sqrt()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScanStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub energy: f64,
    pub residual_norm: Option<f64>,
    pub status: ScanStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimumKind {
    /// Interior grid minimum refined by a parabola through its neighbours.
    Interior,
    /// The smallest residual sits at an end of the scanned range.
    Boundary,
    /// Interior grid minimum whose neighbours failed; not refined.
    Unrefined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanMinimum {
    pub energy: f64,
    pub grid_energy: f64,
    pub residual_norm: f64,
    pub kind: MinimumKind,
}

#[derive(Debug, Clone)]
pub struct EnergyScan {
    pub points: Vec<ScanPoint>,
    pub minimum: Option<ScanMinimum>,
}

impl EnergyScan {
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["E", "residual_norm", "status"]);
        for p in &self.points {
            let status = match &p.status {
                ScanStatus::Ok => "ok".to_string(),
                ScanStatus::Failed(_) => "failed".to_string(),
            };
            table.push(vec![fmt_f64(p.energy), p.residual_norm.map(fmt_f64).unwrap_or_default(), status]);
        }
        table
    }
}

/// Abscissa of the vertex of the parabola through three points. Returns
/// `None` when the points are collinear or the parabola opens downward.
pub fn parabolic_vertex(x: [f64; 3], f: [f64; 3]) -> Option<f64> {
    let d01 = (f[1] - f[0]) / (x[1] - x[0]);
    let d12 = (f[2] - f[1]) / (x[2] - x[1]);
    let curvature = (d12 - d01) / (x[2] - x[0]);
    if curvature.is_nan() || curvature <= 0.0 {
        return None;
    }
    Some(0.5 * (x[0] + x[1]) - d01 / (2.0 * curvature))
}

/// Solves the problem at `n_steps` uniformly spaced energies and records the
/// residual norm on [`SCAN_DENSE_POINTS`] interior points. Failed solves are
/// recorded in the table.
pub fn energy_scan(template: &CollocationProblem, e_lo: f64, e_hi: f64, n_steps: usize) -> Result<EnergyScan> {
    if !(e_lo.is_finite() && e_hi.is_finite()) || e_lo >= e_hi {
        return invalid(format!("energy range must satisfy E_lo < E_hi, got [{e_lo}, {e_hi}]"));
    }
    if n_steps < 3 {
        return invalid(format!("an energy scan needs at least 3 steps, got {n_steps}"));
    }
    let dense = interior_points(template.bvp.a, template.bvp.b, SCAN_DENSE_POINTS);
    let energies = uniform_points(e_lo, e_hi, n_steps);
    let points: Vec<ScanPoint> = energies
        .par_iter()
        .map(|&energy| {
            let outcome = solve(&template.with_energy(energy))
                .and_then(|sol| residual(&sol, &dense))
                .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt());
            match outcome {
                Ok(norm) => ScanPoint { energy, residual_norm: Some(norm), status: ScanStatus::Ok },
                Err(e) => ScanPoint { energy, residual_norm: None, status: ScanStatus::Failed(e.to_string()) },
            }
        })
        .collect();

    let best = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.residual_norm.map(|r| (i, r)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let minimum = best.map(|(i, norm)| {
        let grid_energy = points[i].energy;
        let at = |k: usize| (points[k].energy, points[k].residual_norm);
        let mut min =
            ScanMinimum { energy: grid_energy, grid_energy, residual_norm: norm, kind: MinimumKind::Boundary };
        if i > 0 && i + 1 < points.len() {
            min.kind = MinimumKind::Unrefined;
            if let ((e0, Some(f0)), (e2, Some(f2))) = (at(i - 1), at(i + 1)) {
                min.kind = MinimumKind::Interior;
                if let Some(v) = parabolic_vertex([e0, grid_energy, e2], [f0, norm, f2]) {
                    min.energy = v.clamp(e0, e2);
                }
            }
        }
        min
    });
    Ok(EnergyScan { points, minimum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basisfn::BasisFunction;
    use crate::hydrogenic::reduced_ground_state;
    use crate::klcore::orthonormalize;
    use crate::sampling::{make_grid, GridKind};

    fn exact_1s(x: f64) -> f64 {
        x * (-x).exp()
    }

    fn fine_exact_basis() -> Vec<BasisFunction> {
        let g = make_grid(GridKind::ChebyshevLobatto, 40, 0.0, 7.0).unwrap();
        vec![BasisFunction::new(&g, g.points.iter().map(|&x| exact_1s(x)).collect(), 0).unwrap()]
    }

    /// Exact 1s samples plus two smooth functions orthogonalized against it.
    fn containment_basis() -> Vec<BasisFunction> {
        let g = make_grid(GridKind::ChebyshevLobatto, 40, 0.0, 7.0).unwrap();
        let n = g.len();
        let cols = nalgebra::DMatrix::from_fn(n, 3, |i, j| {
            let x = g.points[i];
            match j {
                0 => exact_1s(x),
                1 => x * (x / 3.0).sin() * (-x / 4.0).exp(),
                _ => x * x * (-x / 2.0).exp(),
            }
        });
        let norm0 = cols.column(0).norm();
        let q = orthonormalize(cols);
        (0..3)
            .map(|j| {
                let s: Vec<f64> = q.column(j).iter().map(|v| v * if j == 0 { norm0 } else { 1.0 }).collect();
                BasisFunction::new(&g, s, j).unwrap()
            })
            .collect()
    }

    #[test]
    fn exact_eigenfunction_annihilates_interior_rows() {
        let bvp = BoundaryValueProblem { epsilon: 1e-300, ..BoundaryValueProblem::ground_state(7.0, 1e-4, 1e-10) };
        let points = interior_points(0.0, 7.0, 9);
        let p = CollocationProblem::with_points(bvp, fine_exact_basis(), points).unwrap();
        let sys = assemble(&p).unwrap();
        for j in 0..sys.n_interior {
            assert!(sys.matrix[(j, 0)].abs() < 1e-9, "row {j}: {}", sys.matrix[(j, 0)]);
        }
        assert_eq!(sys.rhs[sys.n_interior + 1], 1e-4);
        assert_eq!(sys.rhs[sys.n_interior], 0.0);
    }

    #[test]
    fn energy_shift_moves_interior_rows_linearly() {
        let bvp = BoundaryValueProblem::ground_state(7.0, 1e-4, 1e-10);
        let basis = containment_basis();
        let p = CollocationProblem::with_points(bvp, basis, interior_points(0.0, 7.0, 6)).unwrap();
        let delta = 0.037;
        let a = assemble(&p).unwrap();
        let b = assemble(&p.with_energy(bvp.energy + delta)).unwrap();
        for (j, &x) in p.collocation_points.iter().enumerate() {
            for (i, f) in p.basis.iter().enumerate() {
                let expected = a.matrix[(j, i)] - delta * f.eval(x).unwrap();
                assert!((b.matrix[(j, i)] - expected).abs() <= 1e-14 * a.matrix[(j, i)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn contained_solution_is_recovered() {
        let bvp = BoundaryValueProblem::ground_state(7.0, 1e-4, 1e-10);
        let p = CollocationProblem::new(bvp, containment_basis()).unwrap();
        let sol = solve(&p).unwrap();
        assert_eq!(sol.mode, SolveMode::LeastSquares);
        let expected = 1e-4 / exact_1s(7.0);
        assert!((sol.coefficients[0] - expected).abs() <= 1e-6 * expected);
        assert!(sol.coefficients[1].abs() <= 1e-8);
        assert!(sol.coefficients[2].abs() <= 1e-8);
        let err = relative_l2_error(&sol, |x| reduced_ground_state(7.0, 1e-4, x), 0.5, 5.0, 200).unwrap().unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn exact_solution_has_small_residual() {
        let bvp = BoundaryValueProblem::ground_state(7.0, 1e-4, 1e-10);
        let p = CollocationProblem::new(bvp, fine_exact_basis()).unwrap();
        let sol = solve(&p).unwrap();
        let xs = interior_points(0.0, 7.0, 300);
        let res = sol.residual(&xs).unwrap();
        let scale = xs.iter().map(|&x| (bvp.energy * sol.value(x).unwrap()).abs()).fold(0.0, f64::max);
        let worst = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(worst <= 1e-6 * scale, "{worst} vs {scale}");
    }

    #[test]
    fn homogeneous_data_gives_zero_coefficients() {
        let bvp = BoundaryValueProblem::ground_state(7.0, 0.0, 1e-10);
        let p = CollocationProblem::new(bvp, containment_basis()).unwrap();
        let sol = solve(&p).unwrap();
        assert!(sol.coefficients.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn square_solve_has_small_backward_error() {
        let bvp = BoundaryValueProblem::ground_state(7.0, 1e-4, 1e-10);
        let basis = containment_basis();
        let p = CollocationProblem::with_points(bvp, basis, interior_points(0.0, 7.0, 2)).unwrap();
        let sol = solve(&p).unwrap();
        assert_eq!(sol.mode, SolveMode::Direct);
        assert_eq!(sol.dropped_boundary_rows, 1);
        assert!(sol.condition_estimate >= 1.0);
        let sys = assemble(&p).unwrap();
        let c = DVector::from_vec(sol.coefficients.clone());
        let r = &sys.matrix * &c - &sys.rhs;
        let bound = 1e-8 * sys.matrix.norm() * c.norm();
        assert!(r.amax() <= bound);
        let res = sol.residual(&p.collocation_points).unwrap();
        assert!(res[0].abs() <= bound);
    }

    #[test]
    fn boundary_values_are_enforced_and_linear() {
        let bvp = BoundaryValueProblem { y_a: 0.0, ..BoundaryValueProblem::ground_state(7.0, 1e-4, 1e-10) };
        let p = CollocationProblem::new(bvp, containment_basis()).unwrap();
        let sol = solve(&p).unwrap();
        assert!((sol.value(7.0).unwrap() - 1e-4).abs() <= 1e-8);
        assert!(sol.value(0.0).unwrap().abs() <= 1e-8);
        let doubled = solve(&p.with_boundary_values(0.0, 2e-4)).unwrap();
        for (a, b) in sol.coefficients.iter().zip(&doubled.coefficients) {
            assert!((b - 2.0 * a).abs() <= 1e-10 * (2.0 * a).abs().max(1e-300));
        }
    }

    #[test]
    fn rejects_underdetermined_and_out_of_domain_problems() {
        let bvp = BoundaryValueProblem::ground_state(7.0, 1e-4, 1e-10);
        let basis = containment_basis();
        assert!(matches!(
            CollocationProblem::with_points(bvp, basis.clone(), vec![]),
            Err(Error::Underdetermined { rows: 2, unknowns: 3 })
        ));
        assert!(CollocationProblem::with_points(bvp, basis.clone(), vec![7.0]).is_err());
        let wide = BoundaryValueProblem { b: 9.0, ..bvp };
        assert!(CollocationProblem::new(wide, basis).is_err());
    }

    #[test]
    fn singular_systems_are_reported() {
        let g = make_grid(GridKind::Uniform, 6, 0.0, 7.0).unwrap();
        let s: Vec<f64> = g.points.iter().map(|&x| x * (7.0 - x)).collect();
        let basis = vec![BasisFunction::new(&g, s.clone(), 0).unwrap(), BasisFunction::new(&g, s, 1).unwrap()];
        let bvp = BoundaryValueProblem::ground_state(7.0, 0.0, 1e-10);
        let p = CollocationProblem::with_points(bvp, basis, interior_points(0.0, 7.0, 3)).unwrap();
        assert!(matches!(solve(&p), Err(Error::Singular { .. })));
    }

    #[test]
    fn parabola_vertex() {
        let f = |x: f64| 3.0 * (x + 0.47).powi(2) + 1.0;
        let v = parabolic_vertex([-0.6, -0.5, -0.4], [f(-0.6), f(-0.5), f(-0.4)]).unwrap();
        assert!((v + 0.47).abs() < 1e-12);
        assert!(parabolic_vertex([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]).is_none());
        assert!(parabolic_vertex([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]).is_none());
    }

    #[test]
    fn scan_of_exact_basis_finds_the_ground_state() {
        let bvp = BoundaryValueProblem::ground_state(7.0, 1e-4, 1e-10);
        let p = CollocationProblem::new(bvp, containment_basis()).unwrap();
        let scan = energy_scan(&p, -0.6, -0.4, 3).unwrap();
        assert_eq!(scan.points.len(), 3);
        let min = scan.minimum.unwrap();
        assert_eq!(min.kind, MinimumKind::Interior);
        assert_eq!(min.grid_energy, -0.5);
        assert!((min.energy + 0.5).abs() < 0.1);

        let off = energy_scan(&p, -0.3, -0.1, 5).unwrap();
        assert_eq!(off.minimum.unwrap().kind, MinimumKind::Boundary);
        assert!(energy_scan(&p, -0.3, -0.4, 5).is_err());
        assert!(energy_scan(&p, -0.6, -0.4, 2).is_err());
    }

    #[test]
    fn scan_table_marks_failures() {
        let scan = EnergyScan {
            points: vec![
                ScanPoint { energy: -0.5, residual_norm: Some(1.0), status: ScanStatus::Ok },
                ScanPoint { energy: -0.4, residual_norm: None, status: ScanStatus::Failed("x".into()) },
            ],
            minimum: None,
        };
        let text = scan.to_table().render();
        assert_eq!(text.lines().nth(2).unwrap(), "-4.0000000000000002e-1,,failed");
    }
}
