//! The four subcommands. Each one validates its config, does all numerical
//! work in memory and returns the artifacts; nothing touches the disk until
//! [`write_artifacts`] runs.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use optbasis::basisfn::{interpolate, interpolate_columns, tabulate, BasisFunction};
use optbasis::csv::{fmt_f64, Table};
use optbasis::hydrogenic::{numerov_oracle, reduced_ground_state, BoundaryValueProblem, NumerovSolution};
use optbasis::klcore::{
    center_columns, covariance, eig_sym, projection_mse, raised_monomial_basis, random_orthonormal, reconstruction_mse,
    truncate_basis, CenteredMatrix, CovarianceMatrix, KLBasis, TruncatedBasis,
};
use optbasis::sampling::{build_sample_matrix, SampleMatrix};
use optbasis::spectral::{
    energy_scan, interior_points, relative_l2_error, residual, solve as spectral_solve, uniform_points,
    CollocationProblem, MinimumKind, SolveMode, SpectralSolution, SCAN_DENSE_POINTS,
};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// One output file, held in memory until written.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
    pub summary: String,
}

impl Artifact {
    fn csv(name: &str, table: &Table, summary: String) -> Self {
        Artifact { name: name.to_string(), contents: table.render(), summary }
    }

    fn json<T: Serialize>(name: &str, value: &T, summary: String) -> Self {
        let mut contents = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
        contents.push('\n');
        Artifact { name: name.to_string(), contents, summary }
    }
}

/// Creates the output directory and writes the artifacts in order, printing
/// one summary line each.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.contents)?;
        println!("{}: {}", dir.join(&a.name).display(), a.summary);
    }
    Ok(())
}

/// Samples, covariance and the full KL basis of the configured family.
pub struct KlPipeline {
    pub samples: SampleMatrix,
    pub centered: CenteredMatrix,
    pub covariance: CovarianceMatrix,
    pub basis: KLBasis,
}

impl KlPipeline {
    pub fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let samples = build_sample_matrix(&cfg.family()?, &cfg.grid()?, cfg.representation())?;
        let centered = center_columns(&samples)?;
        let covariance = covariance(&centered);
        let basis = eig_sym(&covariance)?;
        Ok(KlPipeline { samples, centered, covariance, basis })
    }

    pub fn truncated(&self, cfg: &RunConfig) -> Result<TruncatedBasis, CliError> {
        Ok(truncate_basis(&self.basis, cfg.truncation()?)?)
    }
}

/// What the spectral solution is measured against.
pub enum Reference {
    /// The unregularized 1s solution `y_f (x/b) e^{b-x}`.
    ClosedForm {
        b: f64,
        y_f: f64,
    },
    Numerov(NumerovSolution),
}

impl Reference {
    pub fn for_problem(bvp: &BoundaryValueProblem, numerov_points: usize) -> Result<Self, CliError> {
        let ground_state = bvp.l == 0 && bvp.z == 1.0 && bvp.energy == -0.5 && bvp.a == 0.0 && bvp.y_a == 0.0;
        if ground_state {
            Ok(Reference::ClosedForm { b: bvp.b, y_f: bvp.y_f })
        } else {
            Ok(Reference::Numerov(numerov_oracle(bvp, numerov_points)?))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Reference::ClosedForm { .. } => "closed_form",
            Reference::Numerov(_) => "numerov",
        }
    }

    pub fn eval(&self, x: f64) -> optbasis::Result<f64> {
        match self {
            Reference::ClosedForm { b, y_f } => reduced_ground_state(*b, *y_f, x),
            Reference::Numerov(sol) => sol.value_at(x),
        }
    }
}

pub fn gen_basis(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    cfg.validate()?;
    let kl = KlPipeline::build(cfg)?;
    let truncated = kl.truncated(cfg)?;
    let (n_s, n_w) = (kl.samples.n_samples(), kl.samples.n_functions());

    let mut out = Vec::new();
    if cfg.writes(Format::Csv) {
        out.push(Artifact::csv("samples.csv", &kl.samples.to_table(), format!("{n_s} points x {n_w} orbitals")));
        out.push(Artifact::csv(
            "covariance.csv",
            &kl.covariance.to_table(),
            format!("{n_s}x{n_s} covariance, trace {:.6e}", kl.covariance.trace()),
        ));
        out.push(Artifact::csv(
            "eigenvalues.csv",
            &kl.basis.eigenvalues_table(),
            format!("{n_s} eigenvalues, largest {:.6e}", kl.basis.eigenvalues[0]),
        ));
        out.push(Artifact::csv("basis.csv", &kl.basis.vectors_table(), format!("{n_s} modes on {n_s} points")));
        let functions = interpolate(&truncated)?;
        let xs = uniform_points(cfg.sampling.a, cfg.sampling.b, cfg.dense_points);
        out.push(Artifact::csv(
            "basis_functions.csv",
            &tabulate(&functions, &xs)?,
            format!("{} retained modes at {} points", truncated.m, xs.len()),
        ));
    }
    if cfg.writes(Format::Json) {
        let doc = BasisDocument {
            grid: &kl.basis.grid.points,
            eigenvalues: &kl.basis.eigenvalues,
            vectors: columns(&kl.basis.vectors),
            retained_modes: truncated.m,
        };
        out.push(Artifact::json("basis.json", &doc, format!("{n_s} modes, {} retained", truncated.m)));
    }
    Ok(out)
}

#[derive(Serialize)]
struct BasisDocument<'a> {
    grid: &'a [f64],
    eigenvalues: &'a [f64],
    /// One array per mode.
    vectors: Vec<Vec<f64>>,
    retained_modes: usize,
}

fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

/// A solved problem together with the derived error measures.
pub struct SolveOutcome {
    pub solution: SpectralSolution,
    pub reference: Reference,
    pub rel_l2_error_mid: Option<f64>,
    pub rel_max_error_mid: Option<f64>,
    pub residual_points: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
}

/// Runs the configured solve without producing artifacts.
pub fn solve_problem(cfg: &RunConfig) -> Result<SolveOutcome, CliError> {
    cfg.validate()?;
    let kl = KlPipeline::build(cfg)?;
    let functions = interpolate(&kl.truncated(cfg)?)?;
    let bvp = cfg.bvp()?;
    let solution = spectral_solve(&CollocationProblem::new(bvp, functions)?)?;
    let reference = Reference::for_problem(&bvp, cfg.problem.numerov_points)?;

    let [lo, hi] = cfg.problem.error_window;
    let rel_l2_error_mid = relative_l2_error(&solution, |x| reference.eval(x), lo, hi, cfg.problem.error_points)?;
    let mut max_diff = 0.0f64;
    let mut max_ref = 0.0f64;
    for x in uniform_points(lo, hi, cfg.problem.error_points) {
        let r = reference.eval(x)?;
        max_diff = max_diff.max((solution.value(x)? - r).abs());
        max_ref = max_ref.max(r.abs());
    }
    let rel_max_error_mid = (max_ref > 0.0).then(|| max_diff / max_ref);

    let residual_points = interior_points(bvp.a, bvp.b, SCAN_DENSE_POINTS);
    let residuals = residual(&solution, &residual_points)?;
    let residual_norm = residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(SolveOutcome {
        solution,
        reference,
        rel_l2_error_mid,
        rel_max_error_mid,
        residual_points,
        residuals,
        residual_norm,
    })
}

#[derive(Serialize)]
struct SolveReport<'a> {
    config: &'a RunConfig,
    retained_modes: usize,
    reference: &'static str,
    solve_mode: &'static str,
    dropped_boundary_rows: usize,
    collocation_points: &'a [f64],
    coefficients: &'a [f64],
    condition_estimate: f64,
    rel_l2_error_mid: Option<f64>,
    rel_max_error_mid: Option<f64>,
    residual_norm: f64,
}

pub fn solve(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let o = solve_problem(cfg)?;
    let bvp = &o.solution.problem.bvp;
    let mut out = Vec::new();
    if cfg.writes(Format::Csv) {
        let xs = uniform_points(bvp.a, bvp.b, cfg.dense_points);
        let res = residual(&o.solution, &xs)?;
        let mut table = Table::new(["x", "y_numeric", "y_reference", "residual"]);
        for (&x, r) in xs.iter().zip(res) {
            table.push_numeric([x, o.solution.value(x)?, o.reference.eval(x)?, r]);
        }
        out.push(Artifact::csv(
            "solution.csv",
            &table,
            format!("{} points, reference {}", xs.len(), o.reference.name()),
        ));

        let mut table = Table::new(["x", "residual"]);
        for (&x, &r) in o.residual_points.iter().zip(&o.residuals) {
            table.push_numeric([x, r]);
        }
        out.push(Artifact::csv("residual.csv", &table, format!("residual norm {:.6e}", o.residual_norm)));
    }
    if cfg.writes(Format::Json) {
        let report = SolveReport {
            config: cfg,
            retained_modes: o.solution.problem.m(),
            reference: o.reference.name(),
            solve_mode: match o.solution.mode {
                SolveMode::Direct => "direct",
                SolveMode::LeastSquares => "least_squares",
            },
            dropped_boundary_rows: o.solution.dropped_boundary_rows,
            collocation_points: &o.solution.problem.collocation_points,
            coefficients: &o.solution.coefficients,
            condition_estimate: o.solution.condition_estimate,
            rel_l2_error_mid: o.rel_l2_error_mid,
            rel_max_error_mid: o.rel_max_error_mid,
            residual_norm: o.residual_norm,
        };
        let err = o.rel_l2_error_mid.map_or("n/a".to_string(), |e| format!("{e:.6e}"));
        out.push(Artifact::json("report.json", &report, format!("relative L2 error {err}")));
    }
    Ok(out)
}

#[derive(Serialize)]
struct ScanReport<'a> {
    config: &'a RunConfig,
    argmin: f64,
    grid_argmin: f64,
    residual_norm: f64,
    kind: &'static str,
    steps: usize,
    failed_steps: usize,
}

pub fn scan_energy(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    cfg.validate()?;
    let kl = KlPipeline::build(cfg)?;
    let functions = interpolate(&kl.truncated(cfg)?)?;
    let template = CollocationProblem::new(cfg.bvp()?, functions)?;
    let [lo, hi] = cfg.problem.energy_range;
    let scan = energy_scan(&template, lo, hi, cfg.problem.scan_steps)?;
    let min = scan.minimum.ok_or(CliError::Numerical(optbasis::Error::NotConverged {
        what: "energy scan (every step failed)",
        iterations: scan.points.len(),
    }))?;
    let kind = match min.kind {
        MinimumKind::Interior => "interior",
        MinimumKind::Boundary => "boundary",
        MinimumKind::Unrefined => "unrefined",
    };
    let failed = scan.points.iter().filter(|p| p.residual_norm.is_none()).count();

    let mut out = Vec::new();
    if cfg.writes(Format::Csv) {
        out.push(Artifact::csv(
            "scan.csv",
            &scan.to_table(),
            format!("{} energies, {failed} failed", scan.points.len()),
        ));
    }
    if cfg.writes(Format::Json) {
        let report = ScanReport {
            config: cfg,
            argmin: min.energy,
            grid_argmin: min.grid_energy,
            residual_norm: min.residual_norm,
            kind,
            steps: scan.points.len(),
            failed_steps: failed,
        };
        out.push(Artifact::json("report.json", &report, format!("{kind} minimum at E = {:.6}", min.energy)));
    }
    Ok(out)
}

/// Names and full `N_s × N_s` orthonormal matrices of the compared bases.
pub fn comparison_bases(cfg: &RunConfig, kl: &KlPipeline) -> Vec<(&'static str, DMatrix<f64>)> {
    let n = kl.basis.n_modes();
    vec![
        ("kl", kl.basis.vectors.clone()),
        ("random_orthonormal", random_orthonormal(n, cfg.seed)),
        ("raised_monomial", raised_monomial_basis(&kl.basis.grid)),
    ]
}

fn solve_with(
    cfg: &RunConfig,
    bvp: BoundaryValueProblem,
    reference: &Reference,
    functions: Vec<BasisFunction>,
) -> optbasis::Result<Option<f64>> {
    let sol = spectral_solve(&CollocationProblem::new(bvp, functions)?)?;
    let [lo, hi] = cfg.problem.error_window;
    relative_l2_error(&sol, |x| reference.eval(x), lo, hi, cfg.problem.error_points)
}

pub fn compare_bases(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    cfg.validate()?;
    let kl = KlPipeline::build(cfg)?;
    let bvp = cfg.bvp()?;
    let reference = Reference::for_problem(&bvp, cfg.problem.numerov_points)?;
    let grid = &kl.basis.grid;

    let mut table = Table::new(["basis_name", "M", "reconstruction_mse", "solve_rel_error"]);
    let mut failed = 0;
    for (name, q) in comparison_bases(cfg, &kl) {
        for m in 1..=q.ncols() {
            let mse = if name == "kl" {
                reconstruction_mse(&kl.centered, &kl.basis, m)?
            } else {
                projection_mse(&kl.centered.values, &q.columns(0, m).into_owned())?
            };
            let err = interpolate_columns(grid, &q, m).and_then(|f| solve_with(cfg, bvp, &reference, f));
            let err = match err {
                Ok(Some(e)) => fmt_f64(e),
                Ok(None) => String::new(),
                Err(_) => {
                    failed += 1;
                    String::new()
                }
            };
            table.push(vec![name.to_string(), m.to_string(), fmt_f64(mse), err]);
        }
    }
    let summary = format!("{} rows, {failed} solves failed, reference {}", table.n_rows(), reference.name());
    Ok(vec![Artifact::csv("comparison.csv", &table, summary)])
}
