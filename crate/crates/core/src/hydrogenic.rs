//! Hydrogen-like radial wavefunctions and reference solutions of the
//! regularized radial equation
//!
//! ```text
//! -y''/2 + [ -Z/(x + ε) + l(l+1)/(2x² + ε) ] y = E y,   y(a) = y_a, y(b) = y_f
//! ```
//!
//! with `x` in Bohr radii, `E` in Hartree and `y = r R(r)`.

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;

const SPECTROSCOPIC: [char; 7] = ['s', 'p', 'd', 'f', 'g', 'h', 'i'];

/// Quantum numbers and nuclear charge of one hydrogen-like orbital.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalSpec {
    pub n: u32,
    pub l: u32,
    pub z: f64,
}

impl OrbitalSpec {
    pub fn new(n: u32, l: u32, z: f64) -> Result<Self> {
        let orb = OrbitalSpec { n, l, z };
        orb.validate()?;
        Ok(orb)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason| Err(Error::InvalidOrbital { n: self.n, l: self.l, z: self.z, reason });
        if self.n < 1 {
            return fail("n must be at least 1");
        }
        if self.l >= self.n {
            return fail("l must be smaller than n");
        }
        if !(self.z.is_finite() && self.z > 0.0) {
            return fail("Z must be positive and finite");
        }
        Ok(())
    }

    /// Spectroscopic label such as `1s`, `3d` or `7i`.
    pub fn label(&self) -> String {
        match SPECTROSCOPIC.get(self.l as usize) {
            Some(c) => format!("{}{}", self.n, c),
            None => format!("{}l{}", self.n, self.l),
        }
    }

    /// Number of radial nodes on (0, ∞).
    pub fn radial_nodes(&self) -> u32 {
        self.n - self.l - 1
    }
}

/// Ordered list of orbitals whose samples form the columns of the sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFamily {
    pub orbitals: Vec<OrbitalSpec>,
}

impl RadialFamily {
    pub fn new(orbitals: Vec<OrbitalSpec>) -> Result<Self> {
        if orbitals.is_empty() {
            return invalid("a radial family needs at least one orbital");
        }
        for orb in &orbitals {
            orb.validate()?;
        }
        Ok(RadialFamily { orbitals })
    }

    /// All shells `n = 1..=n_max`, `l = 0..n`, ordered by `n` then `l`.
    /// `n_max = 7` gives the 28-orbital family.
    pub fn shells(n_max: u32, z: f64) -> Result<Self> {
        if n_max < 1 {
            return invalid("n_max must be at least 1");
        }
        let orbitals = (1..=n_max).flat_map(|n| (0..n).map(move |l| OrbitalSpec { n, l, z })).collect();
        Self::new(orbitals)
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }
}

/// Parameters of the regularized radial boundary-value problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValueProblem {
    pub l: u32,
    pub z: f64,
    /// Energy in Hartree.
    pub energy: f64,
    pub a: f64,
    pub b: f64,
    pub y_a: f64,
    pub y_f: f64,
    pub epsilon: f64,
}

impl BoundaryValueProblem {
    /// The 1s test problem: `l = 0`, `Z = 1`, `E = -1/2`, `y(0) = 0`, `y(b) = y_f`.
    pub fn ground_state(b: f64, y_f: f64, epsilon: f64) -> Self {
        BoundaryValueProblem { l: 0, z: 1.0, energy: -0.5, a: 0.0, b, y_a: 0.0, y_f, epsilon }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.z, self.energy, self.a, self.b, self.y_a, self.y_f, self.epsilon];
        if finite.iter().any(|v| !v.is_finite()) {
            return invalid("boundary-value problem parameters must be finite");
        }
        if self.a >= self.b {
            return invalid(format!("need a < b, got a={} b={}", self.a, self.b));
        }
        if self.a < 0.0 {
            return invalid("the radial domain must start at a >= 0");
        }
        if self.epsilon <= 0.0 {
            return invalid("the regularization constant must be positive");
        }
        if self.z <= 0.0 {
            return invalid("Z must be positive");
        }
        Ok(())
    }

    /// Regularized potential `-Z/(x+ε) + l(l+1)/(2x²+ε)`.
    pub fn potential(&self, x: f64) -> f64 {
        let ll = f64::from(self.l * (self.l + 1));
        -self.z / (x + self.epsilon) + ll / (2.0 * x * x + self.epsilon)
    }

    pub fn with_energy(&self, energy: f64) -> Self {
        BoundaryValueProblem { energy, ..*self }
    }
}

/// Generalized Laguerre polynomial `L_k^α(x)` (modern convention) by upward recurrence.
pub fn laguerre(k: u32, alpha: f64, x: f64) -> Result<f64> {
    if !x.is_finite() || !alpha.is_finite() {
        return invalid("laguerre arguments must be finite");
    }
    if alpha <= -1.0 {
        return invalid(format!("laguerre requires alpha > -1, got {alpha}"));
    }
    let mut prev = 1.0;
    if k == 0 {
        return Ok(prev);
    }
    let mut curr = 1.0 + alpha - x;
    for j in 1..k {
        let j = f64::from(j);
        let next = ((2.0 * j + 1.0 + alpha - x) * curr - (j + alpha) * prev) / (j + 1.0);
        prev = curr;
        curr = next;
    }
    Ok(curr)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Unit-normalized radial function `R_nl(r)` with `∫ R² r² dr = 1`.
pub fn radial_wavefunction(orb: &OrbitalSpec, r: f64) -> Result<f64> {
    orb.validate()?;
    if !(r.is_finite() && r >= 0.0) {
        return invalid(format!("radius must be finite and non-negative, got {r}"));
    }
    let n = f64::from(orb.n);
    let rho = 2.0 * orb.z * r / n;
    let norm = ((2.0 * orb.z / n).powi(3) * factorial(orb.n - orb.l - 1) / (2.0 * n * factorial(orb.n + orb.l))).sqrt();
    let poly = laguerre(orb.n - orb.l - 1, f64::from(2 * orb.l + 1), rho)?;
    Ok(norm * (-rho / 2.0).exp() * rho.powi(orb.l as i32) * poly)
}

/// `∫₀^∞ R² r² dr` by composite Gauss-Legendre panels of width `n/(4Z)` on `[0, 40n/Z]`.
///
/// Panels are dropped once the integrand has fallen below `1e-30` at both ends
/// of a panel past the outermost node.
pub fn normalization_integral(orb: &OrbitalSpec) -> Result<f64> {
    orb.validate()?;
    let rule = GaussLegendre::new(20);
    let n = f64::from(orb.n) / orb.z;
    let width = n / 4.0;
    let panels = 160;
    let density = |r: f64| radial_wavefunction(orb, r).map(|v| v * v * r * r);
    let mut total = 0.0;
    for p in 0..panels {
        let lo = p as f64 * width;
        let hi = lo + width;
        if lo > 2.0 * n * n && density(lo)? < 1e-30 && density(hi)? < 1e-30 {
            break;
        }
        total += rule.integrate(lo, hi, |r| density(r).unwrap_or(f64::NAN));
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("normalization integral"));
    }
    Ok(total)
}

/// ε → 0 solution of the 1s problem, `y(x) = y_f (x/b) e^{b-x}` on `[0, b]`.
pub fn reduced_ground_state(b: f64, y_f: f64, x: f64) -> Result<f64> {
    if !(b.is_finite() && b > 0.0) {
        return invalid(format!("b must be positive, got {b}"));
    }
    if !(0.0..=b).contains(&x) {
        return Err(Error::OutOfDomain { x, a: 0.0, b });
    }
    Ok(y_f * (x / b) * (b - x).exp())
}

/// Second derivative of [`reduced_ground_state`].
pub fn reduced_ground_state_d2(b: f64, y_f: f64, x: f64) -> Result<f64> {
    reduced_ground_state(b, y_f, x)?;
    Ok(y_f / b * (x - 2.0) * (b - x).exp())
}

/// Samples of a shooting solution on a uniform grid.
#[derive(Debug, Clone)]
pub struct NumerovSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Shooting parameter: `y'(a)`, or the leading Frobenius coefficient when
    /// starting from a regular origin with `l > 0`.
    pub initial_slope: f64,
    pub bisection_steps: usize,
}

impl NumerovSolution {
    pub fn step(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Four-point Lagrange interpolation between grid samples.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let (a, b) = (self.x[0], *self.x.last().unwrap());
        if !(a..=b).contains(&x) {
            return Err(Error::OutOfDomain { x, a, b });
        }
        let h = self.step();
        let n = self.x.len();
        let i = (((x - a) / h).floor() as usize).min(n - 2);
        let start = i.saturating_sub(1).min(n - 4);
        let mut sum = 0.0;
        for j in start..start + 4 {
            let mut w = 1.0;
            for k in start..start + 4 {
                if k != j {
                    w *= (x - self.x[k]) / (self.x[j] - self.x[k]);
                }
            }
            sum += w * self.y[j];
        }
        Ok(sum)
    }
}

const SLOPE_RANGE: f64 = 1e10;
const MAX_BISECTIONS: usize = 200;

/// Regular solution `x^{l+1} Σ c_k x^k` of the unregularized equation near the origin.
fn frobenius_regular(l: u32, z: f64, energy: f64, x: f64) -> f64 {
    let l = f64::from(l);
    let (mut c_prev2, mut c_prev) = (0.0, 1.0);
    let mut sum = 1.0;
    let mut pow = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let c = (-2.0 * z * c_prev - 2.0 * energy * c_prev2) / (kf * (kf + 2.0 * l + 1.0));
        pow *= x;
        let term = c * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() && k > 3 {
            break;
        }
        c_prev2 = c_prev;
        c_prev = c;
    }
    x.powf(l + 1.0) * sum
}

struct Shooter<'a> {
    bvp: &'a BoundaryValueProblem,
    x: Vec<f64>,
    /// `h² g(x) / 12` with `y'' = g y`.
    q: Vec<f64>,
    regular_origin: bool,
}

impl Shooter<'_> {
    fn integrate(&self, slope: f64, y: &mut [f64]) -> Result<()> {
        let bvp = self.bvp;
        let h = self.x[1] - self.x[0];
        let first;
        if self.regular_origin {
            y[0] = 0.0;
            y[1] = slope * frobenius_regular(bvp.l, bvp.z, bvp.energy, self.x[1]);
            y[2] = slope * frobenius_regular(bvp.l, bvp.z, bvp.energy, self.x[2]);
            first = 2;
        } else {
            let g0 = 2.0 * (bvp.potential(bvp.a) - bvp.energy);
            y[0] = bvp.y_a;
            y[1] = bvp.y_a + slope * h + 0.5 * h * h * g0 * bvp.y_a;
            first = 1;
        }
        // Summed form: w = (1 - q) y, Δw_{i+1} = Δw_i + 12 q_i y_i, with
        // compensated accumulation of both w and Δw.
        let q = &self.q;
        let mut w = (1.0 - q[first]) * y[first];
        let mut w_err = 0.0;
        let mut dw = w - (1.0 - q[first - 1]) * y[first - 1];
        let mut dw_err = 0.0;
        for i in first..y.len() - 1 {
            let inc = 12.0 * q[i] * y[i] - dw_err;
            let t = dw + inc;
            dw_err = (t - dw) - inc;
            dw = t;
            let inc = dw - w_err;
            let t = w + inc;
            w_err = (t - w) - inc;
            w = t;
            let next = w / (1.0 - q[i + 1]);
            if !next.is_finite() {
                return Err(Error::NonFinite("Numerov integration"));
            }
            y[i + 1] = next;
        }
        Ok(())
    }
}

/// Shooting solution of the boundary-value problem with the Numerov scheme.
///
/// The initial slope is found by bisection over `[-1e10, 1e10]·max(|y_a|, |y_f|)`.
/// When `a = 0` and `y_a = 0` the first two steps are seeded from the regular
/// Frobenius series so the Coulomb singularity is never sampled.
pub fn numerov_oracle(bvp: &BoundaryValueProblem, n_points: usize) -> Result<NumerovSolution> {
    bvp.validate()?;
    if n_points < 1000 {
        return invalid(format!("the Numerov oracle needs at least 1000 points, got {n_points}"));
    }
    let h = (bvp.b - bvp.a) / (n_points - 1) as f64;
    let x: Vec<f64> = (0..n_points).map(|i| bvp.a + i as f64 * h).collect();
    let q = x.iter().map(|&xi| h * h * 2.0 * (bvp.potential(xi) - bvp.energy) / 12.0).collect();
    let shooter = Shooter { bvp, x, q, regular_origin: bvp.a == 0.0 && bvp.y_a == 0.0 };

    let mut y = vec![0.0; n_points];
    let scale = bvp.y_a.abs().max(bvp.y_f.abs());
    if scale == 0.0 {
        return Ok(NumerovSolution { x: shooter.x, y, initial_slope: 0.0, bisection_steps: 0 });
    }

    let mismatch = |slope: f64, y: &mut [f64]| -> Result<f64> {
        shooter.integrate(slope, y)?;
        Ok(y[n_points - 1] - bvp.y_f)
    };
    let (mut lo, mut hi) = (-SLOPE_RANGE * scale, SLOPE_RANGE * scale);
    let f_lo = mismatch(lo, &mut y)?;
    let f_hi = mismatch(hi, &mut y)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NotConverged { what: "Numerov slope bracket", iterations: 0 });
    }
    let tol = 1e-14 * scale;
    let mut steps = 0;
    let mut converged = false;
    while steps < MAX_BISECTIONS {
        steps += 1;
        let mid = 0.5 * (lo + hi);
        let f_mid = mismatch(mid, &mut y)?;
        if f_mid.abs() <= tol || mid == lo || mid == hi {
            lo = mid;
            hi = mid;
            converged = true;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged {
        return Err(Error::NotConverged { what: "Numerov slope bisection", iterations: steps });
    }
    let slope = 0.5 * (lo + hi);
    mismatch(slope, &mut y)?;
    Ok(NumerovSolution { x: shooter.x, y, initial_slope: slope, bisection_steps: steps })
}
