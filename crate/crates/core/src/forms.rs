//! Discrete Hardy forms and the first Hardy–Laplace eigenvalue.
//!
//! Three honest P1 forms are kept: the stiffness `∫|∇u|²`, the lumped Hardy
//! potential `∫u²/(1-r²)²` and the lumped mass `∫u²`. Their difference is a
//! poor discretization of the Hardy norm: functions in the completion need
//! not vanish like `1 - r²` at the circle, and a truncated grid only sees the
//! part of the norm that does. The norm itself is therefore assembled from the
//! ground-state identity
//!
//! ```text
//! u = ρ v,  ρ = sqrt(1 - r²):   ||u||_H² = ∫ ρ² |∇v|² dx + ∫ v² dx,
//! ```
//!
//! which follows from `-Δρ - ρ/(1-r²)² = 1/ρ`. Both terms are nonnegative, so
//! the discrete form is positive definite by construction, and `v` carries a
//! natural condition at the outer node. On `u = 1 - r²` all three routes give
//! `||u||_H² = π`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::RadialFunction;
use crate::grid::{Grading, RadialGrid};
use crate::tridiag::SymTridiag;

/// Relative gap kept between `alpha` and `lambda1`.
pub const ALPHA_MARGIN: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct QuadraticForms {
    grid: Arc<RadialGrid>,
    stiffness: SymTridiag,
    hardy: Vec<f64>,
    energy: SymTridiag,
    /// Cell coefficients and `ρ` at the nodes, for the cancellation-free
    /// evaluation of the energy as a sum of squares.
    cells: Vec<f64>,
    rho: Vec<f64>,
    alpha: f64,
    lambda1: f64,
    ground_state: Vec<f64>,
    eig_iterations: usize,
    eig_residual: f64,
}

#[derive(Clone, Debug)]
pub struct SpectralResult {
    pub lambda1: f64,
    /// Positive, normalized in `L²(B)`.
    pub eigenfunction: RadialFunction,
    pub rayleigh_residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralRecord {
    pub lambda1: f64,
    pub residual: f64,
    pub n: usize,
    pub r_min: f64,
    pub delta_b: f64,
    pub grading: Grading,
}

impl SpectralResult {
    pub fn record(&self) -> SpectralRecord {
        let g = self.eigenfunction.grid();
        SpectralRecord {
            lambda1: self.lambda1,
            residual: self.rayleigh_residual,
            n: g.len(),
            r_min: g.r_min(),
            delta_b: g.delta_b(),
            grading: g.grading(),
        }
    }
}

fn stiffness(x: &[f64]) -> SymTridiag {
    let n = x.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let k = PI * (x[i] + x[i + 1]) / (x[i + 1] - x[i]);
        diag[i] += k;
        diag[i + 1] += k;
        off[i] = -k;
    }
    // the last cell reaches the circle, where members of H vanish
    diag[n - 1] += PI * (x[n - 1] + 1.0) / (1.0 - x[n - 1]);
    SymTridiag::new(diag, off)
}

fn one_minus_sq(r: f64) -> f64 {
    (1.0 - r) * (1.0 + r)
}

fn ground_state_energy(x: &[f64], w: &[f64]) -> (SymTridiag, Vec<f64>, Vec<f64>) {
    let n = x.len();
    let rho: Vec<f64> = x.iter().map(|&r| one_minus_sq(r).sqrt()).collect();
    let mut diag = w.to_vec();
    let mut off = vec![0.0; n - 1];
    let mut cells = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let (a, b) = (x[i], x[i + 1]);
        // 2π ∫_a^b (1 - r²) r dr / h², exact, factored so that cells near
        // r = 1 keep their digits
        let c = PI * (a + b) * (one_minus_sq(a) + one_minus_sq(b)) / (2.0 * (b - a));
        diag[i] += c;
        diag[i + 1] += c;
        off[i] = -c / (rho[i] * rho[i + 1]);
        cells[i] = c;
    }
    for i in 0..n {
        diag[i] /= rho[i] * rho[i];
    }
    (SymTridiag::new(diag, off), cells, rho)
}

fn sum_of_squares(cells: &[f64], rho: &[f64], w: &[f64], u: &[f64]) -> f64 {
    let v: Vec<f64> = u.iter().zip(rho).map(|(u, p)| u / p).collect();
    let grad: f64 = cells.iter().zip(v.windows(2)).map(|(c, p)| c * (p[1] - p[0]) * (p[1] - p[0])).sum();
    let zeroth: f64 = v.iter().zip(w).map(|(v, w)| w * v * v).sum();
    grad + zeroth
}

/// Inverse iteration for the smallest eigenpair of `(a, diag(m))`.
fn inverse_iteration(
    a: &SymTridiag,
    quad: impl Fn(&[f64]) -> f64,
    m: &[f64],
    start: Vec<f64>,
) -> Result<(f64, Vec<f64>, f64, usize)> {
    let ldl = a.factor()?;
    let m_norm = |x: &[f64]| x.iter().zip(m).map(|(v, w)| w * v * v).sum::<f64>().sqrt();
    let mut x = start;
    let s = m_norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut lambda = quad(&x);
    let mut iterations = 0;
    for k in 1..=500 {
        iterations = k;
        let mx: Vec<f64> = x.iter().zip(m).map(|(v, w)| v * w).collect();
        let mut y = ldl.solve(&mx);
        let s = m_norm(&y);
        y.iter_mut().for_each(|v| *v /= s);
        let next = quad(&y);
        x = y;
        let done = (next - lambda).abs() <= 4.0 * f64::EPSILON * next && k >= 3;
        lambda = next;
        if done {
            break;
        }
    }
    let ax = a.matvec(&x);
    let res: Vec<f64> = ax.iter().zip(&x).zip(m).map(|((p, v), w)| p - lambda * w * v).collect();
    let dual = res.iter().zip(ldl.solve(&res)).map(|(p, q)| p * q).sum::<f64>().max(0.0).sqrt();
    if x[0] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    Ok((lambda, x, dual / lambda.sqrt(), iterations))
}

/// Assembles all forms on `grid` and computes the first eigenvalue, which
/// bounds the admissible `alpha`.
pub fn assemble_forms(grid: Arc<RadialGrid>, alpha: f64) -> Result<QuadraticForms> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be finite and nonnegative, got {alpha}")));
    }
    let x = grid.nodes();
    let w = grid.weights();
    let hardy = x.iter().zip(w).map(|(&r, &w)| w / one_minus_sq(r).powi(2)).collect();
    let (energy, cells, rho) = ground_state_energy(x, w);
    let start = rho.clone();
    let quad = |u: &[f64]| sum_of_squares(&cells, &rho, w, u);
    let (lambda1, ground_state, eig_residual, eig_iterations) = inverse_iteration(&energy, quad, w, start)
        .map_err(|e| Error::Assembly(format!("discrete Hardy form lost positivity ({e}); refine the grid")))?;
    if !(lambda1 > 0.0) {
        return Err(Error::Assembly(format!("nonpositive first eigenvalue {lambda1:e}")));
    }
    let forms = QuadraticForms {
        stiffness: stiffness(x),
        grid,
        hardy,
        energy,
        cells,
        rho,
        alpha: 0.0,
        lambda1,
        ground_state,
        eig_iterations,
        eig_residual,
    };
    forms.with_alpha(alpha)
}

impl QuadraticForms {
    /// The same forms with another `alpha`; no reassembly.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be finite and nonnegative, got {alpha}")));
        }
        if alpha >= self.lambda1 * (1.0 - ALPHA_MARGIN) {
            return Err(Error::Domain(format!(
                "alpha = {alpha} is not below lambda1 = {} by the coercivity margin",
                self.lambda1
            )));
        }
        Ok(QuadraticForms { alpha, ..self.clone() })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// `∫|∇u|²` for nodal values, with `u = 0` on the circle.
    pub fn stiffness(&self) -> &SymTridiag {
        &self.stiffness
    }

    /// Diagonal of the lumped `∫u²/(1-r²)²`.
    pub fn hardy_weights(&self) -> &[f64] {
        &self.hardy
    }

    /// Diagonal of the lumped `∫u²`.
    pub fn mass(&self) -> &[f64] {
        self.grid.weights()
    }

    /// Matrix of `||·||_H²`.
    pub fn energy(&self) -> &SymTridiag {
        &self.energy
    }

    /// `||u||_H²` for nodal values, summed as squares.
    pub fn energy_quad(&self, u: &[f64]) -> f64 {
        sum_of_squares(&self.cells, &self.rho, self.mass(), u)
    }

    /// `||u||_{1,α}²` for nodal values.
    pub fn operator_quad(&self, u: &[f64]) -> f64 {
        let m: f64 = u.iter().zip(self.mass()).map(|(v, w)| w * v * v).sum();
        self.energy_quad(u) - self.alpha * m
    }

    /// Matrix of `||·||_{1,α}²`.
    pub fn operator(&self) -> SymTridiag {
        self.energy.shifted(-self.alpha, self.mass())
    }

    fn check(&self, u: &RadialFunction) -> Result<()> {
        u.ensure_same_grid(&self.grid)?;
        u.ensure_finite()
    }
}

/// `||u||_H²`.
pub fn norm_h_sq(u: &RadialFunction, forms: &QuadraticForms) -> Result<f64> {
    forms.check(u)?;
    Ok(forms.energy_quad(u.values()))
}

/// `||u||_H² - α ||u||_2²`.
pub fn norm_1alpha_sq(u: &RadialFunction, forms: &QuadraticForms) -> Result<f64> {
    forms.check(u)?;
    Ok(forms.operator_quad(u.values()))
}

/// Nodal representative of `-Δu - u/(1-r²)² - αu`, i.e. the operator matrix
/// followed by the inverse lumped mass.
pub fn apply_operator(u: &RadialFunction, forms: &QuadraticForms) -> Result<RadialFunction> {
    forms.check(u)?;
    let au = forms.operator().matvec(u.values());
    let vals = au.iter().zip(forms.mass()).map(|(a, w)| a / w).collect();
    RadialFunction::in_h(forms.grid.clone(), vals)
}

/// First eigenpair of `-Δ - 1/(1-r²)²` on radial functions, by inverse
/// iteration with the LDLᵀ factorization of the Hardy form.
pub fn first_eigenvalue(forms: &QuadraticForms) -> Result<SpectralResult> {
    Ok(SpectralResult {
        lambda1: forms.lambda1,
        eigenfunction: RadialFunction::in_h(forms.grid.clone(), forms.ground_state.clone())?,
        rayleigh_residual: forms.eig_residual,
        iterations: forms.eig_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::quadrature::{dirichlet_energy, hardy_integral, l2_norm_sq};

    fn forms(n: usize, alpha: f64) -> QuadraticForms {
        assemble_forms(Arc::new(build_grid(n, 1e-10, 1e-8, None).unwrap()), alpha).unwrap()
    }

    #[test]
    fn three_routes_agree_on_one_minus_r_squared() {
        let f = forms(4000, 0.0);
        let u = RadialFunction::from_fn(f.grid().clone(), |r| 1.0 - r * r, 0.0);
        let k = f.stiffness().quad(u.values());
        let v: f64 = u.values().iter().zip(f.hardy_weights()).map(|(u, w)| w * u * u).sum();
        assert!((k - dirichlet_energy(&u).unwrap()).abs() < 1e-7, "{k} {}", dirichlet_energy(&u).unwrap());
        assert!((v - hardy_integral(&u).unwrap()).abs() < 1e-12);
        assert!((k - v - PI).abs() < 1e-5);
        assert!((norm_h_sq(&u, &f).unwrap() - PI).abs() < 1e-5);
        let rq = norm_h_sq(&u, &f).unwrap() / l2_norm_sq(&u).unwrap();
        assert!((rq - 3.0).abs() < 1e-4);
    }

    #[test]
    fn ground_state_form_sees_the_boundary_profile() {
        // sqrt(1 - r²) is in the completion with ||·||_H² = π, though K - V is negative on it
        let f = forms(4000, 0.0);
        let u = RadialFunction::from_fn(f.grid().clone(), |r| (1.0 - r * r).sqrt(), 0.0);
        assert!((norm_h_sq(&u, &f).unwrap() - PI).abs() < 1e-6);
    }

    #[test]
    fn eigenvalue_is_positive_and_below_trial_bounds() {
        let f = forms(2000, 0.0);
        let s = first_eigenvalue(&f).unwrap();
        assert!(s.lambda1 > 0.0 && s.lambda1 < 2.0);
        assert!(s.eigenfunction.values().iter().all(|&v| v > 0.0));
        assert!(s.rayleigh_residual < 1e-8, "{}", s.rayleigh_residual);
    }

    #[test]
    fn alpha_at_lambda1_is_rejected() {
        let f = forms(500, 0.0);
        assert!(matches!(f.with_alpha(f.lambda1()), Err(Error::Domain(_))));
        assert!(matches!(f.with_alpha(-1.0), Err(Error::Domain(_))));
        assert!(f.with_alpha(0.5 * f.lambda1()).is_ok());
    }

    #[test]
    fn foreign_grid_is_rejected() {
        let f = forms(100, 0.0);
        let other = Arc::new(build_grid(101, 1e-10, 1e-8, None).unwrap());
        let u = RadialFunction::from_fn(other, |r| 1.0 - r, 0.0);
        assert!(matches!(norm_h_sq(&u, &f), Err(Error::GridMismatch(_))));
    }
}
