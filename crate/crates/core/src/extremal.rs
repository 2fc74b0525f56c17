//! Subcritical maximizers of `J(u) = ∫ e^{γu²}` on the unit sphere of
//! `||·||_{1,α}`, and the concentration diagnostics taken along `γ → 4π`.
//!
//! The Euler–Lagrange system is `L_α u = u e^{γu²}/λ` with
//! `λ = ∫ u² e^{γu²}`. The solver iterates `u ← A⁻¹(W u e^{γu²})`, normalized,
//! where `A` is the matrix of `||·||_{1,α}²` and `W` the lumped mass. For the
//! convex discrete `J` an undamped step never decreases `J`; damping is only
//! engaged if rounding makes it do so.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bubble::bubble_value;
use crate::error::{Error, Result};
use crate::forms::{norm_1alpha_sq, QuadraticForms};
use crate::function::RadialFunction;
use crate::quadrature::integrate_nodal;
use crate::tridiag::Ldl;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Seed {
    /// `1 + φ(r/0.1)` up to `r = 0.8`, ramped linearly to zero at `r = 0.9`.
    Bubble,
    /// `1 - r²`.
    Flat,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub seeds: Vec<Seed>,
    pub certify_trials: usize,
    pub certify_step: f64,
    pub rng_seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 10_000,
            damping: 1.0,
            seeds: vec![Seed::Bubble, Seed::Flat],
            certify_trials: 50,
            certify_step: 1e-2,
            rng_seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExtremalResult {
    pub u: RadialFunction,
    pub gamma: f64,
    pub alpha: f64,
    pub lambda_eps: f64,
    pub c_eps: f64,
    pub j_value: f64,
    pub norm_1alpha: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub seed: Seed,
}

/// One row of a sweep table.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremalRecord {
    pub gamma: f64,
    pub alpha: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub lambda_eps: f64,
    pub c_eps: f64,
    pub norm: f64,
    pub residual: f64,
    pub iters: usize,
}

impl ExtremalResult {
    pub fn record(&self) -> ExtremalRecord {
        ExtremalRecord {
            gamma: self.gamma,
            alpha: self.alpha,
            j: self.j_value,
            lambda_eps: self.lambda_eps,
            c_eps: self.c_eps,
            norm: self.norm_1alpha,
            residual: self.el_residual,
            iters: self.iterations,
        }
    }

    pub fn eps(&self) -> f64 {
        4.0 * PI - self.gamma
    }
}

fn exp_weights(u: &[f64], gamma: f64) -> Vec<f64> {
    u.iter().map(|v| (gamma * v * v).exp()).collect()
}

/// `J(u) = ∫ e^{γu²} dx`.
pub fn functional(u: &RadialFunction, gamma: f64) -> Result<f64> {
    u.ensure_finite()?;
    Ok(integrate_nodal(u.grid(), &exp_weights(u.values(), gamma)))
}

/// `λ(u) = ∫ u² e^{γu²} dx`.
pub fn lambda_of(u: &RadialFunction, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::Parameter(format!("gamma must be nonnegative, got {gamma}")));
    }
    u.ensure_finite()?;
    let f: Vec<f64> = u.values().iter().map(|v| v * v * (gamma * v * v).exp()).collect();
    Ok(integrate_nodal(u.grid(), &f))
}

fn el_rhs(u: &[f64], w: &[f64], gamma: f64, lambda: f64) -> Vec<f64> {
    u.iter().zip(w).map(|(v, w)| w * v * (gamma * v * v).exp() / lambda).collect()
}

fn dual_norm(ldl: &Ldl, r: &[f64]) -> f64 {
    r.iter().zip(ldl.solve(r)).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
}

/// Weak residual of `L_α u = u e^{γu²}/λ`, measured in the norm dual to
/// `||·||_{1,α}`, i.e. `||A⁻¹ r||_A` for the residual vector `r`.
pub fn el_residual(u: &RadialFunction, lambda: f64, gamma: f64, forms: &QuadraticForms) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    u.ensure_same_grid(forms.grid())?;
    u.ensure_finite()?;
    let a = forms.operator();
    let au = a.matvec(u.values());
    let rhs = el_rhs(u.values(), forms.mass(), gamma, lambda);
    let r: Vec<f64> = au.iter().zip(&rhs).map(|(p, q)| p - q).collect();
    Ok(dual_norm(&a.factor()?, &r))
}

/// `λ` recovered from the equation tested against `t`:
/// `⟨u e^{γu²}, t⟩ / ⟨L_α u, t⟩`.
pub fn lambda_from_equation(u: &RadialFunction, gamma: f64, t: &RadialFunction, forms: &QuadraticForms) -> Result<f64> {
    u.ensure_same_grid(forms.grid())?;
    t.ensure_same_grid(forms.grid())?;
    let num: f64 = el_rhs(u.values(), forms.mass(), gamma, 1.0).iter().zip(t.values()).map(|(a, b)| a * b).sum();
    let den = forms.operator().bilinear(u.values(), t.values());
    Ok(num / den)
}

/// `||min(u, βc)||_{1,α}²`.
pub fn truncation_energy(u: &RadialFunction, beta: f64, c: f64, forms: &QuadraticForms) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0 && c > 0.0) {
        return Err(Error::Parameter(format!("need 0 < beta < 1 and c > 0, got {beta}, {c}")));
    }
    norm_1alpha_sq(&u.map(|_, v| v.min(beta * c)), forms)
}

/// `||u||_{1,α}² - 16π log ∫ e^u dx`.
pub fn weak_form_gap(u: &RadialFunction, forms: &QuadraticForms) -> Result<f64> {
    let e: Vec<f64> = u.values().iter().map(|v| v.exp()).collect();
    Ok(norm_1alpha_sq(u, forms)? - 16.0 * PI * integrate_nodal(u.grid(), &e).ln())
}

/// True if `u` is nonnegative and nonincreasing up to `tol`.
pub fn is_nonincreasing(u: &RadialFunction, tol: f64) -> bool {
    let v = u.values();
    v.iter().all(|&x| x >= -tol) && v.windows(2).all(|p| p[1] <= p[0] + tol)
}

pub fn seed_function(seed: Seed, forms: &QuadraticForms) -> RadialFunction {
    let grid = forms.grid().clone();
    match seed {
        Seed::Flat => RadialFunction::from_fn(grid, |r| 1.0 - r * r, 0.0),
        Seed::Bubble => {
            let (c0, rho) = (1.0, 0.1);
            let core = |r: f64| c0 + bubble_value(r / rho) / c0;
            let knee = core(0.8);
            RadialFunction::from_fn(
                grid,
                |r| {
                    if r <= 0.8 {
                        core(r)
                    } else if r < 0.9 {
                        knee * (0.9 - r) / 0.1
                    } else {
                        0.0
                    }
                },
                0.0,
            )
        }
    }
}

struct Run {
    u: Vec<f64>,
    j: f64,
    residual: f64,
    iterations: usize,
}

fn normalize(forms: &QuadraticForms, mut u: Vec<f64>) -> Vec<f64> {
    let s = forms.operator_quad(&u).sqrt();
    u.iter_mut().for_each(|v| *v /= s);
    u
}

fn j_nodal(w: &[f64], u: &[f64], gamma: f64) -> f64 {
    u.iter().zip(w).map(|(v, w)| w * (gamma * v * v).exp()).sum()
}

fn iterate(forms: &QuadraticForms, ldl: &Ldl, gamma: f64, start: Vec<f64>, opts: &SolverOptions) -> Result<Run> {
    let w = forms.mass();
    if start.iter().all(|&v| v == 0.0) {
        return Err(Error::Parameter("zero seed: lambda = 0 leaves the equation undefined".into()));
    }
    let mut u = normalize(forms, start);
    let mut j = j_nodal(w, &u, gamma);
    let mut theta = opts.damping;
    let mut trace = Vec::new();
    for k in 0..opts.max_iter {
        let lambda: f64 = u.iter().zip(w).map(|(v, w)| w * v * v * (gamma * v * v).exp()).sum();
        let v = ldl.solve(&el_rhs(&u, w, gamma, lambda));
        let diff: Vec<f64> = v.iter().zip(&u).map(|(p, q)| p - q).collect();
        let residual = forms.operator_quad(&diff).max(0.0).sqrt();
        trace.push(residual);
        if !residual.is_finite() {
            return Err(Error::NoConvergence { iterations: k, residual, trace });
        }
        if residual <= opts.tol {
            return Ok(Run { u, j, residual, iterations: k });
        }
        loop {
            let cand = normalize(forms, u.iter().zip(&v).map(|(p, q)| (1.0 - theta) * p + theta * q).collect());
            let jc = j_nodal(w, &cand, gamma);
            if jc >= j * (1.0 - 1e-12) {
                u = cand;
                j = jc;
                break;
            }
            theta *= 0.5;
            if theta < 1e-8 {
                return Err(Error::NoConvergence { iterations: k, residual, trace });
            }
        }
    }
    let residual = trace.last().copied().unwrap_or(f64::NAN);
    Err(Error::NoConvergence { iterations: opts.max_iter, residual, trace })
}

/// Smooth random directions on the sphere around `u`; `J` must not improve.
fn certify(forms: &QuadraticForms, u: &[f64], j: f64, gamma: f64, opts: &SolverOptions) -> Result<()> {
    let (w, x) = (forms.mass(), forms.grid().nodes());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    for trial in 0..opts.certify_trials {
        let coef: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p: Vec<f64> = x
            .iter()
            .map(|&r| (1.0 - r * r) * coef.iter().enumerate().map(|(m, c)| c * (m as f64 * PI * r).cos()).sum::<f64>())
            .collect();
        let scale = opts.certify_step / forms.operator_quad(&p).sqrt();
        let moved = normalize(forms, u.iter().zip(&p).map(|(v, q)| v + scale * q).collect());
        let jm = j_nodal(w, &moved, gamma);
        if jm > j * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "perturbation {trial} raises J from {j} to {jm}; the fixed point is not a local maximum"
            )));
        }
    }
    Ok(())
}

/// Maximizes `∫ e^{γu²}` over `||u||_{1,α} ≤ 1` with `α = forms.alpha()`.
/// Every seed in `opts.seeds` is run; the larger `J` wins, earlier seeds on ties.
pub fn maximize_subcritical(gamma: f64, forms: &QuadraticForms, opts: &SolverOptions) -> Result<ExtremalResult> {
    if !(gamma > 0.0 && gamma < 4.0 * PI) {
        return Err(Error::Domain(format!("gamma must lie in (0, 4π), got {gamma}")));
    }
    if opts.seeds.is_empty() || !(opts.damping > 0.0 && opts.damping <= 1.0) || !(opts.tol > 0.0) {
        return Err(Error::Parameter("need at least one seed, damping in (0, 1] and tol > 0".into()));
    }
    let ldl = forms.operator().factor()?;
    let mut best: Option<(Run, Seed)> = None;
    for &seed in &opts.seeds {
        let run = iterate(forms, &ldl, gamma, seed_function(seed, forms).into_values(), opts)?;
        if best.as_ref().is_none_or(|(b, _)| run.j > b.j) {
            best = Some((run, seed));
        }
    }
    let (run, seed) = best.expect("at least one seed");
    certify(forms, &run.u, run.j, gamma, opts)?;
    let u = RadialFunction::in_h(forms.grid().clone(), run.u)?;
    let lambda_eps = lambda_of(&u, gamma)?;
    Ok(ExtremalResult {
        c_eps: u.values()[0],
        norm_1alpha: norm_1alpha_sq(&u, forms)?.sqrt(),
        el_residual: run.residual,
        iterations: run.iterations,
        j_value: run.j,
        lambda_eps,
        gamma,
        alpha: forms.alpha(),
        seed,
        u,
    })
}

/// `D(φ) = ∫ φ (c u/λ) e^{γu²} dx`.
pub fn dirac_functional(res: &ExtremalResult, phi: &RadialFunction) -> Result<f64> {
    phi.ensure_same_grid(res.u.grid())?;
    let c = res.c_eps;
    let f: Vec<f64> = res
        .u
        .values()
        .iter()
        .zip(phi.values())
        .map(|(v, p)| p * c * v * (res.gamma * v * v).exp() / res.lambda_eps)
        .collect();
    Ok(integrate_nodal(res.u.grid(), &f))
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationEntry {
    pub gamma: f64,
    pub eps: f64,
    pub c_eps: f64,
    pub lambda_eps: f64,
    pub j_value: f64,
    /// `|(J - π) - λ/c²| / (J - π)`.
    pub energy_gap: f64,
    pub dirac: f64,
    /// `|D(φ) - φ(0)|`.
    pub dirac_gap: f64,
    pub log_r_eps: f64,
    pub truncation: f64,
    /// `|truncation - β|`.
    pub truncation_gap: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trends {
    pub c_increasing: Option<bool>,
    pub j_increasing: Option<bool>,
    pub energy_gap_decreasing: Option<bool>,
    pub dirac_gap_decreasing: Option<bool>,
    pub truncation_gap_decreasing: Option<bool>,
    pub r_eps_decreasing: Option<bool>,
    pub min_lambda: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub beta: f64,
    pub entries: Vec<ConcentrationEntry>,
    pub trends: Trends,
}

fn trend(xs: &[f64], increasing: bool) -> Option<bool> {
    (xs.len() >= 2).then(|| xs.windows(2).all(|p| if increasing { p[1] > p[0] } else { p[1] < p[0] }))
}

/// Gaps of the concentration identities along a sweep ordered by increasing
/// `γ`, all evaluated on `forms` (which fixes `α`). `phi` is the Dirac test
/// function.
pub fn concentration_report(
    sweep: &[ExtremalResult],
    forms: &QuadraticForms,
    phi: &RadialFunction,
    beta: f64,
) -> Result<ConcentrationReport> {
    if sweep.is_empty() {
        return Err(Error::Parameter("empty sweep".into()));
    }
    if sweep.windows(2).any(|p| p[1].gamma <= p[0].gamma) {
        return Err(Error::Parameter("sweep must be ordered by increasing gamma".into()));
    }
    let phi0 = phi.values()[0];
    let mut entries = Vec::with_capacity(sweep.len());
    for res in sweep {
        let excess = res.j_value - PI;
        let ratio = res.lambda_eps / (res.c_eps * res.c_eps);
        let dirac = dirac_functional(res, phi)?;
        let truncation = truncation_energy(&res.u, beta, res.c_eps, forms)?;
        entries.push(ConcentrationEntry {
            gamma: res.gamma,
            eps: res.eps(),
            c_eps: res.c_eps,
            lambda_eps: res.lambda_eps,
            j_value: res.j_value,
            energy_gap: (excess - ratio).abs() / excess,
            dirac,
            dirac_gap: (dirac - phi0).abs(),
            log_r_eps: crate::bubble::log_r_eps(res.lambda_eps, res.c_eps, res.eps())?,
            truncation,
            truncation_gap: (truncation - beta).abs(),
        });
    }
    let col = |f: fn(&ConcentrationEntry) -> f64| entries.iter().map(f).collect::<Vec<_>>();
    let trends = Trends {
        c_increasing: trend(&col(|e| e.c_eps), true),
        j_increasing: trend(&col(|e| e.j_value), true),
        energy_gap_decreasing: trend(&col(|e| e.energy_gap), false),
        dirac_gap_decreasing: trend(&col(|e| e.dirac_gap), false),
        truncation_gap_decreasing: trend(&col(|e| e.truncation_gap), false),
        r_eps_decreasing: trend(&col(|e| e.log_r_eps), false),
        min_lambda: entries.iter().map(|e| e.lambda_eps).fold(f64::INFINITY, f64::min),
    };
    Ok(ConcentrationReport { beta, entries, trends })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::assemble_forms;
    use crate::grid::build_grid;
    use std::sync::Arc;

    fn forms(n: usize, alpha: f64) -> QuadraticForms {
        assemble_forms(Arc::new(build_grid(n, 1e-8, 1e-8, None).unwrap()), alpha).unwrap()
    }

    #[test]
    fn lambda_of_trivial_cases() {
        let f = forms(2000, 0.0);
        let g = f.grid().clone();
        let zero = RadialFunction::from_fn(g.clone(), |_| 0.0, 0.0);
        assert_eq!(lambda_of(&zero, 3.0).unwrap(), 0.0);
        let one = RadialFunction::from_fn(g.clone(), |_| 1.0, 1.0);
        let l = lambda_of(&one, 4.0 * PI).unwrap();
        assert!((l / (PI * (4.0 * PI).exp()) - 1.0).abs() < 1e-12);
        let q = RadialFunction::from_fn(g, |r| 1.0 - r * r, 0.0);
        assert!((lambda_of(&q, 0.0).unwrap() / (PI / 3.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn gamma_outside_subcritical_range_is_rejected() {
        let f = forms(200, 0.0);
        let o = SolverOptions::default();
        assert!(matches!(maximize_subcritical(4.0 * PI, &f, &o), Err(Error::Domain(_))));
        assert!(matches!(maximize_subcritical(0.0, &f, &o), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_lambda_is_a_parameter_error() {
        let f = forms(200, 0.0);
        let zero = RadialFunction::from_fn(f.grid().clone(), |_| 0.0, 0.0);
        assert!(matches!(el_residual(&zero, 0.0, 1.0, &f), Err(Error::Parameter(_))));
    }

    #[test]
    fn inactive_truncation_is_the_full_norm() {
        let f = forms(500, 0.3);
        let u = RadialFunction::from_fn(f.grid().clone(), |r| 1.0 - r * r, 0.0);
        let full = norm_1alpha_sq(&u, &f).unwrap();
        assert_eq!(truncation_energy(&u, 0.5, 2.5, &f).unwrap(), full);
    }

    #[test]
    fn zero_function_weak_gap() {
        let f = forms(500, 0.0);
        let zero = RadialFunction::from_fn(f.grid().clone(), |_| 0.0, 0.0);
        let g = weak_form_gap(&zero, &f).unwrap();
        assert!((g + 16.0 * PI * PI.ln()).abs() < 1e-9);
        assert!((g + 57.5404).abs() < 1e-4);
    }

    #[test]
    fn single_entry_report_has_no_trends() {
        let f = forms(400, 0.0);
        let res = maximize_subcritical(PI, &f, &SolverOptions::default()).unwrap();
        let one = RadialFunction::from_fn(f.grid().clone(), |_| 1.0, 1.0);
        let rep = concentration_report(&[res], &f, &one, 0.5).unwrap();
        assert!(rep.trends.c_increasing.is_none());
        assert!(concentration_report(&[], &f, &one, 0.5).is_err());
    }
}
