//! Green function of `L_α = -Δ - 1/(1-r²)² - α` with pole at the origin.
//!
//! Writing `G = -ℓ + w` with `ℓ = log r / 2π` moves the singularity into a
//! known term: `-Δ(-ℓ) = δ`, so the regular part solves
//! `L_α w = -(1/(1-r²)² + α) ℓ` in the Hardy space. The right side behaves
//! like `log r` at the origin and like `1/(1-r)` at the circle, both
//! integrable against the test space, so one linear solve gives `w` and
//! `A0 = w(0)`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{assemble_forms, QuadraticForms};
use crate::function::{fmt17, RadialFunction};
use crate::grid::RadialGrid;
use crate::quadrature::{integrate_disc_within, integrate_nodal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenMode {
    Hardy,
    /// `-Δ` alone; then `G = -ℓ` exactly and `A0 = 0`.
    PureLaplace,
}

#[derive(Clone, Debug)]
pub struct GreenResult {
    pub mode: GreenMode,
    pub alpha: f64,
    pub g: RadialFunction,
    /// `w = G + log r / 2π`.
    pub regular: RadialFunction,
    pub a0: f64,
    /// Richardson estimate from a solve on every other node.
    pub a0_error: f64,
    /// Largest violation of the flux identity at `r = 0.1, 0.3, 0.5, 0.7`.
    pub flux_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenRecord {
    pub alpha: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "A0_error_estimate")]
    pub a0_error_estimate: f64,
    pub flux_defect: f64,
    pub n: usize,
}

fn ell(r: f64) -> f64 {
    r.ln() / (2.0 * PI)
}

fn potential(r: f64) -> f64 {
    let d = (1.0 - r) * (1.0 + r);
    1.0 / (d * d)
}

/// Value at the origin by linear extrapolation through the two innermost nodes.
fn extrapolate_origin(w: &RadialFunction) -> f64 {
    let x = w.grid().nodes();
    let v = w.values();
    v[0] - x[0] * (v[1] - v[0]) / (x[1] - x[0])
}

/// Load of the outer ring `[1 - δ, 1]` against the last basis function,
/// which there equals `ρ(r)/ρ(1 - δ)`. The load grows like `1/(1 - r)`, so
/// the lumped value would be off by a term of order `sqrt(δ)`; with
/// `1 - r = δ t²` the integrand is smooth and a Gauss rule suffices.
fn outer_ring_load(delta: f64, alpha: f64) -> f64 {
    const PANELS: usize = 16;
    const NODES: [f64; 4] =
        [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const WEIGHTS: [f64; 4] =
        [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    let rho = |d: f64| (d * (2.0 - d)).sqrt();
    let rho_last = rho(delta);
    let g = |t: f64| {
        // in terms of d = 1 - r, which keeps its digits near the circle
        let d = delta * t * t;
        let v = 1.0 / (d * (2.0 - d)).powi(2);
        let load = -(v + alpha) * (-d).ln_1p() / (2.0 * PI);
        2.0 * PI * (1.0 - d) * load * rho(d) / rho_last * 2.0 * delta * t
    };
    let h = 1.0 / PANELS as f64;
    let mut sum = 0.0;
    for p in 0..PANELS {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            sum += w * g(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

fn regular_part(forms: &QuadraticForms, mode: GreenMode) -> Result<Vec<f64>> {
    let grid = forms.grid();
    let x = grid.nodes();
    let n = x.len();
    match mode {
        GreenMode::Hardy => {
            let alpha = forms.alpha();
            let load = |r: f64| -(potential(r) + alpha) * ell(r);
            let mut rhs: Vec<f64> = x.iter().zip(grid.weights()).map(|(&r, &m)| m * load(r)).collect();
            let delta = 1.0 - x[n - 1];
            let ring = PI * delta * (2.0 - delta);
            rhs[n - 1] += outer_ring_load(delta, alpha) - ring * load(x[n - 1]);
            Ok(forms.operator().factor()?.solve(&rhs))
        }
        GreenMode::PureLaplace => {
            // Dirichlet data w = 0 at the outer node, zero load
            let k = forms.stiffness().leading(n - 1);
            let mut w = k.factor()?.solve(&vec![0.0; n - 1]);
            w.push(0.0);
            Ok(w)
        }
    }
}

fn coarse_a0(forms: &QuadraticForms, mode: GreenMode) -> Result<f64> {
    let x = forms.grid().nodes();
    let mut nodes: Vec<f64> = x.iter().step_by(2).copied().collect();
    if nodes.last() != x.last() {
        nodes.push(x[x.len() - 1]);
    }
    let coarse = Arc::new(RadialGrid::from_nodes(nodes)?);
    let cf = assemble_forms(coarse.clone(), forms.alpha())?;
    let w = RadialFunction::in_h(coarse, regular_part(&cf, mode)?)?;
    Ok(extrapolate_origin(&w))
}

/// Flux identity `-2π r G'(r) = 1 + ∫_{B_r} (V + α) G` (with `V = 0` for
/// the pure Laplacian), checked at a few interior radii.
pub fn flux_defect(res: &GreenResult) -> Result<f64> {
    let g = &res.g;
    let dw = res.regular.derivative();
    let grid = g.grid();
    let alpha = res.alpha;
    let load = match res.mode {
        GreenMode::Hardy => g.map(|r, v| (potential(r) + alpha) * v),
        GreenMode::PureLaplace => g.map(|_, _| 0.0),
    };
    let mut worst: f64 = 0.0;
    for &rho in &[0.1, 0.3, 0.5, 0.7] {
        let k = grid.nearest(rho);
        let r = grid.nodes()[k];
        let slope = dw[k] - 1.0 / (2.0 * PI * r);
        let inner = integrate_disc_within(&load, r)?;
        worst = worst.max((-2.0 * PI * r * slope - (1.0 + inner)).abs());
    }
    Ok(worst)
}

pub fn solve_green(forms: &QuadraticForms, mode: GreenMode) -> Result<GreenResult> {
    let grid = forms.grid().clone();
    if grid.len() < 5 {
        return Err(Error::Resolution("Green solve needs at least 5 nodes".into()));
    }
    let w = regular_part(forms, mode)?;
    let regular = RadialFunction::in_h(grid.clone(), w)?;
    regular.ensure_finite()?;
    let g = regular.map(|r, v| v - ell(r));
    let a0 = extrapolate_origin(&regular);
    let a0_error = (a0 - coarse_a0(forms, mode)?).abs() / 3.0;
    let alpha = match mode {
        GreenMode::Hardy => forms.alpha(),
        GreenMode::PureLaplace => 0.0,
    };
    let mut res = GreenResult { mode, alpha, g, regular, a0, a0_error, flux_defect: 0.0 };
    res.flux_defect = flux_defect(&res)?;
    Ok(res)
}

/// `(A0, error estimate)`.
pub fn extract_a0(res: &GreenResult) -> Result<(f64, f64)> {
    if !res.a0.is_finite() {
        return Err(Error::NonFinite { index: 0, r: res.g.grid().nodes()[0] });
    }
    Ok((res.a0, res.a0_error))
}

/// `∫_B G² dx`.
pub fn green_l2_sq(res: &GreenResult) -> f64 {
    let sq: Vec<f64> = res.g.values().iter().map(|v| v * v).collect();
    integrate_nodal(res.g.grid(), &sq)
}

impl GreenResult {
    pub fn record(&self) -> GreenRecord {
        GreenRecord {
            alpha: self.alpha,
            a0: self.a0,
            a0_error_estimate: self.a0_error,
            flux_defect: self.flux_defect,
            n: self.g.grid().len(),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "G", "w"])?;
        for ((r, g), v) in self.g.grid().nodes().iter().zip(self.g.values()).zip(self.regular.values()) {
            out.write_record([fmt17(*r), fmt17(*g), fmt17(*v)])?;
        }
        out.flush()?;
        Ok(())
    }
}
