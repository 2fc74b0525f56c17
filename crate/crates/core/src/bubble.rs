//! The standard bubble `φ(s) = -(1/4π) log(1 + π s²)` and the rescaled
//! profiles of concentrating maximizers.
//!
//! `φ` solves `-Δφ = e^{8πφ}` on the plane with total mass 1. Near the
//! maximum a maximizer `u` with `c = u(0)` is compared with it through
//! `c (u(r_ε s) - c)` and `u(r_ε s) / c`, where
//! `r_ε = sqrt(λ)/c · e^{-(2π - ε/2) c²}`.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{fmt17, RadialFunction};

pub const DEFAULT_WINDOW: f64 = 5.0;
pub const DEFAULT_SAMPLES: usize = 512;

pub fn bubble_value(s: f64) -> f64 {
    -(PI * s * s).ln_1p() / (4.0 * PI)
}

pub fn bubble_slope(s: f64) -> f64 {
    -s / (2.0 * (1.0 + PI * s * s))
}

/// `∫_{B_R} e^{8πφ} dx = 1 - 1/(1 + πR²)`.
pub fn bubble_mass(radius: f64) -> f64 {
    let t = PI * radius * radius;
    t / (1.0 + t)
}

/// `∫_{B_R} |∇φ|² dx = (log(1 + πR²) + 1/(1 + πR²) - 1) / 4π`.
pub fn bubble_dirichlet_energy(radius: f64) -> f64 {
    let t = PI * radius * radius;
    // 1/(1+t) - 1 = -t/(1+t)
    (t.ln_1p() - t / (1.0 + t)) / (4.0 * PI)
}

/// Large-`R` expansion `log R/2π + log π/4π - 1/4π` of the bubble energy.
pub fn bubble_energy_asymptote(radius: f64) -> f64 {
    radius.ln() / (2.0 * PI) + PI.ln() / (4.0 * PI) - 1.0 / (4.0 * PI)
}

pub fn log_r_eps(lambda: f64, c: f64, eps: f64) -> Result<f64> {
    if !(lambda > 0.0 && c > 0.0) {
        return Err(Error::Parameter(format!("need lambda > 0 and c > 0, got {lambda}, {c}")));
    }
    if !(eps > 0.0 && eps < 4.0 * PI) {
        return Err(Error::Parameter(format!("eps must lie in (0, 4π), got {eps}")));
    }
    Ok(0.5 * lambda.ln() - c.ln() - (2.0 * PI - 0.5 * eps) * c * c)
}

/// Blow-up radius. Underflows to zero for very concentrated states; use
/// [`log_r_eps`] there.
pub fn r_eps(lambda: f64, c: f64, eps: f64) -> Result<f64> {
    Ok(log_r_eps(lambda, c, eps)?.exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct RescaledProfiles {
    pub s: Vec<f64>,
    pub phi: Vec<f64>,
    pub bubble: Vec<f64>,
    pub psi: Vec<f64>,
}

/// Samples `c (u(r_scale s) - c)` and `u(r_scale s)/c` at `samples` uniform
/// points of `[0, window]`.
pub fn rescale_blowup(
    u: &RadialFunction,
    c: f64,
    r_scale: f64,
    window: f64,
    samples: usize,
) -> Result<RescaledProfiles> {
    u.ensure_finite()?;
    if !(c > 0.0 && r_scale > 0.0 && window > 0.0) || samples < 2 {
        return Err(Error::Parameter(format!(
            "need c, r_scale, window > 0 and at least 2 samples (c = {c}, r = {r_scale:e}, window = {window})"
        )));
    }
    if r_scale * window > u.grid().r_max() {
        return Err(Error::Domain(format!("window reaches r = {:e}, beyond the grid", r_scale * window)));
    }
    let s: Vec<f64> = (0..samples).map(|j| window * j as f64 / (samples - 1) as f64).collect();
    let vals: Vec<f64> = s.iter().map(|&x| u.value_at(r_scale * x)).collect();
    Ok(RescaledProfiles {
        phi: vals.iter().map(|v| c * (v - c)).collect(),
        bubble: s.iter().map(|&x| bubble_value(x)).collect(),
        psi: vals.iter().map(|v| v / c).collect(),
        s,
    })
}

/// `sup |c (u(r_ε s) - c) - φ(s)|` over the window.
pub fn bubble_deviation(p: &RescaledProfiles) -> f64 {
    p.phi.iter().zip(&p.bubble).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// `sup |u(r_ε s)/c - 1|` over the window.
pub fn psi_deviation(p: &RescaledProfiles) -> f64 {
    p.psi.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
}

/// Sup deviation of difference quotients of the rescaled profile from `φ'`
/// at the interval midpoints.
pub fn slope_deviation(p: &RescaledProfiles) -> f64 {
    (0..p.s.len() - 1)
        .map(|j| {
            let h = p.s[j + 1] - p.s[j];
            let dq = (p.phi[j + 1] - p.phi[j]) / h;
            (dq - bubble_slope(0.5 * (p.s[j] + p.s[j + 1]))).abs()
        })
        .fold(0.0, f64::max)
}

pub fn write_profiles_csv<W: Write>(p: &RescaledProfiles, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["s", "phi_rescaled", "phi_bubble", "psi_rescaled"])?;
    for j in 0..p.s.len() {
        out.write_record([fmt17(p.s[j]), fmt17(p.phi[j]), fmt17(p.bubble[j]), fmt17(p.psi[j])])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupDiagnostics {
    pub gamma: f64,
    pub eps: f64,
    pub c_eps: f64,
    pub lambda_eps: f64,
    pub r_eps: f64,
    pub sup_deviation: f64,
    pub psi_deviation: f64,
    pub slope_deviation: f64,
    #[serde(skip)]
    pub profiles: RescaledProfiles,
}

/// Rescales `u` (with `c = max u`) by its own blow-up radius.
pub fn diagnose(u: &RadialFunction, lambda: f64, gamma: f64, window: f64, samples: usize) -> Result<BlowupDiagnostics> {
    let c = u.values()[0];
    let eps = 4.0 * PI - gamma;
    let r = r_eps(lambda, c, eps)?;
    let profiles = rescale_blowup(u, c, r, window, samples)?;
    Ok(BlowupDiagnostics {
        gamma,
        eps,
        c_eps: c,
        lambda_eps: lambda,
        r_eps: r,
        sup_deviation: bubble_deviation(&profiles),
        psi_deviation: psi_deviation(&profiles),
        slope_deviation: slope_deviation(&profiles),
        profiles,
    })
}
