//! Annulus capacity: among radial functions equal to `a` at `|x| = s` and `b`
//! at `|x| = r`, the harmonic one has the least Dirichlet energy,
//! `2π (b - a)² / log(r/s)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::RadialFunction;
use crate::grid::RadialGrid;
use crate::quadrature::dirichlet_energy_between;

fn check_annulus(s: f64, r: f64) -> Result<()> {
    if !(s > 0.0 && s < r && r <= 1.0) {
        return Err(Error::SingularDomain(format!("need 0 < s < r <= 1, got s = {s:e}, r = {r:e}")));
    }
    Ok(())
}

pub fn capacity_energy(a: f64, b: f64, s: f64, r: f64) -> Result<f64> {
    check_annulus(s, r)?;
    Ok(2.0 * PI * (b - a) * (b - a) / (r / s).ln())
}

/// Harmonic interpolation between the nodes nearest to `s` and `r`, constant
/// outside. The values `a` and `b` are attained exactly at those nodes.
pub fn harmonic_annulus(a: f64, b: f64, s: f64, r: f64, grid: Arc<RadialGrid>) -> Result<RadialFunction> {
    check_annulus(s, r)?;
    let (i, j) = (grid.nearest(s), grid.nearest(r));
    if i >= j {
        return Err(Error::SingularDomain(format!("s = {s:e} and r = {r:e} share a node")));
    }
    let (si, rj) = (grid.nodes()[i], grid.nodes()[j]);
    let span = (rj / si).ln();
    let vals = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if k <= i {
                a
            } else if k >= j {
                b
            } else {
                (b * (x / si).ln() + a * (rj / x).ln()) / span
            }
        })
        .collect();
    RadialFunction::new(grid, vals, b)
}

/// Dirichlet energy of `u` over the annulus between the nodes nearest to `s` and `r`.
pub fn annulus_dirichlet_energy(u: &RadialFunction, s: f64, r: f64) -> Result<f64> {
    check_annulus(s, r)?;
    dirichlet_energy_between(u, s, r)
}

/// `π + π e^{1 + 4π A0}`, the level a blowing-up sequence cannot exceed.
pub fn upper_bound(a0: f64) -> f64 {
    PI + PI * (1.0 + 4.0 * PI * a0).exp()
}
