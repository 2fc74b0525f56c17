//! Disc integrals of radial functions.
//!
//! Zeroth-order integrals use the lumped weights of [`RadialGrid::weights`];
//! gradient integrals are exact for the piecewise-linear interpolant.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::function::RadialFunction;
use crate::grid::RadialGrid;

pub fn integrate_nodal(grid: &RadialGrid, values: &[f64]) -> f64 {
    grid.weights().iter().zip(values).map(|(w, f)| w * f).sum()
}

/// `∫_B f dx`.
pub fn integrate_disc(f: &RadialFunction) -> Result<f64> {
    f.ensure_finite()?;
    Ok(integrate_nodal(f.grid(), f.values()))
}

/// `∫_{|x| < rho} f dx` by the trapezoid rule on `2 pi r f`, cutting the
/// cell that contains `rho` at the interpolated value.
pub fn integrate_disc_within(f: &RadialFunction, rho: f64) -> Result<f64> {
    f.ensure_finite()?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Parameter(format!("radius must lie in (0, 1], got {rho}")));
    }
    let x = f.grid().nodes();
    let u = f.values();
    let head = x[0].min(rho);
    let mut total = PI * head * head * u[0];
    for i in 0..x.len() - 1 {
        if x[i] >= rho {
            return Ok(total);
        }
        let b = x[i + 1].min(rho);
        let ub = if b < x[i + 1] { f.value_at(b) } else { u[i + 1] };
        total += PI * (b - x[i]) * (x[i] * u[i] + b * ub);
    }
    let last = x[x.len() - 1];
    if rho > last {
        // outer ring: the integrand keeps its last nodal value
        total += PI * (rho * rho - last * last) * u[x.len() - 1];
    }
    Ok(total)
}

fn cell_energy(a: f64, b: f64, ua: f64, ub: f64) -> f64 {
    let h = b - a;
    let du = ub - ua;
    PI * (a + b) * du * du / h
}

/// `∫_B |∇u|² dx`, including the outer cell up to `r = 1`.
pub fn dirichlet_energy(u: &RadialFunction) -> Result<f64> {
    u.ensure_finite()?;
    let x = u.grid().nodes();
    let v = u.values();
    let n = x.len();
    let mut e: f64 = (0..n - 1).map(|i| cell_energy(x[i], x[i + 1], v[i], v[i + 1])).sum();
    e += cell_energy(x[n - 1], 1.0, v[n - 1], u.boundary_value());
    Ok(e)
}

/// Dirichlet energy over the annulus between the nodes nearest to `s` and `r`.
pub fn dirichlet_energy_between(u: &RadialFunction, s: f64, r: f64) -> Result<f64> {
    u.ensure_finite()?;
    let (i, j) = (u.grid().nearest(s), u.grid().nearest(r));
    if i >= j {
        return Err(Error::SingularDomain(format!("annulus [{s:e}, {r:e}] collapses to a single node")));
    }
    let x = u.grid().nodes();
    let v = u.values();
    Ok((i..j).map(|k| cell_energy(x[k], x[k + 1], v[k], v[k + 1])).sum())
}

/// `∫_B u²/(1-|x|²)² dx`. Grows like `1/delta_b` unless `u` vanishes on the circle.
pub fn hardy_integral(u: &RadialFunction) -> Result<f64> {
    u.ensure_finite()?;
    let x = u.grid().nodes();
    Ok(u.grid()
        .weights()
        .iter()
        .zip(x)
        .zip(u.values())
        .map(|((w, r), v)| {
            let d = (1.0 - r) * (1.0 + r);
            w * v * v / (d * d)
        })
        .sum())
}

pub fn l2_norm_sq(u: &RadialFunction) -> Result<f64> {
    u.ensure_finite()?;
    Ok(integrate_nodal(u.grid(), &u.values().iter().map(|v| v * v).collect::<Vec<_>>()))
}
