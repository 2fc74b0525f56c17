#[allow(dead_code)]
mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use htm_core::bubble::{bubble_dirichlet_energy, bubble_mass, bubble_value};
use htm_core::quadrature::{dirichlet_energy, integrate_disc, integrate_disc_within};
use htm_core::{build_grid, RadialFunction};

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

#[test]
fn smooth_profiles_match_adaptive_simpson() {
    let grid = Arc::new(build_grid(4001, 1e-10, 1e-8, None).unwrap());
    let fine = Arc::new(grid.refine().unwrap());
    let cases: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(|r: f64| (3.0 * r).cos()),
        Box::new(|r: f64| (-5.0 * r * r).exp()),
        Box::new(|r: f64| (1.0 - r * r).sqrt()),
        Box::new(|r: f64| (1.0 + r).ln()),
    ];
    for f in &cases {
        let u = RadialFunction::from_fn(grid.clone(), f, f(1.0));
        let v = RadialFunction::from_fn(fine.clone(), f, f(1.0));
        let oracle = common::disc_simpson(&|r| f(r), &[0.0, 0.5, 1.0], 1e-13);
        let (a, b) = (integrate_disc(&u).unwrap(), integrate_disc(&v).unwrap());
        assert!((b - oracle).abs() < 1e-5, "{b} vs {oracle}");
        assert!((richardson(a, b) - oracle).abs() < 1e-9, "{} vs {oracle}", richardson(a, b));
    }
}

#[test]
fn bubble_mass_by_quadrature() {
    // ∫_{B_R} f(|x|) dx = R² ∫_B f(R|y|) dy
    let grid = Arc::new(build_grid(10001, 1e-10, 1e-8, None).unwrap());
    let fine = Arc::new(grid.refine().unwrap());
    for radius in [1.0, 10.0, 100.0] {
        let dens = |s: f64| (8.0 * PI * bubble_value(s)).exp();
        let mass = |g: &Arc<htm_core::RadialGrid>| {
            let u = RadialFunction::from_fn(g.clone(), |r| dens(radius * r), dens(radius));
            radius * radius * integrate_disc(&u).unwrap()
        };
        let got = richardson(mass(&grid), mass(&fine));
        assert!((got - bubble_mass(radius)).abs() < 1e-8, "R = {radius}: {got}");
        let oracle = common::simpson(&|s| 2.0 * PI * s * dens(s), 0.0, radius, 1e-14);
        assert!((oracle - bubble_mass(radius)).abs() < 1e-11);
    }
}

#[test]
fn bubble_energy_by_richardson() {
    for radius in [1.0, 10.0, 100.0] {
        let energy = |n| {
            let grid = Arc::new(build_grid(n, 1e-10, 1e-10, None).unwrap());
            let u = RadialFunction::from_fn(grid, |r| bubble_value(radius * r), bubble_value(radius));
            dirichlet_energy(&u).unwrap()
        };
        let got = richardson(energy(10001), energy(20001));
        assert!((got - bubble_dirichlet_energy(radius)).abs() < 1e-10, "R = {radius}: {got}");
    }
}

#[test]
fn partial_disc_integrals() {
    let grid = Arc::new(build_grid(4001, 1e-10, 1e-8, None).unwrap());
    let u = RadialFunction::from_fn(grid, |r| r * r, 1.0);
    for rho in [0.1, 0.37, 0.9, 1.0] {
        let got = integrate_disc_within(&u, rho).unwrap();
        let exact = PI * rho.powi(4) / 2.0;
        assert!((got - exact).abs() < 1e-5, "{rho}: {got} vs {exact}");
    }
}
