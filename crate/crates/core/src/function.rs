//! Nodal radial functions.
//!
//! Between nodes a function is linear. On `[0, r_min]` it is constant, and on
//! `[1 - delta_b, 1]` it is linear toward `boundary_value`, which is `0` for
//! members of the Hardy space.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

#[derive(Clone, Debug)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    boundary_value: f64,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, boundary_value: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(RadialFunction { grid, values, boundary_value })
    }

    /// A function vanishing on the unit circle.
    pub fn in_h(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values, 0.0)
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64, boundary_value: f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialFunction { grid, values, boundary_value }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn boundary_value(&self) -> f64 {
        self.boundary_value
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.boundary_value)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&r, &u)| f(r, u)).collect();
        RadialFunction { grid: self.grid.clone(), values, boundary_value: self.boundary_value }
    }

    pub fn scaled(&self, s: f64) -> Self {
        RadialFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|u| s * u).collect(),
            boundary_value: s * self.boundary_value,
        }
    }

    pub fn ensure_same_grid(&self, other: &RadialGrid) -> Result<()> {
        if self.grid.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "function lives on a {}-node grid, expected {} nodes",
                self.grid.len(),
                other.len()
            )))
        }
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.values.iter().position(|u| !u.is_finite()) {
            Some(index) => Err(Error::NonFinite { index, r: self.grid.nodes()[index] }),
            None => Ok(()),
        }
    }

    /// Piecewise-linear evaluation at `r` in `[0, 1]`.
    pub fn value_at(&self, r: f64) -> f64 {
        let x = self.grid.nodes();
        let n = x.len();
        if r <= x[0] {
            return self.values[0];
        }
        if r >= x[n - 1] {
            let t = ((r - x[n - 1]) / (1.0 - x[n - 1])).min(1.0);
            return self.values[n - 1] + t * (self.boundary_value - self.values[n - 1]);
        }
        let k = x.partition_point(|&y| y <= r) - 1;
        let t = (r - x[k]) / (x[k + 1] - x[k]);
        self.values[k] + t * (self.values[k + 1] - self.values[k])
    }

    /// Second-order difference approximation of `u'` at every node.
    pub fn derivative(&self) -> Vec<f64> {
        let x = self.grid.nodes();
        let u = &self.values;
        let n = x.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let (hl, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            d[i] = (hl * hl * (u[i + 1] - u[i]) + hr * hr * (u[i] - u[i - 1])) / (hl * hr * (hl + hr));
        }
        d[0] = one_sided(x[0], x[1], x[2], u[0], u[1], u[2]);
        d[n - 1] = one_sided(x[n - 1], x[n - 2], x[n - 3], u[n - 1], u[n - 2], u[n - 3]);
        d
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "value"])?;
        for (r, u) in self.grid.nodes().iter().zip(&self.values) {
            out.write_record([fmt17(*r), fmt17(*u)])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads `r,value` rows. The nodes define a new grid and the result is
    /// taken to vanish on the unit circle.
    pub fn read_csv<R: Read>(rd: R) -> Result<Self> {
        let mut input = csv::Reader::from_reader(rd);
        let headers = input.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "value" {
            return Err(Error::Format(format!("expected header r,value, got {:?}", headers)));
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for rec in input.records() {
            let rec = rec?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad number {s:?}: {e}")));
            nodes.push(parse(&rec[0])?);
            values.push(parse(&rec[1])?);
        }
        let grid = Arc::new(RadialGrid::from_nodes(nodes)?);
        Self::in_h(grid, values)
    }
}

fn one_sided(x0: f64, x1: f64, x2: f64, u0: f64, u1: f64, u2: f64) -> f64 {
    // derivative at x0 of the quadratic through the three points
    let (a, b) = (x1 - x0, x2 - x0);
    (b * b * (u1 - u0) - a * a * (u2 - u0)) / (a * b * (b - a))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x)
}
