//! Radial grids on `[r_min, 1 - delta_b]`.
//!
//! Graded grids place nodes uniformly in `xi = r + k * logit(r)`. Near either
//! end the map is logarithmic, so consecutive cell widths form a geometric
//! progression: they grow by `1/q` leaving the origin and shrink by `q` toward
//! `r = 1`. The stretch `k` is fixed by `n`, the endpoints and `q`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    Geometric {
        ratio: f64,
        stretch: f64,
    },
    /// Union of a base grid with extra nodes.
    Composite,
}

#[derive(Clone, Debug)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_min: f64,
    delta_b: f64,
    grading: Grading,
}

fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

fn logit(r: f64) -> f64 {
    r.ln() - (-r).ln_1p()
}

/// Solves `logistic(y) + k y = xi` by safeguarded Newton.
fn invert_stretch(xi: f64, k: f64) -> f64 {
    let (mut lo, mut hi) = ((xi - 1.0) / k, xi / k);
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let s = logistic(y);
        let f = s + k * y - xi;
        if f > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let mut next = y - f / (s * (1.0 - s) + k);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() <= 4.0 * f64::EPSILON * y.abs().max(1.0) {
            return next;
        }
        y = next;
    }
    y
}

fn check_bounds(n: usize, r_min: f64, delta_b: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::Parameter(format!("need at least 3 nodes, got {n}")));
    }
    if !(r_min > 0.0 && r_min.is_finite()) {
        return Err(Error::Parameter(format!("r_min must be positive, got {r_min}")));
    }
    if !(delta_b > 0.0 && delta_b.is_finite()) {
        return Err(Error::Parameter(format!("delta_b must be positive, got {delta_b}")));
    }
    if r_min >= 1.0 - delta_b {
        return Err(Error::Parameter(format!("empty interval: r_min = {r_min}, 1 - delta_b = {}", 1.0 - delta_b)));
    }
    Ok(())
}

/// Ratio that gives unit stretch, i.e. equal weight to the linear and
/// logarithmic parts of the map.
pub fn default_ratio(n: usize, r_min: f64, delta_b: f64) -> Result<f64> {
    check_bounds(n, r_min, delta_b)?;
    let r_max = 1.0 - delta_b;
    let span = r_max - r_min + logit(r_max) - logit(r_min);
    Ok((-span / (n - 1) as f64).exp())
}

/// Builds an `n`-node grid. `ratio = None` selects [`default_ratio`],
/// `Some(1.0)` a uniform grid, `Some(q)` with `0 < q < 1` a graded grid whose
/// boundary-layer cells shrink by `q` toward `r = 1`.
pub fn build_grid(n: usize, r_min: f64, delta_b: f64, ratio: Option<f64>) -> Result<RadialGrid> {
    check_bounds(n, r_min, delta_b)?;
    let r_max = 1.0 - delta_b;
    let q = match ratio {
        Some(q) => q,
        None => default_ratio(n, r_min, delta_b)?,
    };
    if q == 1.0 {
        let h = (r_max - r_min) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| r_min + i as f64 * h).collect();
        nodes[n - 1] = r_max;
        return RadialGrid::assemble(nodes, r_min, delta_b, Grading::Uniform);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Parameter(format!("grading ratio must lie in (0, 1], got {q}")));
    }
    let y0 = logit(r_min);
    let y1 = logit(r_max);
    let denom = (n - 1) as f64 * (-q.ln()) - (y1 - y0);
    if denom <= 0.0 {
        return Err(Error::Parameter(format!(
            "ratio {q} is too close to 1 for {n} nodes on [{r_min:e}, 1 - {delta_b:e}]"
        )));
    }
    let stretch = (r_max - r_min) / denom;
    let xi0 = r_min + stretch * y0;
    let xi1 = r_max + stretch * y1;
    let step = (xi1 - xi0) / (n - 1) as f64;
    let mut nodes = Vec::with_capacity(n);
    nodes.push(r_min);
    for i in 1..n - 1 {
        nodes.push(logistic(invert_stretch(xi0 + i as f64 * step, stretch)));
    }
    nodes.push(r_max);
    RadialGrid::assemble(nodes, r_min, delta_b, Grading::Geometric { ratio: q, stretch })
}

impl RadialGrid {
    fn assemble(nodes: Vec<f64>, r_min: f64, delta_b: f64, grading: Grading) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Parameter("a grid needs at least 3 nodes".into()));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Parameter(format!("nodes must increase strictly; violated at index {}", i + 1)));
            }
        }
        if !(nodes[0] > 0.0) || !(nodes[nodes.len() - 1] < 1.0) {
            return Err(Error::Parameter("nodes must lie in (0, 1)".into()));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = nodes[i + 1] - nodes[i];
            weights[i] += std::f64::consts::PI * h * nodes[i];
            weights[i + 1] += std::f64::consts::PI * h * nodes[i + 1];
        }
        weights[0] += std::f64::consts::PI * r_min * r_min;
        weights[n - 1] += std::f64::consts::PI * delta_b * (2.0 - delta_b);
        Ok(RadialGrid { nodes, weights, r_min, delta_b, grading })
    }

    /// Grid through explicit nodes; the first and last node fix `r_min` and `delta_b`.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let r_min = *nodes.first().ok_or_else(|| Error::Parameter("no nodes".into()))?;
        let delta_b = 1.0 - nodes[nodes.len() - 1];
        Self::assemble(nodes, r_min, delta_b, Grading::Composite)
    }

    /// Union with `extra` nodes, which must lie inside the grid's interval.
    /// Nodes closer than a relative `1e-12` to an existing node are merged.
    pub fn with_nodes(&self, extra: &[f64]) -> Result<Self> {
        let lo = self.nodes[0];
        let hi = self.nodes[self.nodes.len() - 1];
        let mut all = self.nodes.clone();
        for &x in extra {
            if !(x >= lo && x <= hi) {
                return Err(Error::Parameter(format!("extra node {x:e} outside [{lo:e}, {hi}]")));
            }
            all.push(x);
        }
        all.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(all.len());
        for x in all {
            match merged.last() {
                Some(&p) if x - p <= 1e-12 * x => {}
                _ => merged.push(x),
            }
        }
        // keep the exact endpoints
        let m = merged.len();
        merged[0] = lo;
        merged[m - 1] = hi;
        Self::assemble(merged, self.r_min, self.delta_b, Grading::Composite)
    }

    /// Nested refinement: every cell is halved, `n -> 2n - 1`. Graded grids
    /// are rebuilt with ratio `sqrt(q)`, which keeps the stretch and so
    /// reproduces every old node.
    pub fn refine(&self) -> Result<Self> {
        let n = 2 * self.len() - 1;
        match self.grading {
            Grading::Uniform => build_grid(n, self.r_min, self.delta_b, Some(1.0)),
            Grading::Geometric { ratio, .. } => build_grid(n, self.r_min, self.delta_b, Some(ratio.sqrt())),
            Grading::Composite => {
                let mid: Vec<f64> = self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                self.with_nodes(&mid)
            }
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Lumped disc weights: trapezoid rule for `2 pi r f` on every cell, with
    /// the inner disc `r < r_min` and the outer ring `r > 1 - delta_b` added
    /// to the end nodes. They sum to `pi` up to rounding.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn delta_b(&self) -> f64 {
        self.delta_b
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Index of the node nearest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x < r);
        if k == 0 {
            0
        } else if k == self.nodes.len() || r - self.nodes[k - 1] <= self.nodes[k] - r {
            k - 1
        } else {
            k
        }
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        std::ptr::eq(self, other) || self.nodes == other.nodes
    }
}
