//! Independent reference computations. Nothing here calls into the solver
//! paths it is compared against.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Disc integral of a radial profile, `∫_0^1 2πr f(r) dr`, split at the
/// given breakpoints.
pub fn disc_simpson(f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> f64 {
    let g = |r: f64| 2.0 * PI * r * f(r);
    breaks.windows(2).map(|w| simpson(&g, w[0], w[1], tol)).sum()
}

/// All eigenvalues (ascending) and `M`-orthonormal eigenvectors of the pencil
/// `(a, diag(m))` by a dense symmetric solve of `M^{-1/2} A M^{-1/2}`.
pub fn dense_pencil(diag: &[f64], off: &[f64], m: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = diag.len();
    let s: Vec<f64> = m.iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = diag[i] * s[i] * s[i];
        if i + 1 < n {
            let v = off[i] * s[i] * s[i + 1];
            a[(i, i + 1)] = v;
            a[(i + 1, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|k| eig.eigenvectors[(k, i)] * s[k]).collect()).collect();
    (values, vectors)
}

fn rk4<const N: usize>(
    f: &dyn Fn(f64, [f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    steps: usize,
) -> [f64; N] {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let axpy = |y: [f64; N], k: [f64; N], c: f64| {
        let mut out = y;
        for i in 0..N {
            out[i] += c * k[i];
        }
        out
    };
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, axpy(y, k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, axpy(y, k2, 0.5 * h));
        let k4 = f(t + h, axpy(y, k3, h));
        for j in 0..N {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

const STEPS: usize = 40_000;
const MATCH: f64 = 0.5;

/// Solution of `(p v')' = r (1 - k (1 - r²)) v`, `p = r (1 - r²)`, that is
/// regular at `r = 1` (`v ~ 1 + (1 - r)/2`), returned as `(v, p v')` at the
/// matching radius. Integrated in `t = log(1 - r)`.
fn outer_regular(k: f64) -> [f64; 2] {
    let d0: f64 = 1e-12;
    let r0 = 1.0 - d0;
    let p0 = r0 * d0 * (1.0 + r0);
    let rhs = |t: f64, y: [f64; 2]| {
        let d = t.exp();
        let r = 1.0 - d;
        let p = r * d * (1.0 + r);
        [-d * y[1] / p, -d * r * (1.0 - k * d * (1.0 + r)) * y[0]]
    };
    rk4(&rhs, d0.ln(), (1.0 - MATCH).ln(), [1.0 + 0.5 * d0, -0.5 * p0], STEPS)
}

/// Same equation, solution regular at the origin (`v(0) = 1`), integrated in
/// `s = log r`.
fn inner_regular(k: f64) -> [f64; 2] {
    let r0: f64 = 1e-8;
    let rhs = |s: f64, y: [f64; 2]| {
        let r = s.exp();
        let rho2 = (1.0 - r) * (1.0 + r);
        [y[1] / rho2, r * r * (1.0 - k * rho2) * y[0]]
    };
    rk4(&rhs, r0.ln(), MATCH.ln(), [1.0, 0.5 * r0 * r0 * (1.0 - k)], STEPS)
}

/// First Hardy eigenvalue from the Wronskian of the two regular solutions
/// of the ground-state equation `-(1/r)(r ρ² v')' + v = λ ρ² v`.
pub fn shooting_lambda1() -> f64 {
    let w = |l: f64| {
        let a = inner_regular(l);
        let b = outer_regular(l);
        a[0] * b[1] - a[1] * b[0]
    };
    let (mut lo, mut hi) = (1.5, 2.5);
    let flo = w(lo);
    assert!(flo * w(hi) < 0.0, "eigenvalue not bracketed");
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if w(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Regular constant `A0` of the Hardy Green function, by matching at
/// `r = 1/2` the inner expansion `w = w_p + A w_h` (with `G = w - log r/2π`)
/// against the outer solution `G = K ρ v`.
pub fn shooting_a0(alpha: f64) -> f64 {
    let r0: f64 = 1e-8;
    // w'' = -e^{2s} (V + α)(w - σ s/2π) in s = log r
    let rhs = |sigma: f64| {
        move |s: f64, y: [f64; 2]| {
            let r = s.exp();
            let rho2 = (1.0 - r) * (1.0 + r);
            let load = 1.0 / (rho2 * rho2) + alpha;
            [y[1], -r * r * load * (y[0] - sigma * s / (2.0 * PI))]
        }
    };
    let (s0, s1) = (r0.ln(), MATCH.ln());
    let wh = rk4(&rhs(0.0), s0, s1, [1.0, 0.0], STEPS);
    let wp = rk4(&rhs(1.0), s0, s1, [0.0, 0.0], STEPS);
    let out = outer_regular(alpha);
    let r = MATCH;
    let rho = ((1.0 - r) * (1.0 + r)).sqrt();
    let p = r * rho * rho;
    let g_out = rho * out[0];
    let dg_out = -r / rho * out[0] + rho * out[1] / p;
    // convert s-derivatives to r-derivatives
    let (wh_v, wh_d) = (wh[0], wh[1] / r);
    let (wp_v, wp_d) = (wp[0], wp[1] / r);
    let (l, dl) = (r.ln() / (2.0 * PI), 1.0 / (2.0 * PI * r));
    // wp + A wh - l = K g_out ; wp' + A wh' - l' = K g_out'
    let det = wh_v * dg_out - wh_d * g_out;
    (-(wp_v - l) * dg_out + (wp_d - dl) * g_out) / det
}

/// Nelder–Mead maximization of `f` from `x0` with initial simplex size `step`.
pub fn nelder_mead_max(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| -f(p)).collect();
    for _ in 0..iters {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() <= 1e-15 * vals[0].abs() {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| pts[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (pts[n][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = -f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = -f(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] { along(-0.5) } else { along(0.5) };
            let fc = -f(&xc);
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    pts[i] = (0..n).map(|k| pts[0][k] + 0.5 * (pts[i][k] - pts[0][k])).collect();
                    vals[i] = -f(&pts[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[best].clone(), -vals[best])
}
