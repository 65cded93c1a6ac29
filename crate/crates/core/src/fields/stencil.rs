use rayon::prelude::*;

use super::ScalarField;
use crate::error::{Error, Result};
use crate::real::Real;

/// Finite-difference weights for the `m`-th derivative at `z` from nodes `xs`
/// (Fornberg's recursion).
pub fn fornberg_weights(z: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Half-width of the centered 4th-order stencil for derivative order `k`.
pub fn half_width(k: usize) -> usize {
    match k {
        0 => 0,
        1 | 2 => 2,
        _ => 3,
    }
}

/// Per-node stencils for one axis: window start and weights (already scaled by `h^-k`).
/// Weights sum to zero, so they are applied to differences from the node value.
struct AxisPlan<T> {
    rows: Vec<(usize, Vec<T>)>,
}

impl<T: Real> AxisPlan<T> {
    fn new(n: usize, k: usize, h: T) -> Self {
        let hw = half_width(k);
        // One-sided windows need k + 4 nodes for 4th order.
        let wide = k + 4;
        let scale = T::one() / h.powi(k as i32);
        let rows = (0..n)
            .map(|i| {
                let (start, len) = if i >= hw && i + hw < n {
                    (i - hw, 2 * hw + 1)
                } else if i < hw {
                    (0, wide)
                } else {
                    (n - wide, wide)
                };
                let xs: Vec<f64> = (start..start + len).map(|t| t as f64).collect();
                let w = fornberg_weights(i as f64, &xs, k);
                (start, w.into_iter().map(|v| T::lit(v) * scale).collect())
            })
            .collect();
        Self { rows }
    }
}

fn apply_x<T: Real>(f: &ScalarField<T>, k: usize) -> ScalarField<T> {
    let g = *f.grid();
    let plan = AxisPlan::new(g.nx, k, g.h);
    let src = f.values();
    let mut out = vec![T::zero(); g.len()];
    out.par_chunks_mut(g.ny).enumerate().for_each(|(i, row)| {
        let (start, w) = &plan.rows[i];
        let centre = &src[i * g.ny..(i + 1) * g.ny];
        for (t, &wt) in w.iter().enumerate() {
            let base = (start + t) * g.ny;
            for (j, o) in row.iter_mut().enumerate() {
                *o = *o + wt * (src[base + j] - centre[j]);
            }
        }
    });
    let m = f.margin();
    ScalarField::from_raw(g, out, [m[0] + half_width(k), m[1]])
}

fn apply_y<T: Real>(f: &ScalarField<T>, k: usize) -> ScalarField<T> {
    let g = *f.grid();
    let plan = AxisPlan::new(g.ny, k, g.h);
    let src = f.values();
    let mut out = vec![T::zero(); g.len()];
    out.par_chunks_mut(g.ny).enumerate().for_each(|(i, row)| {
        let col = &src[i * g.ny..(i + 1) * g.ny];
        for (j, o) in row.iter_mut().enumerate() {
            let (start, w) = &plan.rows[j];
            let mut acc = T::zero();
            for (t, &wt) in w.iter().enumerate() {
                acc = acc + wt * (col[start + t] - col[j]);
            }
            *o = acc;
        }
    });
    let m = f.margin();
    ScalarField::from_raw(g, out, [m[0], m[1] + half_width(k)])
}

/// Mixed partial `∂x^kx ∂y^ky f` with 4th-order stencils: centered in the
/// interior, shifted one-sided near the boundary. Total order must be `<= 3`.
pub fn differentiate<T: Real>(f: &ScalarField<T>, kx: usize, ky: usize) -> Result<ScalarField<T>> {
    if kx + ky > 3 {
        return Err(Error::InvalidOrder { kx, ky });
    }
    let mut out = if kx > 0 { apply_x(f, kx) } else { f.clone() };
    if ky > 0 {
        out = apply_y(&out, ky);
    }
    Ok(out)
}
