use nalgebra::DMatrix;

use super::SurfaceMesh;
use crate::error::{Error, Result};
use crate::fields::{differentiate, ReportBuilder, ResidualReport, ScalarField, DEFAULT_EXCLUSION};
use crate::real::Real;

/// `dst ≈ matrix · src + shift` in the least-squares sense.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFit {
    pub matrix: [[f64; 3]; 3],
    pub shift: [f64; 3],
    /// Largest pointwise distance after the fit.
    pub sup: f64,
    pub rms: f64,
}

impl AffineFit {
    pub fn apply(&self, x: [f64; 3]) -> [f64; 3] {
        let m = &self.matrix;
        let mut out = self.shift;
        for (r, o) in out.iter_mut().enumerate() {
            *o += m[r][0] * x[0] + m[r][1] * x[1] + m[r][2] * x[2];
        }
        out
    }
}

/// Least-squares affine map from `src` to `dst` by SVD.
pub fn fit_affine(src: &[[f64; 3]], dst: &[[f64; 3]]) -> Result<AffineFit> {
    if src.len() != dst.len() || src.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "affine fit needs two equally long point sets of at least 4 points, got {} and {}",
            src.len(),
            dst.len()
        )));
    }
    let n = src.len();
    let a = DMatrix::from_fn(n, 4, |r, c| if c < 3 { src[r][c] } else { 1.0 });
    let b = DMatrix::from_fn(n, 3, |r, c| dst[r][c]);
    let svd = a.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    let x = svd.solve(&b, eps).map_err(|e| Error::Degenerate(format!("affine fit failed: {e}")))?;
    let mut fit = AffineFit { matrix: [[0.0; 3]; 3], shift: [0.0; 3], sup: 0.0, rms: 0.0 };
    for r in 0..3 {
        for c in 0..3 {
            fit.matrix[r][c] = x[(c, r)];
        }
        fit.shift[r] = x[(3, r)];
    }
    let mut sum = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let y = fit.apply(*s);
        let e = ((y[0] - d[0]).powi(2) + (y[1] - d[1]).powi(2) + (y[2] - d[2]).powi(2)).sqrt();
        fit.sup = fit.sup.max(e);
        sum += e * e;
    }
    fit.rms = (sum / n as f64).sqrt();
    Ok(fit)
}

/// [`fit_affine`] over the nodes unmasked in both meshes and at least
/// `exclusion` nodes from the boundary.
pub fn fit_affine_meshes<T: Real>(src: &SurfaceMesh<T>, dst: &SurfaceMesh<T>, exclusion: usize) -> Result<AffineFit> {
    if src.grid() != dst.grid() {
        return Err(Error::GridMismatch);
    }
    let g = src.grid();
    let e = exclusion.min((g.nx.min(g.ny) - 1) / 2);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in e..g.nx - e {
        for j in e..g.ny - e {
            let k = g.idx(i, j);
            if !src.mask()[k] && !dst.mask()[k] {
                a.push(src.points()[k].map(|v| v.as_f64()));
                b.push(dst.points()[k].map(|v| v.as_f64()));
            }
        }
    }
    fit_affine(&a, &b)
}

/// Norms of `R_xy + (c/p)(R − C)` per coordinate, with the center `C`
/// fitted by least squares over the interior and reported as the extras
/// `center[k]`.
pub fn affine_sphere_residual<T: Real>(mesh: &SurfaceMesh<T>, p: &ScalarField<T>, c: T) -> Result<ResidualReport> {
    if mesh.grid() != p.grid() {
        return Err(Error::GridMismatch);
    }
    if c == T::zero() || !c.is_finite() {
        return Err(Error::InvalidParameter("affine sphere center needs a finite c ≠ 0".into()));
    }
    mesh.ensure_unmasked("affine sphere residual")?;
    p.ensure_nonvanishing("p", p.sup_abs() * T::lit(1e-12))?;
    let g = *p.grid();
    let k = p.map(|v| c / v);
    let mut builder = ReportBuilder::new(&g);
    let mut centers = Vec::new();
    for (n, r) in mesh.coordinates().iter().enumerate() {
        let rxy = differentiate(r, 1, 1)?;
        let m = rxy.margin();
        let e = DEFAULT_EXCLUSION.max(m[0]).max(m[1]).min((g.nx.min(g.ny) - 1) / 2);
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for i in e..g.nx - e {
            for j in e..g.ny - e {
                let (kv, gv, rv) = (k.at(i, j).as_f64(), rxy.at(i, j).as_f64(), r.at(i, j).as_f64());
                num += kv * (gv + kv * rv);
                den += kv * kv;
            }
        }
        let center = T::lit(num / den);
        centers.push(num / den);
        let kr = &k * r;
        let kc = k.scale(center);
        let res = ScalarField::combine([&rxy, &kr, &kc], |[a, b, c]| a + b - c);
        builder = builder.equation(&format!("R_xy[{n}]"), res, &[&rxy, &kr, &kc]);
    }
    let mut report = builder.finish();
    for (n, c) in centers.into_iter().enumerate() {
        report = report.with_extra(&format!("center[{n}]"), c);
    }
    Ok(report)
}
