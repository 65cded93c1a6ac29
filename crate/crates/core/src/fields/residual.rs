use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_same_grid, differentiate, GridSpec, ScalarField};
use crate::error::Result;
use crate::real::Real;

/// Boundary strip always left out of residual norms.
pub const DEFAULT_EXCLUSION: usize = 3;

/// Norms of one residual equation over the grid interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationNorms {
    pub name: String,
    pub sup: f64,
    pub l2: f64,
    /// Interior sup of the summed term magnitudes; the natural size to compare
    /// a cancellation against.
    pub scale: f64,
    /// `depth_sup[k]` is the sup over nodes at least `exclusion + k` nodes
    /// from the boundary; used to compare grids over the same physical region.
    #[serde(skip)]
    pub depth_sup: Vec<f64>,
}

impl EquationNorms {
    fn sup_from(&self, exclusion: usize, depth: usize) -> f64 {
        match self.depth_sup.get(depth.saturating_sub(exclusion)) {
            Some(&v) => v,
            None if self.depth_sup.is_empty() => self.sup,
            None => 0.0,
        }
    }

    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.sup / self.scale
        } else {
            self.sup
        }
    }
}

/// Per-equation residual norms plus the grid spacing and the excluded boundary width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equations: Vec<EquationNorms>,
    pub h: f64,
    pub exclusion: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

/// Acceptance threshold applied to each equation's sup-norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    /// `max(1e-8, 50 h^4 scale)`.
    Default,
    Absolute(f64),
}

impl Tolerance {
    pub fn threshold(&self, h: f64, scale: f64) -> f64 {
        match *self {
            Tolerance::Default => (50.0 * h.powi(4) * scale).max(1e-8),
            Tolerance::Absolute(t) => t,
        }
    }
}

impl ResidualReport {
    pub fn max_sup(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.sup))
    }

    pub fn max_relative(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.relative()))
    }

    pub fn max_scale(&self) -> f64 {
        self.equations.iter().fold(0.0, |m, e| m.max(e.scale))
    }

    pub fn equation(&self, name: &str) -> Option<&EquationNorms> {
        self.equations.iter().find(|e| e.name == name)
    }

    pub fn sup(&self, name: &str) -> f64 {
        self.equation(name).map(|e| e.sup).unwrap_or(f64::NAN)
    }

    pub fn passes(&self, tol: Tolerance) -> bool {
        self.equations.iter().all(|e| e.sup <= tol.threshold(self.h, e.scale))
    }

    /// Names of equations above tolerance.
    pub fn failures(&self, tol: Tolerance) -> Vec<String> {
        self.equations.iter().filter(|e| !(e.sup <= tol.threshold(self.h, e.scale))).map(|e| e.name.clone()).collect()
    }

    /// Per-equation ratio `self / finer`, the refinement factor when `finer`
    /// covers the same domain with half the spacing. Both sups are taken over
    /// the same physical interior (depth `k` here, `2k` on the finer grid).
    pub fn ratios(&self, finer: &ResidualReport) -> Vec<(String, f64)> {
        let k = self.exclusion.max(finer.exclusion.div_ceil(2));
        self.equations
            .iter()
            .zip(&finer.equations)
            .map(|(c, f)| (c.name.clone(), c.sup_from(self.exclusion, k) / f.sup_from(finer.exclusion, 2 * k)))
            .collect()
    }

    /// Ratio of the largest equation sups over a common physical interior.
    pub fn refinement_ratio(&self, finer: &ResidualReport) -> f64 {
        let k = self.exclusion.max(finer.exclusion.div_ceil(2));
        let coarse = self.equations.iter().fold(0.0f64, |m, e| m.max(e.sup_from(self.exclusion, k)));
        let fine = finer.equations.iter().fold(0.0f64, |m, e| m.max(e.sup_from(finer.exclusion, 2 * k)));
        coarse / fine
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    /// Merges the equations of `other`, prefixing their names.
    pub fn merge(mut self, prefix: &str, other: ResidualReport) -> Self {
        self.exclusion = self.exclusion.max(other.exclusion);
        for mut e in other.equations {
            e.name = format!("{prefix}{}", e.name);
            self.equations.push(e);
        }
        self.extras.extend(other.extras);
        self
    }
}

/// Accumulates residual fields and reduces them to norms over a common interior.
pub struct ReportBuilder<T> {
    grid: GridSpec<T>,
    entries: Vec<(String, ScalarField<T>, ScalarField<T>)>,
    min_exclusion: usize,
}

impl<T: Real> ReportBuilder<T> {
    pub fn new(grid: &GridSpec<T>) -> Self {
        Self { grid: *grid, entries: Vec::new(), min_exclusion: DEFAULT_EXCLUSION }
    }

    pub fn min_exclusion(mut self, width: usize) -> Self {
        self.min_exclusion = width;
        self
    }

    /// Adds an equation `residual = Σ terms`; the scale is the node-wise sum of
    /// term magnitudes.
    pub fn equation(mut self, name: &str, residual: ScalarField<T>, terms: &[&ScalarField<T>]) -> Self {
        let mut scale = ScalarField::zeros(&self.grid);
        for t in terms {
            scale = ScalarField::combine([&scale, *t], |[s, v]| s + v.abs());
        }
        self.entries.push((name.to_string(), residual, scale));
        self
    }

    pub fn finish(self) -> ResidualReport {
        let g = self.grid;
        let mut width = self.min_exclusion;
        for (_, r, _) in &self.entries {
            let m = r.margin();
            width = width.max(m[0]).max(m[1]);
        }
        // Keep at least the central node.
        let width = width.min((g.nx.min(g.ny) - 1) / 2);
        let h = g.h.as_f64();
        let equations = self
            .entries
            .iter()
            .map(|(name, r, s)| {
                let (mut sum, mut scale) = (0.0f64, 0.0f64);
                let deepest = (g.nx.min(g.ny) - 1) / 2;
                let mut ring = vec![0.0f64; deepest + 1 - width];
                for i in width..g.nx - width {
                    for j in width..g.ny - width {
                        let v = r.at(i, j).as_f64();
                        let d = i.min(j).min(g.nx - 1 - i).min(g.ny - 1 - j);
                        let a = if v.is_nan() { f64::INFINITY } else { v.abs() };
                        ring[d - width] = ring[d - width].max(a);
                        sum += v * v;
                        scale = scale.max(s.at(i, j).as_f64());
                    }
                }
                for k in (0..ring.len() - 1).rev() {
                    ring[k] = ring[k].max(ring[k + 1]);
                }
                EquationNorms { name: name.clone(), sup: ring[0], l2: (sum * h * h).sqrt(), scale, depth_sup: ring }
            })
            .collect();
        ResidualReport { equations, h, exclusion: width, extras: BTreeMap::new() }
    }
}

/// Residuals of the stationary mVN system for `(p, V, W)`:
/// `R1 = (p_xxx − 2V p_x − p V_x) − (p_yyy − 2W p_y − p W_y)`,
/// `R2 = W_x − (3/2)(p²)_y`, `R3 = V_y − (3/2)(p²)_x`.
pub fn residual_mvn<T: Real>(p: &ScalarField<T>, v: &ScalarField<T>, w: &ScalarField<T>) -> Result<ResidualReport> {
    check_same_grid(&[p, v, w])?;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let px = differentiate(p, 1, 0)?;
    let py = differentiate(p, 0, 1)?;
    let pxxx = differentiate(p, 3, 0)?;
    let pyyy = differentiate(p, 0, 3)?;
    let vx = differentiate(v, 1, 0)?;
    let vy = differentiate(v, 0, 1)?;
    let wx = differentiate(w, 1, 0)?;
    let wy = differentiate(w, 0, 1)?;

    let t_vpx = ScalarField::combine([v, &px], |[a, b]| two * a * b);
    let t_pvx = p * &vx;
    let t_wpy = ScalarField::combine([w, &py], |[a, b]| two * a * b);
    let t_pwy = p * &wy;
    let r1 = ScalarField::combine([&pxxx, &t_vpx, &t_pvx, &pyyy, &t_wpy, &t_pwy], |[a, b, c, d, e, f]| {
        (a - b - c) - (d - e - f)
    });
    let t_ppy = ScalarField::combine([p, &py], |[a, b]| three * a * b);
    let t_ppx = ScalarField::combine([p, &px], |[a, b]| three * a * b);
    let r2 = &wx - &t_ppy;
    let r3 = &vy - &t_ppx;
    Ok(ReportBuilder::new(p.grid())
        .equation("R1", r1, &[&pxxx, &t_vpx, &t_pvx, &pyyy, &t_wpy, &t_pwy])
        .equation("R2", r2, &[&wx, &t_ppy])
        .equation("R3", r3, &[&vy, &t_ppx])
        .finish())
}

/// Residuals of the stationary VN system for `(u, v, w)`:
/// `R1 = (u_xxx − 3(vu)_x) − (u_yyy − 3(wu)_y)`, `R2 = w_x − u_y`, `R3 = v_y − u_x`.
pub fn residual_vn<T: Real>(u: &ScalarField<T>, v: &ScalarField<T>, w: &ScalarField<T>) -> Result<ResidualReport> {
    check_same_grid(&[u, v, w])?;
    let three = T::lit(3.0);
    let uxxx = differentiate(u, 3, 0)?;
    let uyyy = differentiate(u, 0, 3)?;
    let vu_x = differentiate(&(v * u), 1, 0)?.scale(three);
    let wu_y = differentiate(&(w * u), 0, 1)?.scale(three);
    let r1 = ScalarField::combine([&uxxx, &vu_x, &uyyy, &wu_y], |[a, b, c, d]| (a - b) - (c - d));
    let ux = differentiate(u, 1, 0)?;
    let uy = differentiate(u, 0, 1)?;
    let wx = differentiate(w, 1, 0)?;
    let vy = differentiate(v, 0, 1)?;
    Ok(ReportBuilder::new(u.grid())
        .equation("R1", r1, &[&uxxx, &vu_x, &uyyy, &wu_y])
        .equation("R2", &wx - &uy, &[&wx, &uy])
        .equation("R3", &vy - &ux, &[&vy, &ux])
        .finish())
}

/// Residuals of the projective Gauss-Codazzi system for `(p, q, V, W)`.
pub fn residual_gc<T: Real>(
    p: &ScalarField<T>,
    q: &ScalarField<T>,
    v: &ScalarField<T>,
    w: &ScalarField<T>,
) -> Result<ResidualReport> {
    check_same_grid(&[p, q, v, w])?;
    let two = T::lit(2.0);
    let py = differentiate(p, 0, 1)?;
    let px = differentiate(p, 1, 0)?;
    let pyyy = differentiate(p, 0, 3)?;
    let qx = differentiate(q, 1, 0)?;
    let qy = differentiate(q, 0, 1)?;
    let qxxx = differentiate(q, 3, 0)?;
    let vx = differentiate(v, 1, 0)?;
    let vy = differentiate(v, 0, 1)?;
    let wx = differentiate(w, 1, 0)?;
    let wy = differentiate(w, 0, 1)?;

    let t_pyw = ScalarField::combine([&py, w], |[a, b]| two * a * b);
    let t_pwy = p * &wy;
    let t_qxv = ScalarField::combine([&qx, v], |[a, b]| two * a * b);
    let t_qvx = q * &vx;
    let r1 = ScalarField::combine([&pyyy, &t_pyw, &t_pwy, &qxxx, &t_qxv, &t_qvx], |[a, b, c, d, e, f]| {
        (a - b - c) - (d - e - f)
    });
    let t_qpy = ScalarField::combine([q, &py], |[a, b]| two * a * b);
    let t_pqy = p * &qy;
    let r2 = ScalarField::combine([&wx, &t_qpy, &t_pqy], |[a, b, c]| a - b - c);
    let t_pqx = ScalarField::combine([p, &qx], |[a, b]| two * a * b);
    let t_qpx = q * &px;
    let r3 = ScalarField::combine([&vy, &t_pqx, &t_qpx], |[a, b, c]| a - b - c);
    Ok(ReportBuilder::new(p.grid())
        .equation("R1", r1, &[&pyyy, &t_pyw, &t_pwy, &qxxx, &t_qxv, &t_qvx])
        .equation("R2", r2, &[&wx, &t_qpy, &t_pqy])
        .equation("R3", r3, &[&vy, &t_pqx, &t_qpx])
        .finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, sample};

    #[test]
    fn quadric_triple_vanishes() {
        let g = make_grid(0.2, 0.1, 24, 24, 0.05).unwrap();
        let p = ScalarField::zeros(&g);
        let v = sample(|x: f64, _| x * x, &g).unwrap();
        let w = sample(|_, y: f64| y.powi(3), &g).unwrap();
        let r = residual_mvn(&p, &v, &w).unwrap();
        assert!(r.max_sup() <= 1e-12, "{r:?}");
        let gc = residual_gc(&p, &p, &v, &w).unwrap();
        assert!(gc.max_sup() <= 1e-12);
    }

    #[test]
    fn vn_zero_fields() {
        let g = make_grid(0.0, 0.0, 8, 8, 0.5).unwrap();
        let z = ScalarField::zeros(&g);
        assert_eq!(residual_vn(&z, &z, &z).unwrap().max_sup(), 0.0);
    }

    #[test]
    fn gc_constant_case() {
        let g = make_grid(0.0, 0.0, 12, 12, 0.1).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        let zero = ScalarField::zeros(&g);
        let r = residual_gc(&one, &one, &zero, &zero).unwrap();
        assert!(r.max_sup() < 1e-12);
    }

    #[test]
    fn gc_matches_mvn_when_q_equals_p() {
        let g = make_grid(0.0, 0.0, 33, 33, 0.05).unwrap();
        let p = sample(|x: f64, y: f64| (x + y).sin(), &g).unwrap();
        let v = p.map(|s| 1.5 * s * s + 1.0);
        let w = v.map(|s| s + 0.1 * s * s);
        let a = residual_mvn(&p, &v, &w).unwrap();
        let b = residual_gc(&p, &p, &v, &w).unwrap();
        for (x, y) in a.equations.iter().zip(&b.equations) {
            assert!((x.sup - y.sup).abs() <= 1e-12 * x.scale.max(1.0));
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g1 = make_grid(0.0, 0.0, 8, 8, 0.5).unwrap();
        let g2 = make_grid(0.0, 0.0, 9, 8, 0.5).unwrap();
        let a = ScalarField::zeros(&g1);
        let b = ScalarField::zeros(&g2);
        assert!(residual_mvn(&a, &a, &b).is_err());
        assert!(residual_vn(&a, &b, &a).is_err());
    }

    #[test]
    fn default_tolerance_floor() {
        assert_eq!(Tolerance::Default.threshold(1e-3, 1.0), 1e-8);
        assert!((Tolerance::Default.threshold(0.1, 2.0) - 0.01).abs() < 1e-15);
    }
}
