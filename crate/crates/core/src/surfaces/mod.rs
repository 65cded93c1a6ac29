//! Surfaces in 3-space: homogeneous coordinates of the Wilczynski system,
//! Lelieuvre integration of the affine conormal, cross checks and export.

mod fit;
mod lelieuvre;
mod obj;

use crate::backlund::{AffineFrame, R0Jet};
use crate::connection::{integrate_fundamental, Mode, StateField};
use crate::error::{Error, Result};
use crate::families::MvnSolution;
use crate::fields::{differentiate, GridSpec, ReportBuilder, ResidualReport, ScalarField, Tolerance};
use crate::real::Real;

pub use fit::{affine_sphere_residual, fit_affine, fit_affine_meshes, AffineFit};
pub use lelieuvre::{
    conormal_consistency, conormal_initial_data, reconstruct_lelieuvre, reconstruct_lelieuvre_unchecked, ConormalField,
    LelieuvreSurface,
};
pub use obj::{export_obj, read_obj, write_csv, write_obj, ObjMesh};

/// Nodes with `|r⁰|` below this fraction of `max |r⁰|` are masked.
pub const MASK_THRESHOLD: f64 = 1e-8;
/// Largest masked fraction a reconstruction accepts.
pub const MAX_MASKED_FRACTION: f64 = 0.2;

/// Per-vertex invariants, in node order.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexScalars<T> {
    pub p: Vec<T>,
    /// Coefficient `2pq` of the projective metric.
    pub metric: Vec<T>,
    /// Coefficient `p` of `dx³` in the Darboux cubic form.
    pub cubic: Vec<T>,
    /// `(ln(p/q))_xy`, zero for isothermally asymptotic parametrizations.
    pub isothermal: Vec<T>,
}

/// Points of a surface on the parameter grid, with quad faces over the
/// cells whose corners are all unmasked. Masked vertices sit at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh<T> {
    grid: GridSpec<T>,
    points: Vec<[T; 3]>,
    mask: Vec<bool>,
    margin: [usize; 2],
    pub scalars: Option<VertexScalars<T>>,
}

impl<T: Real> SurfaceMesh<T> {
    pub fn new(grid: &GridSpec<T>, points: Vec<[T; 3]>, mask: Vec<bool>) -> Result<Self> {
        if points.len() != grid.len() || mask.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "mesh needs {} points and mask entries, got {} and {}",
                grid.len(),
                points.len(),
                mask.len()
            )));
        }
        if let Some(k) = points.iter().position(|x| x.iter().any(|v| !v.is_finite())) {
            return Err(crate::fields::non_finite(grid, k / grid.ny, k % grid.ny));
        }
        Ok(Self { grid: *grid, points, mask, margin: [0, 0], scalars: None })
    }

    pub(crate) fn with_margin(mut self, margin: [usize; 2]) -> Self {
        self.margin = margin;
        self
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn points(&self) -> &[[T; 3]] {
        &self.points
    }

    pub fn point(&self, i: usize, j: usize) -> [T; 3] {
        self.points[self.grid.idx(i, j)]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Quads `(i,j), (i,j+1), (i+1,j+1), (i+1,j)` as 0-based vertex indices.
    pub fn faces(&self) -> Vec<[usize; 4]> {
        let g = &self.grid;
        let mut out = Vec::with_capacity((g.nx - 1) * (g.ny - 1));
        for i in 0..g.nx - 1 {
            for j in 0..g.ny - 1 {
                let f = [g.idx(i, j), g.idx(i, j + 1), g.idx(i + 1, j + 1), g.idx(i + 1, j)];
                if f.iter().all(|&k| !self.mask[k]) {
                    out.push(f);
                }
            }
        }
        out
    }

    /// Coordinate `k` as a scalar field.
    pub fn coordinate(&self, k: usize) -> ScalarField<T> {
        assert!(k < 3, "coordinate {k} out of range");
        let values = self.points.iter().map(|x| x[k]).collect();
        ScalarField::from_raw(self.grid, values, self.margin)
    }

    fn coordinates(&self) -> [ScalarField<T>; 3] {
        [self.coordinate(0), self.coordinate(1), self.coordinate(2)]
    }

    fn ensure_unmasked(&self, what: &str) -> Result<()> {
        match self.mask.iter().position(|m| *m) {
            Some(k) => Err(Error::Degenerate(format!(
                "{what} needs a fully unmasked mesh; node ({}, {}) is masked",
                k / self.grid.ny,
                k % self.grid.ny
            ))),
            None => Ok(()),
        }
    }
}

/// Mesh plus the four homogeneous-coordinate solutions behind it.
#[derive(Clone, Debug)]
pub struct ProjectiveSurface<T> {
    pub mesh: SurfaceMesh<T>,
    /// Integrated states from the corner frames `e₁..e₄`.
    pub states: Vec<StateField<T>>,
}

impl<T: Real> ProjectiveSurface<T> {
    /// `r^k`, the first component of the `k`-th state.
    pub fn homogeneous(&self, k: usize) -> ScalarField<T> {
        self.states[k].component(0)
    }

    pub fn r0_jet(&self, sol: &MvnSolution<T>) -> Result<R0Jet<T>> {
        R0Jet::from_state(&self.states[0], sol)
    }

    /// The affine frame normalized by `r⁰`.
    pub fn frame(&self, sol: &MvnSolution<T>) -> Result<AffineFrame<T>> {
        AffineFrame::from_r0(sol, &self.r0_jet(sol)?)
    }
}

/// `R = (r¹/r⁰, r²/r⁰, r³/r⁰)` from the solutions started at the canonical
/// corner frames. Nodes where `r⁰` nearly vanishes are masked.
pub fn reconstruct_projective<T: Real>(sol: &MvnSolution<T>) -> Result<ProjectiveSurface<T>> {
    let report = sol.residual()?;
    if !report.passes(Tolerance::Default) {
        return Err(Error::Tolerance(format!(
            "(p, V, W) is not an mVN solution: {:?} above tolerance",
            report.failures(Tolerance::Default)
        )));
    }
    let g = *sol.grid();
    let states = integrate_fundamental(&sol.connection()?, Mode::XY)?;
    let r: Vec<ScalarField<T>> = states.iter().map(|s| s.component(0)).collect();
    let cut = r[0].sup_abs() * T::lit(MASK_THRESHOLD);
    let mut mask = vec![false; g.len()];
    let mut points = vec![[T::zero(); 3]; g.len()];
    for k in 0..g.len() {
        let r0 = r[0].values()[k];
        let pt = [r[1].values()[k] / r0, r[2].values()[k] / r0, r[3].values()[k] / r0];
        if !(r0.abs() > cut) || pt.iter().any(|v| !v.is_finite()) {
            mask[k] = true;
        } else {
            points[k] = pt;
        }
    }
    let masked = mask.iter().filter(|m| **m).count();
    if masked as f64 > MAX_MASKED_FRACTION * g.len() as f64 {
        return Err(Error::Degenerate(format!(
            "r⁰ vanishes on {masked} of {} nodes; choose a different initial frame",
            g.len()
        )));
    }
    let margin = states[0].margin();
    let mesh = SurfaceMesh::new(&g, points, mask)?.with_margin(margin);
    Ok(ProjectiveSurface { mesh, states })
}

/// [`sample_invariants_pq`] with `q = p`: the isothermal residual is
/// identically zero and no vertex is masked, even where `p` vanishes.
pub fn sample_invariants<T: Real>(sol: &MvnSolution<T>, mesh: &SurfaceMesh<T>) -> Result<SurfaceMesh<T>> {
    if *sol.grid() != mesh.grid {
        return Err(Error::GridMismatch);
    }
    let p = sol.p.values();
    let mut out = mesh.clone();
    out.scalars = Some(VertexScalars {
        p: p.to_vec(),
        metric: p.iter().map(|&a| T::lit(2.0) * a * a).collect(),
        cubic: p.to_vec(),
        isothermal: vec![T::zero(); p.len()],
    });
    Ok(out)
}

/// Attaches `p`, `2pq`, `p` and `(p_x/p − q_x/q)_y` to the vertices. Nodes
/// where `p` or `q` vanishes are masked.
pub fn sample_invariants_pq<T: Real>(
    p: &ScalarField<T>,
    q: &ScalarField<T>,
    mesh: &SurfaceMesh<T>,
) -> Result<SurfaceMesh<T>> {
    crate::fields::check_same_grid(&[p, q])?;
    if *p.grid() != mesh.grid {
        return Err(Error::GridMismatch);
    }
    let tiny = |f: &ScalarField<T>| f.sup_abs() * T::lit(1e-12);
    let (tp, tq) = (tiny(p), tiny(q));
    let vanishing = |v: T, t: T| !(v.abs() > t);
    let px = differentiate(p, 1, 0)?;
    let qx = differentiate(q, 1, 0)?;
    let ratio = |d: &ScalarField<T>, f: &ScalarField<T>, t: T| {
        ScalarField::combine([d, f], |[d, f]| if vanishing(f, t) { T::zero() } else { d / f })
    };
    let diff = &ratio(&px, p, tp) - &ratio(&qx, q, tq);
    let iso = differentiate(&diff, 0, 1)?;
    let mut out = mesh.clone();
    for k in 0..out.mask.len() {
        if vanishing(p.values()[k], tp) || vanishing(q.values()[k], tq) {
            out.mask[k] = true;
            out.points[k] = [T::zero(); 3];
        }
    }
    let two = T::lit(2.0);
    out.scalars = Some(VertexScalars {
        p: p.values().to_vec(),
        metric: p.values().iter().zip(q.values()).map(|(&a, &b)| two * a * b).collect(),
        cubic: p.values().to_vec(),
        isothermal: iso.values().to_vec(),
    });
    Ok(out)
}

/// Residuals of `R_xx − pR_y − aR_x` and `R_yy − qR_x − bR_y` per coordinate.
pub fn affine_residuals<T: Real>(mesh: &SurfaceMesh<T>, frame: &AffineFrame<T>) -> Result<ResidualReport> {
    mesh.ensure_unmasked("affine residual")?;
    let AffineFrame { p, q, a, b } = frame;
    crate::fields::check_same_grid(&[p, q, a, b])?;
    if *p.grid() != mesh.grid {
        return Err(Error::GridMismatch);
    }
    let mut builder = ReportBuilder::new(&mesh.grid);
    for (k, r) in mesh.coordinates().iter().enumerate() {
        let rx = differentiate(r, 1, 0)?;
        let ry = differentiate(r, 0, 1)?;
        let rxx = differentiate(r, 2, 0)?;
        let ryy = differentiate(r, 0, 2)?;
        let (pry, arx) = (p * &ry, a * &rx);
        let (qrx, bry) = (q * &rx, b * &ry);
        let exx = ScalarField::combine([&rxx, &pry, &arx], |[u, v, w]| u - v - w);
        let eyy = ScalarField::combine([&ryy, &qrx, &bry], |[u, v, w]| u - v - w);
        builder = builder.equation(&format!("R_xx[{k}]"), exx, &[&rxx, &pry, &arx]).equation(
            &format!("R_yy[{k}]"),
            eyy,
            &[&ryy, &qrx, &bry],
        );
    }
    Ok(builder.finish())
}

/// Normal components of `R_xx` and `R_yy` against the unit normal
/// `R_x × R_y / |R_x × R_y|`; both vanish when the coordinate lines are
/// asymptotic.
pub fn asymptotic_defect<T: Real>(mesh: &SurfaceMesh<T>) -> Result<ResidualReport> {
    mesh.ensure_unmasked("asymptotic check")?;
    let r = mesh.coordinates();
    let d = |kx, ky| -> Result<Vec<ScalarField<T>>> { r.iter().map(|c| differentiate(c, kx, ky)).collect() };
    let (rx, ry, rxx, ryy) = (d(1, 0)?, d(0, 1)?, d(2, 0)?, d(0, 2)?);
    let n = cross_fields(&rx, &ry);
    let norm = ScalarField::combine([&n[0], &n[1], &n[2]], |[a, b, c]| (a * a + b * b + c * c).sqrt());
    let normal = |s: &[ScalarField<T>]| {
        let dot = ScalarField::combine([&s[0], &s[1], &s[2], &n[0], &n[1], &n[2], &norm], |[a, b, c, x, y, z, m]| {
            (a * x + b * y + c * z) / m
        });
        let mag = ScalarField::combine([&s[0], &s[1], &s[2]], |[a, b, c]| (a * a + b * b + c * c).sqrt());
        (dot, mag)
    };
    let (exx, mxx) = normal(&rxx);
    let (eyy, myy) = normal(&ryy);
    Ok(ReportBuilder::new(&mesh.grid).equation("II_xx", exx, &[&mxx]).equation("II_yy", eyy, &[&myy]).finish())
}

pub(crate) fn cross_fields<T: Real>(u: &[ScalarField<T>], v: &[ScalarField<T>]) -> [ScalarField<T>; 3] {
    let c = |i: usize, j: usize| ScalarField::combine([&u[i], &v[j], &u[j], &v[i]], |[a, b, c, d]| a * b - c * d);
    [c(1, 2), c(2, 0), c(0, 1)]
}

pub(crate) fn cross<T: Real>(u: [T; 3], v: [T; 3]) -> [T; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{gen_quadric, gen_rotation};
    use crate::fields::make_grid;

    #[test]
    fn single_cell_faces_and_masking() {
        let g = make_grid(0.0, 0.0, 8, 8, 0.1).unwrap();
        let pts = vec![[0.0; 3]; 64];
        let mut mask = vec![false; 64];
        let m = SurfaceMesh::new(&g, pts.clone(), mask.clone()).unwrap();
        assert_eq!(m.faces().len(), 49);
        assert_eq!(m.faces()[0], [0, 1, 9, 8]);
        mask[g.idx(3, 3)] = true;
        let m = SurfaceMesh::new(&g, pts, mask).unwrap();
        assert_eq!(m.faces().len(), 45);
        assert_eq!(m.masked_count(), 1);
    }

    #[test]
    fn rejects_nonfinite_points() {
        let g = make_grid(0.0, 0.0, 8, 8, 0.1).unwrap();
        let mut pts = vec![[0.0; 3]; 64];
        pts[5][1] = f64::NAN;
        assert!(SurfaceMesh::new(&g, pts, vec![false; 64]).is_err());
    }

    #[test]
    fn flat_quadric_is_the_saddle() {
        let g = make_grid(0.5f64, 0.25, 17, 17, 0.0625).unwrap();
        let sol = gen_quadric(|_| 0.0, |_| 0.0, &g).unwrap();
        let s = reconstruct_projective(&sol).unwrap();
        assert_eq!(s.mesh.masked_count(), 0);
        for i in 0..g.nx {
            for j in 0..g.ny {
                let (x, y) = (g.x(i) - g.x0, g.y(j) - g.y0);
                let pt = s.mesh.point(i, j);
                assert!((pt[0] - x).abs() < 1e-13 && (pt[1] - y).abs() < 1e-13);
                assert!((pt[2] - x * y).abs() < 1e-13);
            }
        }
        assert!(asymptotic_defect(&s.mesh).unwrap().max_sup() < 1e-10);
    }

    #[test]
    fn rotation_invariants_depend_on_sum() {
        let g = make_grid(0.0, 0.0, 33, 33, 1.0 / 32.0).unwrap();
        let sol = gen_rotation(f64::sin, 1.0, &g).unwrap();
        let s = reconstruct_projective(&sol).unwrap();
        let m = sample_invariants(&sol, &s.mesh).unwrap();
        let sc = m.scalars.as_ref().unwrap();
        for i in 1..g.nx {
            for j in 0..g.ny - 1 {
                let (a, b) = (g.idx(i, j), g.idx(i - 1, j + 1));
                assert!((sc.metric[a] - sc.metric[b]).abs() < 1e-14);
                assert!((sc.cubic[a] - sc.cubic[b]).abs() < 1e-14);
            }
        }
        assert!(sc.isothermal.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn isothermal_residual_of_separated_pair() {
        let g = make_grid(1.0f64, 1.0, 17, 17, 0.05).unwrap();
        let p = ScalarField::sample(&g, |x, _| x).unwrap();
        let q = ScalarField::sample(&g, |_, y| y).unwrap();
        let mesh = SurfaceMesh::new(&g, vec![[0.0; 3]; g.len()], vec![false; g.len()]).unwrap();
        let m = sample_invariants_pq(&p, &q, &mesh).unwrap();
        let iso = &m.scalars.unwrap().isothermal;
        assert!(iso.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn vanishing_p_is_masked() {
        let g = make_grid(-0.35f64, 0.0, 8, 8, 0.1).unwrap();
        let p = ScalarField::sample(&g, |x, _| x + 0.05).unwrap();
        let mesh = SurfaceMesh::new(&g, vec![[1.0; 3]; g.len()], vec![false; g.len()]).unwrap();
        let m = sample_invariants_pq(&p, &p, &mesh).unwrap();
        assert_eq!(m.masked_count(), 8);
        assert!(m.points().iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn quadric_invariants_keep_every_vertex() {
        let g = make_grid(0.0, 0.0, 9, 9, 0.125).unwrap();
        let sol = gen_quadric(|_| 0.0, |_| 0.0, &g).unwrap();
        let s = reconstruct_projective(&sol).unwrap();
        let m = sample_invariants(&sol, &s.mesh).unwrap();
        assert_eq!(m.masked_count(), 0);
        assert_eq!(m.faces().len(), 64);
        assert!(m.scalars.unwrap().metric.iter().all(|v| *v == 0.0));
    }
}
