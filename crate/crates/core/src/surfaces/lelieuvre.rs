use super::{cross, cross_fields, SurfaceMesh};
use crate::backlund::{AffineFrame, R0Jet};
use crate::connection::{conormal_connection_unchecked, integrate_connection, running_integral, Mode};
use crate::error::{Error, Result};
use crate::fields::DEFAULT_EXCLUSION;
use crate::fields::{check_same_grid, differentiate, GridSpec, ReportBuilder, ResidualReport, ScalarField, Tolerance};
use crate::real::Real;

/// Relative size of `det(ν, ν_x, ν_y)` below which the conormal frame counts
/// as degenerate.
const DEGENERACY: f64 = 1e-10;

/// The affine conormal `ν` and its first derivatives, one field per
/// Cartesian component.
#[derive(Clone, Debug, PartialEq)]
pub struct ConormalField<T> {
    grid: GridSpec<T>,
    nu: [ScalarField<T>; 3],
    nu_x: [ScalarField<T>; 3],
    nu_y: [ScalarField<T>; 3],
}

impl<T: Real> ConormalField<T> {
    /// Checks finiteness and that `ν, ν_x, ν_y` stay independent on the
    /// interior.
    pub fn new(nu: [ScalarField<T>; 3], nu_x: [ScalarField<T>; 3], nu_y: [ScalarField<T>; 3]) -> Result<Self> {
        let all: Vec<&ScalarField<T>> = nu.iter().chain(&nu_x).chain(&nu_y).collect();
        check_same_grid(&all)?;
        for f in &all {
            f.ensure_finite()?;
        }
        let out = Self { grid: *nu[0].grid(), nu, nu_x, nu_y };
        let g = out.grid;
        let e = DEFAULT_EXCLUSION.min((g.nx.min(g.ny) - 1) / 2);
        for i in e..g.nx - e {
            for j in e..g.ny - e {
                let (n, nx, ny) = out.at(i, j);
                let det = dot(n, cross(nx, ny));
                let size = norm(n) * norm(nx) * norm(ny);
                if !(det.abs() > T::lit(DEGENERACY) * size) {
                    return Err(Error::Degenerate(format!(
                        "conormal frame (ν, ν_x, ν_y) degenerate at node ({i}, {j}), det = {:e}",
                        det.as_f64()
                    )));
                }
            }
        }
        Ok(out)
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn nu(&self) -> &[ScalarField<T>; 3] {
        &self.nu
    }

    pub fn nu_x(&self) -> &[ScalarField<T>; 3] {
        &self.nu_x
    }

    pub fn nu_y(&self) -> &[ScalarField<T>; 3] {
        &self.nu_y
    }

    /// `(ν, ν_x, ν_y)` at a node.
    pub fn at(&self, i: usize, j: usize) -> ([T; 3], [T; 3], [T; 3]) {
        let pick = |f: &[ScalarField<T>; 3]| [f[0].at(i, j), f[1].at(i, j), f[2].at(i, j)];
        (pick(&self.nu), pick(&self.nu_x), pick(&self.nu_y))
    }
}

/// Conormal field, surface, and the largest difference between the two
/// integration orders of the Lelieuvre one-form.
#[derive(Clone, Debug)]
pub struct LelieuvreSurface<T> {
    pub conormal: ConormalField<T>,
    pub mesh: SurfaceMesh<T>,
    pub closure_defect: T,
}

/// Integrates `ν` through the conormal system of `frame` from the corner
/// states `nu0[k] = (ν^k, ν^k_x, ν^k_y)`, then `R_x = ν × ν_x`,
/// `R_y = −ν × ν_y` from `base`. Fails when the two path orders for `R`
/// disagree beyond the default tolerance.
pub fn reconstruct_lelieuvre<T: Real>(
    frame: &AffineFrame<T>,
    nu0: [[T; 3]; 3],
    base: [T; 3],
) -> Result<LelieuvreSurface<T>> {
    let out = reconstruct_lelieuvre_unchecked(frame, nu0, base)?;
    let scale = out.mesh.points().iter().flatten().fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
    let tol = Tolerance::Default.threshold(out.mesh.grid().h.as_f64(), scale);
    let defect = out.closure_defect.as_f64();
    if !(defect <= tol) {
        return Err(Error::Tolerance(format!(
            "Lelieuvre closure defect {defect:e} exceeds {tol:e}; the frame may violate a_y = b_x"
        )));
    }
    Ok(out)
}

/// [`reconstruct_lelieuvre`] without the closure check.
pub fn reconstruct_lelieuvre_unchecked<T: Real>(
    frame: &AffineFrame<T>,
    nu0: [[T; 3]; 3],
    base: [T; 3],
) -> Result<LelieuvreSurface<T>> {
    let AffineFrame { p, q, a, b } = frame;
    check_same_grid(&[p, q, a, b])?;
    if nu0.iter().flatten().chain(&base).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("initial conormal data must be finite".into()));
    }
    let rows = [nu0[0], nu0[1], nu0[2]];
    let det = dot(rows[0], cross(rows[1], rows[2]));
    if !(det.abs() > T::lit(DEGENERACY) * norm(rows[0]) * norm(rows[1]) * norm(rows[2])) {
        return Err(Error::Degenerate("initial conormal states are linearly dependent".into()));
    }
    let g = *p.grid();
    let conn = conormal_connection_unchecked(p, q, a, b)?;
    let states = nu0.iter().map(|s| integrate_connection(&conn, s, Mode::XY)).collect::<Result<Vec<_>>>()?;
    let comp = |c: usize| [states[0].component(c), states[1].component(c), states[2].component(c)];
    let conormal = ConormalField::new(comp(0), comp(1), comp(2))?;

    let rx = cross_fields(&conormal.nu, &conormal.nu_x);
    let ry = cross_fields(&conormal.nu, &conormal.nu_y).map(|f| -&f);
    let xy = integrate_one_form(&g, &rx, &ry, base, Mode::XY);
    let yx = integrate_one_form(&g, &rx, &ry, base, Mode::YX);
    let closure =
        xy.iter().zip(&yx).flat_map(|(u, v)| (0..3).map(move |c| (u[c] - v[c]).abs())).fold(T::zero(), T::max);
    let mesh = SurfaceMesh::new(&g, xy, vec![false; g.len()])?.with_margin(states[0].margin());
    Ok(LelieuvreSurface { conormal, mesh, closure_defect: closure })
}

/// Integrates `dR = F dx + G dy` along the first edge, then every line.
fn integrate_one_form<T: Real>(
    g: &GridSpec<T>,
    f: &[ScalarField<T>; 3],
    gy: &[ScalarField<T>; 3],
    base: [T; 3],
    mode: Mode,
) -> Vec<[T; 3]> {
    let mut out = vec![[T::zero(); 3]; g.len()];
    for c in 0..3 {
        match mode {
            Mode::XY => {
                let edge = running_integral(&f[c].row(0), g.h);
                for i in 0..g.nx {
                    let line = running_integral(&gy[c].column(i), g.h);
                    for j in 0..g.ny {
                        out[g.idx(i, j)][c] = base[c] + edge[i] + line[j];
                    }
                }
            }
            Mode::YX => {
                let edge = running_integral(&gy[c].column(0), g.h);
                for j in 0..g.ny {
                    let line = running_integral(&f[c].row(j), g.h);
                    for i in 0..g.nx {
                        out[g.idx(i, j)][c] = base[c] + edge[j] + line[i];
                    }
                }
            }
        }
    }
    out
}

/// Corner data `(N^k, N^k_x, N^k_y)` of `N = (r⁰)²(R_x × R_y)` for a mesh
/// normalized by `r⁰`; starting the conormal system there makes the
/// Lelieuvre surface match the mesh.
pub fn conormal_initial_data<T: Real>(mesh: &SurfaceMesh<T>, r0: &R0Jet<T>) -> Result<[[T; 3]; 3]> {
    if mesh.grid() != r0.r.grid() {
        return Err(Error::GridMismatch);
    }
    mesh.ensure_unmasked("conormal initial data")?;
    let r = mesh.coordinates();
    let d = |kx, ky| -> Result<[T; 3]> {
        let f = r.iter().map(|c| differentiate(c, kx, ky)).collect::<Result<Vec<_>>>()?;
        Ok([f[0].at(0, 0), f[1].at(0, 0), f[2].at(0, 0)])
    };
    let (rx, ry, rxx, rxy, ryy) = (d(1, 0)?, d(0, 1)?, d(2, 0)?, d(1, 1)?, d(0, 2)?);
    let (s, sx, sy) = (r0.r.at(0, 0), r0.rx.at(0, 0), r0.ry.at(0, 0));
    let two = T::lit(2.0);
    let n = cross(rx, ry);
    let nx = add(cross(rxx, ry), cross(rx, rxy));
    let ny = add(cross(rxy, ry), cross(rx, ryy));
    let mut out = [[T::zero(); 3]; 3];
    for k in 0..3 {
        out[k] = [s * s * n[k], two * s * sx * n[k] + s * s * nx[k], two * s * sy * n[k] + s * s * ny[k]];
    }
    Ok(out)
}

/// Norms of `ν − λ (r⁰)²(R_x × R_y)` with the scale `λ` fitted by least
/// squares over the interior; `λ` is reported as the extra `scale`.
pub fn conormal_consistency<T: Real>(
    nu: &ConormalField<T>,
    r0: &ScalarField<T>,
    mesh: &SurfaceMesh<T>,
) -> Result<ResidualReport> {
    if nu.grid() != r0.grid() || mesh.grid() != r0.grid() {
        return Err(Error::GridMismatch);
    }
    mesh.ensure_unmasked("conormal consistency")?;
    let g = *r0.grid();
    let r = mesh.coordinates();
    let rx = r.iter().map(|c| differentiate(c, 1, 0)).collect::<Result<Vec<_>>>()?;
    let ry = r.iter().map(|c| differentiate(c, 0, 1)).collect::<Result<Vec<_>>>()?;
    let n = cross_fields(&rx, &ry).map(|f| ScalarField::combine([&f, r0], |[v, s]| s * s * v));
    let m = n[0].margin();
    let e = DEFAULT_EXCLUSION.max(m[0]).max(m[1]).min((g.nx.min(g.ny) - 1) / 2);
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for i in e..g.nx - e {
        for j in e..g.ny - e {
            for k in 0..3 {
                let (a, b) = (nu.nu[k].at(i, j).as_f64(), n[k].at(i, j).as_f64());
                num += a * b;
                den += b * b;
            }
        }
    }
    if !(den > 0.0) {
        return Err(Error::Degenerate("(r⁰)²(R_x × R_y) vanishes on the interior".into()));
    }
    let lambda = T::lit(num / den);
    let mut builder = ReportBuilder::new(&g);
    for k in 0..3 {
        let fitted = n[k].scale(lambda);
        builder = builder.equation(&format!("nu[{k}]"), &nu.nu[k] - &fitted, &[&nu.nu[k], &fitted]);
    }
    Ok(builder.finish().with_extra("scale", num / den))
}

fn dot<T: Real>(u: [T; 3], v: [T; 3]) -> T {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn norm<T: Real>(u: [T; 3]) -> T {
    dot(u, u).sqrt()
}

fn add<T: Real>(u: [T; 3], v: [T; 3]) -> [T; 3] {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}
