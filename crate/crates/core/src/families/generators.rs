use super::checks::check_projective_curvature;
use super::flow::{solve_cube_root_flow, CubeRootFlow, PolyCoeffs};
use super::{Family, MvnSolution};
use crate::connection::CoefficientJets;
use crate::error::{Error, Result};
use crate::fields::{non_finite, GridSpec, ScalarField, Tolerance};
use crate::real::Real;

/// Flow samples per grid spacing; node `i` is sample `SUB * i` and cell
/// midpoints fall on samples too.
const SUB: usize = 4;

/// Normalization `p² = κ f'g'/(f+g)²` shared by the Roman surface and
/// Kummer's quartics.
pub const KAPPA_KUMMER: f64 = 2.25;

fn fill<T: Real>(grid: &GridSpec<T>, f: impl Fn(usize, usize) -> T) -> Result<ScalarField<T>> {
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let v = f(i, j);
            if !v.is_finite() {
                return Err(non_finite(grid, i, j));
            }
            values.push(v);
        }
    }
    ScalarField::from_values(grid, values)
}

/// Quadric: `p ≡ 0`, `V = V(x)`, `W = W(y)`.
pub fn gen_quadric<T: Real>(
    v_profile: impl Fn(T) -> T,
    w_profile: impl Fn(T) -> T,
    grid: &GridSpec<T>,
) -> Result<MvnSolution<T>> {
    let v = ScalarField::sample(grid, |x, _| v_profile(x))?;
    let w = ScalarField::sample(grid, |_, y| w_profile(y))?;
    quadric_from_fields(v, w)
}

/// Quadric from sampled connections; rejects `V` varying in `y` or `W` in `x`.
pub fn quadric_from_fields<T: Real>(v: ScalarField<T>, w: ScalarField<T>) -> Result<MvnSolution<T>> {
    let g = *v.grid();
    for i in 0..g.nx {
        for j in 1..g.ny {
            if v.at(i, j) != v.at(i, 0) {
                return Err(Error::InvalidParameter(format!(
                    "quadric V must depend on x only (varies along y at column {i})"
                )));
            }
        }
    }
    for j in 0..g.ny {
        for i in 1..g.nx {
            if w.at(i, j) != w.at(0, j) {
                return Err(Error::InvalidParameter(format!(
                    "quadric W must depend on y only (varies along x at row {j})"
                )));
            }
        }
    }
    let p = ScalarField::zeros(&g);
    Ok(MvnSolution::new(p, v, w, Family::Quadric)?.with_note("kind", "quadric"))
}

/// Geometric type of a rotation-surface transform by the sign of `c`.
pub fn rotation_kind(c: f64) -> &'static str {
    if c > 0.0 {
        "rotation z=f(x²+y²)"
    } else if c == 0.0 {
        "rotation z=f(x²+y)"
    } else {
        "rotation z=f(x²−y²)"
    }
}

/// Projective transform of a rotation surface: `p = profile(x + y)`,
/// `V = W = (3/2)p² + c`.
pub fn gen_rotation<T: Real>(profile: impl Fn(T) -> T, c: T, grid: &GridSpec<T>) -> Result<MvnSolution<T>> {
    if !c.is_finite() {
        return Err(Error::InvalidParameter("c must be finite".into()));
    }
    let s0 = grid.x0 + grid.y0;
    // Evaluate on the diagonal index so p depends on i + j exactly.
    let p = fill(grid, |i, j| profile(s0 + T::of_usize(i + j) * grid.h))?;
    let vw = p.map(|s| T::lit(1.5) * s * s + c);
    Ok(MvnSolution::new(p, vw.clone(), vw, Family::Rotation)?
        .with_param("c", c.as_f64())
        .with_note("kind", rotation_kind(c.as_f64())))
}

/// Flows `f(x)`, `g(y)` sampled at `h / SUB` over the grid, with the
/// log-derivative jet of `p = sqrt(κ f'g')/(f+g)` available at any sample pair.
struct FgSurface<T> {
    fx: CubeRootFlow<T>,
    gy: CubeRootFlow<T>,
    kappa: T,
}

#[derive(Clone, Copy)]
struct PointJet<T> {
    p: T,
    lx: T,
    lxx: T,
    ly: T,
    lyy: T,
}

impl<T: Real> FgSurface<T> {
    fn new(pf: &PolyCoeffs<T>, pg: &PolyCoeffs<T>, f0: T, g0: T, grid: &GridSpec<T>, kappa: T) -> Result<Self> {
        let step = grid.h / T::of_usize(SUB);
        let fx = solve_cube_root_flow(pf, f0, grid.x0, grid.x_end(), step)?;
        let gy = solve_cube_root_flow(pg, g0, grid.y0, grid.y_end(), step)?;
        debug_assert_eq!(fx.len(), SUB * (grid.nx - 1) + 1);
        debug_assert_eq!(gy.len(), SUB * (grid.ny - 1) + 1);
        // f and g increase, so f + g is monotone in both directions.
        let lo = fx.f[0] + gy.f[0];
        let hi = fx.f[fx.len() - 1] + gy.f[gy.len() - 1];
        if lo <= T::zero() && hi >= T::zero() {
            let mut best = (0, 0, T::infinity());
            for i in 0..grid.nx {
                for j in 0..grid.ny {
                    let s = (fx.f[SUB * i] + gy.f[SUB * j]).abs();
                    if s < best.2 {
                        best = (i, j, s);
                    }
                }
            }
            return Err(Error::Singular(format!(
                "f(x)+g(y)=0 crosses the grid (f+g spans [{lo}, {hi}]); closest node ({}, {}) at x={}, y={}",
                best.0,
                best.1,
                grid.x(best.0),
                grid.y(best.1)
            )));
        }
        Ok(Self { fx, gy, kappa })
    }

    fn jet(&self, a: usize, b: usize) -> PointJet<T> {
        let half = T::lit(0.5);
        let [f, f1, f2, f3] = self.fx.jet(a);
        let [g, g1, g2, g3] = self.gy.jet(b);
        let s = f + g;
        PointJet {
            p: (self.kappa * f1 * g1).sqrt() / s,
            lx: half * f2 / f1 - f1 / s,
            lxx: half * (f3 / f1 - (f2 / f1).powi(2)) - f2 / s + (f1 / s).powi(2),
            ly: half * g2 / g1 - g1 / s,
            lyy: half * (g3 / g1 - (g2 / g1).powi(2)) - g2 / s + (g1 / s).powi(2),
        }
    }

    fn node_field(&self, grid: &GridSpec<T>, f: impl Fn(&PointJet<T>, usize, usize) -> T) -> Result<ScalarField<T>> {
        fill(grid, |i, j| f(&self.jet(SUB * i, SUB * j), i, j))
    }

    /// Exact `p_x, p_xx, p_y, p_yy` from the log-derivative jet; `V_y` and
    /// `W_x` from the compatibility conditions `V_y = 3p p_x`, `W_x = 3p p_y`,
    /// which every family built on the flows satisfies identically.
    fn jets(&self, grid: &GridSpec<T>) -> Result<CoefficientJets<T>> {
        let three = T::lit(3.0);
        let px = self.node_field(grid, |j, _, _| j.p * j.lx)?;
        let pxx = self.node_field(grid, |j, _, _| j.p * (j.lxx + j.lx * j.lx))?;
        let py = self.node_field(grid, |j, _, _| j.p * j.ly)?;
        let pyy = self.node_field(grid, |j, _, _| j.p * (j.lyy + j.ly * j.ly))?;
        let vy = self.node_field(grid, |j, _, _| three * j.p * j.p * j.lx)?;
        let wx = self.node_field(grid, |j, _, _| three * j.p * j.p * j.ly)?;
        Ok(CoefficientJets { py, pyy, qx: px, qxx: pxx, vy, wx })
    }

    fn record(&self, sol: MvnSolution<T>, grid: &GridSpec<T>) -> Result<MvnSolution<T>> {
        Ok(sol
            .with_jets(self.jets(grid)?)?
            .with_param("ode_residual_f", self.fx.ode_residual().as_f64())
            .with_param("ode_residual_g", self.gy.ode_residual().as_f64())
            .with_param("kappa", self.kappa.as_f64())
            .with_note("singular_locus", "f(x)+g(y)=0 (off grid)"))
    }
}

/// Roman surface of Steiner from `(f')³ = (a0 + a1 f + a2 f²)²`,
/// `(g')³ = (a0 − a1 g + a2 g²)²`, with `p = (3/2) sqrt(f'g')/(f+g)` and
/// `V = −(1/2)(ln p)_xx + (1/8)(ln p)_x² − (5/2) p_y` (and `x ↔ y` for `W`).
pub fn gen_steiner<T: Real>(a0: T, a1: T, a2: T, f0: T, g0: T, grid: &GridSpec<T>) -> Result<MvnSolution<T>> {
    let poly = PolyCoeffs::steiner(a0, a1, a2)?;
    let surf = FgSurface::new(&poly, &poly.reflect(), f0, g0, grid, T::lit(KAPPA_KUMMER))?;
    let (half, eighth, five_half) = (T::lit(0.5), T::lit(0.125), T::lit(2.5));
    let p = surf.node_field(grid, |j, _, _| j.p)?;
    let v = surf.node_field(grid, |j, _, _| -half * j.lxx + eighth * j.lx * j.lx - five_half * j.p * j.ly)?;
    let w = surf.node_field(grid, |j, _, _| -half * j.lyy + eighth * j.ly * j.ly - five_half * j.p * j.lx)?;
    let sol = MvnSolution::new(p, v, w, Family::Steiner)?
        .with_param("a0", a0.as_f64())
        .with_param("a1", a1.as_f64())
        .with_param("a2", a2.as_f64())
        .with_param("f0", f0.as_f64())
        .with_param("g0", g0.as_f64())
        .with_note("kind", "Roman surface of Steiner");
    surf.record(sol, grid)
}

/// Kummer quartic from `(f')³ = P(f)`, `(g')³ = P(−g)`, `p² = (9/4) f'g'/(f+g)²`,
/// `V = (11/8)(ln p)_xx + 2 (ln p)_x²` (and `x ↔ y` for `W`).
pub fn gen_kummer<T: Real>(poly: &PolyCoeffs<T>, f0: T, g0: T, grid: &GridSpec<T>) -> Result<MvnSolution<T>> {
    let surf = FgSurface::new(poly, &poly.reflect(), f0, g0, grid, T::lit(KAPPA_KUMMER))?;
    let (c11, two) = (T::lit(11.0 / 8.0), T::lit(2.0));
    let p = surf.node_field(grid, |j, _, _| j.p)?;
    let v = surf.node_field(grid, |j, _, _| c11 * j.lxx + two * j.lx * j.lx)?;
    let w = surf.node_field(grid, |j, _, _| c11 * j.lyy + two * j.ly * j.ly)?;
    let sol = MvnSolution::new(p, v, w, Family::Kummer)?
        .with_param("f0", f0.as_f64())
        .with_param("g0", g0.as_f64())
        .with_note("kind", "quartic of Kummer");
    surf.record(sol, grid)
}

/// Which normalization `p² = κ f'g'/(f+g)²` satisfies `(ln p²)_xy = c p²`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum KappaChoice {
    OneOverC,
    TwoOverC,
}

impl KappaChoice {
    fn label(self) -> &'static str {
        match self {
            KappaChoice::OneOverC => "1/c",
            KappaChoice::TwoOverC => "2/c",
        }
    }
}

/// Projectively applicable surface with constant-curvature projective metric
/// `(ln p²)_xy = c p²`.
///
/// `p² = κ f'g'/(f+g)²` with `f, g` from the Kummer flows. Both candidate
/// normalizations κ = 1/c and κ = 2/c are sampled and checked against the
/// curvature condition; the passing one is kept and recorded under the
/// `kappa` note. With `k = 1/κ` (so that `(ln p)_xy = k p²`) the state
/// `(A, B, F)` solves
///
/// ```text
/// A_x = −A (ln p²)_x + F        A_y = (3/2)(1−k)(p²)_x
/// B_x = (3/2)(1−k)(p²)_y        B_y = −B (ln p²)_y + F
/// F_x = 2k B p² + (3/2)(1−k) (p²(p²)_y)_y / p²
/// F_y = 2k A p² + (3/2)(1−k) (p²(p²)_x)_x / p²
/// ```
///
/// integrated from `(A0, B0, F0)` at the grid corner; then
/// `V = (ln p)_xx + (1/2)(ln p)_x² + A`, `W = (ln p)_yy + (1/2)(ln p)_y² + B`.
/// `c = 2` (k = 1) is the improper affine sphere; it is rejected along with `c = 0`
/// and `c = 1`.
#[allow(clippy::too_many_arguments)]
pub fn gen_proj_applicable<T: Real>(
    poly: &PolyCoeffs<T>,
    c: T,
    a0: T,
    b0: T,
    f_init: T,
    f0: T,
    g0: T,
    grid: &GridSpec<T>,
) -> Result<MvnSolution<T>> {
    if !c.is_finite() || c == T::zero() || c == T::one() || c == T::lit(2.0) {
        return Err(Error::InvalidParameter(format!(
            "curvature constant c = {c} excluded (c = 0 is degenerate, c = 1 and c = 2 belong to affine spheres)"
        )));
    }
    let mut resid = Vec::new();
    for choice in [KappaChoice::OneOverC, KappaChoice::TwoOverC] {
        let kappa = match choice {
            KappaChoice::OneOverC => T::one() / c,
            KappaChoice::TwoOverC => T::lit(2.0) / c,
        };
        if !(kappa > T::zero()) {
            resid.push((choice, None));
            continue;
        }
        let surf = FgSurface::new(poly, &poly.reflect(), f0, g0, grid, kappa)?;
        let p = surf.node_field(grid, |j, _, _| j.p)?;
        let report = check_projective_curvature(&p, c)?;
        resid.push((choice, Some((surf, report))));
    }
    let tol = Tolerance::Default;
    let sup_of = |r: &Option<(FgSurface<T>, crate::fields::ResidualReport)>| {
        r.as_ref().map(|(_, rep)| rep.max_sup()).unwrap_or(f64::INFINITY)
    };
    let sups: Vec<f64> = resid.iter().map(|(_, r)| sup_of(r)).collect();
    let passing: Vec<usize> = resid
        .iter()
        .enumerate()
        .filter(|(_, (_, r))| r.as_ref().is_some_and(|(_, rep)| rep.passes(tol)))
        .map(|(k, _)| k)
        .collect();
    let chosen = match passing.as_slice() {
        [k] => *k,
        [] => {
            return Err(Error::Tolerance(format!(
                "neither κ = 1/c (residual {}) nor κ = 2/c (residual {}) satisfies (ln p²)_xy = c p²",
                sups[0], sups[1]
            )))
        }
        _ => {
            if sups[0] <= sups[1] {
                0
            } else {
                1
            }
        }
    };
    let (choice, slot) = resid.swap_remove(chosen);
    let (surf, _) = slot.expect("passing candidate has a surface");
    let k = T::one() / surf.kappa;

    let abf_xy = integrate_abf(&surf, grid, k, [a0, b0, f_init], true)?;
    let abf_yx = integrate_abf(&surf, grid, k, [a0, b0, f_init], false)?;
    let defect =
        abf_xy.iter().zip(&abf_yx).fold(T::zero(), |m, (s, t)| (0..3).fold(m, |m, n| m.max((s[n] - t[n]).abs())));

    let half = T::lit(0.5);
    let p = surf.node_field(grid, |j, _, _| j.p)?;
    let v = surf.node_field(grid, |j, i, jj| j.lxx + half * j.lx * j.lx + abf_xy[grid.idx(i, jj)][0])?;
    let w = surf.node_field(grid, |j, i, jj| j.lyy + half * j.ly * j.ly + abf_xy[grid.idx(i, jj)][1])?;
    let sol = MvnSolution::new(p, v, w, Family::ProjApplicable)?
        .with_param("c", c.as_f64())
        .with_param("A0", a0.as_f64())
        .with_param("B0", b0.as_f64())
        .with_param("F0", f_init.as_f64())
        .with_param("f0", f0.as_f64())
        .with_param("g0", g0.as_f64())
        .with_param("curvature_residual_kappa_1_over_c", sups[0])
        .with_param("curvature_residual_kappa_2_over_c", sups[1])
        .with_param("abf_path_defect", defect.as_f64())
        .with_note("kappa", choice.label())
        .with_note("kind", "projectively applicable");
    surf.record(sol, grid)
}

/// RK4 integration of the `(A, B, F)` system over the grid, bottom row then
/// columns (`x_first`) or left column then rows. Coefficients are evaluated
/// exactly at cell midpoints from the flow samples.
fn integrate_abf<T: Real>(
    surf: &FgSurface<T>,
    grid: &GridSpec<T>,
    k: T,
    init: [T; 3],
    x_first: bool,
) -> Result<Vec<[T; 3]>> {
    let alpha = T::lit(1.5) * (T::one() - k);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let rhs_x = |a: usize, b: usize, s: [T; 3]| -> [T; 3] {
        let j = surf.jet(a, b);
        let q = j.p * j.p;
        let qy = two * j.ly * q;
        let qyy = (two * j.lyy + four * j.ly * j.ly) * q;
        [-two * j.lx * s[0] + s[2], alpha * qy, two * k * s[1] * q + alpha * (qy * qy / q + qyy)]
    };
    let rhs_y = |a: usize, b: usize, s: [T; 3]| -> [T; 3] {
        let j = surf.jet(a, b);
        let q = j.p * j.p;
        let qx = two * j.lx * q;
        let qxx = (two * j.lxx + four * j.lx * j.lx) * q;
        [alpha * qx, -two * j.ly * s[1] + s[2], two * k * s[0] * q + alpha * (qx * qx / q + qxx)]
    };
    let h = grid.h;
    // One RK4 step along x (dir = 0) or y (dir = 1) from sample (a, b).
    let step = |s: [T; 3], a: usize, b: usize, dir: usize| -> [T; 3] {
        let at = |t: usize, st: [T; 3]| {
            if dir == 0 {
                rhs_x(a + t, b, st)
            } else {
                rhs_y(a, b + t, st)
            }
        };
        let axpy = |u: [T; 3], c: T, d: [T; 3]| -> [T; 3] { std::array::from_fn(|n| u[n] + c * d[n]) };
        let k1 = at(0, s);
        let k2 = at(SUB / 2, axpy(s, h / two, k1));
        let k3 = at(SUB / 2, axpy(s, h / two, k2));
        let k4 = at(SUB, axpy(s, h, k3));
        std::array::from_fn(|n| s[n] + h / T::lit(6.0) * (k1[n] + two * k2[n] + two * k3[n] + k4[n]))
    };
    let mut out = vec![[T::zero(); 3]; grid.len()];
    if x_first {
        out[grid.idx(0, 0)] = init;
        for i in 0..grid.nx - 1 {
            out[grid.idx(i + 1, 0)] = step(out[grid.idx(i, 0)], SUB * i, 0, 0);
        }
        for i in 0..grid.nx {
            for j in 0..grid.ny - 1 {
                out[grid.idx(i, j + 1)] = step(out[grid.idx(i, j)], SUB * i, SUB * j, 1);
            }
        }
    } else {
        out[grid.idx(0, 0)] = init;
        for j in 0..grid.ny - 1 {
            out[grid.idx(0, j + 1)] = step(out[grid.idx(0, j)], 0, SUB * j, 1);
        }
        for j in 0..grid.ny {
            for i in 0..grid.nx - 1 {
                out[grid.idx(i + 1, j)] = step(out[grid.idx(i, j)], SUB * i, SUB * j, 0);
            }
        }
    }
    if let Some(k) = out.iter().position(|s| s.iter().any(|v| !v.is_finite())) {
        return Err(Error::Overflow { i: k / grid.ny, j: k % grid.ny });
    }
    Ok(out)
}

/// Travelling-wave solution `p(s)`, `s = x + y`, of the Tzitzeica equation
/// `(ln p)_xy = p² + c/p`, i.e. `p'' = p'²/p + p³ + c`.
#[derive(Clone, Debug)]
pub struct TravellingWave<T> {
    pub c: T,
    pub start: T,
    pub step: T,
    pub p: Vec<T>,
    pub dp: Vec<T>,
}

impl<T: Real> TravellingWave<T> {
    pub fn s(&self, k: usize) -> T {
        self.start + T::of_usize(k) * self.step
    }

    pub fn ddp(&self, k: usize) -> T {
        let (p, d) = (self.p[k], self.dp[k]);
        d * d / p + p * p * p + self.c
    }

    /// `p'''` from differentiating the ODE.
    pub fn dddp(&self, k: usize) -> T {
        let (p, d, dd) = (self.p[k], self.dp[k], self.ddp(k));
        T::lit(2.0) * d * dd / p - d * d * d / (p * p) + T::lit(3.0) * p * p * d
    }

    /// Sample index of grid node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> usize {
        SUB * (i + j)
    }
}

/// Integrates the travelling-wave ODE with RK4 at step `h/4` over the
/// diagonal range `[x0 + y0, x_end + y_end]` of `grid`.
pub fn affine_sphere_profile<T: Real>(c: T, p0: T, dp0: T, grid: &GridSpec<T>) -> Result<TravellingWave<T>> {
    if !(p0 > T::zero()) || !dp0.is_finite() || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("need p0 > 0 and finite data (p0 = {p0})")));
    }
    let start = grid.x0 + grid.y0;
    let step = grid.h / T::of_usize(SUB);
    let n = SUB * (grid.nx + grid.ny - 2);
    let rhs = |p: T, d: T| d * d / p + p * p * p + c;
    let two = T::lit(2.0);
    let (mut p, mut d) = (p0, dp0);
    let mut ps = vec![p];
    let mut ds = vec![d];
    for k in 0..n {
        let s = start + T::of_usize(k) * step;
        let fail = |why: &str| Error::FlowBreakdown {
            at: s.as_f64(),
            reason: format!("travelling wave {why}; last valid s = {s}"),
        };
        let check = |p: T| if p > T::zero() && p.is_finite() { Ok(()) } else { Err(fail("left p > 0")) };
        let h2 = step / two;
        let (k1p, k1d) = (d, rhs(p, d));
        check(p + h2 * k1p)?;
        let (k2p, k2d) = (d + h2 * k1d, rhs(p + h2 * k1p, d + h2 * k1d));
        check(p + h2 * k2p)?;
        let (k3p, k3d) = (d + h2 * k2d, rhs(p + h2 * k2p, d + h2 * k2d));
        check(p + step * k3p)?;
        let (k4p, k4d) = (d + step * k3d, rhs(p + step * k3p, d + step * k3d));
        let next = p + step / T::lit(6.0) * (k1p + two * k2p + two * k3p + k4p);
        d = d + step / T::lit(6.0) * (k1d + two * k2d + two * k3d + k4d);
        check(next)?;
        // A step that more than doubles p no longer resolves the solution.
        if !d.is_finite() || (next - p).abs() > p {
            return Err(fail("blew up"));
        }
        p = next;
        ps.push(p);
        ds.push(d);
    }
    Ok(TravellingWave { c, start, step, p: ps, dp: ds })
}

/// Affine sphere from a travelling-wave Tzitzeica solution:
/// `V = W = p''/p − (1/2)(p'/p)²`.
pub fn gen_affine_sphere<T: Real>(c: T, p0: T, dp0: T, grid: &GridSpec<T>) -> Result<MvnSolution<T>> {
    let wave = affine_sphere_profile(c, p0, dp0, grid)?;
    let half = T::lit(0.5);
    let p = fill(grid, |i, j| wave.p[wave.node(i, j)])?;
    let vw = fill(grid, |i, j| {
        let k = wave.node(i, j);
        let r = wave.dp[k] / wave.p[k];
        wave.ddp(k) / wave.p[k] - half * r * r
    })?;
    let at = |f: &dyn Fn(usize) -> T| fill(grid, |i, j| f(wave.node(i, j)));
    let dp = at(&|k| wave.dp[k])?;
    let ddp = at(&|k| wave.ddp(k))?;
    let dv = at(&|k| {
        let (p, d, dd) = (wave.p[k], wave.dp[k], wave.ddp(k));
        let r = d / p;
        wave.dddp(k) / p - dd * d / (p * p) - r * (dd / p - r * r)
    })?;
    let jets = CoefficientJets { py: dp.clone(), pyy: ddp.clone(), qx: dp, qxx: ddp, vy: dv.clone(), wx: dv };
    let kind = if c == T::zero() { "improper affine sphere" } else { "proper affine sphere" };
    Ok(MvnSolution::new(p, vw.clone(), vw, Family::AffineSphere)?
        .with_jets(jets)?
        .with_param("c", c.as_f64())
        .with_param("p0", p0.as_f64())
        .with_param("dp0", dp0.as_f64())
        .with_note("kind", kind))
}
