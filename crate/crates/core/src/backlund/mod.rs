//! Bäcklund map from stationary mVN to stationary VN, duality, the
//! Schwarzian reparametrization and the affine-to-projective invariants.

mod reparam;

use std::collections::BTreeMap;

use crate::connection::{integrate_connection, Mode, StateField};
use crate::error::{Error, Result};
use crate::families::{Family, MvnSolution};
use crate::fields::{
    check_same_grid, differentiate, residual_gc, residual_vn, ReportBuilder, ResidualReport, ScalarField, Tolerance,
};
use crate::real::Real;

pub use reparam::{check_isothermal, reparametrize, schwarzian, AffineMap, FnMap, MonotoneMap, ProjectiveInvariants};

/// A solution `(u, v, w)` of the stationary VN system.
#[derive(Clone, Debug, PartialEq)]
pub struct VnSolution<T> {
    pub u: ScalarField<T>,
    pub v: ScalarField<T>,
    pub w: ScalarField<T>,
    pub source: Family,
    /// How `r⁰` was obtained (`"integrated"`, `"sampled"`, ...).
    pub r0_choice: String,
    pub params: BTreeMap<String, f64>,
}

impl<T: Real> VnSolution<T> {
    pub fn grid(&self) -> &crate::fields::GridSpec<T> {
        self.u.grid()
    }

    pub fn residual(&self) -> Result<ResidualReport> {
        residual_vn(&self.u, &self.v, &self.w)
    }
}

/// `r⁰` with its derivatives through second order.
///
/// Built either from the integrated state `(r, r_x, r_y, r_xy)` of the
/// linear system, closing `r_xx`, `r_yy` with the system itself, or by
/// differentiating a sampled field.
#[derive(Clone, Debug, PartialEq)]
pub struct R0Jet<T> {
    pub r: ScalarField<T>,
    pub rx: ScalarField<T>,
    pub ry: ScalarField<T>,
    pub rxy: ScalarField<T>,
    pub rxx: ScalarField<T>,
    pub ryy: ScalarField<T>,
}

impl<T: Real> R0Jet<T> {
    pub fn new(
        r: ScalarField<T>,
        rx: ScalarField<T>,
        ry: ScalarField<T>,
        rxy: ScalarField<T>,
        rxx: ScalarField<T>,
        ryy: ScalarField<T>,
    ) -> Result<Self> {
        check_same_grid(&[&r, &rx, &ry, &rxy, &rxx, &ryy])?;
        ensure_positive(&r)?;
        Ok(Self { r, rx, ry, rxy, rxx, ryy })
    }

    /// From an integrated 4-state, with `r_xx = p r_y + (1/2)(V − p_y) r` and
    /// `r_yy = q r_x + (1/2)(W − q_x) r`.
    pub fn from_state(state: &StateField<T>, sol: &MvnSolution<T>) -> Result<Self> {
        if state.dim() != 4 || state.grid() != sol.grid() {
            return Err(Error::InvalidParameter("r0 state must be a 4-state on the solution grid".into()));
        }
        let half = T::lit(0.5);
        let (r, rx, ry, rxy) = (state.component(0), state.component(1), state.component(2), state.component(3));
        let jets = sol.coefficient_jets()?;
        let (py, qx) = (jets.py, jets.qx);
        let rxx =
            ScalarField::combine([&sol.p, &ry, &sol.v, &py, &r], |[p, ry, v, py, r]| p * ry + half * (v - py) * r);
        let ryy =
            ScalarField::combine([&sol.p, &rx, &sol.w, &qx, &r], |[q, rx, w, qx, r]| q * rx + half * (w - qx) * r);
        Self::new(r, rx, ry, rxy, rxx, ryy)
    }

    /// By numerical differentiation of a sampled `r⁰`.
    pub fn from_field(r: &ScalarField<T>) -> Result<Self> {
        Self::new(
            r.clone(),
            differentiate(r, 1, 0)?,
            differentiate(r, 0, 1)?,
            differentiate(r, 1, 1)?,
            differentiate(r, 2, 0)?,
            differentiate(r, 0, 2)?,
        )
    }

    /// `((ln r)_x, (ln r)_y, (ln r)_xx, (ln r)_xy, (ln r)_yy)` in ratio form.
    pub fn log_derivatives(&self) -> [ScalarField<T>; 5] {
        let lx = &self.rx / &self.r;
        let ly = &self.ry / &self.r;
        let lxx = ScalarField::combine([&self.rxx, &self.r, &lx], |[a, r, l]| a / r - l * l);
        let lxy = ScalarField::combine([&self.rxy, &self.r, &lx, &ly], |[a, r, l, m]| a / r - l * m);
        let lyy = ScalarField::combine([&self.ryy, &self.r, &ly], |[a, r, l]| a / r - l * l);
        [lx, ly, lxx, lxy, lyy]
    }
}

fn ensure_positive<T: Real>(r: &ScalarField<T>) -> Result<()> {
    let g = *r.grid();
    for i in 0..g.nx {
        for j in 0..g.ny {
            if !(r.at(i, j) > T::zero()) {
                return Err(Error::Vanishing { what: "r0 (must stay positive)".into(), i, j });
            }
        }
    }
    Ok(())
}

/// Integrates the linear system of `sol` from `init = (r, r_x, r_y, r_xy)`
/// at the grid corner and returns the full jet of `r⁰`.
pub fn solve_r0_jet<T: Real>(sol: &MvnSolution<T>, init: &[T; 4], mode: Mode) -> Result<R0Jet<T>> {
    let report = sol.residual()?;
    if !report.passes(Tolerance::Default) {
        return Err(Error::Tolerance(format!(
            "(p, V, W) is not an mVN solution: {:?} above tolerance",
            report.failures(Tolerance::Default)
        )));
    }
    let conn = sol.connection()?;
    let state = integrate_connection(&conn, init, mode)?;
    R0Jet::from_state(&state, sol)
}

/// First component of the integrated linear system; must be positive.
pub fn solve_r0<T: Real>(sol: &MvnSolution<T>, init: &[T; 4]) -> Result<ScalarField<T>> {
    Ok(solve_r0_jet(sol, init, Mode::XY)?.r)
}

/// Residuals of `r_xx − p r_y − (1/2)(V − p_y) r` and its `y` mate with
/// stencil derivatives of `r`.
pub fn linear_system_residual<T: Real>(sol: &MvnSolution<T>, r: &ScalarField<T>) -> Result<ResidualReport> {
    check_same_grid(&[&sol.p, r])?;
    let half = T::lit(0.5);
    let (p, v, w) = (&sol.p, &sol.v, &sol.w);
    let rxx = differentiate(r, 2, 0)?;
    let ryy = differentiate(r, 0, 2)?;
    let rx = differentiate(r, 1, 0)?;
    let ry = differentiate(r, 0, 1)?;
    let py = differentiate(p, 0, 1)?;
    let px = differentiate(p, 1, 0)?;
    let tx1 = p * &ry;
    let tx2 = ScalarField::combine([v, &py, r], |[v, py, r]| half * (v - py) * r);
    let ty1 = p * &rx;
    let ty2 = ScalarField::combine([w, &px, r], |[w, px, r]| half * (w - px) * r);
    let ex = ScalarField::combine([&rxx, &tx1, &tx2], |[a, b, c]| a - b - c);
    let ey = ScalarField::combine([&ryy, &ty1, &ty2], |[a, b, c]| a - b - c);
    Ok(ReportBuilder::new(r.grid())
        .equation("r_xx", ex, &[&rxx, &tx1, &tx2])
        .equation("r_yy", ey, &[&ryy, &ty1, &ty2])
        .finish())
}

/// `u = p² − 2(ln r⁰)_xy`, `v = (2/3)V − 2(ln r⁰)_xx`, `w = (2/3)W − 2(ln r⁰)_yy`.
///
/// `r⁰` is checked against the linear system first. The difference between
/// `u` and `a_y + p²` with `a = −2(ln r⁰)_x` is recorded as `u_consistency`.
pub fn backlund_mvn_to_vn<T: Real>(sol: &MvnSolution<T>, r0: &R0Jet<T>) -> Result<VnSolution<T>> {
    check_same_grid(&[&sol.p, &r0.r])?;
    ensure_positive(&r0.r)?;
    let lin = linear_system_residual(sol, &r0.r)?;
    if !lin.passes(Tolerance::Default) {
        return Err(Error::Tolerance(format!("r0 does not solve the linear system (sup {:e})", lin.max_sup())));
    }
    let (two, two3) = (T::lit(2.0), T::lit(2.0 / 3.0));
    let [lx, _, lxx, lxy, lyy] = r0.log_derivatives();
    let u = ScalarField::combine([&sol.p, &lxy], |[p, l]| p * p - two * l);
    let v = ScalarField::combine([&sol.v, &lxx], |[v, l]| two3 * v - two * l);
    let w = ScalarField::combine([&sol.w, &lyy], |[w, l]| two3 * w - two * l);
    let a = lx.scale(-two);
    let ay = differentiate(&a, 0, 1)?;
    let u2 = ScalarField::combine([&ay, &sol.p], |[ay, p]| ay + p * p);
    let consistency = ReportBuilder::new(sol.grid()).equation("u", &u - &u2, &[&u, &u2]).finish();
    let mut params = BTreeMap::new();
    params.insert("u_consistency".to_string(), consistency.max_sup());
    params.insert("linear_system_residual".to_string(), lin.max_sup());
    Ok(VnSolution { u, v, w, source: sol.family, r0_choice: "supplied".into(), params })
}

/// `(p, V, W) ↦ (−p, V, W)`.
pub fn dual<T: Real>(sol: &MvnSolution<T>) -> MvnSolution<T> {
    let mut out = sol.clone();
    out.p = -&sol.p;
    out.jets = sol.jets.as_ref().map(|j| j.negate_cubic());
    out.dualized = !sol.dualized;
    out
}

/// Affine data `(p, q, a, b)` with `a_y = b_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFrame<T> {
    pub p: ScalarField<T>,
    pub q: ScalarField<T>,
    pub a: ScalarField<T>,
    pub b: ScalarField<T>,
}

impl<T: Real> AffineFrame<T> {
    pub fn new(p: ScalarField<T>, q: ScalarField<T>, a: ScalarField<T>, b: ScalarField<T>) -> Result<Self> {
        check_same_grid(&[&p, &q, &a, &b])?;
        let frame = Self { p, q, a, b };
        let report = frame.consistency()?;
        if !report.passes(Tolerance::Default) {
            return Err(Error::InvalidParameter(format!(
                "affine frame violates a_y = b_x (sup {:e})",
                report.max_sup()
            )));
        }
        Ok(frame)
    }

    /// `a = −2(ln r⁰)_x`, `b = −2(ln r⁰)_y` for the surface normalized by `r⁰`.
    pub fn from_r0(sol: &MvnSolution<T>, r0: &R0Jet<T>) -> Result<Self> {
        let [lx, ly, ..] = r0.log_derivatives();
        let m2 = T::lit(-2.0);
        Self::new(sol.p.clone(), sol.p.clone(), lx.scale(m2), ly.scale(m2))
    }

    /// `a = −p_x/p`, `b = −p_y/p`: the normalization `r⁰ = √p`, in which an
    /// affine sphere satisfies `R_xy + (c/p)(R − C) = 0`.
    pub fn blaschke(sol: &MvnSolution<T>) -> Result<Self> {
        crate::families::ensure_nonvanishing(&sol.p, "p")?;
        let j = sol.coefficient_jets()?;
        let a = ScalarField::combine([&j.qx, &sol.p], |[d, p]| -d / p);
        let b = ScalarField::combine([&j.py, &sol.p], |[d, p]| -d / p);
        Self::new(sol.p.clone(), sol.p.clone(), a, b)
    }

    pub fn consistency(&self) -> Result<ResidualReport> {
        crate::connection::potential_consistency(&self.a, &self.b)
    }
}

/// `V = p_y + bp + (1/2)a² − a_x`, `W = q_x + aq + (1/2)b² − b_y`.
pub fn affine_to_projective<T: Real>(frame: &AffineFrame<T>) -> Result<(ScalarField<T>, ScalarField<T>)> {
    let AffineFrame { p, q, a, b } = frame;
    check_same_grid(&[p, q, a, b])?;
    let half = T::lit(0.5);
    let py = differentiate(p, 0, 1)?;
    let qx = differentiate(q, 1, 0)?;
    let ax = differentiate(a, 1, 0)?;
    let by = differentiate(b, 0, 1)?;
    let v = ScalarField::combine([&py, b, p, a, &ax], |[py, b, p, a, ax]| py + b * p + half * a * a - ax);
    let w = ScalarField::combine([&qx, a, q, b, &by], |[qx, a, q, b, by]| qx + a * q + half * b * b - by);
    Ok((v, w))
}

/// Residual of the projective compatibility conditions for `(p, q, V, W)`
/// obtained from an affine frame.
pub fn frame_gc_residual<T: Real>(frame: &AffineFrame<T>) -> Result<ResidualReport> {
    let (v, w) = affine_to_projective(frame)?;
    residual_gc(&frame.p, &frame.q, &v, &w)
}
