use crate::error::{Error, Result};
use crate::families::MvnSolution;
use crate::fields::{
    check_same_grid, differentiate, residual_gc, GridSpec, Interpolator, ReportBuilder, ResidualReport, ScalarField,
};
use crate::real::Real;

/// Nodes per axis used when pulling fields back through a reparametrization;
/// degree 7 keeps third derivatives of the interpolant 4th-order accurate.
const PULLBACK_POINTS: usize = 8;

/// Strictly increasing map with analytic derivatives.
pub trait MonotoneMap<T: Real> {
    /// `(f, f', f'', f''')` at `x`.
    fn jet(&self, x: T) -> [T; 4];

    /// Preimage of `target` in `[lo, hi]`, by bisection-safeguarded Newton.
    fn inverse(&self, target: T, lo: T, hi: T) -> Option<T> {
        let (mut a, mut b) = (lo, hi);
        let fa = self.jet(a)[0] - target;
        let fb = self.jet(b)[0] - target;
        if fa == T::zero() {
            return Some(a);
        }
        if fb == T::zero() {
            return Some(b);
        }
        if fa > T::zero() || fb < T::zero() {
            return None;
        }
        let mut x = a + (b - a) * (-fa) / (fb - fa);
        for _ in 0..200 {
            let [f, f1, ..] = self.jet(x);
            let r = f - target;
            if r == T::zero() {
                return Some(x);
            }
            if r < T::zero() {
                a = x;
            } else {
                b = x;
            }
            let newton = x - r / f1;
            let next = if f1 > T::zero() && newton > a && newton < b { newton } else { (a + b) / T::lit(2.0) };
            if (next - x).abs() <= T::epsilon() * x.abs().max(T::one()) {
                return Some(next);
            }
            x = next;
        }
        Some(x)
    }
}

/// `x ↦ scale·x + shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap<T> {
    pub scale: T,
    pub shift: T,
}

impl<T: Real> MonotoneMap<T> for AffineMap<T> {
    fn jet(&self, x: T) -> [T; 4] {
        [self.scale * x + self.shift, self.scale, T::zero(), T::zero()]
    }

    fn inverse(&self, target: T, lo: T, hi: T) -> Option<T> {
        let x = (target - self.shift) / self.scale;
        (self.scale > T::zero() && x >= lo && x <= hi).then_some(x)
    }
}

/// A map given by a closure returning its jet.
pub struct FnMap<F>(pub F);

impl<T: Real, F: Fn(T) -> [T; 4]> MonotoneMap<T> for FnMap<F> {
    fn jet(&self, x: T) -> [T; 4] {
        (self.0)(x)
    }
}

/// `S(f) = f'''/f' − (3/2)(f''/f')²`.
pub fn schwarzian<T: Real>(jet: [T; 4]) -> T {
    let r = jet[2] / jet[1];
    jet[3] / jet[1] - T::lit(1.5) * r * r
}

/// Projective invariants `(p, q, V, W)` of a surface in asymptotic coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveInvariants<T> {
    pub p: ScalarField<T>,
    pub q: ScalarField<T>,
    pub v: ScalarField<T>,
    pub w: ScalarField<T>,
}

impl<T: Real> ProjectiveInvariants<T> {
    pub fn new(p: ScalarField<T>, q: ScalarField<T>, v: ScalarField<T>, w: ScalarField<T>) -> Result<Self> {
        check_same_grid(&[&p, &q, &v, &w])?;
        Ok(Self { p, q, v, w })
    }

    pub fn from_mvn(sol: &MvnSolution<T>) -> Self {
        Self { p: sol.p.clone(), q: sol.p.clone(), v: sol.v.clone(), w: sol.w.clone() }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.p.grid()
    }

    pub fn residual(&self) -> Result<ResidualReport> {
        residual_gc(&self.p, &self.q, &self.v, &self.w)
    }
}

/// New asymptotic coordinates `X = f(x)`, `Y = g(y)`:
///
/// ```text
/// p* = p g'/f'²,  q* = q f'/g'²,  V* = (V + S(f))/f'²,  W* = (W + S(g))/g'²
/// ```
///
/// sampled on `target` (a grid in `X, Y`). Source values at the preimages
/// come from 8-point Lagrange interpolation; every preimage must fall inside
/// the source grid.
pub fn reparametrize<T: Real>(
    inv: &ProjectiveInvariants<T>,
    f: &impl MonotoneMap<T>,
    g: &impl MonotoneMap<T>,
    target: &GridSpec<T>,
) -> Result<ProjectiveInvariants<T>> {
    let src = *inv.grid();
    let pre = |map: &dyn Fn(T, T, T) -> Option<T>, lo: T, hi: T, vals: Vec<T>, axis: &str| -> Result<Vec<T>> {
        vals.into_iter()
            .map(|t| {
                map(t, lo, hi).ok_or_else(|| {
                    Error::InvalidParameter(format!("target {axis} = {t} has no preimage in [{lo}, {hi}]"))
                })
            })
            .collect()
    };
    let xs = pre(
        &|t, lo, hi| f.inverse(t, lo, hi),
        src.x0,
        src.x_end(),
        (0..target.nx).map(|i| target.x(i)).collect(),
        "X",
    )?;
    let ys = pre(
        &|t, lo, hi| g.inverse(t, lo, hi),
        src.y0,
        src.y_end(),
        (0..target.ny).map(|j| target.y(j)).collect(),
        "Y",
    )?;
    let fj: Vec<[T; 4]> = xs.iter().map(|&x| f.jet(x)).collect();
    let gj: Vec<[T; 4]> = ys.iter().map(|&y| g.jet(y)).collect();
    let monotone = |jets: &[[T; 4]], src_jets: Vec<[T; 4]>, name: &str| -> Result<()> {
        let values: Vec<T> = src_jets.iter().map(|j| j[0]).collect();
        if jets.iter().chain(&src_jets).any(|j| !(j[1] > T::zero()) || j.iter().any(|v| !v.is_finite()))
            || values.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::InvalidParameter(format!("{name} is not strictly increasing on the source grid")));
        }
        Ok(())
    };
    monotone(&fj, (0..src.nx).map(|i| f.jet(src.x(i))).collect(), "f")?;
    monotone(&gj, (0..src.ny).map(|j| g.jet(src.y(j))).collect(), "g")?;

    let ip = Interpolator::new(&inv.p, PULLBACK_POINTS);
    let iq = Interpolator::new(&inv.q, PULLBACK_POINTS);
    let iv = Interpolator::new(&inv.v, PULLBACK_POINTS);
    let iw = Interpolator::new(&inv.w, PULLBACK_POINTS);
    let n = target.len();
    let (mut p, mut q, mut v, mut w) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, &x) in xs.iter().enumerate() {
        let (f1, sf) = (fj[i][1], schwarzian(fj[i]));
        for (j, &y) in ys.iter().enumerate() {
            let (g1, sg) = (gj[j][1], schwarzian(gj[j]));
            p.push(ip.at(x, y) * g1 / (f1 * f1));
            q.push(iq.at(x, y) * f1 / (g1 * g1));
            v.push((iv.at(x, y) + sf) / (f1 * f1));
            w.push((iw.at(x, y) + sg) / (g1 * g1));
        }
    }
    ProjectiveInvariants::new(
        ScalarField::from_values(target, p)?,
        ScalarField::from_values(target, q)?,
        ScalarField::from_values(target, v)?,
        ScalarField::from_values(target, w)?,
    )
}

/// `(ln(p/q))_xy` evaluated as `(p_x/p − q_x/q)_y` with the `y`-derivative
/// expanded: `p_xy/p − p_x p_y/p² − q_xy/q + q_x q_y/q²`.
pub fn check_isothermal<T: Real>(p: &ScalarField<T>, q: &ScalarField<T>) -> Result<ResidualReport> {
    check_same_grid(&[p, q])?;
    let parts = |f: &ScalarField<T>| -> Result<[ScalarField<T>; 2]> {
        let fx = differentiate(f, 1, 0)?;
        let fy = differentiate(f, 0, 1)?;
        let fxy = differentiate(f, 1, 1)?;
        let a = &fxy / f;
        let b = ScalarField::combine([&fx, &fy, f], |[x, y, f]| x * y / (f * f));
        Ok([a, b])
    };
    crate::families::ensure_nonvanishing(p, "p")?;
    crate::families::ensure_nonvanishing(q, "q")?;
    let [pa, pb] = parts(p)?;
    let [qa, qb] = parts(q)?;
    let r = ScalarField::combine([&pa, &pb, &qa, &qb], |[a, b, c, d]| a - b - c + d);
    Ok(ReportBuilder::new(p.grid()).equation("isothermal", r, &[&pa, &pb, &qa, &qb]).finish())
}
