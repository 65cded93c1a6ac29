//! Linear systems of the surface theory as flat connections `Φ_x = AΦ`,
//! `Φ_y = BΦ` on the grid, their integration and their flatness.

mod integrate;
pub(crate) mod mat;

use crate::error::{Error, Result};
use crate::fields::{check_same_grid, differentiate, GridSpec, ReportBuilder, ResidualReport, ScalarField, Tolerance};
use crate::real::Real;

pub(crate) use integrate::running_integral;
pub use integrate::{holonomy_defect, integrate_connection, integrate_fundamental, wronskian, Mode, StateField};
use mat::Mat4;

/// Node-wise `dim × dim` matrices `A` (x-direction) and `B` (y-direction),
/// stored entrywise as fields in row-major order.
#[derive(Clone, Debug)]
pub struct ConnectionPair<T> {
    grid: GridSpec<T>,
    dim: usize,
    a: Vec<ScalarField<T>>,
    b: Vec<ScalarField<T>>,
}

impl<T: Real> ConnectionPair<T> {
    pub fn new(dim: usize, a: Vec<ScalarField<T>>, b: Vec<ScalarField<T>>) -> Result<Self> {
        if !(1..=4).contains(&dim) || a.len() != dim * dim || b.len() != dim * dim {
            return Err(Error::InvalidParameter(format!(
                "connection of dimension {dim} needs {} entries per matrix",
                dim * dim
            )));
        }
        let all: Vec<&ScalarField<T>> = a.iter().chain(&b).collect();
        check_same_grid(&all)?;
        for f in &all {
            f.ensure_finite()?;
        }
        Ok(Self { grid: *a[0].grid(), dim, a, b })
    }

    /// The zero connection; its parallel transport is the identity.
    pub fn zero(grid: &GridSpec<T>, dim: usize) -> Result<Self> {
        let z = ScalarField::zeros(grid);
        Self::new(dim, vec![z.clone(); dim * dim], vec![z; dim * dim])
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self, r: usize, c: usize) -> &ScalarField<T> {
        &self.a[r * self.dim + c]
    }

    pub fn b(&self, r: usize, c: usize) -> &ScalarField<T> {
        &self.b[r * self.dim + c]
    }

    /// Replaces one entry of `A` (`x = true`) or `B`.
    pub fn with_entry(mut self, x: bool, r: usize, c: usize, f: ScalarField<T>) -> Result<Self> {
        check_same_grid(&[&f, &self.a[0]])?;
        f.ensure_finite()?;
        let k = r * self.dim + c;
        if x {
            self.a[k] = f;
        } else {
            self.b[k] = f;
        }
        Ok(self)
    }

    /// Largest stencil margin per axis over all entries.
    pub fn margin(&self) -> [usize; 2] {
        self.a.iter().chain(&self.b).fold([0, 0], |m, f| {
            let k = f.margin();
            [m[0].max(k[0]), m[1].max(k[1])]
        })
    }

    pub(crate) fn mats(&self, x: bool) -> Vec<Mat4<T>> {
        let src = if x { &self.a } else { &self.b };
        let n = self.dim;
        (0..self.grid.len())
            .map(|k| {
                let mut m = mat::zero();
                for r in 0..n {
                    for c in 0..n {
                        m[r][c] = src[r * n + c].values()[k];
                    }
                }
                m
            })
            .collect()
    }
}

/// Derivatives of the coefficients entering the prolonged Wilczynski system.
///
/// Stencil derivatives of order two carry round-off of size `ε/h²`, which the
/// integrated state passes on to every later derivative; generators that know
/// these fields in closed form can supply them instead.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientJets<T> {
    pub py: ScalarField<T>,
    pub pyy: ScalarField<T>,
    pub qx: ScalarField<T>,
    pub qxx: ScalarField<T>,
    pub vy: ScalarField<T>,
    pub wx: ScalarField<T>,
}

impl<T: Real> CoefficientJets<T> {
    pub fn by_stencils(p: &ScalarField<T>, q: &ScalarField<T>, v: &ScalarField<T>, w: &ScalarField<T>) -> Result<Self> {
        check_same_grid(&[p, q, v, w])?;
        Ok(Self {
            py: differentiate(p, 0, 1)?,
            pyy: differentiate(p, 0, 2)?,
            qx: differentiate(q, 1, 0)?,
            qxx: differentiate(q, 2, 0)?,
            vy: differentiate(v, 0, 1)?,
            wx: differentiate(w, 1, 0)?,
        })
    }

    /// Jets of the dual solution `p → −p`.
    pub fn negate_cubic(&self) -> Self {
        Self {
            py: -&self.py,
            pyy: -&self.pyy,
            qx: -&self.qx,
            qxx: -&self.qxx,
            vy: self.vy.clone(),
            wx: self.wx.clone(),
        }
    }

    fn fields(&self) -> [&ScalarField<T>; 6] {
        [&self.py, &self.pyy, &self.qx, &self.qxx, &self.vy, &self.wx]
    }
}

/// Prolonged linear system on the state `(r, r_x, r_y, r_xy)` with
///
/// ```text
/// r_xx = p r_y + (1/2)(V − p_y) r
/// r_yy = q r_x + (1/2)(W − q_x) r
/// r_xxy = (p_y + (1/2)(V − p_y)) r_y + pq r_x + ((1/2)p(W − q_x) + (1/2)(V_y − p_yy)) r
/// r_xyy = (q_x + (1/2)(W − q_x)) r_x + qp r_y + ((1/2)q(V − p_y) + (1/2)(W_x − q_xx)) r
/// ```
pub fn wilczynski_connection<T: Real>(
    p: &ScalarField<T>,
    q: &ScalarField<T>,
    v: &ScalarField<T>,
    w: &ScalarField<T>,
) -> Result<ConnectionPair<T>> {
    wilczynski_connection_with(p, q, v, w, &CoefficientJets::by_stencils(p, q, v, w)?)
}

/// [`wilczynski_connection`] with the coefficient derivatives given.
pub fn wilczynski_connection_with<T: Real>(
    p: &ScalarField<T>,
    q: &ScalarField<T>,
    v: &ScalarField<T>,
    w: &ScalarField<T>,
    jets: &CoefficientJets<T>,
) -> Result<ConnectionPair<T>> {
    let mut all = vec![p, q, v, w];
    all.extend(jets.fields());
    check_same_grid(&all)?;
    let g = *p.grid();
    let half = T::lit(0.5);
    let CoefficientJets { py, pyy, qx, qxx, vy, wx } = jets;
    let zero = ScalarField::zeros(&g);
    let one = ScalarField::constant(&g, T::one());

    let vr = ScalarField::combine([v, py], |[a, b]| half * (a - b));
    let wr = ScalarField::combine([w, qx], |[a, b]| half * (a - b));
    let pq = p * q;
    let a30 = ScalarField::combine([p, &wr, vy, pyy], |[p, wr, vy, pyy]| p * wr + half * (vy - pyy));
    let a32 = py + &vr;
    let b30 = ScalarField::combine([q, &vr, wx, qxx], |[q, vr, wx, qxx]| q * vr + half * (wx - qxx));
    let b31 = qx + &wr;

    let z = || zero.clone();
    let o = || one.clone();
    #[rustfmt::skip]
    let a = vec![
        z(), o(), z(), z(),
        vr.clone(), z(), p.clone(), z(),
        z(), z(), z(), o(),
        a30, pq.clone(), a32, z(),
    ];
    #[rustfmt::skip]
    let b = vec![
        z(), z(), o(), z(),
        z(), z(), z(), o(),
        wr, q.clone(), z(), z(),
        b30, b31, pq, z(),
    ];
    ConnectionPair::new(4, a, b)
}

/// Residual of `a_y = b_x`, the condition for `u = a_y + pq` to be well defined.
pub fn potential_consistency<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> Result<ResidualReport> {
    check_same_grid(&[a, b])?;
    let ay = differentiate(a, 0, 1)?;
    let bx = differentiate(b, 1, 0)?;
    Ok(ReportBuilder::new(a.grid()).equation("a_y-b_x", &ay - &bx, &[&ay, &bx]).finish())
}

/// Conormal system on `(ν, ν_x, ν_y)`:
///
/// ```text
/// ν_xy = u ν,  ν_xx = a ν_x − p ν_y + (p_y + pb) ν,  ν_yy = −q ν_x + b ν_y + (q_x + qa) ν
/// ```
///
/// with `u = (a_y + b_x)/2 + pq`. Fails when `a_y ≠ b_x` beyond the default
/// tolerance.
pub fn conormal_connection<T: Real>(
    p: &ScalarField<T>,
    q: &ScalarField<T>,
    a: &ScalarField<T>,
    b: &ScalarField<T>,
) -> Result<ConnectionPair<T>> {
    let report = potential_consistency(a, b)?;
    if !report.passes(Tolerance::Default) {
        return Err(Error::InvalidParameter(format!(
            "potential u ill-defined: |a_y − b_x| = {:e} exceeds tolerance",
            report.max_sup()
        )));
    }
    conormal_connection_unchecked(p, q, a, b)
}

/// [`conormal_connection`] without the `a_y = b_x` check.
pub fn conormal_connection_unchecked<T: Real>(
    p: &ScalarField<T>,
    q: &ScalarField<T>,
    a: &ScalarField<T>,
    b: &ScalarField<T>,
) -> Result<ConnectionPair<T>> {
    check_same_grid(&[p, q, a, b])?;
    let g = *p.grid();
    let half = T::lit(0.5);
    let py = differentiate(p, 0, 1)?;
    let qx = differentiate(q, 1, 0)?;
    let ay = differentiate(a, 0, 1)?;
    let bx = differentiate(b, 1, 0)?;
    let u = ScalarField::combine([&ay, &bx, p, q], |[ay, bx, p, q]| half * (ay + bx) + p * q);
    let zero = ScalarField::zeros(&g);
    let one = ScalarField::constant(&g, T::one());
    let a10 = ScalarField::combine([&py, p, b], |[py, p, b]| py + p * b);
    let b20 = ScalarField::combine([&qx, q, a], |[qx, q, a]| qx + q * a);
    #[rustfmt::skip]
    let am = vec![
        zero.clone(), one.clone(), zero.clone(),
        a10, a.clone(), -p,
        u.clone(), zero.clone(), zero.clone(),
    ];
    #[rustfmt::skip]
    let bm = vec![
        zero.clone(), zero.clone(), one,
        u, zero.clone(), zero,
        b20, -q, b.clone(),
    ];
    ConnectionPair::new(3, am, bm)
}

/// Entrywise norms of `A_y − B_x + AB − BA`; equations are named `C<r><c>`.
pub fn curvature_residual<T: Real>(conn: &ConnectionPair<T>) -> Result<ResidualReport> {
    let n = conn.dim;
    let g = conn.grid;
    let mut builder = ReportBuilder::new(&g);
    for r in 0..n {
        for c in 0..n {
            let ay = differentiate(conn.a(r, c), 0, 1)?;
            let bx = differentiate(conn.b(r, c), 1, 0)?;
            let mut ab = ScalarField::zeros(&g);
            let mut ba = ScalarField::zeros(&g);
            for k in 0..n {
                ab = ScalarField::combine([&ab, conn.a(r, k), conn.b(k, c)], |[s, x, y]| s + x * y);
                ba = ScalarField::combine([&ba, conn.b(r, k), conn.a(k, c)], |[s, x, y]| s + x * y);
            }
            let res = ScalarField::combine([&ay, &bx, &ab, &ba], |[a, b, c, d]| a - b + c - d);
            builder = builder.equation(&format!("C{r}{c}"), res, &[&ay, &bx, &ab, &ba]);
        }
    }
    Ok(builder.finish())
}
