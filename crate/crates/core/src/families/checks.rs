use crate::error::Result;
use crate::fields::{check_same_grid, differentiate, ReportBuilder, ResidualReport, ScalarField};
use crate::real::Real;

/// Logarithmic derivatives of a nonvanishing field, formed as ratios of
/// stencil derivatives so the sign of `p` never enters.
#[derive(Clone, Debug)]
pub struct LogDerivatives<T> {
    pub px: ScalarField<T>,
    pub py: ScalarField<T>,
    pub pxx: ScalarField<T>,
    pub pyy: ScalarField<T>,
    pub pxy: ScalarField<T>,
    /// `(ln p)_x = p_x / p`
    pub lx: ScalarField<T>,
    pub ly: ScalarField<T>,
    /// `(ln p)_xx = p_xx/p − (p_x/p)²`
    pub lxx: ScalarField<T>,
    pub lyy: ScalarField<T>,
    /// `(ln p)_xy = p_xy/p − p_x p_y/p²`
    pub lxy: ScalarField<T>,
}

pub(crate) fn ensure_nonvanishing<T: Real>(p: &ScalarField<T>, what: &str) -> Result<()> {
    p.ensure_finite()?;
    let tiny = p.sup_abs() * T::lit(1e-12);
    p.ensure_nonvanishing(what, tiny.max(T::min_positive_value()))
}

impl<T: Real> LogDerivatives<T> {
    pub fn new(p: &ScalarField<T>) -> Result<Self> {
        ensure_nonvanishing(p, "p")?;
        let px = differentiate(p, 1, 0)?;
        let py = differentiate(p, 0, 1)?;
        let pxx = differentiate(p, 2, 0)?;
        let pyy = differentiate(p, 0, 2)?;
        let pxy = differentiate(p, 1, 1)?;
        let lx = &px / p;
        let ly = &py / p;
        let lxx = ScalarField::combine([&pxx, p, &lx], |[a, b, c]| a / b - c * c);
        let lyy = ScalarField::combine([&pyy, p, &ly], |[a, b, c]| a / b - c * c);
        let lxy = ScalarField::combine([&pxy, p, &lx, &ly], |[a, b, c, d]| a / b - c * d);
        Ok(Self { px, py, pxx, pyy, pxy, lx, ly, lxx, lyy, lxy })
    }
}

/// `(ln p)_xy − k p²`.
pub fn check_log_curvature<T: Real>(p: &ScalarField<T>, k: T) -> Result<ResidualReport> {
    let d = LogDerivatives::new(p)?;
    let kq = p.map(|v| k * v * v);
    Ok(ReportBuilder::new(p.grid()).equation("log_curvature", &d.lxy - &kq, &[&d.lxy, &kq]).finish())
}

/// Constant curvature of the projective metric: `(ln p²)_xy − c p²`.
pub fn check_projective_curvature<T: Real>(p: &ScalarField<T>, c: T) -> Result<ResidualReport> {
    let d = LogDerivatives::new(p)?;
    let l2 = d.lxy.scale(T::lit(2.0));
    let cq = p.map(|v| c * v * v);
    Ok(ReportBuilder::new(p.grid()).equation("projective_curvature", &l2 - &cq, &[&l2, &cq]).finish())
}

/// Tzitzeica equation `(ln p)_xy − p² − c/p`.
pub fn check_tzitzeica<T: Real>(p: &ScalarField<T>, c: T) -> Result<ResidualReport> {
    let d = LogDerivatives::new(p)?;
    let q = p.map(|v| v * v);
    let cp = p.map(|v| c / v);
    let r = ScalarField::combine([&d.lxy, &q, &cp], |[a, b, e]| a - b - e);
    Ok(ReportBuilder::new(p.grid()).equation("tzitzeica", r, &[&d.lxy, &q, &cp]).finish())
}

/// `p_xx + (4/3) p p_y`, `p_yy + (4/3) p p_x`, `(ln p)_xy − (4/9) p²`.
pub fn check_roman_system<T: Real>(p: &ScalarField<T>) -> Result<ResidualReport> {
    let d = LogDerivatives::new(p)?;
    let c43 = T::lit(4.0 / 3.0);
    let c49 = T::lit(4.0 / 9.0);
    let tpy = ScalarField::combine([p, &d.py], |[a, b]| c43 * a * b);
    let tpx = ScalarField::combine([p, &d.px], |[a, b]| c43 * a * b);
    let q = p.map(|v| c49 * v * v);
    Ok(ReportBuilder::new(p.grid())
        .equation("roman_xx", &d.pxx + &tpy, &[&d.pxx, &tpy])
        .equation("roman_yy", &d.pyy + &tpx, &[&d.pyy, &tpx])
        .equation("log_curvature", &d.lxy - &q, &[&d.lxy, &q])
        .finish())
}

/// Kummer compatibility condition on `p` with `Q = p²`, expanded as
/// `(Q_y²/Q + Q_yy)_y − (Q_x²/Q + Q_xx)_x
///  = 2Q_yQ_yy/Q − Q_y³/Q² + Q_yyy − (2Q_xQ_xx/Q − Q_x³/Q² + Q_xxx)`.
pub fn check_kummer_p<T: Real>(p: &ScalarField<T>) -> Result<ResidualReport> {
    ensure_nonvanishing(p, "p")?;
    let two = T::lit(2.0);
    let q = p.map(|v| v * v);
    let side = |k: usize| -> Result<[ScalarField<T>; 3]> {
        let (d1, d2, d3) = if k == 0 {
            (differentiate(&q, 1, 0)?, differentiate(&q, 2, 0)?, differentiate(&q, 3, 0)?)
        } else {
            (differentiate(&q, 0, 1)?, differentiate(&q, 0, 2)?, differentiate(&q, 0, 3)?)
        };
        let a = ScalarField::combine([&d1, &d2, &q], |[a, b, c]| two * a * b / c);
        let b = ScalarField::combine([&d1, &q], |[a, c]| a * a * a / (c * c));
        Ok([a, b, d3])
    };
    let [xa, xb, xc] = side(0)?;
    let [ya, yb, yc] = side(1)?;
    let r = ScalarField::combine([&ya, &yb, &yc, &xa, &xb, &xc], |[a, b, c, d, e, f]| (a - b + c) - (d - e + f));
    Ok(ReportBuilder::new(p.grid()).equation("kummer_p", r, &[&ya, &yb, &yc, &xa, &xb, &xc]).finish())
}

/// Cubic-surface constraints on `(p, V, W)`.
///
/// `V = −(1/2)(ln p)_xx + (1/8)(ln p)_x² + (5/2)p_y` (and the mate for `W`),
/// plus the two consequences, multiplied through by `√p` so no fractional
/// powers remain. With `S = (ln p)_xy + 4p²`:
///
/// ```text
/// S_y − (1/2)(p_y/p) S − 5 p_xx = 0
/// S_x − (1/2)(p_x/p) S − 5 p_yy = 0
/// ```
///
/// `S_y` is expanded so every stencil derivative has order at most 3:
/// `∂_y (ln p)_xy = p_xyy/p − (2 p_xy p_y + p_x p_yy)/p² + 2 p_x p_y²/p³`.
pub fn check_cubic_constraints<T: Real>(
    p: &ScalarField<T>,
    v: &ScalarField<T>,
    w: &ScalarField<T>,
) -> Result<ResidualReport> {
    check_same_grid(&[p, v, w])?;
    let d = LogDerivatives::new(p)?;
    let (half, eighth, five_half) = (T::lit(0.5), T::lit(0.125), T::lit(2.5));
    let (two, four, five, eight) = (T::lit(2.0), T::lit(4.0), T::lit(5.0), T::lit(8.0));

    let vf = ScalarField::combine([&d.lxx, &d.lx, &d.py], |[a, b, c]| -half * a + eighth * b * b + five_half * c);
    let wf = ScalarField::combine([&d.lyy, &d.ly, &d.px], |[a, b, c]| -half * a + eighth * b * b + five_half * c);

    let pxyy = differentiate(p, 1, 2)?;
    let pxxy = differentiate(p, 2, 1)?;
    let s = ScalarField::combine([&d.lxy, p], |[l, q]| l + four * q * q);
    // (ln p)_xyy and (ln p)_xxy
    let lxyy = ScalarField::combine([&pxyy, &d.pxy, &d.py, &d.px, &d.pyy, p], |[a, b, c, e, f, q]| {
        a / q - (two * b * c + e * f) / (q * q) + two * e * c * c / (q * q * q)
    });
    let lxxy = ScalarField::combine([&pxxy, &d.pxy, &d.px, &d.py, &d.pxx, p], |[a, b, c, e, f, q]| {
        a / q - (two * b * c + e * f) / (q * q) + two * e * c * c / (q * q * q)
    });
    let sy = ScalarField::combine([&lxyy, p, &d.py], |[l, q, c]| l + eight * q * c);
    let sx = ScalarField::combine([&lxxy, p, &d.px], |[l, q, c]| l + eight * q * c);
    let hy = ScalarField::combine([&d.ly, &s], |[a, b]| half * a * b);
    let hx = ScalarField::combine([&d.lx, &s], |[a, b]| half * a * b);
    let fxx = d.pxx.scale(five);
    let fyy = d.pyy.scale(five);
    let ry = ScalarField::combine([&sy, &hy, &fxx], |[a, b, c]| a - b - c);
    let rx = ScalarField::combine([&sx, &hx, &fyy], |[a, b, c]| a - b - c);
    Ok(ReportBuilder::new(p.grid())
        .equation("cubic_v", v - &vf, &[v, &vf])
        .equation("cubic_w", w - &wf, &[w, &wf])
        .equation("cubic_y", ry, &[&sy, &hy, &fxx])
        .equation("cubic_x", rx, &[&sx, &hx, &fyy])
        .finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::fields::make_grid;

    #[test]
    fn roman_closed_form_and_negative_control() {
        let g = make_grid(1.0, 1.0, 81, 81, 0.0125).unwrap();
        let p = ScalarField::sample(&g, |x: f64, y| 1.5 / (x + y)).unwrap();
        let r = check_roman_system(&p).unwrap();
        assert!(r.max_relative() < 1e-7, "{r:?}");
        let s = ScalarField::sample(&g, |x: f64, y| (x + y).sin()).unwrap();
        assert!(check_roman_system(&s).unwrap().max_relative() > 1e-2);
    }

    #[test]
    fn kummer_p_constant_and_linear() {
        let g = make_grid(1.0, 1.0, 24, 24, 0.05).unwrap();
        let c = ScalarField::constant(&g, 2.0);
        assert!(check_kummer_p(&c).unwrap().max_sup() < 1e-12);
        // p = x is annihilated (Q_x²/Q + Q_xx = 6); p = e^x is not.
        let x = ScalarField::sample(&g, |x: f64, _| x).unwrap();
        assert!(check_kummer_p(&x).unwrap().max_sup() < 1e-9);
        let e = ScalarField::sample(&g, |x: f64, _| x.exp()).unwrap();
        assert!(check_kummer_p(&e).unwrap().max_relative() > 0.1);
    }

    #[test]
    fn vanishing_p_rejected() {
        let g = make_grid(-0.5, 0.0, 16, 16, 0.1).unwrap();
        let p = ScalarField::sample(&g, |x: f64, _| x).unwrap();
        assert!(matches!(check_roman_system(&p), Err(Error::Vanishing { .. })));
    }

    #[test]
    fn cubic_constant_p() {
        let g = make_grid(0.0, 0.0, 16, 16, 0.1).unwrap();
        let p = ScalarField::constant(&g, 0.7);
        let z = ScalarField::zeros(&g);
        assert!(check_cubic_constraints(&p, &z, &z).unwrap().max_sup() < 1e-12);
    }

    #[test]
    fn tzitzeica_liouville() {
        let g = make_grid(1.0, 1.0, 81, 81, 0.0125).unwrap();
        let p = ScalarField::sample(&g, |x: f64, y| 1.0 / (x + y)).unwrap();
        assert!(check_tzitzeica(&p, 0.0).unwrap().max_relative() < 1e-7);
        assert!(check_log_curvature(&p, 1.0).unwrap().max_relative() < 1e-7);
        assert!(check_projective_curvature(&p, 2.0).unwrap().max_relative() < 1e-7);
    }
}
