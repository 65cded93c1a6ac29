use crate::error::{Error, Result};
use crate::real::Real;

/// Polynomial `P(f) = Σ a_k f^k` of degree at most 6.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs<T> {
    coeffs: Vec<T>,
}

impl<T: Real> PolyCoeffs<T> {
    pub fn new(coeffs: &[T]) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > 7 {
            return Err(Error::InvalidParameter(format!("polynomial needs 1..=7 coefficients, got {}", coeffs.len())));
        }
        if coeffs.iter().all(|c| *c == T::zero()) {
            return Err(Error::InvalidParameter("polynomial is identically zero".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite polynomial coefficient".into()));
        }
        Ok(Self { coeffs: coeffs.to_vec() })
    }

    /// `(a0 + a1 f + a2 f²)²`, the quartic behind the Roman surface.
    pub fn steiner(a0: T, a1: T, a2: T) -> Result<Self> {
        let two = T::lit(2.0);
        Self::new(&[a0 * a0, two * a0 * a1, a1 * a1 + two * a0 * a2, two * a1 * a2, a2 * a2])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn eval(&self, f: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * f + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self { coeffs: vec![T::zero()] };
        }
        Self { coeffs: self.coeffs[1..].iter().enumerate().map(|(k, &c)| c * T::of_usize(k + 1)).collect() }
    }

    /// `f ↦ P(−f)`.
    pub fn reflect(&self) -> Self {
        Self { coeffs: self.coeffs.iter().enumerate().map(|(k, &c)| if k % 2 == 1 { -c } else { c }).collect() }
    }
}

/// Samples of a monotone solution of `(f')³ = P(f)` on a uniform 1-D grid.
#[derive(Clone, Debug)]
pub struct CubeRootFlow<T> {
    pub start: T,
    pub step: T,
    pub f: Vec<T>,
    pub fp: Vec<T>,
    poly: PolyCoeffs<T>,
    dpoly: PolyCoeffs<T>,
    ddpoly: PolyCoeffs<T>,
}

impl<T: Real> CubeRootFlow<T> {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn x(&self, k: usize) -> T {
        self.start + T::of_usize(k) * self.step
    }

    pub fn poly(&self) -> &PolyCoeffs<T> {
        &self.poly
    }

    /// `(f, f', f'', f''')` at sample `k`, higher derivatives from the ODE:
    /// `f'' = P'(f) / (3 f')`, `f''' = P''(f)/3 − P'(f) f'' / (3 f'²)`.
    pub fn jet(&self, k: usize) -> [T; 4] {
        let three = T::lit(3.0);
        let (f, f1) = (self.f[k], self.fp[k]);
        let dp = self.dpoly.eval(f);
        let f2 = dp / (three * f1);
        let f3 = self.ddpoly.eval(f) / three - dp * f2 / (three * f1 * f1);
        [f, f1, f2, f3]
    }

    /// Largest pointwise `|(f')³ − P(f)|`.
    pub fn ode_residual(&self) -> T {
        self.f.iter().zip(&self.fp).fold(T::zero(), |m, (&f, &d)| m.max((d * d * d - self.poly.eval(f)).abs()))
    }
}

/// Integrates `f' = P(f)^(1/3)` (real positive root) with classical RK4 from
/// `f(start) = f0` over `[start, end]`. Stops with an error before `P(f)`
/// reaches zero, where the branch of the cube root becomes ambiguous.
pub fn solve_cube_root_flow<T: Real>(
    poly: &PolyCoeffs<T>,
    f0: T,
    start: T,
    end: T,
    step: T,
) -> Result<CubeRootFlow<T>> {
    if !(step > T::zero()) {
        return Err(Error::InvalidParameter(format!("flow step {step} must be positive")));
    }
    if !(end >= start) {
        return Err(Error::InvalidParameter("flow range is empty".into()));
    }
    let rate = |f: T, x: T| -> Result<T> {
        let v = poly.eval(f);
        if !(v > T::zero()) {
            return Err(Error::FlowBreakdown { at: x.as_f64(), reason: format!("P(f) = {v} <= 0 at f = {f}") });
        }
        Ok(v.cbrt())
    };
    let n = ((end - start) / step).round().to_usize().unwrap_or(0);
    let half = step / T::lit(2.0);
    let sixth = step / T::lit(6.0);
    let two = T::lit(2.0);
    let mut f = Vec::with_capacity(n + 1);
    let mut fp = Vec::with_capacity(n + 1);
    let mut cur = f0;
    f.push(cur);
    fp.push(rate(cur, start)?);
    for k in 0..n {
        let x = start + T::of_usize(k) * step;
        let k1 = fp[k];
        let k2 = rate(cur + half * k1, x + half)?;
        let k3 = rate(cur + half * k2, x + half)?;
        let k4 = rate(cur + step * k3, x + step)?;
        cur = cur + sixth * (k1 + two * k2 + two * k3 + k4);
        if !cur.is_finite() {
            return Err(Error::FlowBreakdown { at: (x + step).as_f64(), reason: "blow-up".into() });
        }
        f.push(cur);
        fp.push(rate(cur, x + step)?);
    }
    let dpoly = poly.derivative();
    let ddpoly = dpoly.derivative();
    Ok(CubeRootFlow { start, step, f, fp, poly: poly.clone(), dpoly, ddpoly })
}
