use super::ScalarField;
use crate::real::Real;

/// Lagrange weights at fractional node position `pos` from `points`
/// consecutive nodes of a line with `n` nodes. Returns the first node index
/// and the weights; the window is centered where possible.
pub fn lagrange_weights<T: Real>(pos: T, n: usize, points: usize) -> (usize, Vec<T>) {
    let points = points.min(n);
    // Positions that are a node up to rounding select that node exactly.
    let near = pos.round();
    let pos = if (pos - near).abs() <= T::lit(64.0) * T::epsilon() * near.abs().max(T::one()) { near } else { pos };
    let base = pos.floor().to_isize().unwrap_or(0);
    let start = (base - (points as isize / 2 - 1)).clamp(0, (n - points) as isize) as usize;
    let weights = (0..points)
        .map(|a| {
            let xa = T::of_usize(start + a);
            (0..points).filter(|&b| b != a).fold(T::one(), |acc, b| {
                let xb = T::of_usize(start + b);
                acc * (pos - xb) / (xa - xb)
            })
        })
        .collect();
    (start, weights)
}

/// Tensor-product Lagrange interpolation of a field at arbitrary points.
pub struct Interpolator<'a, T> {
    field: &'a ScalarField<T>,
    points: usize,
}

impl<'a, T: Real> Interpolator<'a, T> {
    pub fn new(field: &'a ScalarField<T>, points: usize) -> Self {
        Self { field, points }
    }

    pub fn at(&self, x: T, y: T) -> T {
        let g = self.field.grid();
        let (si, wx) = lagrange_weights((x - g.x0) / g.h, g.nx, self.points);
        let (sj, wy) = lagrange_weights((y - g.y0) / g.h, g.ny, self.points);
        let mut acc = T::zero();
        for (a, &wa) in wx.iter().enumerate() {
            let mut row = T::zero();
            for (b, &wb) in wy.iter().enumerate() {
                row = row + wb * self.field.at(si + a, sj + b);
            }
            acc = acc + wa * row;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, sample};

    #[test]
    fn cubic_midpoint_weights() {
        let (s, w) = lagrange_weights(4.5f64, 10, 4);
        assert_eq!(s, 3);
        let expect = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let (s0, w0) = lagrange_weights(0.5f64, 10, 4);
        assert_eq!(s0, 0);
        let expect0 = [5.0 / 16.0, 15.0 / 16.0, -5.0 / 16.0, 1.0 / 16.0];
        for (a, b) in w0.iter().zip(expect0) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_on_polynomials() {
        let g = make_grid(-1.0, 0.5, 12, 12, 0.2).unwrap();
        let f = sample(|x: f64, y: f64| x.powi(7) - 2.0 * y.powi(5) * x + 1.0, &g).unwrap();
        let it = Interpolator::new(&f, 8);
        for &(x, y) in &[(-0.93f64, 0.61f64), (0.17, 1.3), (1.19, 2.69)] {
            let e = x.powi(7) - 2.0 * y.powi(5) * x + 1.0;
            assert!((it.at(x, y) - e).abs() < 1e-9);
        }
    }
}
