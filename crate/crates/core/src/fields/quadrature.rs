use super::{check_same_grid, ScalarField};
use crate::error::Result;
use crate::real::Real;

/// Composite Simpson weights on `n` nodes; for even `n` the last interval
/// falls back to the trapezoid rule.
fn simpson_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![T::zero(); n];
    let simpson_end = if n % 2 == 1 { n - 1 } else { n - 2 };
    let third = h / T::lit(3.0);
    let mut k = 0;
    while k < simpson_end {
        w[k] = w[k] + third;
        w[k + 1] = w[k + 1] + T::lit(4.0) * third;
        w[k + 2] = w[k + 2] + third;
        k += 2;
    }
    if simpson_end < n - 1 {
        let half = h / T::lit(2.0);
        w[n - 2] = w[n - 2] + half;
        w[n - 1] = w[n - 1] + half;
    }
    w
}

/// Projective area `∬ p q dx dy` over the grid rectangle.
pub fn area_functional<T: Real>(p: &ScalarField<T>, q: &ScalarField<T>) -> Result<T> {
    check_same_grid(&[p, q])?;
    let g = p.grid();
    let wx = simpson_weights(g.nx, g.h);
    let wy = simpson_weights(g.ny, g.h);
    let mut total = T::zero();
    for (i, &a) in wx.iter().enumerate() {
        let mut col = T::zero();
        for (j, &b) in wy.iter().enumerate() {
            col = col + b * p.at(i, j) * q.at(i, j);
        }
        total = total + a * col;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, sample};

    #[test]
    fn unit_square() {
        let g = make_grid(0.0f64, 0.0, 9, 9, 0.125).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        assert!((area_functional(&one, &one).unwrap() - 1.0).abs() < 1e-14);
        let x = sample(|x: f64, _| x, &g).unwrap();
        // ∬ x² = 1/3 on the unit square, exact for Simpson.
        assert!((area_functional(&x, &x).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn even_node_count_uses_trapezoid_tail() {
        let g = make_grid(0.0f64, 0.0, 8, 8, 1.0 / 7.0).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        assert!((area_functional(&one, &one).unwrap() - 1.0).abs() < 1e-14);
    }
}
