//! Uniform grids in asymptotic coordinates, immutable scalar fields on them,
//! high-order finite differences, residual norms, quadrature and field I/O.

mod interp;
pub mod io;
mod quadrature;
mod residual;
mod stencil;

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::real::Real;

pub use interp::{lagrange_weights, Interpolator};
pub use quadrature::area_functional;
pub use residual::{
    residual_gc, residual_mvn, residual_vn, EquationNorms, ReportBuilder, ResidualReport, Tolerance, DEFAULT_EXCLUSION,
};
pub use stencil::{differentiate, fornberg_weights, half_width};

/// Minimum node count per axis; the widest stencil spans 7 nodes.
pub const MIN_NODES: usize = 8;

/// Uniform rectangular grid with shared spacing `h` on both axes.
///
/// Node `(i, j)` sits at `(x0 + i h, y0 + j h)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub x0: T,
    pub y0: T,
    pub nx: usize,
    pub ny: usize,
    pub h: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(x0: T, y0: T, nx: usize, ny: usize, h: T) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(Error::InvalidGrid(format!("{nx}x{ny} nodes, need at least {MIN_NODES} per axis")));
        }
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing h = {h} must be positive")));
        }
        if !x0.is_finite() || !y0.is_finite() {
            return Err(Error::InvalidGrid("non-finite origin".into()));
        }
        Ok(Self { x0, y0, nx, ny, h })
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x0 + T::of_usize(i) * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.y0 + T::of_usize(j) * self.h
    }

    pub fn x_end(&self) -> T {
        self.x(self.nx - 1)
    }

    pub fn y_end(&self) -> T {
        self.y(self.ny - 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of node `(i, j)`; storage is row-major with `y` fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Grid with the same extent and twice the resolution.
    pub fn refined(&self) -> Self {
        Self { x0: self.x0, y0: self.y0, nx: 2 * self.nx - 1, ny: 2 * self.ny - 1, h: self.h / T::lit(2.0) }
    }

    pub fn cast<U: Real>(&self) -> GridSpec<U> {
        GridSpec {
            x0: U::lit(self.x0.as_f64()),
            y0: U::lit(self.y0.as_f64()),
            nx: self.nx,
            ny: self.ny,
            h: U::lit(self.h.as_f64()),
        }
    }
}

/// Convenience constructor mirroring `GridSpec::new`.
pub fn make_grid<T: Real>(x0: T, y0: T, nx: usize, ny: usize, h: T) -> Result<GridSpec<T>> {
    GridSpec::new(x0, y0, nx, ny, h)
}

/// Real values on the nodes of a [`GridSpec`].
///
/// Besides the values, a field carries a per-axis *margin*: the number of
/// boundary nodes whose values came out of one-sided stencils (directly or
/// through an earlier differentiation). Errors there are not smooth in the
/// node index, so residual norms widen their excluded boundary strip to
/// cover it.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
    margin: [usize; 2],
}

impl<T: Real> ScalarField<T> {
    /// Samples `expr(x, y)` at every node.
    pub fn sample(grid: &GridSpec<T>, expr: impl Fn(T, T) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            let x = grid.x(i);
            for j in 0..grid.ny {
                let y = grid.y(j);
                let v = expr(x, y);
                if !v.is_finite() {
                    return Err(non_finite(grid, i, j));
                }
                values.push(v);
            }
        }
        Ok(Self { grid: *grid, values, margin: [0, 0] })
    }

    pub fn from_values(grid: &GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!("{} values for a {}x{} grid", values.len(), grid.nx, grid.ny)));
        }
        let field = Self { grid: *grid, values, margin: [0, 0] };
        field.ensure_finite()?;
        Ok(field)
    }

    pub(crate) fn from_raw(grid: GridSpec<T>, values: Vec<T>, margin: [usize; 2]) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, margin }
    }

    pub fn constant(grid: &GridSpec<T>, c: T) -> Self {
        Self { grid: *grid, values: vec![c; grid.len()], margin: [0, 0] }
    }

    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.idx(i, j)]
    }

    /// Per-axis count of boundary nodes carrying one-sided stencil error.
    pub fn margin(&self) -> [usize; 2] {
        self.margin
    }

    pub fn with_margin(mut self, margin: [usize; 2]) -> Self {
        self.margin = margin;
        self
    }

    pub fn ensure_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(non_finite(&self.grid, k / self.grid.ny, k % self.grid.ny)),
        }
    }

    /// Errors with [`Error::Vanishing`] if any value has magnitude `<= tiny`.
    pub fn ensure_nonvanishing(&self, what: &str, tiny: T) -> Result<()> {
        match self.values.iter().position(|v| v.abs() <= tiny) {
            None => Ok(()),
            Some(k) => Err(Error::Vanishing { what: what.to_string(), i: k / self.grid.ny, j: k % self.grid.ny }),
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid == other.grid
    }

    pub fn sup_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect(), margin: self.margin }
    }

    /// Node-wise combination of `N` fields on a shared grid.
    ///
    /// # Panics
    /// If the fields do not share a grid; callers validate grids first.
    pub fn combine<const N: usize>(fields: [&Self; N], f: impl Fn([T; N]) -> T) -> Self {
        let first = fields[0];
        let mut margin = [0, 0];
        for g in fields.iter() {
            assert!(g.grid == first.grid, "combine: fields on different grids");
            margin[0] = margin[0].max(g.margin[0]);
            margin[1] = margin[1].max(g.margin[1]);
        }
        let values = (0..first.values.len()).map(|k| f(std::array::from_fn(|n| fields[n].values[k]))).collect();
        Self { grid: first.grid, values, margin }
    }

    /// Node-wise combination that also sees the node coordinates.
    pub fn combine_xy<const N: usize>(fields: [&Self; N], f: impl Fn(T, T, [T; N]) -> T) -> Self {
        let first = fields[0];
        let grid = first.grid;
        let mut out = Self::combine(fields, |_| T::zero());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let k = grid.idx(i, j);
                out.values[k] = f(grid.x(i), grid.y(j), std::array::from_fn(|n| fields[n].values[k]));
            }
        }
        out
    }

    pub fn scale(&self, k: T) -> Self {
        self.map(|v| v * k)
    }

    pub fn shift(&self, c: T) -> Self {
        self.map(|v| v + c)
    }

    pub fn powi(&self, n: i32) -> Self {
        self.map(|v| v.powi(n))
    }

    /// Values on row `j` (varying `x`).
    pub fn row(&self, j: usize) -> Vec<T> {
        (0..self.grid.nx).map(|i| self.at(i, j)).collect()
    }

    /// Values on column `i` (varying `y`).
    pub fn column(&self, i: usize) -> Vec<T> {
        self.values[i * self.grid.ny..(i + 1) * self.grid.ny].to_vec()
    }

    pub fn cast<U: Real>(&self) -> ScalarField<U> {
        ScalarField {
            grid: self.grid.cast(),
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
            margin: self.margin,
        }
    }
}

pub(crate) fn non_finite<T: Real>(grid: &GridSpec<T>, i: usize, j: usize) -> Error {
    Error::NonFinite { i, j, x: grid.x(i).as_f64(), y: grid.y(j).as_f64() }
}

/// Samples `expr` on `grid`; free-function form of [`ScalarField::sample`].
pub fn sample<T: Real>(expr: impl Fn(T, T) -> T, grid: &GridSpec<T>) -> Result<ScalarField<T>> {
    ScalarField::sample(grid, expr)
}

pub(crate) fn check_same_grid<T: Real>(fields: &[&ScalarField<T>]) -> Result<()> {
    let g = fields[0].grid();
    if fields.iter().all(|f| f.grid() == g) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<'a, T: Real> $tr<&'a ScalarField<T>> for &'a ScalarField<T> {
            type Output = ScalarField<T>;
            fn $m(self, rhs: &'a ScalarField<T>) -> ScalarField<T> {
                ScalarField::combine([self, rhs], |[a, b]| a $op b)
            }
        }
        impl<'a, T: Real> $tr<T> for &'a ScalarField<T> {
            type Output = ScalarField<T>;
            fn $m(self, rhs: T) -> ScalarField<T> {
                self.map(|a| a $op rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl<T: Real> Neg for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn neg(self) -> ScalarField<T> {
        self.map(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_grid() {
        let g = make_grid(0.0, 0.0, 8, 8, 0.5).unwrap();
        assert_eq!(g.x_end(), 3.5);
        assert_eq!(g.y_end(), 3.5);
    }

    #[test]
    fn grid_extent() {
        let g = make_grid(1.0f64, 1.0, 64, 64, 0.01).unwrap();
        assert!((g.x_end() - 1.63).abs() < 1e-12);
        assert!((g.y_end() - 1.63).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_small_or_bad_spacing() {
        assert!(matches!(make_grid(0.0, 0.0, 4, 4, 0.1), Err(Error::InvalidGrid(_))));
        assert!(make_grid(0.0, 0.0, 8, 8, 0.0).is_err());
        assert!(make_grid(0.0, 0.0, 8, 8, -1.0).is_err());
        assert!(make_grid(0.0, 0.0, 8, 8, f64::NAN).is_err());
    }

    #[test]
    fn sample_values() {
        let g = make_grid(0.0, 0.0, 8, 8, 0.5).unwrap();
        let z = sample(|_, _| 0.0, &g).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let s = sample(|x, y| x + y, &g).unwrap();
        assert_eq!(s.at(2, 3), 2.5);
    }

    #[test]
    fn sample_reports_singular_node() {
        let g = make_grid(-1.0, -1.0, 9, 9, 0.25).unwrap();
        match sample(|x, y| 1.0 / (x + y), &g) {
            Err(Error::NonFinite { i, j, .. }) => assert_eq!(i + j, 8),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn arithmetic_propagates_margin() {
        let g = make_grid(0.0, 0.0, 8, 8, 0.5).unwrap();
        let a = ScalarField::constant(&g, 2.0).with_margin([1, 0]);
        let b = ScalarField::constant(&g, 3.0).with_margin([0, 2]);
        let c = &(&a * &b) - &a;
        assert_eq!(c.margin(), [1, 2]);
        assert_eq!(c.at(3, 3), 4.0);
    }
}
