use rayon::prelude::*;

use super::mat::{self, Mat4, Vec4};
use super::ConnectionPair;
use crate::error::{Error, Result};
use crate::fields::{GridSpec, ScalarField};
use crate::real::Real;

/// Integration path: along the bottom row then up every column (`XY`), or
/// along the left column then across every row (`YX`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    XY,
    YX,
}

/// Node-wise state vectors of a connection's parallel transport. Components
/// inherit the largest stencil margin among the connection entries, and at
/// least one node for the one-sided end steps.
#[derive(Clone, Debug, PartialEq)]
pub struct StateField<T> {
    grid: GridSpec<T>,
    dim: usize,
    data: Vec<T>,
    margin: [usize; 2],
}

impl<T: Real> StateField<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn margin(&self) -> [usize; 2] {
        self.margin
    }

    pub fn at(&self, i: usize, j: usize) -> &[T] {
        let k = self.grid.idx(i, j) * self.dim;
        &self.data[k..k + self.dim]
    }

    /// Component `k` as a scalar field.
    pub fn component(&self, k: usize) -> ScalarField<T> {
        assert!(k < self.dim, "component {k} out of range");
        let values = self.data.iter().skip(k).step_by(self.dim).copied().collect();
        ScalarField::from_raw(self.grid, values, self.margin)
    }

    /// Largest componentwise difference to another state field.
    pub fn max_difference(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// Start index and weights interpolating a line at the midpoint of
/// `[k, k+1]` with a cubic through four nodes.
fn mid_weights<T: Real>(k: usize, n: usize) -> (usize, [T; 4]) {
    let s = T::lit(1.0 / 16.0);
    let w = |a: f64, b: f64, c: f64, d: f64| [T::lit(a) * s, T::lit(b) * s, T::lit(c) * s, T::lit(d) * s];
    if k == 0 {
        (0, w(5.0, 15.0, -5.0, 1.0))
    } else if k + 2 == n {
        (n - 4, w(1.0, -5.0, 15.0, 5.0))
    } else {
        (k - 1, w(-1.0, 9.0, 9.0, -1.0))
    }
}

/// Running integral of node samples along a line, starting at 0: Simpson's
/// rule per cell with the midpoint value from the same cubic as the RK4 steps.
pub(crate) fn running_integral<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    let (four, sixth) = (T::lit(4.0), h / T::lit(6.0));
    let mut out = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let (s, w) = mid_weights::<T>(k, n);
        let mid = w[0] * f[s] + w[1] * f[s + 1] + w[2] * f[s + 2] + w[3] * f[s + 3];
        out[k + 1] = out[k] + sixth * (f[k] + four * mid + f[k + 1]);
    }
    out
}

/// One RK4 step across `[k, k+1]` of `line`, forward (`k → k+1`) or backward.
fn step<T: Real, S>(
    line: &[Mat4<T>],
    k: usize,
    forward: bool,
    h: T,
    s: &S,
    mul: impl Fn(&Mat4<T>, &S) -> S,
    axpy: impl Fn(&S, T, &S) -> S,
) -> S {
    let (start, w) = mid_weights(k, line.len());
    let mid = mat::blend([&line[start], &line[start + 1], &line[start + 2], &line[start + 3]], w);
    let (m0, m1, h) = if forward { (&line[k], &line[k + 1], h) } else { (&line[k + 1], &line[k], -h) };
    let two = T::lit(2.0);
    let k1 = mul(m0, s);
    let k2 = mul(&mid, &axpy(s, h / two, &k1));
    let k3 = mul(&mid, &axpy(s, h / two, &k2));
    let k4 = mul(m1, &axpy(s, h, &k3));
    let sixth = h / T::lit(6.0);
    let acc = axpy(&axpy(&axpy(&k1, two, &k2), two, &k3), T::one(), &k4);
    axpy(s, sixth, &acc)
}

fn step_vec<T: Real>(line: &[Mat4<T>], k: usize, forward: bool, h: T, s: &Vec4<T>) -> Vec4<T> {
    step(line, k, forward, h, s, mat::apply, mat::axpy_v)
}

fn step_mat<T: Real>(line: &[Mat4<T>], k: usize, forward: bool, h: T, s: &Mat4<T>) -> Mat4<T> {
    step(line, k, forward, h, s, mat::mul, mat::axpy_m)
}

/// Integrates the connection from `init` at the grid corner `(x0, y0)` with
/// RK4; coefficient matrices at half steps come from cubic interpolation
/// along the line.
pub fn integrate_connection<T: Real>(conn: &ConnectionPair<T>, init: &[T], mode: Mode) -> Result<StateField<T>> {
    let dim = conn.dim();
    if init.len() != dim || init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("initial state must be {dim} finite numbers")));
    }
    let g = *conn.grid();
    let amats = conn.mats(true);
    let bmats = conn.mats(false);
    let mut s0: Vec4<T> = [T::zero(); 4];
    s0[..dim].copy_from_slice(init);

    // First edge along the `outer` axis, then independent lines along `inner`.
    let (first, lines, n_outer, n_inner) = match mode {
        Mode::XY => (&amats, &bmats, g.nx, g.ny),
        Mode::YX => (&bmats, &amats, g.ny, g.nx),
    };
    let node = |outer: usize, inner: usize| match mode {
        Mode::XY => g.idx(outer, inner),
        Mode::YX => g.idx(inner, outer),
    };
    let edge: Vec<Mat4<T>> = (0..n_outer).map(|o| first[node(o, 0)]).collect();
    let mut base = vec![s0];
    for k in 0..n_outer - 1 {
        base.push(step_vec(&edge, k, true, g.h, &base[k]));
    }
    let columns: Vec<Vec<Vec4<T>>> = (0..n_outer)
        .into_par_iter()
        .map(|o| {
            let line: Vec<Mat4<T>> = (0..n_inner).map(|t| lines[node(o, t)]).collect();
            let mut col = vec![base[o]];
            for k in 0..n_inner - 1 {
                let next = step_vec(&line, k, true, g.h, &col[k]);
                col.push(next);
            }
            col
        })
        .collect();

    let mut data = vec![T::zero(); g.len() * dim];
    for (o, col) in columns.iter().enumerate() {
        for (t, s) in col.iter().enumerate() {
            let k = node(o, t);
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::Overflow { i: k / g.ny, j: k % g.ny });
            }
            data[k * dim..(k + 1) * dim].copy_from_slice(&s[..dim]);
        }
    }
    let m = conn.margin();
    Ok(StateField { grid: g, dim, data, margin: [m[0].max(1), m[1].max(1)] })
}

/// The `dim` solutions started from the identity columns.
pub fn integrate_fundamental<T: Real>(conn: &ConnectionPair<T>, mode: Mode) -> Result<Vec<StateField<T>>> {
    (0..conn.dim())
        .map(|k| {
            let init: Vec<T> = (0..conn.dim()).map(|t| if t == k { T::one() } else { T::zero() }).collect();
            integrate_connection(conn, &init, mode)
        })
        .collect()
}

/// Node-wise determinant of the matrix whose columns are the given solutions.
pub fn wronskian<T: Real>(solutions: &[StateField<T>]) -> Result<ScalarField<T>> {
    let dim = solutions.first().map(|s| s.dim).unwrap_or(0);
    if dim == 0 || solutions.len() != dim || solutions.iter().any(|s| s.dim != dim || s.grid != solutions[0].grid) {
        return Err(Error::InvalidParameter("wronskian needs dim solutions on one grid".into()));
    }
    let g = solutions[0].grid;
    let values = (0..g.len())
        .map(|n| {
            let mut m = mat::zero();
            for (c, s) in solutions.iter().enumerate() {
                for r in 0..dim {
                    m[r][c] = s.data[n * dim + r];
                }
            }
            mat::det(&m, dim)
        })
        .collect();
    Ok(ScalarField::from_raw(g, values, [0, 0]))
}

/// `‖M − I‖` (Frobenius) for the transport `M` around the rectangle with
/// opposite corners `(i0, j0)` and `(i1, j1)`, traversed counter-clockwise.
pub fn holonomy_defect<T: Real>(conn: &ConnectionPair<T>, i0: usize, j0: usize, i1: usize, j1: usize) -> Result<T> {
    let g = *conn.grid();
    if !(i0 < i1 && j0 < j1 && i1 < g.nx && j1 < g.ny) {
        return Err(Error::Degenerate(format!(
            "rectangle ({i0}, {j0})–({i1}, {j1}) is empty or leaves the {}x{} grid",
            g.nx, g.ny
        )));
    }
    let amats = conn.mats(true);
    let bmats = conn.mats(false);
    let row = |j: usize| -> Vec<Mat4<T>> { (0..g.nx).map(|i| amats[g.idx(i, j)]).collect() };
    let col = |i: usize| -> Vec<Mat4<T>> { (0..g.ny).map(|j| bmats[g.idx(i, j)]).collect() };
    let mut m = mat::identity();
    let (bottom, right, top, left) = (row(j0), col(i1), row(j1), col(i0));
    for k in i0..i1 {
        m = step_mat(&bottom, k, true, g.h, &m);
    }
    for k in j0..j1 {
        m = step_mat(&right, k, true, g.h, &m);
    }
    for k in (i0..i1).rev() {
        m = step_mat(&top, k, false, g.h, &m);
    }
    for k in (j0..j1).rev() {
        m = step_mat(&left, k, false, g.h, &m);
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Overflow { i: i0, j: j0 });
    }
    Ok(mat::dist_identity(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::wilczynski_connection;
    use crate::fields::make_grid;

    #[test]
    fn zero_connection_transports_trivially() {
        let g = make_grid(0.0, 0.0, 10, 12, 0.1).unwrap();
        let c = ConnectionPair::zero(&g, 3).unwrap();
        let s = integrate_connection(&c, &[0.0, 1.0, 0.0], Mode::YX).unwrap();
        assert!((0..10).all(|i| (0..12).all(|j| s.at(i, j) == [0.0, 1.0, 0.0])));
        assert_eq!(holonomy_defect(&c, 1, 2, 7, 9).unwrap(), 0.0);
        assert!(holonomy_defect(&c, 3, 2, 3, 9).is_err());
    }

    #[test]
    fn exponential_solution() {
        // p = q = 0, V = W = 2: r = e^(x+y); error O(h^4) in both modes.
        let err = |n: usize, mode: Mode| {
            let g = make_grid(0.0f64, 0.0, n, n, 1.0 / (n - 1) as f64).unwrap();
            let z = ScalarField::zeros(&g);
            let two = ScalarField::constant(&g, 2.0);
            let c = wilczynski_connection(&z, &z, &two, &two).unwrap();
            let s = integrate_connection(&c, &[1.0; 4], mode).unwrap();
            let mut m = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let e = (g.x(i) + g.y(j)).exp();
                    m = s.at(i, j).iter().fold(m, |m, v| m.max((v - e).abs() / e));
                }
            }
            m
        };
        for mode in [Mode::XY, Mode::YX] {
            let (coarse, fine) = (err(17, mode), err(33, mode));
            assert!(fine < 1e-7, "{fine}");
            assert!((12.0..20.0).contains(&(coarse / fine)), "{}", coarse / fine);
        }
    }

    #[test]
    fn flat_quadric_basis() {
        let g = make_grid(0.0f64, 0.0, 9, 9, 0.25).unwrap();
        let z = ScalarField::zeros(&g);
        let c = wilczynski_connection(&z, &z, &z, &z).unwrap();
        let sols = integrate_fundamental(&c, Mode::XY).unwrap();
        // r-components are 1, x, y, xy.
        let (i, j) = (5, 7);
        let (x, y) = (g.x(i), g.y(j));
        let r: Vec<f64> = sols.iter().map(|s| s.at(i, j)[0]).collect();
        for (a, b) in r.iter().zip([1.0, x, y, x * y]) {
            assert!((a - b).abs() < 1e-13);
        }
        let w = wronskian(&sols).unwrap();
        assert!(w.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn linear_in_initial_state() {
        let g = make_grid(0.0f64, 0.0, 17, 17, 0.05).unwrap();
        let p = ScalarField::sample(&g, |x, y| (x + y).sin()).unwrap();
        let vw = p.map(|s| 1.5 * s * s + 1.0);
        let c = wilczynski_connection(&p, &p, &vw, &vw).unwrap();
        let a = integrate_connection(&c, &[1.0, 0.0, 2.0, 0.0], Mode::XY).unwrap();
        let b = integrate_connection(&c, &[0.0, 3.0, 0.0, -1.0], Mode::XY).unwrap();
        let ab = integrate_connection(&c, &[1.0, 3.0, 2.0, -1.0], Mode::XY).unwrap();
        for k in 0..a.data.len() {
            assert!((a.data[k] + b.data[k] - ab.data[k]).abs() < 1e-12 * ab.data[k].abs().max(1.0));
        }
    }
}
