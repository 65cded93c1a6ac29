use isoasym::backlund::{backlund_mvn_to_vn, dual, linear_system_residual, solve_r0_jet};
use isoasym::connection::{CoefficientJets, Mode};
use isoasym::families::{gen_affine_sphere, gen_quadric, gen_rotation, gen_steiner, Family};
use isoasym::fields::{make_grid, residual_mvn, residual_vn, ResidualReport, ScalarField, Tolerance};
use isoasym::{Error, ErrorKind, Field, Grid, Solution};

fn grid(n: usize, x0: f64, len: f64) -> Grid {
    make_grid(x0, x0, n, n, len / (n - 1) as f64).unwrap()
}

fn interior_sup(a: &Field, b: &Field, e: usize) -> f64 {
    let g = a.grid();
    let mut m = 0.0f64;
    for i in e..g.nx - e {
        for j in e..g.ny - e {
            m = m.max((a.at(i, j) - b.at(i, j)).abs());
        }
    }
    m
}

fn jet_errors(s: &Solution, e: usize) -> [f64; 4] {
    let exact = s.jets.clone().unwrap();
    let st = CoefficientJets::by_stencils(&s.p, &s.p, &s.v, &s.w).unwrap();
    [
        interior_sup(&exact.py, &st.py, e),
        interior_sup(&exact.qxx, &st.qxx, e),
        interior_sup(&exact.vy, &st.vy, e),
        interior_sup(&exact.wx, &st.wx, e),
    ]
}

#[test]
fn closed_form_jets_match_stencils_at_fourth_order() {
    type Gen = fn(&Grid) -> Solution;
    let gens: [Gen; 2] =
        [|g| gen_steiner(1.0, 0.1, 0.05, 1.0, 1.0, g).unwrap(), |g| gen_affine_sphere(-1.0, 0.5, 0.5, g).unwrap()];
    for gen in gens {
        let (c, f) = (gen(&grid(65, 0.0, 1.0)), gen(&grid(129, 0.0, 1.0)));
        let (ec, ef) = (jet_errors(&c, 3), jet_errors(&f, 6));
        for (a, b) in ec.iter().zip(ef) {
            assert!(*a < 1e-5, "coarse jet error {a:e}");
            assert!(a / b > 10.0, "jet ratio {} ({a:e} / {b:e})", a / b);
        }
    }
}

#[test]
fn quadric_residual_is_exactly_zero() {
    let g = grid(33, -1.0, 2.0);
    let s = gen_quadric(|x| x * x, |y| y * y * y, &g).unwrap();
    assert_eq!(s.family, Family::Quadric);
    assert_eq!(s.residual().unwrap().max_sup(), 0.0);
}

#[test]
fn rotation_with_zero_profile_degenerates_to_quadric() {
    let g = grid(33, 0.0, 1.0);
    let s = gen_rotation(|_| 0.0, 5.0, &g).unwrap();
    assert!(s.residual().unwrap().max_sup() <= 1e-12);
}

#[test]
fn steiner_singular_locus_is_reported() {
    let g = grid(33, -1.0, 2.0);
    let err = gen_steiner(1.0, 0.0, 0.0, -1.0, -1.0, &g).unwrap_err();
    assert!(matches!(err, Error::Singular(_)), "{err}");
    assert_eq!(err.kind(), ErrorKind::Numerical);
}

#[test]
fn flat_quadric_backlund_with_xy() {
    let (x0, len) = (0.5, 1.0);
    let g = grid(65, x0, len);
    let s = gen_quadric(|_| 0.0, |_| 0.0, &g).unwrap();
    let jet = solve_r0_jet(&s, &[x0 * x0, x0, x0, 1.0], Mode::XY).unwrap();
    let xy = ScalarField::sample(&g, |x, y| x * y).unwrap();
    assert!(interior_sup(&jet.r, &xy, 0) < 1e-12);
    let vn = backlund_mvn_to_vn(&s, &jet).unwrap();
    let v = ScalarField::sample(&g, |x, _| 2.0 / (x * x)).unwrap();
    let w = ScalarField::sample(&g, |_, y| 2.0 / (y * y)).unwrap();
    assert!(interior_sup(&vn.u, &Field::zeros(&g), 0) < 1e-10);
    assert!(interior_sup(&vn.v, &v, 0) < 1e-10);
    assert!(interior_sup(&vn.w, &w, 0) < 1e-10);
    assert!(vn.residual().unwrap().passes(Tolerance::Default));
}

#[test]
fn vn_triple_of_flat_quadric_is_exact() {
    let g = grid(33, 0.5, 1.0);
    let u = Field::zeros(&g);
    let v = ScalarField::sample(&g, |x, _| 2.0 / (x * x)).unwrap();
    let w = ScalarField::sample(&g, |_, y| 2.0 / (y * y)).unwrap();
    let r: ResidualReport = residual_vn(&u, &v, &w).unwrap();
    assert_eq!(r.max_sup(), 0.0);
}

#[test]
fn linear_system_rejects_wrong_r0() {
    let g = grid(33, 0.5, 1.0);
    let s = gen_quadric(|_| 0.0, |_| 0.0, &g).unwrap();
    let bad = ScalarField::sample(&g, |x, y| (x * y).exp()).unwrap();
    assert!(!linear_system_residual(&s, &bad).unwrap().passes(Tolerance::Default));
}

#[test]
fn dual_keeps_residual_and_inverts() {
    let g = grid(65, 0.0, 2.0);
    let s = gen_rotation(f64::sin, 1.0, &g).unwrap();
    let d = dual(&s);
    assert!(d.dualized);
    assert_eq!(d.residual().unwrap().max_sup(), s.residual().unwrap().max_sup());
    assert_eq!(dual(&d), s);
    assert_eq!(residual_mvn(&d.p, &d.v, &d.w).unwrap().max_sup(), s.residual().unwrap().max_sup());
}

#[test]
fn single_precision_path() {
    let g = make_grid(0.0f32, 0.0, 33, 33, 1.0 / 32.0).unwrap();
    let s = gen_affine_sphere(-1.0f32, 0.5, 0.5, &g).unwrap();
    let r = s.residual().unwrap();
    assert!(r.max_relative() < 1e-3, "{}", r.max_relative());
}
