use isoasym::families::{gen_affine_sphere, gen_quadric};
use isoasym::fields::io::{load_iaf1, save_iaf1};
use isoasym::fields::{make_grid, ScalarField, Tolerance};
use isoasym::surfaces::{
    affine_residuals, asymptotic_defect, conormal_initial_data, export_obj, fit_affine_meshes, read_obj,
    reconstruct_lelieuvre, reconstruct_projective, sample_invariants, SurfaceMesh,
};
use isoasym::{Error, Grid};

fn unit(n: usize) -> Grid {
    make_grid(0.0, 0.0, n, n, 1.0 / (n - 1) as f64).unwrap()
}

#[test]
fn field_file_round_trip_is_bitwise() {
    let g = make_grid(-0.3, 0.7, 17, 9, 0.125).unwrap();
    let f = ScalarField::sample(&g, |x: f64, y: f64| (3.0 * x).sin() * y.exp() + 1e-300).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.iaf1");
    save_iaf1(&f, &path).unwrap();
    let back = load_iaf1(&path).unwrap();
    assert_eq!(back.grid(), f.grid());
    assert!(back.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn truncated_field_file_is_a_format_error() {
    let g = unit(9);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.iaf1");
    save_iaf1(&ScalarField::constant(&g, 2.0), &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    assert!(matches!(load_iaf1(&path), Err(Error::Format(_))));
}

#[test]
fn flat_quadric_is_the_saddle() {
    let g = unit(33);
    let s = gen_quadric(|_| 0.0, |_| 0.0, &g).unwrap();
    let surf = reconstruct_projective(&s).unwrap();
    let saddle = (0..g.nx).flat_map(|i| (0..g.ny).map(move |j| [g.x(i), g.y(j), g.x(i) * g.y(j)])).collect();
    let target = SurfaceMesh::new(&g, saddle, vec![false; g.len()]).unwrap();
    assert!(fit_affine_meshes(&surf.mesh, &target, 0).unwrap().sup < 1e-12);
    assert!(asymptotic_defect(&surf.mesh).unwrap().max_sup() < 1e-10);
}

#[test]
fn two_routes_agree_up_to_an_affine_map() {
    let fit_at = |n: usize, exclusion: usize| {
        let g = unit(n);
        let s = gen_affine_sphere(-1.0, 0.5, 0.5, &g).unwrap();
        let proj = reconstruct_projective(&s).unwrap();
        let frame = proj.frame(&s).unwrap();
        let jet = proj.r0_jet(&s).unwrap();
        let nu0 = conormal_initial_data(&proj.mesh, &jet).unwrap();
        let lel = reconstruct_lelieuvre(&frame, nu0, proj.mesh.point(0, 0)).unwrap();
        assert!(affine_residuals(&lel.mesh, &frame).unwrap().passes(Tolerance::Default));
        fit_affine_meshes(&lel.mesh, &proj.mesh, exclusion).unwrap().sup
    };
    let (c, f) = (fit_at(33, 3), fit_at(65, 6));
    assert!(f < 1e-6, "fit residual {f:e}");
    assert!((12.0..=20.0).contains(&(c / f)), "fit ratio {}", c / f);
}

#[test]
fn obj_export_reads_back() {
    let g = unit(9);
    let s = gen_quadric(|_| 0.0, |_| 0.0, &g).unwrap();
    let mesh = sample_invariants(&s, &reconstruct_projective(&s).unwrap().mesh).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.obj");
    export_obj(&mesh, &path).unwrap();
    let obj = read_obj(&path).unwrap();
    assert_eq!(obj.vertices.len(), g.len());
    assert_eq!(obj.faces.len(), (g.nx - 1) * (g.ny - 1));
    for (a, b) in obj.vertices.iter().zip(mesh.points()) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() <= 1e-12 * b[k].abs().max(1.0));
        }
    }
    assert!(path.with_extension("csv").exists());
}
