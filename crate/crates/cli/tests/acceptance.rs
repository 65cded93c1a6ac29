//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always show up in `cargo test` output.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use isoasym::backlund::{backlund_mvn_to_vn, dual, solve_r0_jet, AffineFrame, R0Jet};
use isoasym::connection::{curvature_residual, holonomy_defect, Mode};
use isoasym::families::{
    check_cubic_constraints, check_kummer_p, check_log_curvature, check_projective_curvature, gen_kummer,
    gen_proj_applicable, gen_quadric, PolyCoeffs,
};
use isoasym::fields::{differentiate, make_grid, ResidualReport, ScalarField, Tolerance, DEFAULT_EXCLUSION};
use isoasym::surfaces::{
    affine_residuals, conormal_consistency, conormal_initial_data, fit_affine_meshes, reconstruct_lelieuvre,
    reconstruct_projective, SurfaceMesh,
};
use isoasym::{Field, Grid, Solution};
use isoasym_cli::config::{FamilyConfig, GridConfig, QuadricParams, RunConfig};
use isoasym_cli::pipeline::generate;

const FAMILIES: [&str; 6] = ["quadric", "rotation", "steiner", "kummer", "proj_applicable", "affine_sphere"];
const RATIO: (f64, f64) = (12.0, 20.0);
const REL: f64 = 1e-6;
const ROUND_OFF: f64 = 1e-8;
const TIME_LIMIT: Duration = Duration::from_secs(5);
const KUMMER_POLYS: [[f64; 7]; 3] = [
    [1.0, 0.2, 0.3, 0.1, 0.05, 0.02, 0.01],
    [2.0, -0.3, 0.4, 0.0, 0.1, 0.0, 0.02],
    [1.0, 0.1, 0.5, 0.0, 0.2, 0.0, 0.05],
];

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn in_ratio(r: f64) -> bool {
    r >= RATIO.0 && r <= RATIO.1
}

/// Every equation within `REL` of its term scale.
fn relative_ok(r: &ResidualReport) -> bool {
    r.equations.iter().all(|e| e.sup <= REL * e.scale)
}

/// Coarse (65²) and fine (129²) grids over the example domain of `family`.
fn grids(family: &str) -> (Grid, Grid) {
    let g = RunConfig::example(family).unwrap().grid;
    let length = g.h * (g.nx - 1) as f64;
    let coarse = GridConfig::square(g.x0, 65, length).to_grid().unwrap();
    let fine = GridConfig::square(g.x0, 129, length).to_grid().unwrap();
    (coarse, fine)
}

fn family_config(family: &str) -> FamilyConfig {
    match family {
        "quadric" => FamilyConfig::Quadric(QuadricParams { v: vec![0.0, 0.0, 1.0], w: vec![0.0, 0.0, 0.0, 1.0] }),
        f => RunConfig::example(f).unwrap().family,
    }
}

fn solution(family: &str, grid: &Grid) -> Solution {
    generate(&family_config(family), grid).unwrap()
}

/// Interior sup of `|a − b|` and of `|b|`, skipping `e` nodes at the boundary.
fn interior_diff(a: &Field, b: &Field, e: usize) -> (f64, f64) {
    let g = a.grid();
    let (mut d, mut s) = (0.0f64, 0.0f64);
    for i in e..g.nx - e {
        for j in e..g.ny - e {
            d = d.max((a.at(i, j) - b.at(i, j)).abs());
            s = s.max(b.at(i, j).abs());
        }
    }
    (d, s)
}

fn exclusion(fields: &[&Field]) -> usize {
    fields.iter().fold(DEFAULT_EXCLUSION, |m, f| m.max(f.margin()[0]).max(f.margin()[1]))
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for f in FAMILIES {
        let (gc, gf) = grids(f);
        let coarse = solution(f, &gc).residual().unwrap();
        let t = Instant::now();
        let fine = solution(f, &gf).residual().unwrap();
        let elapsed = t.elapsed();
        let exact = coarse.max_sup() == 0.0 && fine.max_sup() == 0.0;
        let ratio = coarse.refinement_ratio(&fine);
        let pass = relative_ok(&fine) && (exact || in_ratio(ratio)) && elapsed <= TIME_LIMIT;
        ok &= pass;
        if exact {
            notes.push(format!("{f}: exact 0, {elapsed:.1?}"));
        } else {
            notes.push(format!("{f}: rel {:.1e} ratio {ratio:.2} {elapsed:.1?}", fine.max_relative()));
        }
    }
    outcome(ok, notes.join("; "))
}

fn vn_pair(make: impl Fn(&Grid) -> Solution, grids: (Grid, Grid), init: [f64; 4]) -> (ResidualReport, ResidualReport) {
    let run = |g: &Grid| {
        let s = make(g);
        let jet = solve_r0_jet(&s, &init, Mode::XY).unwrap();
        backlund_mvn_to_vn(&s, &jet).unwrap().residual().unwrap()
    };
    (run(&grids.0), run(&grids.1))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let flat = |g: &Grid| gen_quadric(|_| 0.0, |_| 0.0, g).unwrap();
    let (qc, qf) = vn_pair(flat, grids("quadric"), [1.0, 0.0, 0.0, 0.0]);
    let exact = qc.max_sup() == 0.0 && qf.max_sup() == 0.0;
    ok &= exact;
    notes.push(format!("quadric V=W=0, r0=1: sup {:.1e}", qf.max_sup()));
    let cases: [(&str, Box<dyn Fn(&Grid) -> Solution>); 3] = [
        ("quadric V=x², W=y³", Box::new(|g| solution("quadric", g))),
        ("rotation", Box::new(|g| solution("rotation", g))),
        ("affine_sphere", Box::new(|g| solution("affine_sphere", g))),
    ];
    for (name, make) in cases {
        let family = if name.starts_with("quadric") { "quadric" } else { name };
        let init = if family == "quadric" { [1.0, 0.0, 0.0, 0.0] } else { [1.0, 0.1, 0.1, 0.01] };
        let (c, fine) = vn_pair(make, grids(family), init);
        if family == "quadric" {
            // r⁰ = A(x)B(y): every term vanishes identically.
            ok &= fine.max_sup() <= ROUND_OFF;
            notes.push(format!("{name}, r0=A(x)B(y): sup {:.1e}", fine.max_sup()));
            continue;
        }
        let ratio = c.refinement_ratio(&fine);
        ok &= relative_ok(&fine) && in_ratio(ratio);
        notes.push(format!("{name}: rel {:.1e} ratio {ratio:.2}", fine.max_relative()));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_3() -> Outcome {
    let (_, g) = grids("affine_sphere");
    let s = solution("affine_sphere", &g);
    let c = s.params["c"];
    let jets = s.jets.clone().unwrap();
    let (p0, dp0) = (s.p.at(0, 0), jets.qx.at(0, 0));
    let ddp0 = jets.qxx.at(0, 0);
    let r = p0.sqrt();
    let r1 = dp0 / (2.0 * r);
    let r2 = ddp0 / (2.0 * r) - dp0 * dp0 / (4.0 * p0 * r);
    let jet = solve_r0_jet(&s, &[r, r1, r1, r2], Mode::XY).unwrap();
    let vn = backlund_mvn_to_vn(&s, &jet).unwrap();
    let e = exclusion(&[&vn.u, &vn.v, &vn.w]);

    let sqrt_p = s.p.map(f64::sqrt);
    let (dr, sr) = interior_diff(&jet.r, &sqrt_p, e);
    let u_closed = s.p.map(|p| -c / p);
    let v_closed = ScalarField::combine([&s.p, &jets.qx, &jets.qxx], |[p, px, pxx]| {
        -pxx / (3.0 * p) + 2.0 / 3.0 * (px / p).powi(2)
    });
    let w_closed = ScalarField::combine([&s.p, &jets.py, &jets.pyy], |[p, py, pyy]| {
        -pyy / (3.0 * p) + 2.0 / 3.0 * (py / p).powi(2)
    });
    let rel = |(d, s): (f64, f64)| d / s;
    let closed = [
        ("r0", rel((dr, sr))),
        ("u", rel(interior_diff(&vn.u, &u_closed, e))),
        ("v", rel(interior_diff(&vn.v, &v_closed, e))),
        ("w", rel(interior_diff(&vn.w, &w_closed, e))),
    ];

    // Identities on the computed u by stencils.
    let u = &vn.u;
    let ux = differentiate(u, 1, 0).unwrap();
    let uy = differentiate(u, 0, 1).unwrap();
    let uxy = differentiate(u, 1, 1).unwrap();
    let uxx = differentiate(u, 2, 0).unwrap();
    let uyy = differentiate(u, 0, 2).unwrap();
    let lxy = ScalarField::combine([&uxy, &ux, &uy, u], |[a, b, d, u]| a / u - b * d / (u * u));
    let rhs = u.map(|u| u - c * c / (u * u));
    let v_id = ScalarField::combine([&uxx, u], |[a, u]| a / (3.0 * u));
    let w_id = ScalarField::combine([&uyy, u], |[a, u]| a / (3.0 * u));
    let e2 = exclusion(&[&uxy, &uxx, &uyy]).max(e);
    let identities = [
        ("(ln u)_xy", rel(interior_diff(&lxy, &rhs, e2))),
        ("v=u_xx/3u", rel(interior_diff(&vn.v, &v_id, e2))),
        ("w=u_yy/3u", rel(interior_diff(&vn.w, &w_id, e2))),
    ];
    let all: Vec<(&str, f64)> = closed.into_iter().chain(identities).collect();
    let ok = all.iter().all(|(_, r)| *r <= REL);
    let detail = all.iter().map(|(n, r)| format!("{n} {r:.1e}")).collect::<Vec<_>>().join(", ");
    outcome(ok, format!("r0=sqrt(p), relative errors: {detail}"))
}

fn bitwise_eq(a: &Field, b: &Field) -> bool {
    a.grid() == b.grid() && a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut worst_inv = 0.0f64;
    for f in FAMILIES {
        let (_, g) = grids(f);
        let s = solution(f, &g);
        let dd = dual(&dual(&s));
        ok &= bitwise_eq(&dd.p, &s.p) && bitwise_eq(&dd.v, &s.v) && bitwise_eq(&dd.w, &s.w);
        ok &= dd.dualized == s.dualized && dd.jets == s.jets;
        let (a, b) = (s.residual().unwrap(), dual(&s).residual().unwrap());
        for (x, y) in a.equations.iter().zip(&b.equations) {
            let d = (x.sup - y.sup).abs() / x.scale.max(f64::MIN_POSITIVE);
            worst_inv = worst_inv.max(d);
        }
    }
    ok &= worst_inv <= 1e-14;
    let (gc, gf) = grids("steiner");
    let cubic = |g: &Grid| {
        let d = dual(&solution("steiner", g));
        check_cubic_constraints(&d.p, &d.v, &d.w).unwrap()
    };
    let (cc, cf) = (cubic(&gc), cubic(&gf));
    let ratio = cc.refinement_ratio(&cf);
    let cubic_ok = cf.passes(Tolerance::Default) && in_ratio(ratio);
    ok &= cubic_ok;
    outcome(
        ok,
        format!(
            "dual∘dual bitwise identity on 6 families; residual_mvn change under dual {worst_inv:.1e}·scale; \
             cubic constraints on dual Steiner sup {:.1e} ratio {ratio:.2}",
            cf.max_sup()
        ),
    )
}

/// `V ↦ V + ε y`: breaks `V_y = (3/2)(p²)_x` by ε everywhere.
fn perturbed(s: &Solution, eps: f64) -> Solution {
    let mut out = s.clone();
    let dv = ScalarField::sample(s.grid(), |_, y| eps * y).unwrap();
    out.v = &s.v + &dv;
    if let Some(j) = out.jets.as_mut() {
        j.vy = j.vy.shift(eps);
    }
    out
}

fn holonomy(s: &Solution, inset: usize) -> f64 {
    let g = s.grid();
    holonomy_defect(&s.connection().unwrap(), inset, inset, g.nx - 1 - inset, g.ny - 1 - inset).unwrap()
}

fn criterion_5() -> Outcome {
    const EPS: f64 = 1e-3;
    let mut ok = true;
    let mut notes = Vec::new();
    for f in ["rotation", "steiner", "affine_sphere"] {
        let (gc, gf) = grids(f);
        let (sc, sf) = (solution(f, &gc), solution(f, &gf));
        let (cc, cf) = (
            curvature_residual(&sc.connection().unwrap()).unwrap(),
            curvature_residual(&sf.connection().unwrap()).unwrap(),
        );
        let c_ratio = cc.refinement_ratio(&cf);
        let (hc, hf) = (holonomy(&sc, 4), holonomy(&sf, 8));
        let h_ratio = hc / hf;
        let pf = perturbed(&sf, EPS);
        let cp = curvature_residual(&pf.connection().unwrap()).unwrap().max_sup();
        let hp = holonomy(&pf, 8);
        let pass = in_ratio(c_ratio)
            && in_ratio(h_ratio)
            && cf.passes(Tolerance::Default)
            && cp > 10.0 * cf.max_sup()
            && hp > 10.0 * hf;
        ok &= pass;
        notes.push(format!(
            "{f}: curvature {:.1e} (ratio {c_ratio:.2}) → {cp:.1e}, holonomy {hf:.1e} (ratio {h_ratio:.2}) → {hp:.1e}",
            cf.max_sup()
        ));
    }
    outcome(ok, format!("perturbation V += 1e-3·y; {}", notes.join("; ")))
}

struct Reconstruction {
    closure: f64,
    projective_affine: ResidualReport,
    lelieuvre_affine: ResidualReport,
    conormal: ResidualReport,
}

fn reconstruct(s: &Solution) -> Reconstruction {
    let proj = reconstruct_projective(s).unwrap();
    let jet: R0Jet<f64> = proj.r0_jet(s).unwrap();
    let frame: AffineFrame<f64> = proj.frame(s).unwrap();
    let nu0 = conormal_initial_data(&proj.mesh, &jet).unwrap();
    let lel = reconstruct_lelieuvre(&frame, nu0, proj.mesh.point(0, 0)).unwrap();
    Reconstruction {
        closure: lel.closure_defect,
        projective_affine: affine_residuals(&proj.mesh, &frame).unwrap(),
        lelieuvre_affine: affine_residuals(&lel.mesh, &frame).unwrap(),
        conormal: conormal_consistency(&lel.conormal, &jet.r, &proj.mesh).unwrap(),
    }
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();

    let g = make_grid(0.0, 0.0, 129, 129, 1.0 / 128.0).unwrap();
    let flat = gen_quadric(|_| 0.0, |_| 0.0, &g).unwrap();
    let mesh = reconstruct_projective(&flat).unwrap().mesh;
    let saddle: Vec<[f64; 3]> =
        (0..g.nx).flat_map(|i| (0..g.ny).map(move |j| (g.x(i), g.y(j)))).map(|(x, y)| [x, y, x * y]).collect();
    let target = SurfaceMesh::new(&g, saddle, vec![false; g.len()]).unwrap();
    let fit = fit_affine_meshes(&mesh, &target, 0).unwrap();
    ok &= fit.sup <= 1e-6;
    notes.push(format!("z=xy fit {:.1e}", fit.sup));

    let cases: [(&str, Box<dyn Fn(&Grid) -> Solution>); 2] = [
        ("quadric", Box::new(|g| gen_quadric(f64::sin, |y| 0.5 * y * y, g).unwrap())),
        ("affine_sphere", Box::new(|g| solution("affine_sphere", g))),
    ];
    for (name, make) in cases {
        let gc = make_grid(0.0, 0.0, 65, 65, 1.0 / 64.0).unwrap();
        let gf = make_grid(0.0, 0.0, 129, 129, 1.0 / 128.0).unwrap();
        let (c, f) = (reconstruct(&make(&gc)), reconstruct(&make(&gf)));
        let closure = c.closure / f.closure;
        let pa = c.projective_affine.refinement_ratio(&f.projective_affine);
        let la = c.lelieuvre_affine.refinement_ratio(&f.lelieuvre_affine);
        let cn = c.conormal.refinement_ratio(&f.conormal);
        ok &= [closure, pa, la, cn].into_iter().all(in_ratio);
        ok &= f.lelieuvre_affine.passes(Tolerance::Default) && f.projective_affine.passes(Tolerance::Default);
        notes.push(format!(
            "{name}: closure {:.1e} (ratio {closure:.2}), affine projective {:.1e} ({pa:.2}) Lelieuvre {:.1e} ({la:.2}), \
             conormal {:.1e} ({cn:.2}, λ={:.8})",
            f.closure,
            f.projective_affine.max_sup(),
            f.lelieuvre_affine.max_sup(),
            f.conormal.max_sup(),
            f.conormal.extras["scale"]
        ));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_7() -> Outcome {
    // Third-derivative round-off in kummer_p reaches the truncation error at 129².
    let g33 = GridConfig::square(0.0, 33, 1.0).to_grid().unwrap();
    let (gc, gf) = grids("kummer");
    let mut ok = true;
    let mut notes = Vec::new();
    for (k, coeffs) in KUMMER_POLYS.iter().enumerate() {
        let poly = PolyCoeffs::new(coeffs).unwrap();
        let checks = |g: &Grid| {
            let s = gen_kummer(&poly, 0.5, 0.5, g).unwrap();
            [s.residual().unwrap(), check_log_curvature(&s.p, 4.0 / 9.0).unwrap(), check_kummer_p(&s.p).unwrap()]
        };
        let (c, f) = (checks(&g33), checks(&gc));
        let ratios: Vec<f64> = c.iter().zip(&f).map(|(a, b)| a.refinement_ratio(b)).collect();
        let fine = checks(&gf);
        let pass = fine.iter().all(|r| r.passes(Tolerance::Default)) && ratios.iter().all(|r| in_ratio(*r));
        ok &= pass;
        notes.push(format!(
            "P{k}: mvn/log/kummer_p ratios 33→65 {:.2}/{:.2}/{:.2}, sup at 129 {:.1e}/{:.1e}/{:.1e}",
            ratios[0],
            ratios[1],
            ratios[2],
            fine[0].max_sup(),
            fine[1].max_sup(),
            fine[2].max_sup()
        ));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_8(bin: &Path, dir: &Path) -> Outcome {
    let (gc, gf) = grids("proj_applicable");
    let FamilyConfig::ProjApplicable(a) = family_config("proj_applicable") else { unreachable!() };
    let poly = PolyCoeffs::new(&a.poly).unwrap();
    let run = |g: &Grid| gen_proj_applicable(&poly, a.c, a.a0, a.b0, a.f_init, a.f0, a.g0, g).unwrap();
    let (sc, sf) = (run(&gc), run(&gf));
    let keys = ["curvature_residual_kappa_1_over_c", "curvature_residual_kappa_2_over_c"];
    let ratios: Vec<f64> = keys.iter().map(|k| sc.params[*k] / sf.params[*k]).collect();
    let converging: Vec<usize> = (0..2).filter(|&k| in_ratio(ratios[k])).collect();
    let label = ["1/c", "2/c"];
    let chosen = sf.notes.get("kappa").cloned().unwrap_or_default();
    let direct = check_projective_curvature(&sf.p, a.c).unwrap();

    let cfg = dir.join("proj.json");
    std::fs::write(&cfg, RunConfig::example("proj_applicable").unwrap().canonical_json()).unwrap();
    let out = dir.join("proj_out");
    let status = Command::new(bin).args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let reported = report["family"]["notes"]["kappa"].as_str().unwrap_or("").to_string();

    let ok = converging.len() == 1
        && chosen == label[converging[0]]
        && reported == chosen
        && direct.passes(Tolerance::Default)
        && status.status.code() == Some(0);
    outcome(
        ok,
        format!(
            "(ln p²)_xy − c p² residual ratios κ=1/c {:.2}, κ=2/c {:.2}; fine sups {:.1e} / {:.1e}; chosen {chosen}, report states κ = {reported}",
            ratios[0], ratios[1], sf.params[keys[0]], sf.params[keys[1]]
        ),
    )
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_9(bin: &Path, dir: &Path) -> Outcome {
    let mut ok = true;
    let mut files = 0;
    for f in ["rotation", "affine_sphere", "proj_applicable"] {
        let cfg = dir.join(format!("{f}.json"));
        std::fs::write(&cfg, RunConfig::example(f).unwrap().canonical_json()).unwrap();
        let mut trees = Vec::new();
        for k in 0..2 {
            let out = dir.join(format!("{f}_{k}"));
            let st = Command::new(bin)
                .args(["run", "--backlund", "--lelieuvre", "--dual", "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap();
            ok &= st.status.code().is_some();
            trees.push(tree_bytes(&out));
        }
        files += trees[0].len();
        ok &= !trees[0].is_empty() && trees[0] == trees[1];
    }
    outcome(ok, format!("3 configs × 2 runs, {files} files compared byte for byte"))
}

fn main() {
    let bin = Path::new(env!("CARGO_BIN_EXE_isoasym"));
    let tmp = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 family soundness", Box::new(criterion_1)),
        ("2 Bäcklund soundness", Box::new(criterion_2)),
        ("3 Miura closed forms", Box::new(criterion_3)),
        ("4 duality", Box::new(criterion_4)),
        ("5 flatness and holonomy", Box::new(criterion_5)),
        ("6 reconstruction consistency", Box::new(criterion_6)),
        ("7 Kummer uniformization", Box::new(criterion_7)),
        ("8 κ selection", Box::new(|| criterion_8(bin, tmp.path()))),
        ("9 determinism", Box::new(|| criterion_9(bin, tmp.path()))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let o = run();
        if !o.ok {
            failed += 1;
        }
        println!("criterion {name}: {} | {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
