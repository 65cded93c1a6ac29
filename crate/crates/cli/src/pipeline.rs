//! generate → verify → transforms → reconstruction → export.

use std::fs;
use std::path::{Path, PathBuf};

use isoasym::backlund::{
    backlund_mvn_to_vn, check_isothermal, dual, linear_system_residual, reparametrize, solve_r0_jet, AffineFrame,
    ProjectiveInvariants,
};
use isoasym::connection::{curvature_residual, holonomy_defect, Mode};
use isoasym::families::{
    check_cubic_constraints, check_kummer_p, check_log_curvature, check_projective_curvature, check_roman_system,
    check_tzitzeica, gen_affine_sphere, gen_kummer, gen_proj_applicable, gen_quadric, gen_rotation, gen_steiner,
    Family, PolyCoeffs,
};
use isoasym::fields::io::save_iaf1;
use isoasym::fields::{Tolerance, DEFAULT_EXCLUSION};
use isoasym::surfaces::{
    affine_residuals, affine_sphere_residual, asymptotic_defect, conormal_consistency, conormal_initial_data,
    export_obj, reconstruct_lelieuvre, reconstruct_projective, sample_invariants,
};
use isoasym::{Error, Field, Grid, Mesh, Result, Solution};

use crate::config::{FamilyConfig, PipelineConfig, RunConfig};
use crate::report::{FamilyInfo, Holonomy, RunReport};

/// Where the input solution comes from.
pub enum Source {
    Family { grid: Grid, family: FamilyConfig },
    Fields { p: Field, v: Field, w: Field },
}

pub struct Pipeline<'a> {
    pub source: Source,
    pub stages: PipelineConfig,
    pub tolerance: Tolerance,
    pub out: &'a Path,
}

fn poly(coeffs: &[f64]) -> Result<PolyCoeffs<f64>> {
    PolyCoeffs::new(coeffs)
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub fn generate(family: &FamilyConfig, grid: &Grid) -> Result<Solution> {
    match family {
        FamilyConfig::Quadric(q) => gen_quadric(|x| horner(&q.v, x), |y| horner(&q.w, y), grid),
        FamilyConfig::Rotation(r) => gen_rotation(|s| r.eval(s), r.c, grid),
        FamilyConfig::Steiner(s) => gen_steiner(s.a0, s.a1, s.a2, s.f0, s.g0, grid),
        FamilyConfig::Kummer(k) => gen_kummer(&poly(&k.poly)?, k.f0, k.g0, grid),
        FamilyConfig::ProjApplicable(a) => {
            gen_proj_applicable(&poly(&a.poly)?, a.c, a.a0, a.b0, a.f_init, a.f0, a.g0, grid)
        }
        FamilyConfig::AffineSphere(a) => gen_affine_sphere(a.c, a.p0, a.dp0, grid),
    }
}

/// Holonomy around the rectangle inset by the residual exclusion and the
/// connection's stencil margin, scaled by perimeter times the largest entry.
fn holonomy(name: &str, sol: &Solution, tol: Tolerance) -> Result<Holonomy> {
    let conn = sol.connection()?;
    let g = *sol.grid();
    let m = conn.margin();
    let e = DEFAULT_EXCLUSION.max(m[0]).max(m[1]).min((g.nx.min(g.ny) - 1) / 2 - 1);
    let rect = [e, e, g.nx - 1 - e, g.ny - 1 - e];
    let defect = holonomy_defect(&conn, rect[0], rect[1], rect[2], rect[3])?;
    let mut entry = 0.0f64;
    for r in 0..conn.dim() {
        for c in 0..conn.dim() {
            entry = entry.max(conn.a(r, c).sup_abs()).max(conn.b(r, c).sup_abs());
        }
    }
    let perimeter = 2.0 * (rect[2] - rect[0] + rect[3] - rect[1]) as f64 * g.h;
    let threshold = tol.threshold(g.h, entry * perimeter);
    Ok(Holonomy { name: name.to_string(), rectangle: rect, defect, threshold, passed: defect <= threshold })
}

impl Pipeline<'_> {
    fn save(&self, report: &mut RunReport, rel: &str, field: &Field) -> Result<()> {
        let path = self.out.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        save_iaf1(field, &path)?;
        report.outputs.push(rel.to_string());
        Ok(())
    }

    fn save_mesh(&self, report: &mut RunReport, rel: &str, mesh: &Mesh) -> Result<()> {
        let path: PathBuf = self.out.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        export_obj(mesh, &path)?;
        report.outputs.push(rel.to_string());
        if mesh.scalars.is_some() {
            report.outputs.push(Path::new(rel).with_extension("csv").to_string_lossy().into_owned());
        }
        Ok(())
    }

    fn save_solution(&self, report: &mut RunReport, prefix: &str, sol: &Solution) -> Result<()> {
        self.save(report, &format!("fields/{prefix}p.iaf1"), &sol.p)?;
        self.save(report, &format!("fields/{prefix}v.iaf1"), &sol.v)?;
        self.save(report, &format!("fields/{prefix}w.iaf1"), &sol.w)
    }

    /// Runs every enabled stage, recording checks into `report`. Stops at the
    /// first module error, which the caller records verbatim.
    pub fn execute(&self, report: &mut RunReport) -> Result<()> {
        let tol = self.tolerance;
        fs::create_dir_all(self.out)?;
        let mut sol = match &self.source {
            Source::Family { grid, family } => generate(family, grid)?,
            Source::Fields { p, v, w } => Solution::new(p.clone(), v.clone(), w.clone(), Family::External)?,
        };
        report.family = Some(FamilyInfo {
            name: sol.family.name().to_string(),
            params: sol.params.clone(),
            notes: sol.notes.clone(),
            dualized: sol.dualized,
        });
        self.save_solution(report, "", &sol)?;
        report.check("mvn", sol.residual()?, tol);
        self.family_checks(report, &sol)?;
        report.check("curvature", curvature_residual(&sol.connection()?)?, tol);
        report.holonomy.push(holonomy("wilczynski", &sol, tol)?);

        if self.stages.dual {
            let d = dual(&sol);
            self.save_solution(report, "dual_", &d)?;
            report.check("dual.mvn", d.residual()?, tol);
            if sol.family == Family::Steiner {
                report.check("dual.cubic", check_cubic_constraints(&d.p, &d.v, &d.w)?, tol);
            }
            sol = d;
        }

        if self.stages.backlund {
            let jet = solve_r0_jet(&sol, &self.stages.r0_init, Mode::XY)?;
            report.check("backlund.linear_system", linear_system_residual(&sol, &jet.r)?, tol);
            let vn = backlund_mvn_to_vn(&sol, &jet)?;
            self.save(report, "fields/r0.iaf1", &jet.r)?;
            self.save(report, "fields/vn_u.iaf1", &vn.u)?;
            self.save(report, "fields/vn_v.iaf1", &vn.v)?;
            self.save(report, "fields/vn_w.iaf1", &vn.w)?;
            report.check("vn", vn.residual()?, tol);
        }

        if let Some(rp) = &self.stages.reparam {
            let inv = ProjectiveInvariants::from_mvn(&sol);
            let out = reparametrize(&inv, &rp.f, &rp.g, &rp.target.to_grid()?)?;
            self.save(report, "fields/reparam_p.iaf1", &out.p)?;
            self.save(report, "fields/reparam_q.iaf1", &out.q)?;
            self.save(report, "fields/reparam_v.iaf1", &out.v)?;
            self.save(report, "fields/reparam_w.iaf1", &out.w)?;
            report.check("reparam.gc", out.residual()?, tol);
            if sol.family != Family::Quadric {
                report.check("reparam.isothermal", check_isothermal(&out.p, &out.q)?, tol);
            }
        }

        if self.stages.reconstruct || self.stages.lelieuvre {
            self.reconstruct(report, &sol)?;
        }
        Ok(())
    }

    fn family_checks(&self, report: &mut RunReport, sol: &Solution) -> Result<()> {
        let tol = self.tolerance;
        let param = |k: &str| sol.params.get(k).copied();
        match sol.family {
            Family::Steiner => {
                report.check("roman", check_roman_system(&sol.p)?, tol);
            }
            Family::Kummer => {
                report.check("kummer_p", check_kummer_p(&sol.p)?, tol);
                report.check("log_curvature", check_log_curvature(&sol.p, 4.0 / 9.0)?, tol);
            }
            Family::ProjApplicable => {
                if let Some(c) = param("c") {
                    report.check("projective_curvature", check_projective_curvature(&sol.p, c)?, tol);
                }
            }
            Family::AffineSphere => {
                if let Some(c) = param("c") {
                    report.check("tzitzeica", check_tzitzeica(&sol.p, c)?, tol);
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn reconstruct(&self, report: &mut RunReport, sol: &Solution) -> Result<()> {
        let tol = self.tolerance;
        let surface = reconstruct_projective(sol)?;
        let frame = surface.frame(sol)?;
        let mesh = sample_invariants(sol, &surface.mesh)?;
        self.save_mesh(report, "surface.obj", &mesh)?;
        report.check("reconstruct.frame", frame.consistency()?, tol);
        report.check("reconstruct.affine", affine_residuals(&surface.mesh, &frame)?, tol);
        report.check("reconstruct.asymptotic", asymptotic_defect(&surface.mesh)?, tol);
        if !self.stages.lelieuvre {
            return Ok(());
        }
        let jet = surface.r0_jet(sol)?;
        let nu0 = conormal_initial_data(&surface.mesh, &jet)?;
        let lel = reconstruct_lelieuvre(&frame, nu0, surface.mesh.point(0, 0))?;
        let lmesh = sample_invariants(sol, &lel.mesh)?;
        self.save_mesh(report, "lelieuvre.obj", &lmesh)?;
        let affine = affine_residuals(&lel.mesh, &frame)?.with_extra("closure_defect", lel.closure_defect);
        report.check("lelieuvre.affine", affine, tol);
        report.inform("lelieuvre.conormal", conormal_consistency(&lel.conormal, &jet.r, &surface.mesh)?, tol);
        if sol.family == Family::AffineSphere && !sol.dualized {
            let c = sol
                .params
                .get("c")
                .copied()
                .ok_or_else(|| Error::InvalidParameter("affine sphere without c".into()))?;
            let frame = AffineFrame::blaschke(sol)?;
            let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
            let bl = reconstruct_lelieuvre(&frame, identity, [0.0; 3])?;
            self.save_mesh(report, "blaschke.obj", &sample_invariants(sol, &bl.mesh)?)?;
            let affine = affine_residuals(&bl.mesh, &frame)?.with_extra("closure_defect", bl.closure_defect);
            report.check("blaschke.affine", affine, tol);
            report.check("blaschke.affine_sphere", affine_sphere_residual(&bl.mesh, &sol.p, c)?, tol);
        }
        Ok(())
    }
}

/// The effective pipeline source for a configuration.
pub fn source_of(cfg: &RunConfig) -> Result<Source> {
    Ok(Source::Family { grid: cfg.grid.to_grid()?, family: cfg.family.clone() })
}
