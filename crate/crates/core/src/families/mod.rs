//! Exact solution families of the stationary mVN system and checkers for the
//! extra constraints that single each family out.

mod checks;
mod flow;
mod generators;

use std::collections::BTreeMap;
use std::fmt;

use crate::connection::{wilczynski_connection_with, CoefficientJets, ConnectionPair};
use crate::error::Result;
use crate::fields::{residual_mvn, ResidualReport, ScalarField};
use crate::real::Real;

pub(crate) use checks::ensure_nonvanishing;
pub use checks::{
    check_cubic_constraints, check_kummer_p, check_log_curvature, check_projective_curvature, check_roman_system,
    check_tzitzeica, LogDerivatives,
};
pub use flow::{solve_cube_root_flow, CubeRootFlow, PolyCoeffs};
pub use generators::{
    affine_sphere_profile, gen_affine_sphere, gen_kummer, gen_proj_applicable, gen_quadric, gen_rotation, gen_steiner,
    quadric_from_fields, rotation_kind, TravellingWave, KAPPA_KUMMER,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Quadric,
    Rotation,
    Steiner,
    Kummer,
    ProjApplicable,
    AffineSphere,
    /// Fields supplied from outside (files, transforms).
    External,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Quadric => "quadric",
            Family::Rotation => "rotation",
            Family::Steiner => "steiner",
            Family::Kummer => "kummer",
            Family::ProjApplicable => "proj_applicable",
            Family::AffineSphere => "affine_sphere",
            Family::External => "external",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A solution `(p, V, W)` of the stationary mVN system (`q = p`), tagged
/// with the family that produced it.
///
/// `v` and `w` are the projective connections along the `x`- and
/// `y`-asymptotic curves.
#[derive(Clone, Debug, PartialEq)]
pub struct MvnSolution<T> {
    pub p: ScalarField<T>,
    pub v: ScalarField<T>,
    pub w: ScalarField<T>,
    pub family: Family,
    /// Numeric parameters and diagnostics (flow tolerances, selected κ, ...).
    pub params: BTreeMap<String, f64>,
    /// Free-form tags such as the geometric type or the singular locus.
    pub notes: BTreeMap<String, String>,
    /// Whether the solution is the projective dual of the generated one.
    pub dualized: bool,
    /// Closed-form coefficient derivatives, when the generator knows them.
    pub jets: Option<CoefficientJets<T>>,
}

impl<T: Real> MvnSolution<T> {
    pub fn new(p: ScalarField<T>, v: ScalarField<T>, w: ScalarField<T>, family: Family) -> Result<Self> {
        crate::fields::check_same_grid(&[&p, &v, &w])?;
        p.ensure_finite()?;
        v.ensure_finite()?;
        w.ensure_finite()?;
        Ok(Self { p, v, w, family, params: BTreeMap::new(), notes: BTreeMap::new(), dualized: false, jets: None })
    }

    pub fn grid(&self) -> &crate::fields::GridSpec<T> {
        self.p.grid()
    }

    pub fn residual(&self) -> Result<ResidualReport> {
        residual_mvn(&self.p, &self.v, &self.w)
    }

    /// Coefficient derivatives: the attached ones, otherwise by stencils.
    pub fn coefficient_jets(&self) -> Result<CoefficientJets<T>> {
        match &self.jets {
            Some(j) => Ok(j.clone()),
            None => CoefficientJets::by_stencils(&self.p, &self.p, &self.v, &self.w),
        }
    }

    /// The Wilczynski connection of `(p, p, V, W)`.
    pub fn connection(&self) -> Result<ConnectionPair<T>> {
        wilczynski_connection_with(&self.p, &self.p, &self.v, &self.w, &self.coefficient_jets()?)
    }

    pub(crate) fn with_jets(mut self, jets: CoefficientJets<T>) -> Result<Self> {
        crate::fields::check_same_grid(&[&self.p, &jets.py, &jets.pyy, &jets.qx, &jets.qxx, &jets.vy, &jets.wx])?;
        self.jets = Some(jets);
        Ok(self)
    }

    pub(crate) fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub(crate) fn with_note(mut self, key: &str, value: impl Into<String>) -> Self {
        self.notes.insert(key.to_string(), value.into());
        self
    }
}
