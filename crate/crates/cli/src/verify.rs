//! Residual checks on field dumps.

use std::path::PathBuf;

use clap::ValueEnum;
use isoasym::families::{check_cubic_constraints, check_kummer_p, check_log_curvature, check_roman_system};
use isoasym::fields::io::load_iaf1;
use isoasym::fields::{residual_gc, residual_mvn, residual_vn, ResidualReport};
use isoasym::{Error, Field, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// Files: p v w.
    Mvn,
    /// Files: u v w.
    Vn,
    /// Files: p q v w.
    Gc,
    /// Files: p.
    Roman,
    /// Files: p.
    Kummer,
    /// Files: p v w.
    Cubic,
}

impl Equation {
    pub fn arity(self) -> usize {
        match self {
            Equation::Mvn | Equation::Vn | Equation::Cubic => 3,
            Equation::Gc => 4,
            Equation::Roman | Equation::Kummer => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Equation::Mvn => "mvn",
            Equation::Vn => "vn",
            Equation::Gc => "gc",
            Equation::Roman => "roman",
            Equation::Kummer => "kummer",
            Equation::Cubic => "cubic",
        }
    }

    pub fn evaluate(self, f: &[Field]) -> Result<ResidualReport> {
        if f.len() != self.arity() {
            return Err(Error::InvalidParameter(format!(
                "equation {} takes {} field files, got {}",
                self.name(),
                self.arity(),
                f.len()
            )));
        }
        match self {
            Equation::Mvn => residual_mvn(&f[0], &f[1], &f[2]),
            Equation::Vn => residual_vn(&f[0], &f[1], &f[2]),
            Equation::Gc => residual_gc(&f[0], &f[1], &f[2], &f[3]),
            Equation::Roman => check_roman_system(&f[0]),
            Equation::Kummer => Ok(check_kummer_p(&f[0])?.merge("", check_log_curvature(&f[0], 4.0 / 9.0)?)),
            Equation::Cubic => check_cubic_constraints(&f[0], &f[1], &f[2]),
        }
    }
}

pub fn load_all(paths: &[PathBuf]) -> Result<Vec<Field>> {
    paths
        .iter()
        .map(|p| {
            load_iaf1(p).map_err(|e| match e {
                Error::Format(m) => Error::Format(format!("{}: {m}", p.display())),
                e => e,
            })
        })
        .collect()
}

/// Coarse/fine comparison over the same physical interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub ratio: f64,
    /// `log2(ratio)`.
    pub order: f64,
    pub equations: Vec<(String, f64)>,
}

pub fn convergence(coarse: &ResidualReport, fine: &ResidualReport) -> Result<Convergence> {
    if !(fine.h < coarse.h) {
        return Err(Error::InvalidParameter(format!(
            "--fine fields must have a smaller spacing than the coarse ones ({} vs {})",
            fine.h, coarse.h
        )));
    }
    let ratio = coarse.refinement_ratio(fine);
    // Normalize to a halving of h.
    let order = ratio.ln() / (coarse.h / fine.h).ln();
    Ok(Convergence { ratio, order, equations: coarse.ratios(fine) })
}
