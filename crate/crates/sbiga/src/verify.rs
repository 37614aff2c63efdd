//! Geometric and space checks on a case.

use std::fmt;

use sbiga_core::coupling::{c1_jump_residuals, reproduce_affine, verify_asg1};
use sbiga_core::sbgeom::BcTag;

use crate::config::Case;
use crate::error::HarnessError;
use crate::run::{coupled_space, discretize, RunOptions};

pub const ASG1_TOL: f64 = 1e-12;
pub const C1_JUMP_TOL: f64 = 1e-8;
pub const REPRODUCTION_TOL: f64 = 1e-10;
pub const SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Asg1,
    C1Jump,
    Reproduction,
}

impl Check {
    pub const ALL: [Check; 3] = [Check::Asg1, Check::C1Jump, Check::Reproduction];

    pub fn name(self) -> &'static str {
        match self {
            Check::Asg1 => "asg1",
            Check::C1Jump => "c1-jump",
            Check::Reproduction => "reproduction",
        }
    }
}

/// One line of a check report: an interface for the interface checks, a
/// target function for reproduction.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: Check,
    pub item: String,
    pub residual: f64,
    pub tol: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.residual <= self.tol
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passed()).count()
    }

    pub fn worst(&self, check: Check) -> Option<&CheckRow> {
        self.rows
            .iter()
            .filter(|r| r.check == check)
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<13} {:<24} {:>11} {:>9} result", "check", "item", "residual", "tol")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<13} {:<24} {:>11.3e} {:>9.0e} {}",
                r.check.name(),
                r.item,
                r.residual,
                r.tol,
                if r.passed() { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

fn interface_label(case_domain: &sbiga_core::sbgeom::MultiPatchDomain, k: usize) -> String {
    let itf = &case_domain.interfaces[k];
    format!("interface {k} ({}|{})", itf.left.0, itf.right.0)
}

/// Runs `checks` on the coarsest level of the case.
pub fn verify(case: &Case, checks: &[Check], opts: &RunOptions) -> Result<Report, HarnessError> {
    let level = *case.levels.iter().min().expect("validated levels");
    let mut report = Report::default();
    if checks.contains(&Check::Asg1) {
        let dom = discretize(case, level)?;
        for k in 0..dom.interfaces.len() {
            let residual = verify_asg1(&dom, &dom.interfaces[k], SAMPLES)?;
            report.rows.push(CheckRow { check: Check::Asg1, item: interface_label(&dom, k), residual, tol: ASG1_TOL });
        }
    }
    if checks.contains(&Check::C1Jump) {
        let cs = coupled_space(case, level, opts)?;
        for r in c1_jump_residuals(&cs, SAMPLES)? {
            report.rows.push(CheckRow {
                check: Check::C1Jump,
                item: interface_label(&cs.domain, r.interface),
                residual: r.max_relative,
                tol: C1_JUMP_TOL,
            });
        }
    }
    if checks.contains(&Check::Reproduction) {
        let mut free = case.clone();
        free.domain = free_spec(&case.domain);
        let cs = coupled_space(&free, level, opts)?;
        for (name, (a, b, c)) in [("1", (1.0, 0.0, 0.0)), ("x", (0.0, 1.0, 0.0)), ("y", (0.0, 0.0, 1.0))] {
            let (_, residual) = reproduce_affine(&cs, a, b, c)?;
            report.rows.push(CheckRow { check: Check::Reproduction, item: name.into(), residual, tol: REPRODUCTION_TOL });
        }
    }
    Ok(report)
}

/// The block description with every condition set to free.
pub fn free_spec(spec: &sbiga_core::sbgeom::DomainSpec) -> sbiga_core::sbgeom::DomainSpec {
    let mut s = spec.clone();
    for b in s.blocks.iter_mut() {
        b.inner_bc = BcTag::Free;
        b.start_bc = BcTag::Free;
        b.end_bc = BcTag::Free;
        for c in b.curves.iter_mut() {
            c.bc = BcTag::Free;
        }
    }
    s
}
