//! Case execution and convergence studies.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use sbiga_core::coupling::{build_coupled_space, CoupledSpace, CouplingOptions, DEFAULT_NULL_TOL};
use sbiga_core::plate::{build_system, error_norms, solve, AssemblyOptions, Field, Solution};
use sbiga_core::sbgeom::MultiPatchDomain;
use sbiga_core::stabilize::{build_combined_space, CombinedSpaceSpec};

use crate::config::Case;
use crate::error::HarnessError;

/// One refinement level of a study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub h: f64,
    pub p: usize,
    pub r: isize,
    pub n: usize,
    pub n4: usize,
    pub n6: usize,
    pub h2_semi: Option<f64>,
    pub l2: Option<f64>,
    pub center_deflection: Option<f64>,
    pub u_over_uref: Option<f64>,
    pub cond_est: f64,
    pub wall_time_s: f64,
}

/// Command-line overrides of the case settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub quad_order: Option<usize>,
    pub null_tol: Option<f64>,
    /// Writes zero wall times so that repeated runs give identical tables.
    pub no_timing: bool,
}

/// Solved case at one level.
pub struct Solved {
    pub space: CoupledSpace,
    pub solution: Solution,
}

impl Solved {
    pub fn field(&self) -> Field<'_> {
        Field::from_coupled(&self.space, &self.solution.coeffs)
    }
}

fn coupling_options(case: &Case, opts: &RunOptions) -> CouplingOptions {
    CouplingOptions {
        null_tol: opts.null_tol.or(case.null_tol).unwrap_or(DEFAULT_NULL_TOL),
        quad_points: opts.quad_order.or(case.quad_order),
    }
}

pub fn assembly_options(case: &Case, opts: &RunOptions) -> AssemblyOptions {
    AssemblyOptions { quad_points: opts.quad_order.or(case.quad_order), mode: case.assembly }
}

/// Discretized domain at `level` spans per boundary piece.
pub fn discretize(case: &Case, level: usize) -> Result<MultiPatchDomain, HarnessError> {
    Ok(case.domain.discretize(case.p, case.r, level)?)
}

/// Coupled space at `level`, with the two-mesh basis when stabilization is on.
pub fn coupled_space(case: &Case, level: usize, opts: &RunOptions) -> Result<CoupledSpace, HarnessError> {
    let copts = coupling_options(case, opts);
    Ok(match case.stabilize {
        Some(st) => {
            let spec = CombinedSpaceSpec { p: case.p, r: case.r, fine: level, coarse_zeta: st.coarse };
            let (fine, coarse) = spec.discretize(&case.domain)?;
            build_combined_space(&fine, &coarse, &copts)?
        }
        None => build_coupled_space(&discretize(case, level)?, &copts)?,
    })
}

pub fn solve_level(case: &Case, level: usize, opts: &RunOptions) -> Result<Solved, HarnessError> {
    let space = coupled_space(case, level, opts)?;
    let sys = build_system(&space, &case.material, &case.loads, &assembly_options(case, opts))?;
    let solution = solve(&sys)?;
    Ok(Solved { space, solution })
}

pub fn run_level(case: &Case, level: usize, opts: &RunOptions) -> Result<ResultRow, HarnessError> {
    let start = Instant::now();
    let solved = solve_level(case, level, opts)?;
    let field = solved.field();
    let (h2_semi, l2) = match &case.exact {
        Some(exact) => {
            let e = error_norms(&field, exact.as_ref(), &assembly_options(case, opts))?;
            (Some(e.h2_semi), Some(e.l2))
        }
        None => (None, None),
    };
    let u = field.value_at(case.probe)?;
    let cs = &solved.space;
    let wall = start.elapsed().as_secs_f64();
    Ok(ResultRow {
        h: 1.0 / level as f64,
        p: case.p,
        r: case.r,
        n: cs.n(),
        n4: cs.n4(),
        n6: cs.n6(),
        h2_semi,
        l2,
        center_deflection: Some(u),
        u_over_uref: case.reference.map(|r| u / r),
        cond_est: solved.solution.cond_estimate,
        wall_time_s: if opts.no_timing { 0.0 } else { wall },
    })
}

/// Rows for every level of the study, in order.
pub fn run_study(case: &Case, opts: &RunOptions) -> Result<Vec<ResultRow>, HarnessError> {
    case.levels.iter().map(|&s| run_level(case, s, opts)).collect()
}

/// Observed orders `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` of a column.
pub fn observed_orders(rows: &[ResultRow], err: impl Fn(&ResultRow) -> Option<f64>) -> Vec<Option<f64>> {
    rows.windows(2)
        .map(|w| match (err(&w[0]), err(&w[1])) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).ln() / (w[0].h / w[1].h).ln()),
            _ => None,
        })
        .collect()
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    let io = |e: csv::Error| HarnessError::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    #[derive(serde::Deserialize)]
    struct Row {
        h: f64,
        p: usize,
        r: isize,
        n: usize,
        n4: usize,
        n6: usize,
        h2_semi: Option<f64>,
        l2: Option<f64>,
        center_deflection: Option<f64>,
        u_over_uref: Option<f64>,
        cond_est: f64,
        wall_time_s: f64,
    }
    let io = |e: csv::Error| HarnessError::Io(format!("cannot read {}: {e}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(io)?;
    rd.deserialize::<Row>()
        .map(|r| {
            let r = r.map_err(io)?;
            Ok(ResultRow {
                h: r.h,
                p: r.p,
                r: r.r,
                n: r.n,
                n4: r.n4,
                n6: r.n6,
                h2_semi: r.h2_semi,
                l2: r.l2,
                center_deflection: r.center_deflection,
                u_over_uref: r.u_over_uref,
                cond_est: r.cond_est,
                wall_time_s: r.wall_time_s,
            })
        })
        .collect()
}

/// Plain-text table of the rows with observed orders.
pub fn format_table(rows: &[ResultRow]) -> String {
    let h2o = observed_orders(rows, |r| r.h2_semi);
    let l2o = observed_orders(rows, |r| r.l2);
    let opt = |x: Option<f64>, prec: usize| x.map_or("-".to_string(), |v| format!("{v:.prec$e}"));
    let ord = |x: Option<&Option<f64>>| x.copied().flatten().map_or("-".to_string(), |v| format!("{v:.2}"));
    let mut out = format!(
        "{:>8} {:>7} {:>7} {:>11} {:>6} {:>11} {:>6} {:>12} {:>10} {:>9} {:>8}\n",
        "1/h", "N", "N6", "H2", "ord", "L2", "ord", "u(probe)", "u/uref", "cond", "time"
    );
    for (k, r) in rows.iter().enumerate() {
        let prev = k.checked_sub(1);
        out += &format!(
            "{:>8.0} {:>7} {:>7} {:>11} {:>6} {:>11} {:>6} {:>12} {:>10} {:>9.2e} {:>8.2}\n",
            1.0 / r.h,
            r.n,
            r.n6,
            opt(r.h2_semi, 4),
            ord(prev.and_then(|p| h2o.get(p))),
            opt(r.l2, 4),
            ord(prev.and_then(|p| l2o.get(p))),
            opt(r.center_deflection, 6),
            r.u_over_uref.map_or("-".to_string(), |v| format!("{v:.6}")),
            r.cond_est,
            r.wall_time_s
        );
    }
    out
}
