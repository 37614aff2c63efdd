//! Case description read from TOML and its translation to library inputs.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use sbiga_core::curve::NurbsCurve;
use sbiga_core::plate::{manufactured_rhs, point_load_reference, Cos2Square, ExactSolution, LoadSpec, Material, PointLoad, SurfaceLoad};
use sbiga_core::plate::AssemblyMode;
use sbiga_core::sbgeom::{BcTag, Block, BoundaryCurve, DomainSpec};
use sbiga_core::splines::KnotVector;
use sbiga_core::trim::{self, BoundaryTrim, CutLine, Intersection, TrimSpec};
use sbiga_core::Vec2;

use crate::error::HarnessError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub geometry: GeometryConfig,
    pub discretization: DiscretizationConfig,
    pub material: MaterialConfig,
    #[serde(default)]
    pub loads: LoadsConfig,
    /// Builtin exact solution used for error norms.
    #[serde(default)]
    pub exact: Option<String>,
    #[serde(default)]
    pub reference: Option<ReferenceConfig>,
    /// Point whose deflection is reported; the first scaling center if absent.
    #[serde(default)]
    pub probe: Option<[f64; 2]>,
    pub study: StudyConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default)]
    pub blocks: Vec<BlockConfig>,
    #[serde(default)]
    pub trim: Option<TrimConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    pub center: [f64; 2],
    pub curves: Vec<CurveConfig>,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub inner_bc: Option<String>,
    #[serde(default)]
    pub start_bc: Option<String>,
    #[serde(default)]
    pub end_bc: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CurveConfig {
    #[serde(flatten)]
    pub shape: ShapeConfig,
    #[serde(default)]
    pub bc: Option<String>,
    #[serde(default)]
    pub line_load: f64,
    #[serde(default)]
    pub moment: f64,
}

/// Curve geometry; angles in degrees.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeConfig {
    Line { from: [f64; 2], to: [f64; 2] },
    Arc { center: [f64; 2], radius: f64, start: f64, end: f64 },
    Circle { center: [f64; 2], radius: f64, #[serde(default)] start: f64 },
    Nurbs {
        degree: usize,
        knots: Vec<f64>,
        points: Vec<[f64; 2]>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimConfig {
    pub outer: Vec<CurveConfig>,
    #[serde(default)]
    pub trims: Vec<TrimCurveConfig>,
    #[serde(default)]
    pub holes: Vec<Vec<CurveConfig>>,
    #[serde(default)]
    pub cuts: Vec<[[f64; 2]; 2]>,
    pub centers: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrimCurveConfig {
    pub curve: CurveConfig,
    pub intersections: [IntersectionConfig; 2],
    #[serde(default)]
    pub keep_from: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionConfig {
    pub curve: usize,
    pub zeta: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub p: usize,
    #[serde(default = "default_regularity")]
    pub r: isize,
    #[serde(default)]
    pub quad_order: Option<usize>,
    #[serde(default)]
    pub null_tol: Option<f64>,
    #[serde(default)]
    pub assembly: Option<String>,
    #[serde(default)]
    pub stabilize: Option<StabilizeConfig>,
}

fn default_regularity() -> isize {
    1
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizeConfig {
    pub enabled: bool,
    /// Spans per boundary piece of the coarse mesh.
    #[serde(default = "default_coarse")]
    pub coarse: usize,
}

fn default_coarse() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(rename = "E")]
    pub e: f64,
    pub nu: f64,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default, rename = "D")]
    pub d: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsConfig {
    #[serde(default)]
    pub surface: Option<SurfaceConfig>,
    #[serde(default)]
    pub points: Vec<PointConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub at: [f64; 2],
    pub magnitude: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub point_load_series: Option<SeriesConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub force: f64,
    pub length: f64,
    #[serde(default = "default_terms")]
    pub terms: usize,
}

fn default_terms() -> usize {
    4000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub kind: String,
    pub levels: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig { csv: None, field: None, grid: default_grid() }
    }
}

fn default_grid() -> [usize; 2] {
    [11, 11]
}

fn schema(path: impl Into<String>, reason: impl Into<String>) -> HarnessError {
    HarnessError::Schema { path: path.into(), reason: reason.into() }
}

/// Parses a TOML document.
pub fn parse(text: &str) -> Result<CaseConfig, HarnessError> {
    let cfg: CaseConfig = toml::from_str(text).map_err(|e| {
        let path = match e.span() {
            Some(s) => {
                let before = &text[..s.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let col = before.len() - before.rfind('\n').map_or(0, |k| k + 1) + 1;
                format!("line {line}, column {col}")
            }
            None => "document".into(),
        };
        schema(path, e.message().to_string())
    })?;
    Case::validate(&cfg)?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<CaseConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse_bc(tag: &str, path: &str) -> Result<BcTag, HarnessError> {
    match tag {
        "clamped" => Ok(BcTag::Clamped),
        "simply_supported" => Ok(BcTag::SimplySupported),
        "free" => Ok(BcTag::Free),
        other => Err(schema(path, format!("unknown bc tag '{other}'"))),
    }
}

fn v(x: [f64; 2]) -> Vec2 {
    Vec2::new(x[0], x[1])
}

fn curve_of(c: &CurveConfig, p: usize, path: &str) -> Result<BoundaryCurve, HarnessError> {
    let core = |e: sbiga_core::Error| schema(path, e.to_string());
    let curve = match &c.shape {
        ShapeConfig::Line { from, to } => NurbsCurve::line(v(*from), v(*to), p).map_err(core)?,
        ShapeConfig::Arc { center, radius, start, end } => {
            NurbsCurve::arc(v(*center), *radius, start.to_radians(), end.to_radians(), p).map_err(core)?
        }
        ShapeConfig::Circle { center, radius, start } => {
            NurbsCurve::circle(v(*center), *radius, start.to_radians(), p).map_err(core)?
        }
        ShapeConfig::Nurbs { degree, knots, points, weights } => {
            let kv = KnotVector::new(knots.clone(), *degree).map_err(core)?;
            let pts = points.iter().copied().map(v).collect();
            let w = weights.clone().unwrap_or_else(|| vec![1.0; points.len()]);
            let nc = NurbsCurve::new(kv, pts, w).map_err(core)?;
            if *degree > p {
                return Err(schema(path, format!("curve degree {degree} exceeds p = {p}")));
            }
            nc.elevate_to(p).map_err(core)?
        }
    };
    let bc = parse_bc(c.bc.as_deref().unwrap_or("free"), &format!("{path}.bc"))?;
    Ok(BoundaryCurve { curve, bc, line_load: c.line_load, moment: c.moment })
}

fn curves_of(cs: &[CurveConfig], p: usize, path: &str) -> Result<Vec<BoundaryCurve>, HarnessError> {
    cs.iter().enumerate().map(|(k, c)| curve_of(c, p, &format!("{path}[{k}]"))).collect()
}

/// Validated case with library-level inputs.
#[derive(Clone)]
pub struct Case {
    pub name: String,
    pub domain: DomainSpec,
    pub p: usize,
    pub r: isize,
    pub levels: Vec<usize>,
    pub quad_order: Option<usize>,
    pub null_tol: Option<f64>,
    pub assembly: AssemblyMode,
    pub stabilize: Option<StabilizeConfig>,
    pub material: Material,
    pub loads: LoadSpec,
    pub exact: Option<Arc<dyn ExactSolution + Send>>,
    pub reference: Option<f64>,
    pub probe: Vec2,
    pub outputs: OutputsConfig,
}

impl Case {
    fn validate(cfg: &CaseConfig) -> Result<(), HarnessError> {
        let g = &cfg.geometry;
        if g.blocks.is_empty() == g.trim.is_none() {
            return Err(schema("geometry", "give exactly one of 'blocks' or 'trim'"));
        }
        let m = &cfg.material;
        if m.t.is_some() == m.d.is_some() {
            return Err(schema("material", "give exactly one of 't' or 'D'"));
        }
        match cfg.study.kind.as_str() {
            "single" if cfg.study.levels.len() != 1 => {
                return Err(schema("study.levels", "a single study takes exactly one level"))
            }
            "single" | "convergence" => {}
            other => return Err(schema("study.kind", format!("unknown study kind '{other}'"))),
        }
        if cfg.study.levels.is_empty() || cfg.study.levels.contains(&0) {
            return Err(schema("study.levels", "levels must be positive"));
        }
        if let Some(s) = &cfg.loads.surface {
            if s.builtin.is_some() == s.constant.is_some() {
                return Err(schema("loads.surface", "give exactly one of 'builtin' or 'constant'"));
            }
            if let Some(b) = &s.builtin {
                if b != "cos2_square" {
                    return Err(schema("loads.surface.builtin", format!("unknown builtin '{b}'")));
                }
            }
        }
        if let Some(e) = &cfg.exact {
            if e != "cos2_square" {
                return Err(schema("exact", format!("unknown builtin '{e}'")));
            }
        }
        if let Some(r) = &cfg.reference {
            if r.value.is_some() == r.point_load_series.is_some() {
                return Err(schema("reference", "give exactly one of 'value' or 'point_load_series'"));
            }
        }
        if let Some(a) = &cfg.discretization.assembly {
            if a != "uncoupled" && a != "continuous" {
                return Err(schema("discretization.assembly", format!("unknown assembly mode '{a}'")));
            }
        }
        if cfg.outputs.grid.iter().any(|&n| n < 2) {
            return Err(schema("outputs.grid", "at least two samples per direction"));
        }
        Ok(())
    }

    pub fn from_config(cfg: &CaseConfig) -> Result<Case, HarnessError> {
        Case::validate(cfg)?;
        let p = cfg.discretization.p;
        let domain = match &cfg.geometry.trim {
            None => {
                let mut blocks = Vec::new();
                for (k, b) in cfg.geometry.blocks.iter().enumerate() {
                    let path = format!("geometry.blocks[{k}]");
                    let mut block = Block::new(v(b.center), curves_of(&b.curves, p, &format!("{path}.curves"))?);
                    block.c1 = b.c1.unwrap_or(1.0);
                    block.c2 = b.c2.unwrap_or(0.0);
                    for (slot, tag, name) in [
                        (&mut block.inner_bc, &b.inner_bc, "inner_bc"),
                        (&mut block.start_bc, &b.start_bc, "start_bc"),
                        (&mut block.end_bc, &b.end_bc, "end_bc"),
                    ] {
                        if let Some(t) = tag {
                            *slot = parse_bc(t, &format!("{path}.{name}"))?;
                        }
                    }
                    blocks.push(block);
                }
                DomainSpec { blocks }
            }
            Some(t) => {
                let outer = curves_of(&t.outer, p, "geometry.trim.outer")?;
                let mut spec = TrimSpec {
                    centers: t.centers.iter().copied().map(v).collect(),
                    cuts: t.cuts.iter().map(|c| CutLine { a: v(c[0]), b: v(c[1]) }).collect(),
                    ..Default::default()
                };
                for (k, h) in t.holes.iter().enumerate() {
                    spec.holes.push(curves_of(h, p, &format!("geometry.trim.holes[{k}]"))?);
                }
                for (k, tc) in t.trims.iter().enumerate() {
                    let curve = curve_of(&tc.curve, p, &format!("geometry.trim.trims[{k}].curve"))?;
                    let x = tc.intersections.map(|i| Intersection { curve: i.curve, zeta: i.zeta, s: i.s });
                    spec.trims.push(BoundaryTrim { curve, intersections: x, keep_from: tc.keep_from });
                }
                trim::decompose(&outer, &spec)?
            }
        };
        let m = &cfg.material;
        let material = match (m.t, m.d) {
            (Some(t), None) => Material::from_thickness(m.e, m.nu, t)?,
            (None, Some(d)) => Material::from_rigidity(m.e, m.nu, d)?,
            _ => unreachable!("checked by validate"),
        };
        let surface = match &cfg.loads.surface {
            None => SurfaceLoad::None,
            Some(SurfaceConfig { constant: Some(c), .. }) => SurfaceLoad::Constant(*c),
            Some(_) => manufactured_rhs(Arc::new(Cos2Square), material.d()),
        };
        let points = cfg.loads.points.iter().map(|q| PointLoad { at: v(q.at), magnitude: q.magnitude }).collect();
        let exact: Option<Arc<dyn ExactSolution + Send>> = match cfg.exact.as_deref() {
            Some(_) => Some(Arc::new(Cos2Square)),
            None => None,
        };
        let reference = match &cfg.reference {
            None => None,
            Some(ReferenceConfig { value: Some(x), .. }) => Some(*x),
            Some(ReferenceConfig { point_load_series: Some(s), .. }) => {
                Some(point_load_reference(s.force, s.length, material.d(), s.terms)?)
            }
            Some(_) => unreachable!("checked by validate"),
        };
        let probe = match cfg.probe {
            Some(x) => v(x),
            None => domain.blocks.first().map(|b| b.center).unwrap_or(Vec2::ZERO),
        };
        let assembly = match cfg.discretization.assembly.as_deref() {
            Some("continuous") => AssemblyMode::Continuous,
            _ => AssemblyMode::Uncoupled,
        };
        Ok(Case {
            name: cfg.name.clone().unwrap_or_else(|| "case".into()),
            domain,
            p,
            r: cfg.discretization.r,
            levels: cfg.study.levels.clone(),
            quad_order: cfg.discretization.quad_order,
            null_tol: cfg.discretization.null_tol,
            assembly,
            stabilize: cfg.discretization.stabilize.filter(|s| s.enabled),
            material,
            loads: LoadSpec { surface, points },
            exact,
            reference,
            probe,
            outputs: cfg.outputs.clone(),
        })
    }
}
