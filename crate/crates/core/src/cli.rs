//! Configuration-driven driver.
//!
//! Run configs are TOML files with named sections (`[potential]`, `[domain]`,
//! `[velocity]`, `[moments]`, `[boundary]`, `[run]`). A run executes one of
//! the solve modes and writes, into its output directory:
//!
//! - `field.csv` — columns `x,v,f`, one row per space/velocity node;
//! - `moments.csv` — columns `x,J1,J3,...`, odd moments of each slice;
//! - `diagnostics.json` — residuals, operator-bound reports, condition
//!   numbers;
//! - `manifest.json` — full config echo plus package version;
//! - `compare.json` / `oracle_field.csv` in compare mode.
//!
//! Numbers are written with the shortest round-trip decimal representation,
//! so identical configs produce byte-identical CSV files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bvp::{solve_bvp, BoundaryData, FieldResiduals, SolutionField, SolveMode};
use crate::error::{Result, WignerError};
use crate::grid::{GridFunction, Side, SpaceGrid, VelocityGrid};
use crate::kernel::KernelTable;
use crate::odd_moments::MomentVector;
use crate::oracle::{compare_fields, solve_direct, CompareReport};
use crate::potential::PotentialSpec;
use crate::wigner_op::{operator_bound_check, BoundReport};

/// Environment variable that, when set, is prepended to every relative
/// output directory.
pub const OUTPUT_ROOT_ENV: &str = "WIGNER_OUTPUT_ROOT";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// `zero`, `gaussian`, or `tabulated`.
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width_a: Option<f64>,
    /// Two-column CSV `x,V` (comment lines start with `#`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Device length; the domain is `[-l/2, l/2]`.
    pub l: f64,
    /// Number of space steps (`M`), giving `M + 1` nodes.
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityConfig {
    /// Nodes per half-axis (`K`); the grid has `2K` offset nodes.
    pub half_count: usize,
    pub dv: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    /// Number of odd moments (`N`): `J_1, J_3, ..., J_{2N-1}`.
    pub order: usize,
}

fn default_moments() -> MomentsConfig {
    MomentsConfig { order: 8 }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    /// One of the names listed by `boundary_presets()`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Full-grid CSV (`v,value`); the `v > 0` half is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_l_file: Option<PathBuf>,
    /// Full-grid CSV (`v,value`); the `v < 0` half is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_r_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    General,
    SymmetricShortcut,
    Oracle,
    Compare,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: RunMode,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Override for the flagged general-mode inflow residual.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inflow_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub domain: DomainConfig,
    pub velocity: VelocityConfig,
    #[serde(default = "default_moments")]
    pub moments: MomentsConfig,
    pub boundary: BoundaryConfig,
    pub run: RunSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceConfig>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match self.potential.family.as_str() {
            "zero" => {}
            "gaussian" => {
                let a = self.potential.amplitude.ok_or_else(|| {
                    WignerError::validation("potential.amplitude", "required for family = gaussian")
                })?;
                let w = self.potential.width_a.ok_or_else(|| {
                    WignerError::validation("potential.width_a", "required for family = gaussian")
                })?;
                if !a.is_finite() {
                    return Err(WignerError::validation("potential.amplitude", "must be finite"));
                }
                if !(w > 0.0) {
                    return Err(WignerError::validation("potential.width_a", "must be positive"));
                }
            }
            "tabulated" => {
                let path = self.potential.table_file.as_ref().ok_or_else(|| {
                    WignerError::validation("potential.table_file", "required for family = tabulated")
                })?;
                if !path.exists() {
                    return Err(WignerError::validation(
                        "potential.table_file",
                        format!("file not found: {}", path.display()),
                    ));
                }
            }
            other => {
                return Err(WignerError::validation(
                    "potential.family",
                    format!("unknown family `{other}` (zero | gaussian | tabulated)"),
                ))
            }
        }
        if !(self.domain.l > 0.0) {
            return Err(WignerError::validation("domain.l", "must be positive"));
        }
        if self.domain.steps == 0 {
            return Err(WignerError::validation("domain.steps", "must be positive"));
        }
        if self.velocity.half_count == 0 {
            return Err(WignerError::validation("velocity.half_count", "must be positive"));
        }
        if !(self.velocity.dv > 0.0) {
            return Err(WignerError::validation("velocity.dv", "must be positive"));
        }
        if self.moments.order == 0 {
            return Err(WignerError::validation("moments.order", "must be positive"));
        }
        match (&self.boundary.preset, &self.boundary.f_l_file, &self.boundary.f_r_file) {
            (Some(name), None, None) => {
                if !boundary_presets().iter().any(|(n, _)| n == name) {
                    return Err(WignerError::validation(
                        "boundary.preset",
                        format!("unknown preset `{name}`"),
                    ));
                }
            }
            (None, Some(l), Some(r)) => {
                for (field, path) in [("boundary.f_l_file", l), ("boundary.f_r_file", r)] {
                    if !path.exists() {
                        return Err(WignerError::validation(
                            field,
                            format!("file not found: {}", path.display()),
                        ));
                    }
                }
            }
            _ => {
                return Err(WignerError::validation(
                    "boundary",
                    "give either `preset` or both `f_l_file` and `f_r_file`",
                ))
            }
        }
        if let Some(tol) = &self.tolerances {
            if let Some(t) = tol.inflow_residual {
                if !(t > 0.0) {
                    return Err(WignerError::validation(
                        "tolerances.inflow_residual",
                        "must be positive",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn velocity_grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.velocity.half_count, self.velocity.dv)
    }

    pub fn space_grid(&self) -> Result<SpaceGrid> {
        SpaceGrid::new(self.domain.l, self.domain.steps)
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        match self.potential.family.as_str() {
            "zero" => Ok(PotentialSpec::zero()),
            "gaussian" => PotentialSpec::gaussian(
                self.potential.amplitude.unwrap_or(f64::NAN),
                self.potential.width_a.unwrap_or(f64::NAN),
            ),
            "tabulated" => {
                let path = self.potential.table_file.as_ref().ok_or_else(|| {
                    WignerError::validation("potential.table_file", "required for family = tabulated")
                })?;
                PotentialSpec::tabulated(load_potential_table(path)?)
            }
            other => Err(WignerError::validation(
                "potential.family",
                format!("unknown family `{other}`"),
            )),
        }
    }

    pub fn boundary_data(&self) -> Result<BoundaryData> {
        let vgrid = self.velocity_grid()?;
        if let Some(name) = &self.boundary.preset {
            return boundary_preset(name, vgrid);
        }
        let (l, r) = match (&self.boundary.f_l_file, &self.boundary.f_r_file) {
            (Some(l), Some(r)) => (l, r),
            _ => {
                return Err(WignerError::validation(
                    "boundary",
                    "give either `preset` or both `f_l_file` and `f_r_file`",
                ))
            }
        };
        let f_l = GridFunction::read_csv(vgrid, l)?.inflow_restrict(Side::Plus);
        let f_r = GridFunction::read_csv(vgrid, r)?.inflow_restrict(Side::Minus);
        BoundaryData::new(vgrid, f_l, f_r)
    }

    /// Output directory, honoring the `WIGNER_OUTPUT_ROOT` override for
    /// relative paths.
    pub fn resolved_output_dir(&self) -> PathBuf {
        let dir = &self.run.output_dir;
        if dir.is_relative() {
            if let Ok(root) = std::env::var(OUTPUT_ROOT_ENV) {
                return Path::new(&root).join(dir);
            }
        }
        dir.clone()
    }
}

/// Parse a TOML config file. Relative file references are resolved against
/// the config file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut config: RunConfig = toml::from_str(&text)
        .map_err(|e| WignerError::validation("config", e.message().to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let anchor = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&p);
        }
    };
    if let Some(p) = config.potential.table_file.as_mut() {
        anchor(p);
    }
    if let Some(p) = config.boundary.f_l_file.as_mut() {
        anchor(p);
    }
    if let Some(p) = config.boundary.f_r_file.as_mut() {
        anchor(p);
    }
    config.validate()?;
    Ok(config)
}

/// Read a two-column `x,V` CSV; `#` starts a comment line.
pub fn load_potential_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| {
                WignerError::validation(
                    "potential.table_file",
                    format!("line {}: expected two numbers", lineno + 1),
                )
            })
        };
        let x = parse(parts.next())?;
        let v = parse(parts.next())?;
        samples.push((x, v));
    }
    Ok(samples)
}

/// Named full run configurations.
pub fn run_presets() -> Vec<(&'static str, &'static str)> {
    vec![
        ("free-stream", "zero potential, one-sided Maxwellian inflow"),
        (
            "gaussian-barrier",
            "unit gaussian barrier, one-sided Maxwellian inflow, reference resolution",
        ),
    ]
}

/// Named inflow profiles.
pub fn boundary_presets() -> Vec<(&'static str, &'static str)> {
    vec![
        ("maxwellian-left", "f_L(v) = exp(-v^2/2), f_R = 0"),
        ("zero", "no inflow from either contact"),
    ]
}

pub fn boundary_preset(name: &str, vgrid: VelocityGrid) -> Result<BoundaryData> {
    match name {
        "maxwellian-left" => BoundaryData::from_fns(vgrid, |v| (-0.5 * v * v).exp(), |_| 0.0),
        "zero" => BoundaryData::from_fns(vgrid, |_| 0.0, |_| 0.0),
        other => Err(WignerError::validation(
            "boundary.preset",
            format!("unknown preset `{other}`"),
        )),
    }
}

pub fn preset_config(name: &str, output_dir: impl Into<PathBuf>) -> Result<RunConfig> {
    let (potential, domain, velocity) = match name {
        "free-stream" => (
            PotentialConfig {
                family: "zero".into(),
                amplitude: None,
                width_a: None,
                table_file: None,
            },
            DomainConfig { l: 8.0, steps: 80 },
            VelocityConfig {
                half_count: 32,
                dv: 0.25,
            },
        ),
        "gaussian-barrier" => (
            PotentialConfig {
                family: "gaussian".into(),
                amplitude: Some(1.0),
                width_a: Some(1.0),
                table_file: None,
            },
            DomainConfig {
                l: 10.0,
                steps: 200,
            },
            VelocityConfig {
                half_count: 64,
                dv: 0.15,
            },
        ),
        other => {
            return Err(WignerError::validation(
                "preset",
                format!("unknown preset `{other}`"),
            ))
        }
    };
    Ok(RunConfig {
        potential,
        domain,
        velocity,
        moments: default_moments(),
        boundary: BoundaryConfig {
            preset: Some("maxwellian-left".into()),
            f_l_file: None,
            f_r_file: None,
        },
        run: RunSection {
            mode: RunMode::General,
            seed: 7,
            output_dir: output_dir.into(),
        },
        tolerances: None,
    })
}

/// Everything a run writes, plus the in-memory field for callers that want
/// to inspect it.
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    pub field: SolutionField,
    pub compare: Option<CompareReport>,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    mode: SolveMode,
    residuals: &'a FieldResiduals,
    assembly_condition: Option<f64>,
    /// Relative kernel mass outside the velocity window, at the domain
    /// center.
    velocity_truncation_residual: f64,
    operator_bounds: Vec<BoundReport>,
    flags: &'a [String],
}

#[derive(Serialize)]
struct Manifest<'a> {
    package: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

/// Execute a validated config and write all artifacts.
pub fn run(config: &RunConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let spec = config.potential_spec()?;
    let vgrid = config.velocity_grid()?;
    let sgrid = config.space_grid()?;
    let bd = config.boundary_data()?;
    let table = KernelTable::for_marching(&spec, vgrid, &sgrid, 3)?;

    let (field, compare) = match config.run.mode {
        RunMode::General => (
            solve_bvp(&table, &sgrid, &bd, SolveMode::General, &spec)?,
            None,
        ),
        RunMode::SymmetricShortcut => (
            solve_bvp(&table, &sgrid, &bd, SolveMode::SymmetricShortcut, &spec)?,
            None,
        ),
        RunMode::Oracle => (solve_direct(&table, &sgrid, &bd)?, None),
        RunMode::Compare => {
            let pipeline = solve_bvp(&table, &sgrid, &bd, SolveMode::General, &spec)?;
            let direct = solve_direct(&table, &sgrid, &bd)?;
            let report = compare_fields(&pipeline, &direct, sgrid.dx())?;
            (pipeline, Some((direct, report)))
        }
    };

    let out = config.resolved_output_dir();
    std::fs::create_dir_all(&out)?;
    let mut outputs = Vec::new();

    write_field_csv(&out.join("field.csv"), &sgrid, &field)?;
    outputs.push("field.csv".into());
    write_moments_csv(&out.join("moments.csv"), &sgrid, &field, config.moments.order)?;
    outputs.push("moments.csv".into());

    // operator-bound report at five stations across the device
    let m = sgrid.steps();
    let mut bounds = Vec::new();
    for q in 0..5usize {
        let i = (q * m) / 4;
        bounds.push(operator_bound_check(
            &table,
            KernelTable::base_index(i),
            100,
            config.run.seed,
        )?);
    }
    let mid = KernelTable::base_index(m / 2);
    let diagnostics = Diagnostics {
        mode: field.provenance.mode,
        residuals: &field.provenance.residuals,
        assembly_condition: field.provenance.assembly_condition,
        velocity_truncation_residual: table.truncation_residual(&spec, mid)?,
        operator_bounds: bounds,
        flags: &field.provenance.flags,
    };
    write_json(&out.join("diagnostics.json"), &diagnostics)?;
    outputs.push("diagnostics.json".into());

    let compare = if let Some((direct, report)) = compare {
        write_field_csv(&out.join("oracle_field.csv"), &sgrid, &direct)?;
        outputs.push("oracle_field.csv".into());
        write_json(&out.join("compare.json"), &report)?;
        outputs.push("compare.json".into());
        Some(report)
    } else {
        None
    };

    outputs.push("manifest.json".into());
    let manifest = Manifest {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        outputs,
    };
    write_json(&out.join("manifest.json"), &manifest)?;

    Ok(RunArtifacts {
        output_dir: out,
        field,
        compare,
    })
}

fn write_field_csv(path: &Path, sgrid: &SpaceGrid, field: &SolutionField) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x,v,f")?;
    for (i, slice) in field.slices.iter().enumerate() {
        let x = sgrid.node(i);
        for (j, v) in slice.grid().nodes().enumerate() {
            writeln!(out, "{x},{v},{}", slice.values()[j])?;
        }
    }
    Ok(())
}

fn write_moments_csv(
    path: &Path,
    sgrid: &SpaceGrid,
    field: &SolutionField,
    order: usize,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (0..order).map(|m| format!("J{}", 2 * m + 1)).collect();
    writeln!(out, "x,{}", header.join(","))?;
    for (i, slice) in field.slices.iter().enumerate() {
        let mv = MomentVector::of(slice, order, sgrid.node(i));
        let row: Vec<String> = mv.values.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{},{}", mv.x, row.join(","))?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| WignerError::Numerical {
        message: format!("serialization failed: {e}"),
        estimate: f64::NAN,
    })?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// One resolution level of a refinement study.
#[derive(Debug, Clone, Serialize)]
pub struct RefineLevel {
    pub steps: usize,
    pub half_count: usize,
    pub dv: f64,
}

/// Pairwise coarse-vs-fine field distances and the implied convergence
/// orders for the parity pipeline and the direct oracle.
#[derive(Debug, Clone, Serialize)]
pub struct RefineReport {
    pub levels: Vec<RefineLevel>,
    /// `||coarse - restrict(fine)|| / ||coarse||` per adjacent pair.
    pub pipeline_diffs: Vec<f64>,
    pub oracle_diffs: Vec<f64>,
    /// `log2(d_k / d_{k+1})`; `None` when a difference is at round-off.
    pub pipeline_orders: Vec<Option<f64>>,
    pub oracle_orders: Vec<Option<f64>>,
}

/// Rerun the config with `(dx, dv)` halved per level and report pairwise
/// field differences and empirical convergence orders.
pub fn refine_study(config: &RunConfig, levels: usize) -> Result<RefineReport> {
    config.validate()?;
    if levels < 2 {
        return Err(WignerError::validation("levels", "need at least 2 levels"));
    }
    let spec = config.potential_spec()?;

    let mut level_meta = Vec::new();
    let mut pipeline_fields: Vec<(SpaceGrid, SolutionField)> = Vec::new();
    let mut oracle_fields: Vec<(SpaceGrid, SolutionField)> = Vec::new();
    for level in 0..levels {
        let scale = 1usize << level;
        let steps = config.domain.steps * scale;
        let half_count = config.velocity.half_count * scale;
        let dv = config.velocity.dv / scale as f64;
        level_meta.push(RefineLevel {
            steps,
            half_count,
            dv,
        });
        let vgrid = VelocityGrid::new(half_count, dv)?;
        let sgrid = SpaceGrid::new(config.domain.l, steps)?;
        let bd = match &config.boundary.preset {
            Some(name) => boundary_preset(name, vgrid)?,
            // file-based inflow is tied to one velocity grid and cannot be
            // resampled at finer dv
            None => {
                return Err(WignerError::validation(
                    "boundary",
                    "refinement studies require a boundary preset",
                ))
            }
        };
        let table = KernelTable::for_marching(&spec, vgrid, &sgrid, 3)?;
        pipeline_fields.push((
            sgrid.clone(),
            solve_bvp(&table, &sgrid, &bd, SolveMode::General, &spec)?,
        ));
        oracle_fields.push((sgrid.clone(), solve_direct(&table, &sgrid, &bd)?));
    }

    let diffs = |fields: &[(SpaceGrid, SolutionField)]| -> Vec<f64> {
        (0..levels - 1)
            .map(|k| coarse_fine_distance(&fields[k].0, &fields[k].1, &fields[k + 1].1))
            .collect()
    };
    let orders = |d: &[f64]| -> Vec<Option<f64>> {
        d.windows(2)
            .map(|w| {
                if w[0] <= 1e-13 || w[1] <= 1e-13 {
                    None
                } else {
                    Some((w[0] / w[1]).log2())
                }
            })
            .collect()
    };
    let pipeline_diffs = diffs(&pipeline_fields);
    let oracle_diffs = diffs(&oracle_fields);
    let report = RefineReport {
        levels: level_meta,
        pipeline_orders: orders(&pipeline_diffs),
        oracle_orders: orders(&oracle_diffs),
        pipeline_diffs,
        oracle_diffs,
    };

    let out = config.resolved_output_dir();
    std::fs::create_dir_all(&out)?;
    write_json(&out.join("refine.json"), &report)?;
    Ok(report)
}

/// Relative distance between a coarse field and a twice-refined one,
/// restricting the fine field to the coarse nodes (exact in `x`, linear
/// interpolation in `v` since offset grids do not nest).
fn coarse_fine_distance(
    coarse_sgrid: &SpaceGrid,
    coarse: &SolutionField,
    fine: &SolutionField,
) -> f64 {
    let cg = *coarse.vgrid();
    let fg = *fine.vgrid();
    let dx = coarse_sgrid.dx();
    let mut num_sq = 0.0;
    let mut den_sq = 0.0;
    for (i, cslice) in coarse.slices.iter().enumerate() {
        let fslice = &fine.slices[2 * i];
        for j in 0..cg.len() {
            let v = cg.node(j);
            // fine index with node(j') = (j' - K_f + 0.5) dv_f
            let pos = v / fg.dv() + fg.half_count() as f64 - 0.5;
            let j0 = (pos.floor() as usize).min(fg.len() - 2);
            let w = pos - j0 as f64;
            let interp = (1.0 - w) * fslice.values()[j0] + w * fslice.values()[j0 + 1];
            let d = cslice.values()[j] - interp;
            num_sq += dx * cg.dv() * d * d;
            let c = cslice.values()[j];
            den_sq += dx * cg.dv() * c * c;
        }
    }
    if den_sq == 0.0 {
        num_sq.sqrt()
    } else {
        (num_sq / den_sq).sqrt()
    }
}

/// Machine-readable error rendering for standard error.
pub fn error_json(err: &WignerError) -> String {
    let kind = match err {
        WignerError::Validation { .. } => "validation",
        WignerError::Domain(_) => "domain",
        WignerError::Capability(_) => "capability",
        WignerError::GridMismatch(_) => "grid_mismatch",
        WignerError::Numerical { .. } => "numerical",
        WignerError::IllPosed { .. } => "ill_posed",
        WignerError::Divergence { .. } => "divergence",
        WignerError::Io(_) => "io",
    };
    serde_json::json!({
        "error": {
            "kind": kind,
            "message": err.to_string(),
            "exit_code": err.exit_code(),
        }
    })
    .to_string()
}
