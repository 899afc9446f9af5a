//! Model configuration, built-in benchmark generators and result output.

pub mod benchmarks;
pub mod results;

use crate::constitutive::MaterialParams;
use crate::magnetics::MagneticProgram;
use crate::mesh::{ElementConn, Mesh};
use crate::solver::{Constraint, ShellModel, SolveError, SolverOptions};
use crate::tensor::Vec3;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const MM: f64 = 1e-3;
pub const KPA: f64 = 1e3;
pub const MT: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Invalid(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Complete description of a ready-to-run model, produced either by a
/// benchmark generator or from an explicit mesh. Everything is SI.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BuiltModel {
    pub name: String,
    pub mesh: Mesh,
    /// Shell thickness (m).
    pub thickness: f64,
    pub material: MaterialParams,
    pub program: MagneticProgram,
    pub constraints: Vec<Constraint>,
}

impl BuiltModel {
    pub fn into_shell_model(self) -> Result<(ShellModel, BTreeMap<String, usize>), SolveError> {
        let probes = self.mesh.probes.clone();
        let model = ShellModel::new(
            self.mesh,
            self.material,
            self.thickness,
            self.program,
            self.constraints,
        )?;
        Ok((model, probes))
    }

    /// Canonical JSON form used by the round-trip check.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }
}

/// On-disk configuration (JSON). Units in field names: kPa, mm, mT.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialConfig>,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub magnetics: MagneticsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub lambda_kpa: Option<f64>,
    pub mu_kpa: Option<f64>,
    /// Micropolar modulus, either absolute or as a fraction of mu
    /// (default 0.1).
    pub eta_kpa: Option<f64>,
    pub eta_ratio: Option<f64>,
    /// Length scale, either absolute or as a fraction of the thickness
    /// (default 0.1).
    pub length_scale_mm: Option<f64>,
    pub length_scale_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Name of a built-in benchmark geometry.
    pub benchmark: Option<String>,
    /// Numeric parameters of the generator (dimensions in mm, mesh counts).
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Explicit mesh, alternative to `benchmark`.
    pub mesh: Option<ExplicitMeshConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitMeshConfig {
    pub nodes_mm: Vec<[f64; 3]>,
    pub elements: Vec<ElementConn>,
    pub thickness_mm: f64,
    /// Referential remnant flux per block (mT).
    pub block_remnant_mt: Vec<[f64; 3]>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    #[serde(default)]
    pub probes: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MagneticsConfig {
    pub external_direction: Option<[f64; 3]>,
    pub external_max_mt: Option<f64>,
    /// Uniform scaling of every block remnant vector (mT magnitude of the
    /// pattern; generators define the pattern direction).
    pub remnant_mt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub steps: usize,
    pub tol_rel: f64,
    pub max_iterations: usize,
    pub coupled_eas: bool,
    /// Comparison runs: suppress the thickness stretch unknowns.
    pub lock_phi: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            steps: 50,
            tol_rel: 1e-8,
            max_iterations: 25,
            coupled_eas: false,
            lock_phi: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Load factors (0..1] at which a deformed-mesh snapshot is written.
    #[serde(default)]
    pub snapshot_loads: Vec<f64>,
    /// Subset of probe names to report (default: all named probes).
    #[serde(default)]
    pub probes: Option<Vec<String>>,
}

impl ModelConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            n_steps: self.solver.steps,
            tol_rel: self.solver.tol_rel,
            max_iterations: self.solver.max_iterations,
            coupled_eas: self.solver.coupled_eas,
            ..SolverOptions::default()
        }
    }

    /// Builds the SI model: generator or explicit mesh, with material and
    /// magnetics overrides applied.
    pub fn build(&self) -> Result<BuiltModel, ConfigError> {
        let mut built = match (&self.geometry.benchmark, &self.geometry.mesh) {
            (Some(name), None) => benchmarks::generate_benchmark(name, &self.geometry.params)?,
            (None, Some(m)) => explicit_model(m)?,
            (Some(_), Some(_)) => {
                return Err(ConfigError::Invalid(
                    "geometry: give either `benchmark` or `mesh`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(ConfigError::Invalid(
                    "geometry: one of `benchmark` or `mesh` is required".into(),
                ))
            }
        };

        if let Some(mc) = &self.material {
            let mu = match mc.mu_kpa {
                Some(v) if v > 0.0 => v * KPA,
                Some(v) => {
                    return Err(ConfigError::Invalid(format!(
                        "material.mu_kpa = {v} must be positive"
                    )))
                }
                None => {
                    if self.geometry.mesh.is_some() {
                        return Err(ConfigError::Invalid(
                            "material.mu_kpa is required for explicit meshes".into(),
                        ));
                    }
                    built.material.mu
                }
            };
            let lambda = match mc.lambda_kpa {
                Some(v) if v >= 0.0 => v * KPA,
                Some(v) => {
                    return Err(ConfigError::Invalid(format!(
                        "material.lambda_kpa = {v} must be nonnegative"
                    )))
                }
                None => {
                    if self.geometry.mesh.is_some() {
                        return Err(ConfigError::Invalid(
                            "material.lambda_kpa is required for explicit meshes".into(),
                        ));
                    }
                    built.material.lambda
                }
            };
            let eta = match (mc.eta_kpa, mc.eta_ratio) {
                (Some(v), None) => v * KPA,
                (None, Some(r)) => r * mu,
                (None, None) => 0.1 * mu,
                (Some(_), Some(_)) => {
                    return Err(ConfigError::Invalid(
                        "material: give eta_kpa or eta_ratio, not both".into(),
                    ))
                }
            };
            let length_scale = match (mc.length_scale_mm, mc.length_scale_ratio) {
                (Some(v), None) => v * MM,
                (None, Some(r)) => r * built.thickness,
                (None, None) => 0.1 * built.thickness,
                (Some(_), Some(_)) => {
                    return Err(ConfigError::Invalid(
                        "material: give length_scale_mm or length_scale_ratio, not both".into(),
                    ))
                }
            };
            built.material = MaterialParams::new(lambda, mu, eta, length_scale)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }

        if let Some(dir) = self.magnetics.external_direction {
            let d = Vec3::new(dir[0], dir[1], dir[2]);
            let n = d.norm();
            if n == 0.0 {
                return Err(ConfigError::Invalid(
                    "magnetics.external_direction must be nonzero".into(),
                ));
            }
            built.program.external_direction = d / n;
        }
        if let Some(mt) = self.magnetics.external_max_mt {
            built.program.external_max = mt * MT;
        }
        if let Some(mt) = self.magnetics.remnant_mt {
            if mt < 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "magnetics.remnant_mt = {mt} must be nonnegative"
                )));
            }
            for b in built.program.block_remnant.iter_mut() {
                let n = b.norm();
                if n > 0.0 {
                    *b *= mt * MT / n;
                }
            }
        }
        if self.solver.lock_phi {
            built.constraints.push(Constraint::LockPhi);
        }
        Ok(built)
    }
}

fn explicit_model(cfg: &ExplicitMeshConfig) -> Result<BuiltModel, ConfigError> {
    if cfg.thickness_mm <= 0.0 {
        return Err(ConfigError::Invalid(format!(
            "geometry.mesh.thickness_mm = {} must be positive",
            cfg.thickness_mm
        )));
    }
    let nodes: Vec<Vec3> = cfg
        .nodes_mm
        .iter()
        .map(|p| Vec3::new(p[0] * MM, p[1] * MM, p[2] * MM))
        .collect();
    let n = nodes.len();
    for (i, e) in cfg.elements.iter().enumerate() {
        if e.nodes.iter().any(|&nd| nd >= n) {
            return Err(ConfigError::Invalid(format!(
                "element {i} references a node outside the mesh"
            )));
        }
        if e.block >= cfg.block_remnant_mt.len() {
            return Err(ConfigError::Invalid(format!(
                "element {i} block {} has no remnant vector",
                e.block
            )));
        }
    }
    for (name, &nd) in &cfg.probes {
        if nd >= n {
            return Err(ConfigError::Invalid(format!(
                "probe {name} references node {nd} outside the mesh"
            )));
        }
    }
    let mesh = Mesh {
        nodes,
        elements: cfg.elements.clone(),
        probes: cfg.probes.clone(),
    };
    let thickness = cfg.thickness_mm * MM;
    let material = MaterialParams::new(0.0, 1.0, 0.1, 0.1 * thickness)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let program = MagneticProgram {
        block_remnant: cfg
            .block_remnant_mt
            .iter()
            .map(|b| Vec3::new(b[0] * MT, b[1] * MT, b[2] * MT))
            .collect(),
        external_direction: Vec3::z(),
        external_max: 0.0,
    };
    Ok(BuiltModel {
        name: "explicit".into(),
        mesh,
        thickness,
        material,
        program,
        constraints: cfg.constraints.clone(),
    })
}

/// JSON schema of the configuration document.
pub fn config_schema() -> &'static str {
    include_str!("schema.json")
}
