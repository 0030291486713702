//! Sweep configuration: one JSON document, with command-line overrides for
//! top-level scalars.

use std::path::PathBuf;

use clustersim::{Boundary, CircuitSpec, EngineKind, GateFamily, ObservableId};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "p_s")]
    PS,
    #[serde(rename = "p_u")]
    PU,
    #[serde(rename = "n_qubits")]
    N,
    #[serde(rename = "alpha")]
    Alpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// One axis, or several combined as a Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    One(SweepAxis),
    Many(Vec<SweepAxis>),
}

impl Sweep {
    pub fn axes(&self) -> &[SweepAxis] {
        match self {
            Sweep::One(a) => std::slice::from_ref(a),
            Sweep::Many(v) => v,
        }
    }
}

fn default_observables() -> Vec<ObservableId> {
    vec![ObservableId::STriv, ObservableId::SSpt]
}

fn default_boundary() -> Boundary {
    Boundary::Open
}

fn default_engine() -> EngineKind {
    EngineKind::Stabilizer
}

fn default_sample_steps() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alpha: usize,
    pub n_qubits: usize,
    pub p_s: f64,
    #[serde(default)]
    pub p_t: Option<f64>,
    #[serde(default)]
    pub p_u: f64,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    /// Defaults to `clifford` for points with `p_u > 0`.
    #[serde(default)]
    pub gate_family: Option<GateFamily>,
    #[serde(default = "default_engine")]
    pub engine: EngineKind,
    /// Defaults to `2N`.
    #[serde(default)]
    pub burn_in_steps: Option<usize>,
    #[serde(default = "default_sample_steps")]
    pub sample_steps: usize,
    pub n_circuits: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_observables")]
    pub observables: Vec<ObservableId>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub initial_sign: Option<i8>,
}

/// One materialized sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub spec: CircuitSpec,
    pub engine: EngineKind,
    pub observables: Vec<ObservableId>,
}

fn config_err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

impl SweepConfig {
    /// Parses `text`, applying `overrides` (top-level key → JSON value) first.
    pub fn from_json(text: &str, overrides: &[(&str, Value)]) -> CliResult<Self> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config JSON: {e}")))?;
        let obj = doc.as_object_mut().ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
        for (k, v) in overrides {
            obj.insert((*k).to_string(), v.clone());
        }
        let cfg: SweepConfig = serde_json::from_value(doc).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if self.n_circuits == 0 {
            return Err(config_err("n_circuits", "must be positive"));
        }
        if self.observables.is_empty() {
            return Err(config_err("observables", "must not be empty"));
        }
        if self.workers == Some(0) {
            return Err(config_err("workers", "must be positive"));
        }
        if let Some(sweep) = &self.sweep {
            for (i, ax) in sweep.axes().iter().enumerate() {
                if ax.values.is_empty() {
                    return Err(config_err(&format!("sweep[{i}].values"), "must not be empty"));
                }
                for (j, v) in ax.values.iter().enumerate() {
                    let integral = matches!(ax.axis, Axis::N | Axis::Alpha);
                    if !v.is_finite() || (integral && (v.fract() != 0.0 || *v < 1.0)) {
                        return Err(config_err(&format!("sweep[{i}].values[{j}]"), format!("invalid value {v}")));
                    }
                }
            }
        }
        self.points().map(|_| ())
    }

    /// All sweep points in axis order (last axis fastest).
    pub fn points(&self) -> CliResult<Vec<SweepPoint>> {
        let axes: Vec<SweepAxis> = self.sweep.as_ref().map(|s| s.axes().to_vec()).unwrap_or_default();
        let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for (i, ax) in axes.iter().enumerate() {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (0..ax.values.len()).map(move |j| {
                        let mut c = c.clone();
                        c.push((i, j));
                        c
                    })
                })
                .collect();
        }
        combos.into_iter().map(|c| self.point(&axes, &c)).collect()
    }

    fn point(&self, axes: &[SweepAxis], combo: &[(usize, usize)]) -> CliResult<SweepPoint> {
        let (mut alpha, mut n, mut p_s, mut p_u) = (self.alpha, self.n_qubits, self.p_s, self.p_u);
        let mut where_ = String::from("config");
        for &(i, j) in combo {
            let v = axes[i].values[j];
            match axes[i].axis {
                Axis::PS => p_s = v,
                Axis::PU => p_u = v,
                Axis::N => n = v as usize,
                Axis::Alpha => alpha = v as usize,
            }
            where_ = format!("sweep[{i}].values[{j}]");
        }
        let family = match (self.gate_family, p_u > 0.0) {
            (_, false) => GateFamily::None,
            (None, true) => GateFamily::Clifford,
            (Some(GateFamily::None), true) => return Err(config_err("gate_family", format!("`none` with p_u = {p_u}"))),
            (Some(f), true) => f,
        };
        let mut spec = CircuitSpec::new(alpha, n, p_s, p_u)
            .with_gate_family(family)
            .with_boundary(self.boundary)
            .with_steps(self.burn_in_steps.unwrap_or(2 * n), self.sample_steps)
            .with_seed(self.master_seed)
            .with_trajectories(self.n_circuits);
        if let Some(p_t) = self.p_t {
            if (p_t + p_s + p_u - 1.0).abs() > 1e-12 {
                return Err(config_err("p_t", format!("p_s + p_t + p_u = {} at {where_}", p_s + p_t + p_u)));
            }
            spec.p_t = p_t;
        }
        if let Some(sign) = self.initial_sign {
            spec.initial_sign = sign;
        }
        spec.validate().map_err(|e| config_err(&where_, e))?;
        if self.engine == EngineKind::Stabilizer && family == GateFamily::Haar {
            return Err(config_err("engine", "haar gates need the dense engine"));
        }
        if self.engine == EngineKind::Stabilizer && self.observables.contains(&ObservableId::Schmidt) {
            return Err(config_err("observables", "schmidt needs the dense engine"));
        }
        if self.observables.contains(&ObservableId::CM) && alpha % 2 == 0 {
            return Err(config_err("observables", format!("C_M needs odd alpha ({where_} has α = {alpha})")));
        }
        clustersim::ObservableSet::new(alpha, n, &self.observables).map_err(|e| config_err(&where_, e))?;
        Ok(SweepPoint { spec, engine: self.engine, observables: self.observables.clone() })
    }
}
