//! Data model for hybrid AC/DC network cases.
//!
//! A [`NetworkCase`] is the single source of truth for one study system:
//! the AC grid (buses, branches, generators, tap transformers, switchable
//! shunt compensation), the DC grid (buses, lines) and the VSC converter
//! stations coupling the two. All quantities are per-unit on `base_mva`
//! unless a field name says otherwise. Cases are immutable after loading
//! and safe to share across any number of concurrent solver calls.
//!
//! Sign convention for converter setpoints: the case-file fields `p_s`
//! and `q_s` are powers injected **into the AC grid** at the point of
//! common coupling (generator convention, as usually tabulated for VSC
//! terminals). The converter-internal state uses the opposite
//! orientation; see [`crate::converter`].

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::path::Path;
use thiserror::Error;

pub const CASE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("cannot read case file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("case file parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("case validation failed:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("unknown builtin case `{0}` (expected `ieee14-2t` or `ieee14-3t`)")]
    UnknownBuiltin(String),
    #[error("unsupported case schema version {0} (this build reads version {CASE_SCHEMA_VERSION})")]
    SchemaVersion(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlMode {
    /// Holds the DC-side voltage and a reactive setpoint; exactly one per
    /// DC island. Its active power is determined by the DC power balance.
    DcSlackQ,
    /// Fixed active and reactive power at the PCC.
    ConstPq,
    /// Fixed active power; regulates the PCC voltage magnitude.
    ConstPv,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AcBus {
    pub id: u32,
    pub kind: BusKind,
    #[serde(default)]
    pub p_load: f64,
    #[serde(default)]
    pub q_load: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// Target used by the voltage-deviation objective.
    #[serde(default = "one")]
    pub u_set: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generator {
    pub bus: u32,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    /// Quadratic emission coefficients: e(p) = alpha p^2 + beta p + gamma, lb/h.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Base operating point dispatch (ignored for the slack machine).
    #[serde(default)]
    pub p_base: f64,
    /// Base terminal voltage setpoint.
    #[serde(default = "one")]
    pub u_base: f64,
    /// Nameplate rating used for capacity-referenced reporting such as the
    /// network loss rate. Defaults to `p_max`.
    #[serde(default)]
    pub p_rated: Option<f64>,
}

impl Generator {
    pub fn rated(&self) -> f64 {
        self.p_rated.unwrap_or(self.p_max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub from: u32,
    pub to: u32,
    pub r: f64,
    pub x: f64,
    /// Total line-charging susceptance (half at each end).
    #[serde(default)]
    pub b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TapTransformer {
    pub from: u32,
    pub to: u32,
    #[serde(default)]
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b: f64,
    pub tap_min: f64,
    pub tap_max: f64,
    pub tap_step: f64,
    pub tap_base: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShuntCompensator {
    pub bus: u32,
    pub q_min: f64,
    pub q_max: f64,
    pub q_step: f64,
    pub q_base: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcBus {
    pub id: u32,
    pub u_min: f64,
    pub u_max: f64,
    #[serde(default = "one")]
    pub u_set: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcLine {
    pub from: u32,
    pub to: u32,
    pub r: f64,
    pub i_min: f64,
    pub i_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Converter {
    pub ac_bus: u32,
    pub dc_bus: u32,
    /// Coupling impedance between the PCC and the converter node.
    pub r: f64,
    pub x: f64,
    pub control: ControlMode,
    /// Station loss model coefficients: loss = a + b I_c + c I_c^2.
    pub loss_a: f64,
    pub loss_b: f64,
    pub loss_c: f64,
    /// PQ-capability circle: centre (p0, q0), admissible radius in
    /// [r_min, r_max].
    #[serde(default)]
    pub p0: f64,
    #[serde(default)]
    pub q0: f64,
    #[serde(default)]
    pub r_min: f64,
    pub r_max: f64,
    /// Base setpoints, grid-injection convention (positive injects into
    /// the AC bus). For a `dc-slack-q` converter `p_s` is informational:
    /// the solved value follows from the DC balance.
    pub p_s: f64,
    pub q_s: f64,
    pub u_dc: f64,
    /// PCC voltage target for `const-pv` control.
    #[serde(default = "one")]
    pub u_s: f64,
    pub p_s_min: f64,
    pub p_s_max: f64,
    pub q_s_min: f64,
    pub q_s_max: f64,
    pub u_dc_min: f64,
    pub u_dc_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkCase {
    pub schema_version: u32,
    pub name: String,
    pub base_mva: f64,
    pub ac_buses: Vec<AcBus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub transformers: Vec<TapTransformer>,
    #[serde(default)]
    pub shunt_comps: Vec<ShuntCompensator>,
    #[serde(default)]
    pub dc_buses: Vec<DcBus>,
    #[serde(default)]
    pub dc_lines: Vec<DcLine>,
    #[serde(default)]
    pub converters: Vec<Converter>,
}

/// Number of admissible values on a discrete lattice `min, min+step, ..., max`.
///
/// The range must span an integer multiple of the step (validated on load);
/// the count is computed with a tolerance so representable steps like
/// 0.0125 behave exactly.
pub fn lattice_count(min: f64, max: f64, step: f64) -> usize {
    debug_assert!(step > 0.0);
    ((max - min) / step).round() as usize + 1
}

/// Snap `v` to the nearest lattice point, clamped into `[min, max]`.
pub fn snap_to_lattice(v: f64, min: f64, max: f64, step: f64) -> f64 {
    let k = ((v.clamp(min, max) - min) / step).round();
    let kmax = ((max - min) / step).round();
    (min + step * k.clamp(0.0, kmax)).clamp(min, max)
}

fn lattice_ok(min: f64, max: f64, step: f64) -> bool {
    if step <= 0.0 || max < min {
        return false;
    }
    let n = ((max - min) / step).round();
    ((max - min) - n * step).abs() <= 1e-9 * step.max(1.0)
}

impl NetworkCase {
    /// Parse and validate a case from a JSON case file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CaseError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CaseError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CaseError> {
        let case: NetworkCase = serde_json::from_str(text)?;
        if case.schema_version != CASE_SCHEMA_VERSION {
            return Err(CaseError::SchemaVersion(case.schema_version));
        }
        let violations = case.validate();
        if violations.is_empty() {
            Ok(case)
        } else {
            Err(CaseError::Invalid(violations))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case serialization cannot fail")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CaseError> {
        std::fs::write(path.as_ref(), self.to_json()).map_err(|source| CaseError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })
    }

    /// Diagnostic validation. Returns one human-readable entry per violated
    /// rule; an empty list means the case satisfies every structural
    /// invariant.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.base_mva > 0.0) {
            out.push(format!("base_mva must be positive (got {})", self.base_mva));
        }

        let ac_ids: HashSet<u32> = self.ac_buses.iter().map(|b| b.id).collect();
        if ac_ids.len() != self.ac_buses.len() {
            out.push("duplicate AC bus id".into());
        }
        let dc_ids: HashSet<u32> = self.dc_buses.iter().map(|b| b.id).collect();
        if dc_ids.len() != self.dc_buses.len() {
            out.push("duplicate DC bus id".into());
        }

        let slack_count = self
            .ac_buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .count();
        if slack_count != 1 {
            out.push(format!(
                "exactly one AC slack bus required (found {slack_count})"
            ));
        }

        for b in &self.ac_buses {
            if b.u_min > b.u_max {
                out.push(format!(
                    "ac bus {}: u_min {} > u_max {}",
                    b.id, b.u_min, b.u_max
                ));
            }
            if b.u_set < b.u_min || b.u_set > b.u_max {
                out.push(format!(
                    "ac bus {}: u_set {} outside [{}, {}]",
                    b.id, b.u_set, b.u_min, b.u_max
                ));
            }
        }

        for g in &self.generators {
            if !ac_ids.contains(&g.bus) {
                out.push(format!("generator references nonexistent AC bus {}", g.bus));
            } else {
                let kind = self.ac_buses.iter().find(|b| b.id == g.bus).unwrap().kind;
                if kind == BusKind::Pq {
                    out.push(format!("generator bus {} must be slack or pv", g.bus));
                }
            }
            if g.p_min > g.p_max {
                out.push(format!("generator {}: p_min > p_max", g.bus));
            }
            if g.q_min > g.q_max {
                out.push(format!("generator {}: q_min > q_max", g.bus));
            }
            if g.alpha < 0.0 {
                out.push(format!(
                    "generator {}: emission alpha must be nonnegative",
                    g.bus
                ));
            }
        }
        let gen_buses: HashSet<u32> = self.generators.iter().map(|g| g.bus).collect();
        for b in &self.ac_buses {
            if matches!(b.kind, BusKind::Pv | BusKind::Slack) && !gen_buses.contains(&b.id) {
                out.push(format!("bus {} is {:?} but has no generator", b.id, b.kind));
            }
        }

        for br in &self.branches {
            for end in [br.from, br.to] {
                if !ac_ids.contains(&end) {
                    out.push(format!(
                        "branch {}-{} references nonexistent AC bus {end}",
                        br.from, br.to
                    ));
                }
            }
            if br.r == 0.0 && br.x == 0.0 {
                out.push(format!("branch {}-{} has zero impedance", br.from, br.to));
            }
        }
        for t in &self.transformers {
            for end in [t.from, t.to] {
                if !ac_ids.contains(&end) {
                    out.push(format!(
                        "transformer {}-{} references nonexistent AC bus {end}",
                        t.from, t.to
                    ));
                }
            }
            if !lattice_ok(t.tap_min, t.tap_max, t.tap_step) {
                out.push(format!(
                    "transformer {}-{}: tap range [{}, {}] is not an integer multiple of step {}",
                    t.from, t.to, t.tap_min, t.tap_max, t.tap_step
                ));
            }
        }
        for s in &self.shunt_comps {
            if !ac_ids.contains(&s.bus) {
                out.push(format!("shunt references nonexistent AC bus {}", s.bus));
            }
            if !lattice_ok(s.q_min, s.q_max, s.q_step) {
                out.push(format!(
                    "shunt at bus {}: range [{}, {}] is not an integer multiple of step {}",
                    s.bus, s.q_min, s.q_max, s.q_step
                ));
            }
        }

        for d in &self.dc_buses {
            if d.u_min > d.u_max {
                out.push(format!("dc bus {}: u_min > u_max", d.id));
            }
            if d.u_set < d.u_min || d.u_set > d.u_max {
                out.push(format!(
                    "dc bus {}: u_set {} outside [{}, {}]",
                    d.id, d.u_set, d.u_min, d.u_max
                ));
            }
        }
        for l in &self.dc_lines {
            for end in [l.from, l.to] {
                if !dc_ids.contains(&end) {
                    out.push(format!(
                        "dc line {}-{} references nonexistent DC bus {end}",
                        l.from, l.to
                    ));
                }
            }
            if !(l.r > 0.0) {
                out.push(format!("dc line {}-{}: resistance must be positive", l.from, l.to));
            }
            if l.i_min > l.i_max {
                out.push(format!("dc line {}-{}: i_min > i_max", l.from, l.to));
            }
        }

        for (k, c) in self.converters.iter().enumerate() {
            if !ac_ids.contains(&c.ac_bus) {
                out.push(format!(
                    "converter {k} references nonexistent AC bus {}",
                    c.ac_bus
                ));
            }
            if !dc_ids.contains(&c.dc_bus) {
                out.push(format!(
                    "converter {k} references nonexistent DC bus {}",
                    c.dc_bus
                ));
            }
            if !(c.x > 0.0) || c.r < 0.0 {
                out.push(format!("converter {k}: coupling impedance requires r >= 0, x > 0"));
            }
            if !(0.0 <= c.r_min && c.r_min <= c.r_max) {
                out.push(format!("converter {k}: capability radii require 0 <= r_min <= r_max"));
            }
            if c.p_s_min > c.p_s_max || c.q_s_min > c.q_s_max || c.u_dc_min > c.u_dc_max {
                out.push(format!("converter {k}: setpoint bounds must satisfy min <= max"));
            }
            if c.control == ControlMode::ConstPv && gen_buses.contains(&c.ac_bus) {
                out.push(format!(
                    "converter {k}: const-pv control on generator bus {} (two voltage regulators on one bus)",
                    c.ac_bus
                ));
            }
        }

        // one DC-voltage-holding converter per DC island
        if !self.dc_buses.is_empty() {
            for (island_idx, island) in self.dc_islands().iter().enumerate() {
                let slacks = self
                    .converters
                    .iter()
                    .filter(|c| c.control == ControlMode::DcSlackQ && island.contains(&c.dc_bus))
                    .count();
                if slacks != 1 {
                    out.push(format!(
                        "dc island {island_idx} (buses {island:?}) must have exactly one dc-slack converter (found {slacks})"
                    ));
                }
            }
        }
        out
    }

    /// Connected components of the DC graph, as sets of DC bus ids.
    pub fn dc_islands(&self) -> Vec<Vec<u32>> {
        let mut parent: HashMap<u32, u32> = self.dc_buses.iter().map(|b| (b.id, b.id)).collect();
        fn find(parent: &mut HashMap<u32, u32>, mut x: u32) -> u32 {
            while parent[&x] != x {
                let up = parent[&parent[&x]];
                parent.insert(x, up);
                x = up;
            }
            x
        }
        for l in &self.dc_lines {
            if parent.contains_key(&l.from) && parent.contains_key(&l.to) {
                let (a, b) = (find(&mut parent, l.from), find(&mut parent, l.to));
                if a != b {
                    parent.insert(a, b);
                }
            }
        }
        let mut groups: HashMap<u32, Vec<u32>> = HashMap::new();
        let ids: Vec<u32> = self.dc_buses.iter().map(|b| b.id).collect();
        for id in ids {
            let root = find(&mut parent, id);
            groups.entry(root).or_default().push(id);
        }
        let mut islands: Vec<Vec<u32>> = groups.into_values().collect();
        for i in &mut islands {
            i.sort_unstable();
        }
        islands.sort();
        islands
    }

    pub fn ac_index(&self, bus_id: u32) -> Option<usize> {
        self.ac_buses.iter().position(|b| b.id == bus_id)
    }

    pub fn dc_index(&self, bus_id: u32) -> Option<usize> {
        self.dc_buses.iter().position(|b| b.id == bus_id)
    }

    pub fn slack_index(&self) -> usize {
        self.ac_buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated case has a slack bus")
    }

    /// Total load count (buses with nonzero demand).
    pub fn load_count(&self) -> usize {
        self.ac_buses
            .iter()
            .filter(|b| b.p_load != 0.0 || b.q_load != 0.0)
            .count()
    }

    /// Nameplate capacity in MW referenced by the loss-rate report:
    /// the sum of generator ratings.
    pub fn rated_capacity_mw(&self) -> f64 {
        self.generators.iter().map(|g| g.rated()).sum::<f64>() * self.base_mva
    }
}

/// Load a case file from disk (parse + full validation).
pub fn load_case(path: impl AsRef<Path>) -> Result<NetworkCase, CaseError> {
    NetworkCase::load(path)
}

/// Diagnostic validation of an already-parsed case.
pub fn validate_case(case: &NetworkCase) -> Vec<String> {
    case.validate()
}
