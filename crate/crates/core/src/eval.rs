//! Decision-vector encoding and fitness evaluation.
//!
//! A decision vector uses hybrid coding: continuous genes for generator
//! dispatch and terminal voltages, converter PCC setpoints and the
//! DC-slack voltage; discrete genes for transformer taps and switchable
//! shunt blocks. A DC-slack converter contributes its reactive setpoint
//! and DC voltage but no active-power gene (that power follows from the
//! DC balance), and only DC-slack converters carry a DC-voltage gene.
//!
//! `evaluate` is a pure function of the gene values: decode, run the
//! coupled power flow, compute the three objectives and the aggregate
//! constraint violation. A failed power flow is treated as maximal
//! infeasibility instead of an error so the optimizer can recover.

use serde::Serialize;

use crate::coupled::{solve_coupled, ControlSetpoints, ConverterCommand, CoupledSolution};
use crate::model::{snap_to_lattice, ControlMode, NetworkCase};

/// Violation assigned to candidates whose power flow failed to converge.
pub const FAILED_SOLVE_VIOLATION: f64 = 1e6;
/// A solution is feasible when its aggregate violation is below this.
pub const FEASIBILITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    /// `Some(step)` for discrete genes snapped to `min + k*step`.
    pub step: Option<f64>,
}

impl GeneSpec {
    pub fn range(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GeneRole {
    GenP(usize),
    GenU(usize),
    ConvP(usize),
    ConvQ(usize),
    ConvUdc(usize),
    Tap(usize),
    Shunt(usize),
}

/// Gene layout for one case: bounds, lattice steps and the mapping from
/// gene index to control variable.
#[derive(Debug, Clone)]
pub struct GeneSpace {
    specs: Vec<GeneSpec>,
    roles: Vec<GeneRole>,
    slack_gen: usize,
}

impl GeneSpace {
    pub fn for_case(case: &NetworkCase) -> GeneSpace {
        let mut specs = Vec::new();
        let mut roles = Vec::new();
        let slack_bus = case.ac_buses[case.slack_index()].id;
        let slack_gen = case
            .generators
            .iter()
            .position(|g| g.bus == slack_bus)
            .expect("validated case has a slack generator");

        for (g, gen) in case.generators.iter().enumerate() {
            if g == slack_gen {
                continue;
            }
            specs.push(GeneSpec {
                name: format!("pg{}", gen.bus),
                min: gen.p_min,
                max: gen.p_max,
                step: None,
            });
            roles.push(GeneRole::GenP(g));
        }
        for (g, gen) in case.generators.iter().enumerate() {
            let bus = &case.ac_buses[case.ac_index(gen.bus).unwrap()];
            specs.push(GeneSpec {
                name: format!("ug{}", gen.bus),
                min: bus.u_min,
                max: bus.u_max,
                step: None,
            });
            roles.push(GeneRole::GenU(g));
        }
        for (k, c) in case.converters.iter().enumerate() {
            if c.control != ControlMode::DcSlackQ {
                specs.push(GeneSpec {
                    name: format!("ps{}", k + 1),
                    min: c.p_s_min,
                    max: c.p_s_max,
                    step: None,
                });
                roles.push(GeneRole::ConvP(k));
            }
        }
        for (k, c) in case.converters.iter().enumerate() {
            if c.control != ControlMode::ConstPv {
                specs.push(GeneSpec {
                    name: format!("qs{}", k + 1),
                    min: c.q_s_min,
                    max: c.q_s_max,
                    step: None,
                });
                roles.push(GeneRole::ConvQ(k));
            }
        }
        for (k, c) in case.converters.iter().enumerate() {
            if c.control == ControlMode::DcSlackQ {
                specs.push(GeneSpec {
                    name: format!("udc{}", k + 1),
                    min: c.u_dc_min,
                    max: c.u_dc_max,
                    step: None,
                });
                roles.push(GeneRole::ConvUdc(k));
            }
        }
        for (t, tr) in case.transformers.iter().enumerate() {
            specs.push(GeneSpec {
                name: format!("tap{}", t + 1),
                min: tr.tap_min,
                max: tr.tap_max,
                step: Some(tr.tap_step),
            });
            roles.push(GeneRole::Tap(t));
        }
        for (s, sc) in case.shunt_comps.iter().enumerate() {
            specs.push(GeneSpec {
                name: format!("qc{}", sc.bus),
                min: sc.q_min,
                max: sc.q_max,
                step: Some(sc.q_step),
            });
            roles.push(GeneRole::Shunt(s));
        }
        GeneSpace {
            specs,
            roles,
            slack_gen,
        }
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[GeneSpec] {
        &self.specs
    }

    /// Clamp continuous genes into their bounds and snap discrete genes to
    /// their lattice, in place.
    pub fn repair(&self, genes: &mut [f64]) {
        assert_eq!(genes.len(), self.specs.len());
        for (v, spec) in genes.iter_mut().zip(&self.specs) {
            *v = match spec.step {
                Some(step) => snap_to_lattice(*v, spec.min, spec.max, step),
                None => v.clamp(spec.min, spec.max),
            };
        }
    }

    /// Decode a raw gene vector into control setpoints. The raw values are
    /// clamped and snapped first; out-of-lattice inputs are legal.
    pub fn decode(&self, case: &NetworkCase, raw: &[f64]) -> Result<ControlSetpoints, String> {
        if raw.len() != self.specs.len() {
            return Err(format!(
                "gene count {} does not match the case layout ({} genes)",
                raw.len(),
                self.specs.len()
            ));
        }
        let mut genes = raw.to_vec();
        self.repair(&mut genes);

        let mut sp = ControlSetpoints::base_of(case);
        for (v, role) in genes.iter().zip(&self.roles) {
            match *role {
                GeneRole::GenP(g) => sp.gen_p[g] = *v,
                GeneRole::GenU(g) => sp.gen_u[g] = *v,
                GeneRole::ConvP(k) => match &mut sp.converters[k] {
                    ConverterCommand::ConstPq { p_s, .. } => *p_s = *v,
                    ConverterCommand::ConstPv { p_s, .. } => *p_s = *v,
                    ConverterCommand::DcSlackQ { .. } => unreachable!("no P gene for dc slack"),
                },
                GeneRole::ConvQ(k) => match &mut sp.converters[k] {
                    ConverterCommand::ConstPq { q_s, .. } => *q_s = *v,
                    ConverterCommand::DcSlackQ { q_s, .. } => *q_s = *v,
                    ConverterCommand::ConstPv { .. } => unreachable!("no Q gene for const-pv"),
                },
                GeneRole::ConvUdc(k) => match &mut sp.converters[k] {
                    ConverterCommand::DcSlackQ { u_dc, .. } => *u_dc = *v,
                    _ => unreachable!("DC-voltage gene only for dc slack"),
                },
                GeneRole::Tap(t) => sp.taps[t] = *v,
                GeneRole::Shunt(s) => sp.shunts[s] = *v,
            }
        }
        Ok(sp)
    }

    /// Inverse of [`decode`](Self::decode) for lattice-aligned setpoints.
    pub fn encode(&self, sp: &ControlSetpoints) -> Vec<f64> {
        self.roles
            .iter()
            .map(|role| match *role {
                GeneRole::GenP(g) => sp.gen_p[g],
                GeneRole::GenU(g) => sp.gen_u[g],
                GeneRole::ConvP(k) => match sp.converters[k] {
                    ConverterCommand::ConstPq { p_s, .. } => p_s,
                    ConverterCommand::ConstPv { p_s, .. } => p_s,
                    ConverterCommand::DcSlackQ { .. } => unreachable!(),
                },
                GeneRole::ConvQ(k) => match sp.converters[k] {
                    ConverterCommand::ConstPq { q_s, .. } => q_s,
                    ConverterCommand::DcSlackQ { q_s, .. } => q_s,
                    ConverterCommand::ConstPv { .. } => unreachable!(),
                },
                GeneRole::ConvUdc(k) => match sp.converters[k] {
                    ConverterCommand::DcSlackQ { u_dc, .. } => u_dc,
                    _ => unreachable!(),
                },
                GeneRole::Tap(t) => sp.taps[t],
                GeneRole::Shunt(s) => sp.shunts[s],
            })
            .collect()
    }

    pub fn slack_generator(&self) -> usize {
        self.slack_gen
    }
}

/// The three minimized objectives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveVector {
    /// Total system active loss, MW.
    pub loss_mw: f64,
    /// Polluting-gas emissions, lb/h.
    pub emission: f64,
    /// Squared voltage deviation from setpoints, pu^2.
    pub voltage_dev: f64,
}

impl ObjectiveVector {
    pub fn to_array(self) -> [f64; 3] {
        [self.loss_mw, self.emission, self.voltage_dev]
    }
}

/// Total system active loss in MW: AC branch losses plus the DC-side
/// losses (converter stations, coupling branches and DC lines).
pub fn objective_losses(sol: &CoupledSolution, base_mva: f64) -> f64 {
    sol.total_loss() * base_mva
}

/// Quadratic gas-emission total over the committed units, lb/h.
pub fn objective_emissions(dispatch: &[f64], case: &NetworkCase) -> f64 {
    assert_eq!(dispatch.len(), case.generators.len());
    dispatch
        .iter()
        .zip(&case.generators)
        .map(|(p, g)| g.alpha * p * p + g.beta * p + g.gamma)
        .sum()
}

/// Squared deviation of every AC and DC bus voltage from its setpoint.
pub fn objective_vdev(sol: &CoupledSolution, case: &NetworkCase) -> f64 {
    let ac: f64 = sol
        .ac
        .u
        .iter()
        .zip(&case.ac_buses)
        .map(|(u, b)| (u - b.u_set) * (u - b.u_set))
        .sum();
    let dc: f64 = sol
        .dc
        .u
        .iter()
        .zip(&case.dc_buses)
        .map(|(u, b)| (u - b.u_set) * (u - b.u_set))
        .sum();
    ac + dc
}

fn excess(v: f64, lo: f64, hi: f64, range: f64) -> f64 {
    let r = if range > 0.0 { range } else { 1.0 };
    if v > hi {
        (v - hi) / r
    } else if v < lo {
        (lo - v) / r
    } else {
        0.0
    }
}

/// Aggregate normalized constraint violation of a converged operating
/// point: slack dispatch and generator reactive limits, load-bus voltage
/// bands, converter capability circles and PCC setpoint boxes, DC voltage
/// bands and DC line current limits. Each term is the bound excess divided
/// by the bound range, so different units contribute on the same scale.
pub fn constraint_violation(sol: &CoupledSolution, case: &NetworkCase) -> f64 {
    let mut total = 0.0;

    let slack_bus = case.ac_buses[case.slack_index()].id;
    for (g, gen) in case.generators.iter().enumerate() {
        if gen.bus == slack_bus {
            total += excess(sol.gen_p[g], gen.p_min, gen.p_max, gen.p_max - gen.p_min);
        }
        total += excess(sol.gen_q[g], gen.q_min, gen.q_max, gen.q_max - gen.q_min);
    }

    let gen_buses: Vec<u32> = case.generators.iter().map(|g| g.bus).collect();
    for (i, bus) in case.ac_buses.iter().enumerate() {
        if gen_buses.contains(&bus.id) {
            continue; // terminal voltages are genes, already boxed
        }
        total += excess(sol.ac.u[i], bus.u_min, bus.u_max, bus.u_max - bus.u_min);
    }

    for (k, conv) in case.converters.iter().enumerate() {
        let (p_inj, q_inj) = sol.converters[k].pcc_injection();
        // capability circle on the PCC working point
        let radius = ((p_inj - conv.p0).powi(2) + (q_inj - conv.q0).powi(2)).sqrt();
        total += excess(radius, conv.r_min, conv.r_max, conv.r_max - conv.r_min);
        // the DC-slack converter's power is solved, not boxed by coding
        if case.converters[k].control == ControlMode::DcSlackQ {
            total += excess(p_inj, conv.p_s_min, conv.p_s_max, conv.p_s_max - conv.p_s_min);
        }
    }

    for (d, bus) in case.dc_buses.iter().enumerate() {
        total += excess(sol.dc.u[d], bus.u_min, bus.u_max, bus.u_max - bus.u_min);
    }
    for (l, line) in case.dc_lines.iter().enumerate() {
        total += excess(
            sol.dc.i_line[l],
            line.i_min,
            line.i_max,
            line.i_max - line.i_min,
        );
    }
    total
}

/// One evaluated decision vector.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluatedSolution {
    /// Decoded (clamped and lattice-snapped) gene values.
    pub genes: Vec<f64>,
    /// Objective values; `[loss_mw, emission, voltage_dev]` for the OPF
    /// problem, arbitrary dimension for synthetic problems.
    pub objectives: Vec<f64>,
    pub violation: f64,
    pub feasible: bool,
    /// Power-flow diagnostics; `converged == false` marks a sentinel.
    pub converged: bool,
    pub outer_iterations: usize,
}

impl EvaluatedSolution {
    pub fn objective_vector(&self) -> ObjectiveVector {
        ObjectiveVector {
            loss_mw: self.objectives[0],
            emission: self.objectives[1],
            voltage_dev: self.objectives[2],
        }
    }
}

/// Full evaluation result, keeping the solved state for reporting.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub solution: EvaluatedSolution,
    pub coupled: Option<CoupledSolution>,
    pub setpoints: ControlSetpoints,
}

/// Decode and evaluate one raw gene vector.
pub fn evaluate(case: &NetworkCase, space: &GeneSpace, raw: &[f64]) -> Evaluation {
    let setpoints = space
        .decode(case, raw)
        .unwrap_or_else(|e| panic!("gene-count mismatch: {e}"));
    let mut genes = raw.to_vec();
    space.repair(&mut genes);

    match solve_coupled(case, &setpoints) {
        Ok(coupled) => {
            let objectives = vec![
                objective_losses(&coupled, case.base_mva),
                objective_emissions(&coupled.gen_p, case),
                objective_vdev(&coupled, case),
            ];
            let violation = constraint_violation(&coupled, case);
            let feasible = violation <= FEASIBILITY_EPS;
            Evaluation {
                solution: EvaluatedSolution {
                    genes,
                    objectives,
                    violation,
                    feasible,
                    converged: true,
                    outer_iterations: coupled.outer_iterations,
                },
                coupled: Some(coupled),
                setpoints,
            }
        }
        Err(_) => Evaluation {
            solution: EvaluatedSolution {
                genes,
                objectives: vec![f64::INFINITY; 3],
                violation: FAILED_SOLVE_VIOLATION,
                feasible: false,
                converged: false,
                outer_iterations: 0,
            },
            coupled: None,
            setpoints,
        },
    }
}
