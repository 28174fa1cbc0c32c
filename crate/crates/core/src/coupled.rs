//! Alternating AC/DC power flow.
//!
//! Each outer iteration: (i) solve the AC grid with converter PCC powers
//! applied as bus injections (voltage-regulating converters impose a PV
//! magnitude), (ii) recover converter-node powers and station losses from
//! the coupling-branch arithmetic, (iii) solve the DC network with the
//! resulting injections, (iv) update each DC-slack converter's PCC power
//! from its island's balance. The loop ends when no slack converter's PCC
//! power moves by more than the coupling tolerance.

use serde::Serialize;
use thiserror::Error;

use crate::ac::{self, AcInjectionSet, AcSolution, StartPoint};
use crate::converter::ConverterState;
use crate::dc::{self, DcSolution};
use crate::model::{BusKind, ControlMode, NetworkCase};

pub const COUPLING_TOLERANCE: f64 = 1e-6;
pub const OUTER_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("ac stage: {0}")]
    Ac(#[from] ac::AcError),
    #[error("dc stage: {0}")]
    Dc(#[from] dc::DcError),
    #[error("coupling loop did not converge after {0} outer iterations")]
    OuterDiverged(usize),
    #[error("setpoint vector does not match the case topology: {0}")]
    BadSetpoints(String),
}

/// Commanded values for one converter, grid-injection convention
/// (positive `p_s`/`q_s` inject into the AC bus).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ConverterCommand {
    DcSlackQ { q_s: f64, u_dc: f64 },
    ConstPq { p_s: f64, q_s: f64 },
    ConstPv { p_s: f64, u_s: f64 },
}

/// Decoded control setpoints for one operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSetpoints {
    /// Active dispatch per generator (case order); the slack machine's
    /// entry is ignored and resolved by the power flow.
    pub gen_p: Vec<f64>,
    /// Terminal voltage per generator (case order).
    pub gen_u: Vec<f64>,
    pub converters: Vec<ConverterCommand>,
    pub taps: Vec<f64>,
    pub shunts: Vec<f64>,
}

impl ControlSetpoints {
    /// The case's base operating point.
    pub fn base_of(case: &NetworkCase) -> ControlSetpoints {
        ControlSetpoints {
            gen_p: case.generators.iter().map(|g| g.p_base).collect(),
            gen_u: case.generators.iter().map(|g| g.u_base).collect(),
            converters: case
                .converters
                .iter()
                .map(|c| match c.control {
                    ControlMode::DcSlackQ => ConverterCommand::DcSlackQ {
                        q_s: c.q_s,
                        u_dc: c.u_dc,
                    },
                    ControlMode::ConstPq => ConverterCommand::ConstPq { p_s: c.p_s, q_s: c.q_s },
                    ControlMode::ConstPv => ConverterCommand::ConstPv { p_s: c.p_s, u_s: c.u_s },
                })
                .collect(),
            taps: case.transformers.iter().map(|t| t.tap_base).collect(),
            shunts: case.shunt_comps.iter().map(|s| s.q_base).collect(),
        }
    }

    fn check(&self, case: &NetworkCase) -> Result<(), SolveError> {
        let ok = self.gen_p.len() == case.generators.len()
            && self.gen_u.len() == case.generators.len()
            && self.converters.len() == case.converters.len()
            && self.taps.len() == case.transformers.len()
            && self.shunts.len() == case.shunt_comps.len();
        if !ok {
            return Err(SolveError::BadSetpoints(format!(
                "expected {}/{}/{}/{} entries",
                case.generators.len(),
                case.converters.len(),
                case.transformers.len(),
                case.shunt_comps.len()
            )));
        }
        for (cmd, conv) in self.converters.iter().zip(&case.converters) {
            let mode_ok = matches!(
                (cmd, conv.control),
                (ConverterCommand::DcSlackQ { .. }, ControlMode::DcSlackQ)
                    | (ConverterCommand::ConstPq { .. }, ControlMode::ConstPq)
                    | (ConverterCommand::ConstPv { .. }, ControlMode::ConstPv)
            );
            if !mode_ok {
                return Err(SolveError::BadSetpoints(format!(
                    "command {cmd:?} does not match control mode {:?}",
                    conv.control
                )));
            }
        }
        Ok(())
    }
}

/// Converged state of the whole AC/DC system.
#[derive(Debug, Clone, Serialize)]
pub struct CoupledSolution {
    pub ac: AcSolution,
    pub dc: DcSolution,
    pub converters: Vec<ConverterState>,
    /// PCC powers actually applied in the final AC stage (grid-injection
    /// convention), used by the interface residual check.
    pub pcc_applied: Vec<(f64, f64)>,
    pub outer_iterations: usize,
    /// Realized generator dispatch (slack resolved) and reactive output.
    pub gen_p: Vec<f64>,
    pub gen_q: Vec<f64>,
    /// System loss decomposition, per unit.
    pub ac_branch_loss: f64,
    pub coupling_loss: f64,
    pub converter_loss: f64,
    pub dc_line_loss: f64,
}

impl CoupledSolution {
    /// Total system active loss in per unit.
    pub fn total_loss(&self) -> f64 {
        self.ac_branch_loss + self.coupling_loss + self.converter_loss + self.dc_line_loss
    }

    /// Interface balance residual of converter `k`: the larger of
    /// (a) the gap between the converter's PCC power and what the AC stage
    /// applied, and (b) PCC inflow minus losses minus the DC-network
    /// injection at its DC bus.
    pub fn coupling_residual(&self, case: &NetworkCase, k: usize) -> f64 {
        let st = &self.converters[k];
        let ac_gap = -st.p_s - self.pcc_applied[k].0;
        let d = case.dc_index(case.converters[k].dc_bus).unwrap();
        let dc_gap = st.p_s - st.coupling_loss() - st.loss - self.dc.p_injection[d];
        ac_gap.abs().max(dc_gap.abs())
    }
}

/// Solve the coupled AC/DC system at the given setpoints.
pub fn solve_coupled(
    case: &NetworkCase,
    setpoints: &ControlSetpoints,
) -> Result<CoupledSolution, SolveError> {
    setpoints.check(case)?;
    let n = case.ac_buses.len();
    let model = ac::build_admittance(case, &setpoints.taps, &setpoints.shunts)?;

    // effective bus kinds and voltage targets
    let mut kinds: Vec<BusKind> = case.ac_buses.iter().map(|b| b.kind).collect();
    let mut u_target = vec![1.0; n];
    for (g, gen) in case.generators.iter().enumerate() {
        u_target[case.ac_index(gen.bus).unwrap()] = setpoints.gen_u[g];
    }
    for (k, cmd) in setpoints.converters.iter().enumerate() {
        if let ConverterCommand::ConstPv { u_s, .. } = cmd {
            let i = case.ac_index(case.converters[k].ac_bus).unwrap();
            kinds[i] = BusKind::Pv;
            u_target[i] = *u_s;
        }
    }

    // PCC injections into the AC grid; DC-slack converters start from the
    // lossless island balance and are refined by the outer loop
    let mut pcc_p: Vec<f64> = Vec::with_capacity(case.converters.len());
    let mut pcc_q: Vec<f64> = Vec::with_capacity(case.converters.len());
    for (k, cmd) in setpoints.converters.iter().enumerate() {
        match *cmd {
            ConverterCommand::DcSlackQ { q_s, .. } => {
                let island = island_of(case, case.converters[k].dc_bus);
                let others: f64 = setpoints
                    .converters
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k && island.contains(&case.converters[*j].dc_bus))
                    .map(|(_, c)| match *c {
                        ConverterCommand::ConstPq { p_s, .. } => p_s,
                        ConverterCommand::ConstPv { p_s, .. } => p_s,
                        ConverterCommand::DcSlackQ { .. } => 0.0,
                    })
                    .sum();
                pcc_p.push(-others);
                pcc_q.push(q_s);
            }
            ConverterCommand::ConstPq { p_s, q_s } => {
                pcc_p.push(p_s);
                pcc_q.push(q_s);
            }
            ConverterCommand::ConstPv { p_s, .. } => {
                pcc_p.push(p_s);
                pcc_q.push(0.0);
            }
        }
    }

    let mut warm: Option<AcSolution> = None;
    for outer in 1..=OUTER_MAX_ITERATIONS {
        // (i) AC stage
        let mut p_spec = vec![0.0; n];
        let mut q_spec = vec![0.0; n];
        for (i, b) in case.ac_buses.iter().enumerate() {
            p_spec[i] -= b.p_load;
            q_spec[i] -= b.q_load;
        }
        for (g, gen) in case.generators.iter().enumerate() {
            if case.ac_buses[case.ac_index(gen.bus).unwrap()].kind != BusKind::Slack {
                p_spec[case.ac_index(gen.bus).unwrap()] += setpoints.gen_p[g];
            }
        }
        for (k, conv) in case.converters.iter().enumerate() {
            let i = case.ac_index(conv.ac_bus).unwrap();
            p_spec[i] += pcc_p[k];
            if !matches!(setpoints.converters[k], ConverterCommand::ConstPv { .. }) {
                q_spec[i] += pcc_q[k];
            }
        }
        let pcc_applied: Vec<(f64, f64)> = pcc_p.iter().copied().zip(pcc_q.iter().copied()).collect();
        let inj = AcInjectionSet {
            p_spec,
            q_spec,
            kinds: kinds.clone(),
            u_target: u_target.clone(),
        };
        let start = warm.as_ref().map(StartPoint::Warm).unwrap_or_default();
        let ac_sol = ac::solve_ac(&model, &inj, start)?;

        // (ii) converter states from the AC solution
        let mut states = Vec::with_capacity(case.converters.len());
        for (k, conv) in case.converters.iter().enumerate() {
            let bus = case.ac_index(conv.ac_bus).unwrap();
            let u_s = ac_sol.voltage(bus);
            if let ConverterCommand::ConstPv { .. } = setpoints.converters[k] {
                // reactive support is whatever the regulated bus absorbed
                let q_conv = ac_sol.q_inj[bus] + case.ac_buses[bus].q_load;
                pcc_q[k] = q_conv;
            }
            states.push(ConverterState::from_pcc(
                u_s,
                -pcc_p[k],
                -pcc_q[k],
                conv.r,
                conv.x,
                conv.loss_a,
                conv.loss_b,
                conv.loss_c,
            ));
        }

        // (iii) DC stage
        let mut p_dc = vec![0.0; case.dc_buses.len()];
        let mut slack_voltage: Vec<Option<f64>> = vec![None; case.dc_buses.len()];
        for (k, conv) in case.converters.iter().enumerate() {
            let d = case.dc_index(conv.dc_bus).unwrap();
            match setpoints.converters[k] {
                ConverterCommand::DcSlackQ { u_dc, .. } => slack_voltage[d] = Some(u_dc),
                _ => p_dc[d] += states[k].p_dc_net,
            }
        }
        let dc_sol = if case.dc_buses.is_empty() {
            DcSolution {
                u: vec![],
                i_line: vec![],
                p_injection: vec![],
                line_loss: 0.0,
                iterations: 0,
            }
        } else {
            dc::solve_dc_network(case, &p_dc, &slack_voltage)?
        };

        // (iv) slack converters absorb their island's balance
        let mut worst_shift = 0.0f64;
        for (k, conv) in case.converters.iter().enumerate() {
            if let ConverterCommand::DcSlackQ { q_s, .. } = setpoints.converters[k] {
                let d = case.dc_index(conv.dc_bus).unwrap();
                let required_net = dc_sol.p_injection[d];
                let bus = case.ac_index(conv.ac_bus).unwrap();
                let u_s = ac_sol.voltage(bus);
                // fixed point on the PCC power: losses depend on the
                // current, which depends on the PCC power
                let mut p_s = states[k].p_s;
                for _ in 0..50 {
                    let st = ConverterState::from_pcc(
                        u_s, p_s, -q_s, conv.r, conv.x, conv.loss_a, conv.loss_b, conv.loss_c,
                    );
                    let next = required_net + st.loss + st.coupling_loss();
                    if (next - p_s).abs() < 1e-13 {
                        p_s = next;
                        break;
                    }
                    p_s = next;
                }
                let st = ConverterState::from_pcc(
                    u_s, p_s, -q_s, conv.r, conv.x, conv.loss_a, conv.loss_b, conv.loss_c,
                );
                worst_shift = worst_shift.max((-st.p_s - pcc_p[k]).abs());
                pcc_p[k] = -st.p_s;
                states[k] = st;
            }
        }

        if worst_shift < COUPLING_TOLERANCE || case.converters.is_empty() {
            return Ok(assemble(case, setpoints, ac_sol, dc_sol, states, pcc_applied, outer));
        }
        warm = Some(ac_sol);
    }
    Err(SolveError::OuterDiverged(OUTER_MAX_ITERATIONS))
}

fn island_of(case: &NetworkCase, dc_bus: u32) -> Vec<u32> {
    case.dc_islands()
        .into_iter()
        .find(|island| island.contains(&dc_bus))
        .unwrap_or_else(|| vec![dc_bus])
}

fn assemble(
    case: &NetworkCase,
    setpoints: &ControlSetpoints,
    ac_sol: AcSolution,
    dc_sol: DcSolution,
    states: Vec<ConverterState>,
    pcc_applied: Vec<(f64, f64)>,
    outer_iterations: usize,
) -> CoupledSolution {
    let mut gen_p = setpoints.gen_p.clone();
    let mut gen_q = vec![0.0; case.generators.len()];
    for (g, gen) in case.generators.iter().enumerate() {
        let i = case.ac_index(gen.bus).unwrap();
        // converter share at the generator bus, grid-injection convention
        let conv_p: f64 = case
            .converters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.ac_bus == gen.bus)
            .map(|(k, _)| -states[k].p_s)
            .sum();
        let conv_q: f64 = case
            .converters
            .iter()
            .enumerate()
            .filter(|(_, c)| c.ac_bus == gen.bus)
            .map(|(k, _)| -states[k].q_s)
            .sum();
        if case.ac_buses[i].kind == BusKind::Slack {
            gen_p[g] = ac_sol.p_inj[i] + case.ac_buses[i].p_load - conv_p;
        }
        gen_q[g] = ac_sol.q_inj[i] + case.ac_buses[i].q_load - conv_q;
    }

    let coupling_loss: f64 = states.iter().map(ConverterState::coupling_loss).sum();
    let converter_loss: f64 = states.iter().map(|s| s.loss).sum();
    CoupledSolution {
        ac_branch_loss: ac_sol.branch_loss(),
        coupling_loss,
        converter_loss,
        dc_line_loss: dc_sol.line_loss,
        ac: ac_sol,
        dc: dc_sol,
        converters: states,
        pcc_applied,
        outer_iterations,
        gen_p,
        gen_q,
    }
}
