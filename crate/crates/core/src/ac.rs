//! Newton-Raphson AC power flow in polar form.
//!
//! Bus power mismatches and Jacobian blocks are derived from
//! first-principles complex arithmetic, `S_i = V_i conj(sum_j Y_ij V_j)`,
//! rather than transcribed trigonometric expansions; the trig forms fall
//! out of the algebra. The solver is a pure function of its inputs and
//! can run concurrently over a shared case.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::model::{BusKind, NetworkCase};

pub const AC_TOLERANCE: f64 = 1e-8;
pub const AC_MAX_ITERATIONS: usize = 30;

#[derive(Debug, Error)]
pub enum AcError {
    #[error("ac power flow did not converge after {iterations} iterations (max mismatch {mismatch:.3e} pu)")]
    NonConvergence { iterations: usize, mismatch: f64 },
    #[error("singular Jacobian at iteration {0}")]
    SingularJacobian(usize),
    #[error("tap {value} for transformer {index} outside admissible range [{min}, {max}]")]
    TapOutOfRange {
        index: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("shunt value {value} for compensator {index} outside admissible range [{min}, {max}]")]
    ShuntOutOfRange {
        index: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("injection set needs exactly one slack bus")]
    BadInjectionSet,
}

/// Per-element admittance stamps; enough to recover branch flows from a
/// voltage solution.
#[derive(Debug, Clone, Copy)]
pub struct ElementAdmittance {
    pub from: usize,
    pub to: usize,
    pub yff: Complex64,
    pub yft: Complex64,
    pub ytf: Complex64,
    pub ytt: Complex64,
}

/// Dense nodal admittance matrix plus the element stamps it was built from.
#[derive(Debug, Clone)]
pub struct AdmittanceModel {
    pub y: DMatrix<Complex64>,
    /// Branches first, then tap transformers, in case order.
    pub elements: Vec<ElementAdmittance>,
}

/// Build the nodal admittance matrix for `case` with the given transformer
/// taps and switchable shunt values (both within their admissible ranges).
pub fn build_admittance(
    case: &NetworkCase,
    taps: &[f64],
    shunts: &[f64],
) -> Result<AdmittanceModel, AcError> {
    assert_eq!(taps.len(), case.transformers.len(), "one tap per transformer");
    assert_eq!(shunts.len(), case.shunt_comps.len(), "one value per compensator");
    for (i, (t, tr)) in taps.iter().zip(&case.transformers).enumerate() {
        if *t < tr.tap_min - 1e-12 || *t > tr.tap_max + 1e-12 {
            return Err(AcError::TapOutOfRange {
                index: i,
                value: *t,
                min: tr.tap_min,
                max: tr.tap_max,
            });
        }
    }
    for (i, (q, sc)) in shunts.iter().zip(&case.shunt_comps).enumerate() {
        if *q < sc.q_min - 1e-12 || *q > sc.q_max + 1e-12 {
            return Err(AcError::ShuntOutOfRange {
                index: i,
                value: *q,
                min: sc.q_min,
                max: sc.q_max,
            });
        }
    }

    let n = case.ac_buses.len();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    let mut elements = Vec::with_capacity(case.branches.len() + case.transformers.len());

    let idx = |bus: u32| case.ac_index(bus).expect("validated endpoint");

    for br in &case.branches {
        let (i, j) = (idx(br.from), idx(br.to));
        let ys = Complex64::new(br.r, br.x).inv();
        let ych = Complex64::new(0.0, br.b / 2.0);
        let e = ElementAdmittance {
            from: i,
            to: j,
            yff: ys + ych,
            yft: -ys,
            ytf: -ys,
            ytt: ys + ych,
        };
        stamp(&mut y, &e);
        elements.push(e);
    }
    for (k, tr) in case.transformers.iter().enumerate() {
        let (i, j) = (idx(tr.from), idx(tr.to));
        let ys = Complex64::new(tr.r, tr.x).inv();
        let ych = Complex64::new(0.0, tr.b / 2.0);
        let t = taps[k];
        // off-nominal turns ratio on the from side
        let e = ElementAdmittance {
            from: i,
            to: j,
            yff: (ys + ych) / (t * t),
            yft: -ys / t,
            ytf: -ys / t,
            ytt: ys + ych,
        };
        stamp(&mut y, &e);
        elements.push(e);
    }
    for (k, sc) in case.shunt_comps.iter().enumerate() {
        let i = idx(sc.bus);
        y[(i, i)] += Complex64::new(0.0, shunts[k]);
    }
    Ok(AdmittanceModel { y, elements })
}

fn stamp(y: &mut DMatrix<Complex64>, e: &ElementAdmittance) {
    y[(e.from, e.from)] += e.yff;
    y[(e.from, e.to)] += e.yft;
    y[(e.to, e.from)] += e.ytf;
    y[(e.to, e.to)] += e.ytt;
}

/// Specified bus injections and effective bus kinds for one AC solve.
#[derive(Debug, Clone)]
pub struct AcInjectionSet {
    /// Net specified active injection per bus (generation minus load);
    /// the slack entry is ignored.
    pub p_spec: Vec<f64>,
    /// Net specified reactive injection per bus; ignored at slack and PV buses.
    pub q_spec: Vec<f64>,
    /// Effective kinds (a voltage-regulating converter bus becomes PV).
    pub kinds: Vec<BusKind>,
    /// Voltage magnitude targets for the slack and PV buses.
    pub u_target: Vec<f64>,
}

impl AcInjectionSet {
    pub fn slack(&self) -> Result<usize, AcError> {
        let mut it = self.kinds.iter().enumerate().filter(|(_, k)| **k == BusKind::Slack);
        match (it.next(), it.next()) {
            (Some((i, _)), None) => Ok(i),
            _ => Err(AcError::BadInjectionSet),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchFlow {
    pub p_from: f64,
    pub q_from: f64,
    pub p_to: f64,
    pub q_to: f64,
}

impl BranchFlow {
    /// Active power dissipated in the element.
    pub fn loss(&self) -> f64 {
        self.p_from + self.p_to
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcSolution {
    pub u: Vec<f64>,
    /// Bus angles in radians, referenced to the slack.
    pub theta: Vec<f64>,
    /// Realized net complex injections at the converged state.
    pub p_inj: Vec<f64>,
    pub q_inj: Vec<f64>,
    /// Flows per element (branches then transformers, case order).
    pub flows: Vec<BranchFlow>,
    pub slack_index: usize,
    pub iterations: usize,
    pub max_mismatch: f64,
}

impl AcSolution {
    pub fn voltage(&self, i: usize) -> Complex64 {
        Complex64::from_polar(self.u[i], self.theta[i])
    }

    /// Total active loss from element flows.
    pub fn branch_loss(&self) -> f64 {
        self.flows.iter().map(BranchFlow::loss).sum()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub enum StartPoint<'a> {
    /// Magnitudes at their targets (1.0 elsewhere), zero angles.
    #[default]
    Flat,
    Warm(&'a AcSolution),
}

/// Solve the nodal power balance for the given injections.
///
/// Converges when every active mismatch (non-slack buses) and reactive
/// mismatch (PQ buses) is below [`AC_TOLERANCE`] in per unit.
pub fn solve_ac(
    model: &AdmittanceModel,
    inj: &AcInjectionSet,
    start: StartPoint,
) -> Result<AcSolution, AcError> {
    let n = inj.kinds.len();
    assert_eq!(model.y.nrows(), n);
    let slack = inj.slack()?;

    let mut vm = vec![1.0; n];
    let mut va = vec![0.0; n];
    match start {
        StartPoint::Flat => {
            for i in 0..n {
                if inj.kinds[i] != BusKind::Pq {
                    vm[i] = inj.u_target[i];
                }
            }
        }
        StartPoint::Warm(sol) => {
            vm.copy_from_slice(&sol.u);
            va.copy_from_slice(&sol.theta);
            for i in 0..n {
                if inj.kinds[i] != BusKind::Pq {
                    vm[i] = inj.u_target[i];
                }
            }
        }
    }
    va[slack] = 0.0;

    let angle_vars: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let mag_vars: Vec<usize> = (0..n).filter(|&i| inj.kinds[i] == BusKind::Pq).collect();
    let na = angle_vars.len();
    let nm = mag_vars.len();

    let mut iterations = 0;
    loop {
        let v: DVector<Complex64> =
            DVector::from_iterator(n, (0..n).map(|i| Complex64::from_polar(vm[i], va[i])));
        let ibus = &model.y * &v;
        let s: Vec<Complex64> = (0..n).map(|i| v[i] * ibus[i].conj()).collect();

        let mut f = DVector::<f64>::zeros(na + nm);
        for (r, &i) in angle_vars.iter().enumerate() {
            f[r] = s[i].re - inj.p_spec[i];
        }
        for (r, &i) in mag_vars.iter().enumerate() {
            f[na + r] = s[i].im - inj.q_spec[i];
        }
        let max_mismatch = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max_mismatch <= AC_TOLERANCE {
            return Ok(finish(model, vm, va, slack, iterations, max_mismatch));
        }
        if iterations >= AC_MAX_ITERATIONS {
            return Err(AcError::NonConvergence {
                iterations,
                mismatch: max_mismatch,
            });
        }

        // dS/d(theta) = j diag(V) conj(diag(Ibus) - Y diag(V))
        // dS/d(|V|)   = diag(V/|V|) conj(diag(Ibus)) + diag(V) conj(Y diag(V/|V|))
        let mut jac = DMatrix::<f64>::zeros(na + nm, na + nm);
        for (col, &j) in angle_vars.iter().enumerate() {
            for (row, &i) in angle_vars.iter().enumerate() {
                let d = if i == j {
                    Complex64::i() * v[i] * (ibus[i] - model.y[(i, j)] * v[j]).conj()
                } else {
                    -Complex64::i() * v[i] * (model.y[(i, j)] * v[j]).conj()
                };
                jac[(row, col)] = d.re;
            }
            for (row, &i) in mag_vars.iter().enumerate() {
                let d = if i == j {
                    Complex64::i() * v[i] * (ibus[i] - model.y[(i, j)] * v[j]).conj()
                } else {
                    -Complex64::i() * v[i] * (model.y[(i, j)] * v[j]).conj()
                };
                jac[(na + row, col)] = d.im;
            }
        }
        for (col, &j) in mag_vars.iter().enumerate() {
            let ej = v[j] / vm[j];
            for (row, &i) in angle_vars.iter().enumerate() {
                let d = if i == j {
                    ej * ibus[i].conj() + v[i] * (model.y[(i, j)] * ej).conj()
                } else {
                    v[i] * (model.y[(i, j)] * ej).conj()
                };
                jac[(row, na + col)] = d.re;
            }
            for (row, &i) in mag_vars.iter().enumerate() {
                let d = if i == j {
                    ej * ibus[i].conj() + v[i] * (model.y[(i, j)] * ej).conj()
                } else {
                    v[i] * (model.y[(i, j)] * ej).conj()
                };
                jac[(na + row, na + col)] = d.im;
            }
        }

        let lu = jac.lu();
        let dx = lu
            .solve(&f)
            .ok_or(AcError::SingularJacobian(iterations))?;
        for (r, &i) in angle_vars.iter().enumerate() {
            va[i] -= dx[r];
        }
        for (r, &i) in mag_vars.iter().enumerate() {
            vm[i] -= dx[na + r];
        }
        iterations += 1;
    }
}

fn finish(
    model: &AdmittanceModel,
    vm: Vec<f64>,
    va: Vec<f64>,
    slack: usize,
    iterations: usize,
    max_mismatch: f64,
) -> AcSolution {
    let n = vm.len();
    let v: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(vm[i], va[i])).collect();
    let mut p_inj = vec![0.0; n];
    let mut q_inj = vec![0.0; n];
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += model.y[(i, j)] * v[j];
        }
        let s = v[i] * acc.conj();
        p_inj[i] = s.re;
        q_inj[i] = s.im;
    }
    let flows = model
        .elements
        .iter()
        .map(|e| {
            let sf = v[e.from] * (e.yff * v[e.from] + e.yft * v[e.to]).conj();
            let st = v[e.to] * (e.ytf * v[e.from] + e.ytt * v[e.to]).conj();
            BranchFlow {
                p_from: sf.re,
                q_from: sf.im,
                p_to: st.re,
                q_to: st.im,
            }
        })
        .collect();
    AcSolution {
        u: vm,
        theta: va,
        p_inj,
        q_inj,
        flows,
        slack_index: slack,
        iterations,
        max_mismatch,
    }
}

/// Recompute the mismatch vector of a solution from scratch: rebuild the
/// complex injections from the admittance matrix and the solved voltages
/// and compare against the specification.
pub fn recompute_max_mismatch(
    model: &AdmittanceModel,
    inj: &AcInjectionSet,
    sol: &AcSolution,
) -> f64 {
    let n = sol.u.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        if i == sol.slack_index {
            continue;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += model.y[(i, j)] * sol.voltage(j);
        }
        let s = sol.voltage(i) * acc.conj();
        worst = worst.max((s.re - inj.p_spec[i]).abs());
        if inj.kinds[i] == BusKind::Pq {
            worst = worst.max((s.im - inj.q_spec[i]).abs());
        }
    }
    worst
}

/// Injection set for a case operating at explicit generator dispatch with
/// no converter contributions (AC-only operation).
pub fn ac_only_injections(case: &NetworkCase) -> AcInjectionSet {
    let n = case.ac_buses.len();
    let mut p_spec = vec![0.0; n];
    let mut q_spec = vec![0.0; n];
    let mut kinds = Vec::with_capacity(n);
    let mut u_target = vec![1.0; n];
    for (i, b) in case.ac_buses.iter().enumerate() {
        p_spec[i] -= b.p_load;
        q_spec[i] -= b.q_load;
        kinds.push(b.kind);
    }
    for g in &case.generators {
        let i = case.ac_index(g.bus).expect("validated");
        p_spec[i] += g.p_base;
        u_target[i] = g.u_base;
    }
    AcInjectionSet {
        p_spec,
        q_spec,
        kinds,
        u_target,
    }
}
