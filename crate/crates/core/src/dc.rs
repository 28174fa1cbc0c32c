//! DC network solver.
//!
//! Newton iteration on the DC nodal equations
//! `P_i = U_i * sum_j (U_i - U_j) / r_ij` for every non-slack bus of each
//! island; slack buses hold a fixed voltage and absorb the island's power
//! imbalance. Monopolar model with a single series resistance per line.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::NetworkCase;

pub const DC_TOLERANCE: f64 = 1e-10;
pub const DC_MAX_ITERATIONS: usize = 20;

#[derive(Debug, Error)]
pub enum DcError {
    #[error("dc network solve did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("singular DC Jacobian")]
    Singular,
    #[error("dc island without a voltage-controlling bus")]
    NoSlack,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DcSolution {
    /// Bus voltages, indexed like `case.dc_buses`.
    pub u: Vec<f64>,
    /// Line currents (from -> to), indexed like `case.dc_lines`.
    pub i_line: Vec<f64>,
    /// Realized injection at every bus (slack entries carry the balance).
    pub p_injection: Vec<f64>,
    /// Total line losses.
    pub line_loss: f64,
    pub iterations: usize,
}

impl DcSolution {
    /// Largest nodal balance residual, recomputed from the solution.
    pub fn max_residual(&self, case: &NetworkCase) -> f64 {
        let mut res = vec![0.0f64; self.u.len()];
        for (k, l) in case.dc_lines.iter().enumerate() {
            let (i, j) = (case.dc_index(l.from).unwrap(), case.dc_index(l.to).unwrap());
            res[i] += self.i_line[k] * self.u[i];
            res[j] -= self.i_line[k] * self.u[j];
        }
        res.iter()
            .zip(&self.p_injection)
            .fold(0.0f64, |m, (flow, inj)| m.max((inj - flow).abs()))
    }
}

/// Solve the DC network given fixed injections at non-slack buses.
///
/// `p_injection[i]` is the power fed into the network at DC bus index `i`
/// (ignored for slack buses). `slack_voltage[i]` is `Some(u)` exactly for
/// the buses held at a fixed voltage; every island must contain one.
pub fn solve_dc_network(
    case: &NetworkCase,
    p_injection: &[f64],
    slack_voltage: &[Option<f64>],
) -> Result<DcSolution, DcError> {
    let n = case.dc_buses.len();
    assert_eq!(p_injection.len(), n);
    assert_eq!(slack_voltage.len(), n);

    // conductance matrix of the DC graph
    let mut g = DMatrix::<f64>::zeros(n, n);
    for l in &case.dc_lines {
        let (i, j) = (case.dc_index(l.from).unwrap(), case.dc_index(l.to).unwrap());
        let y = 1.0 / l.r;
        g[(i, i)] += y;
        g[(j, j)] += y;
        g[(i, j)] -= y;
        g[(j, i)] -= y;
    }

    for island in case.dc_islands() {
        if !island
            .iter()
            .any(|id| slack_voltage[case.dc_index(*id).unwrap()].is_some())
        {
            return Err(DcError::NoSlack);
        }
    }

    let mut u: Vec<f64> = case
        .dc_buses
        .iter()
        .enumerate()
        .map(|(i, b)| slack_voltage[i].unwrap_or(b.u_set))
        .collect();
    let free: Vec<usize> = (0..n).filter(|&i| slack_voltage[i].is_none()).collect();

    let residual = |u: &[f64]| -> DVector<f64> {
        DVector::from_iterator(
            free.len(),
            free.iter().map(|&i| {
                let flow: f64 = (0..n).map(|j| g[(i, j)] * u[j]).sum::<f64>() * u[i];
                flow - p_injection[i]
            }),
        )
    };

    let mut iterations = 0;
    if !free.is_empty() {
        loop {
            let f = residual(&u);
            if f.amax() <= DC_TOLERANCE {
                break;
            }
            if iterations >= DC_MAX_ITERATIONS {
                return Err(DcError::NonConvergence(iterations));
            }
            let mut jac = DMatrix::<f64>::zeros(free.len(), free.len());
            for (r, &i) in free.iter().enumerate() {
                for (c, &j) in free.iter().enumerate() {
                    jac[(r, c)] = if i == j {
                        (0..n).map(|k| g[(i, k)] * u[k]).sum::<f64>() + g[(i, i)] * u[i]
                    } else {
                        g[(i, j)] * u[i]
                    };
                }
            }
            let dx = jac.lu().solve(&f).ok_or(DcError::Singular)?;
            for (r, &i) in free.iter().enumerate() {
                u[i] -= dx[r];
            }
            iterations += 1;
        }
    }

    let mut i_line = Vec::with_capacity(case.dc_lines.len());
    let mut line_loss = 0.0;
    for l in &case.dc_lines {
        let (i, j) = (case.dc_index(l.from).unwrap(), case.dc_index(l.to).unwrap());
        let current = (u[i] - u[j]) / l.r;
        line_loss += current * current * l.r;
        i_line.push(current);
    }
    let p_realized: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| g[(i, j)] * u[j]).sum::<f64>() * u[i])
        .collect();

    Ok(DcSolution {
        u,
        i_line,
        p_injection: p_realized,
        line_loss,
        iterations,
    })
}
