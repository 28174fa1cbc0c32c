//! VSC steady-state power characteristic and station loss model.
//!
//! Orientation: the converter current flows from the AC grid into the
//! converter, `I = (U_s - U_c) / (r + jx)`, so `p_s > 0` means the AC grid
//! feeds the converter (rectifier operation). This is the opposite of the
//! grid-injection convention used for case-file setpoints; the coupled
//! solver flips the sign exactly once at that boundary.

use num_complex::Complex64;

/// Powers at both ends of the coupling impedance:
/// `(p_s, q_s)` at the PCC and `(p_c, q_c)` at the converter node.
///
/// Computed from complex arithmetic on the coupling branch; the
/// difference `p_s - p_c` is exactly the resistive coupling loss when
/// power flows from the AC side.
pub fn converter_flow(u_s: Complex64, u_c: Complex64, r: f64, x: f64) -> (f64, f64, f64, f64) {
    debug_assert!(r >= 0.0 && x > 0.0);
    let i = (u_s - u_c) / Complex64::new(r, x);
    let s_s = u_s * i.conj();
    let s_c = u_c * i.conj();
    (s_s.re, s_s.im, s_c.re, s_c.im)
}

/// Converter current magnitude for the loss model.
pub fn converter_current(p_c: f64, q_c: f64, u_c: f64) -> f64 {
    (p_c * p_c + q_c * q_c).sqrt() / (3.0f64.sqrt() * u_c)
}

/// Station loss `a + b I_c + c I_c^2`. `u_c` must be positive.
pub fn converter_loss(p_c: f64, q_c: f64, u_c: f64, a: f64, b: f64, c: f64) -> f64 {
    assert!(u_c > 0.0, "converter voltage must be positive");
    let i_c = converter_current(p_c, q_c, u_c);
    a + b * i_c + c * i_c * i_c
}

/// Converged converter operating state.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConverterState {
    /// PCC voltage phasor.
    pub u_s: Complex64,
    /// Converter node voltage phasor.
    pub u_c: Complex64,
    /// PCC powers, positive from the AC grid into the converter.
    pub p_s: f64,
    pub q_s: f64,
    /// Converter-node powers, same orientation.
    pub p_c: f64,
    pub q_c: f64,
    /// Current magnitude through the valves.
    pub i_c: f64,
    /// Station loss.
    pub loss: f64,
    /// Power carried across the valves (equal to `p_c`).
    pub p_dc: f64,
    /// Power injected into the DC network after station losses.
    pub p_dc_net: f64,
}

impl ConverterState {
    /// Build the full state from the PCC phasor and the powers the
    /// converter exchanges with the grid (converter-inward orientation).
    pub fn from_pcc(
        u_s: Complex64,
        p_s: f64,
        q_s: f64,
        r: f64,
        x: f64,
        a: f64,
        b: f64,
        c: f64,
    ) -> ConverterState {
        let s_s = Complex64::new(p_s, q_s);
        let i = (s_s / u_s).conj();
        let u_c = u_s - Complex64::new(r, x) * i;
        let s_c = u_c * i.conj();
        let i_c = converter_current(s_c.re, s_c.im, u_c.norm());
        let loss = a + b * i_c + c * i_c * i_c;
        ConverterState {
            u_s,
            u_c,
            p_s,
            q_s,
            p_c: s_c.re,
            q_c: s_c.im,
            i_c,
            loss,
            p_dc: s_c.re,
            p_dc_net: s_c.re - loss,
        }
    }

    /// Resistive loss in the coupling impedance.
    pub fn coupling_loss(&self) -> f64 {
        self.p_s - self.p_c
    }

    /// PCC injection into the AC grid (reporting convention).
    pub fn pcc_injection(&self) -> (f64, f64) {
        (-self.p_s, -self.q_s)
    }
}
