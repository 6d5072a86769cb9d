//! Steady state of the driven machine.
//!
//! The diagonal part is a mixture of the undriven fixed point `τ` and the strong-coupling
//! state `ρ_I`; the only coherence sits on the virtual qubit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{liouvillian_of, population_generator_of};
use crate::linalg::{least_squares, stationary_distribution, stationary_state, DenseOp, TOL_ABS, TOL_REL};
use crate::model::ModelSpec;
use crate::validate::{decoherence_rate_of, require_valid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub populations: Vec<f64>,
    /// `r0 = τ_Φ0 - τ_Φ1`
    pub r0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongCouplingState {
    pub populations: Vec<f64>,
    pub p_i: f64,
    /// Set when `r0 = 0`: `ρ_I = τ` and `p_I` comes from the linear response of the gauge.
    pub carnot_limit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSteady {
    pub populations: Vec<f64>,
    /// `r = q0 - q1`
    pub r: f64,
    /// `q = q0 + q1`
    pub q: f64,
    pub p_c: f64,
    pub p_i: f64,
    pub r0: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub x: f64,
    pub y: f64,
}

impl Coherence {
    /// `⟨Φ0|ρ|Φ1⟩ = x - iy`
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.x, -self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Xi {
    pub diag: Vec<f64>,
    pub trace: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyReport {
    pub tau: Vec<f64>,
    #[serde(rename = "rho_I")]
    pub rho_i: Vec<f64>,
    #[serde(rename = "p_I")]
    pub p_i: f64,
    pub gamma: f64,
    pub p_c: f64,
    pub rho_d: Vec<f64>,
    pub r: f64,
    pub r0: f64,
    pub coherence: Coherence,
    /// Absent when the gauge is singular (`r0 = 0` or `r = 0`).
    pub xi: Option<Xi>,
    pub carnot_limit: bool,
}

pub(crate) fn thermal_of(w: &DMatrix<f64>, m: &ModelSpec) -> Result<ThermalState> {
    let tau = stationary_distribution(w)?;
    let min = tau.min();
    if min < -TOL_ABS {
        return Err(Error::Numerical(format!("negative population {min:.3e} in the fixed point")));
    }
    Ok(ThermalState { r0: tau[m.vq.0] - tau[m.vq.1], populations: tau.iter().copied().collect() })
}

/// Null vector `τ` of the population generator.
pub fn thermal_fixed_point(m: &ModelSpec) -> Result<ThermalState> {
    require_valid(m)?;
    thermal_of(&population_generator_of(m), m)
}

/// `ρ_I = τ + c w` with `W w = e_Φ0 - e_Φ1`, `Tr w = 0`, and `c` fixed by equal virtual-qubit populations.
pub(crate) fn strong_coupling_of(w: &DMatrix<f64>, m: &ModelSpec, ts: &ThermalState) -> Result<StrongCouplingState> {
    let d = m.dim;
    let (i0, i1) = m.vq;
    let mut a = DMatrix::zeros(d + 1, d);
    a.view_mut((0, 0), (d, d)).copy_from(w);
    a.row_mut(d).fill(1.0);
    let mut b = DVector::zeros(d + 1);
    b[i0] = 1.0;
    b[i1] = -1.0;
    let (resp, residual) = least_squares(&a, &b)?;
    let scale = w.iter().map(|x| x.abs()).fold(1.0, f64::max);
    if residual > TOL_REL * scale {
        return Err(Error::CrossCheck { quantity: "strong-coupling response".into(), deviation: residual });
    }
    let split = resp[i0] - resp[i1];
    if !(split < 0.0) {
        return Err(Error::Numerical(format!("virtual-qubit response {split:.3e} is not negative")));
    }
    let p_i = -2.0 / split;
    let k = -ts.r0 / split;
    let populations: Vec<f64> = ts.populations.iter().zip(resp.iter()).map(|(t, v)| t + k * v).collect();
    Ok(StrongCouplingState { populations, p_i, carnot_limit: ts.r0.abs() <= TOL_ABS })
}

pub fn strong_coupling_state(m: &ModelSpec) -> Result<StrongCouplingState> {
    require_valid(m)?;
    let w = population_generator_of(m);
    let ts = thermal_of(&w, m)?;
    strong_coupling_of(&w, m, &ts)
}

pub(crate) fn diagonal_of(m: &ModelSpec, ts: &ThermalState, si: &StrongCouplingState) -> DiagonalSteady {
    let gamma = decoherence_rate_of(m);
    let delta = m.detuning();
    let p_c = 4.0 * m.g * m.g * gamma / (gamma * gamma + delta * delta);
    let total = si.p_i + p_c;
    let populations: Vec<f64> = ts
        .populations
        .iter()
        .zip(&si.populations)
        .map(|(t, s)| (si.p_i * t + p_c * s) / total)
        .collect();
    let (i0, i1) = m.vq;
    DiagonalSteady {
        r: populations[i0] - populations[i1],
        q: populations[i0] + populations[i1],
        populations,
        p_c,
        p_i: si.p_i,
        r0: ts.r0,
        gamma,
    }
}

pub(crate) fn coherence_of(m: &ModelSpec, ds: &DiagonalSteady) -> Coherence {
    let delta = m.detuning();
    let den = delta * delta + ds.gamma * ds.gamma;
    Coherence { x: m.g * delta * ds.r / den, y: -m.g * ds.gamma * ds.r / den }
}

pub(crate) fn assemble_state(m: &ModelSpec, ds: &DiagonalSteady, coh: &Coherence) -> DenseOp {
    let (i0, i1) = m.vq;
    let mut rho = DenseOp::from_diagonal(&ds.populations).expect("validated").into_matrix();
    rho[(i0, i1)] = coh.value();
    rho[(i1, i0)] = coh.value().conj();
    DenseOp::from_matrix(rho).expect("square")
}

/// Compare against the null vector of the full generator.
pub(crate) fn cross_check(m: &ModelSpec, rho: &DenseOp) -> Result<()> {
    let direct = stationary_state(&liouvillian_of(m))?;
    let deviation = (direct.matrix() - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation > TOL_REL {
        return Err(Error::CrossCheck { quantity: "steady state against the full generator".into(), deviation });
    }
    Ok(())
}

pub fn diagonal_steady_state(m: &ModelSpec) -> Result<DiagonalSteady> {
    require_valid(m)?;
    let w = population_generator_of(m);
    let ts = thermal_of(&w, m)?;
    let si = strong_coupling_of(&w, m, &ts)?;
    let ds = diagonal_of(m, &ts, &si);
    cross_check(m, &assemble_state(m, &ds, &coherence_of(m, &ds)))?;
    Ok(ds)
}

pub fn coherent_block(m: &ModelSpec, ds: &DiagonalSteady) -> Coherence {
    coherence_of(m, ds)
}

/// Full steady state `ρ_d + z|Φ0⟩⟨Φ1| + z̄|Φ1⟩⟨Φ0|`.
pub fn full_steady_state(m: &ModelSpec, ds: &DiagonalSteady, coh: &Coherence) -> DenseOp {
    assemble_state(m, ds, coh)
}

/// `W ξ = ρ_d - (q0 e_Φ1 - q1 e_Φ0)/r` with `ξ_Φ0 = ξ_Φ1`.
pub(crate) fn xi_of(w: &DMatrix<f64>, m: &ModelSpec, ds: &DiagonalSteady) -> Result<Xi> {
    if ds.r.abs() <= TOL_ABS || ds.r0.abs() <= TOL_ABS {
        return Err(Error::SingularGauge);
    }
    let d = m.dim;
    let (i0, i1) = m.vq;
    let (q0, q1) = (ds.populations[i0], ds.populations[i1]);
    let mut a = DMatrix::zeros(d + 1, d);
    a.view_mut((0, 0), (d, d)).copy_from(w);
    a[(d, i0)] = 1.0;
    a[(d, i1)] = -1.0;
    let mut b = DVector::from_column_slice(&ds.populations).resize_vertically(d + 1, 0.0);
    b[i1] -= q0 / ds.r;
    b[i0] += q1 / ds.r;
    let (x, residual) = least_squares(&a, &b)?;
    let scale = b.amax().max(1.0) * w.amax().max(1.0);
    if residual > TOL_REL * scale {
        return Err(Error::CrossCheck { quantity: "xi".into(), deviation: residual });
    }
    Ok(Xi { trace: x.sum(), diag: x.iter().copied().collect() })
}

pub fn solve_xi(m: &ModelSpec, ds: &DiagonalSteady) -> Result<Xi> {
    require_valid(m)?;
    xi_of(&population_generator_of(m), m, ds)
}

pub(crate) fn report_of(m: &ModelSpec) -> Result<SteadyReport> {
    let w = population_generator_of(m);
    let ts = thermal_of(&w, m)?;
    let si = strong_coupling_of(&w, m, &ts)?;
    let ds = diagonal_of(m, &ts, &si);
    let coherence = coherence_of(m, &ds);
    cross_check(m, &assemble_state(m, &ds, &coherence))?;
    let xi = match xi_of(&w, m, &ds) {
        Ok(x) => Some(x),
        Err(Error::SingularGauge) => None,
        Err(e) => return Err(e),
    };
    Ok(SteadyReport {
        tau: ts.populations,
        rho_i: si.populations,
        p_i: si.p_i,
        gamma: ds.gamma,
        p_c: ds.p_c,
        rho_d: ds.populations,
        r: ds.r,
        r0: ds.r0,
        coherence,
        xi,
        carnot_limit: si.carnot_limit,
    })
}

/// Every steady-state ingredient, cross-checked against the full generator.
pub fn steady_report(m: &ModelSpec) -> Result<SteadyReport> {
    require_valid(m)?;
    report_of(m)
}

impl SteadyReport {
    pub fn state(&self, m: &ModelSpec) -> DenseOp {
        let (i0, i1) = m.vq;
        let mut rho = DenseOp::from_diagonal(&self.rho_d).expect("validated").into_matrix();
        rho[(i0, i1)] = self.coherence.value();
        rho[(i1, i0)] = self.coherence.value().conj();
        DenseOp::from_matrix(rho).expect("square")
    }
}

/// Coupling that puts the virtual-qubit bias at `r = ratio · r0`.
pub fn coupling_for_ratio(m: &ModelSpec, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidModel(format!("r/r0 = {ratio} must lie in (0, 1]")));
    }
    let si = strong_coupling_state(m)?;
    let gamma = decoherence_rate_of(m);
    let delta = m.detuning();
    let p_c = si.p_i * (1.0 - ratio) / ratio;
    Ok((p_c * (gamma * gamma + delta * delta) / (4.0 * gamma)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn qubit_closed_forms() {
        let (p, big_r, g, delta) = (1.3, 0.8, 0.27, 0.4);
        let m = zoo::driven_qubit(p, big_r, g, delta).unwrap();
        let s = steady_report(&m).unwrap();
        let r0 = 2.0 * big_r - 1.0;
        assert!((s.r0 - r0).abs() < 1e-14);
        assert!((s.gamma - p / 2.0).abs() < 1e-14);
        assert!((s.p_i - p).abs() < 1e-12);
        let xi = s.xi.unwrap();
        let expected = (s.r + 1.0 / s.r) / (p * r0);
        assert!((xi.trace - expected).abs() < 1e-10 * expected.abs());
    }

    #[test]
    fn undriven_limit_is_thermal() {
        let m = zoo::two_qubit_transport(1.0, 2.0, 0.3, 0.6, 0.0).unwrap();
        let s = steady_report(&m).unwrap();
        for (a, b) in s.rho_d.iter().zip(&s.tau) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn ratio_coupling_hits_target() {
        let m = zoo::three_qubit_fridge([1.0, 1.7, 0.7], [1.0, 0.7, 1.4], [0.3, 0.6, 0.2], 0.0).unwrap();
        let g = coupling_for_ratio(&m, 0.4).unwrap();
        let s = steady_report(&m.with_coupling(g)).unwrap();
        assert!((s.r / s.r0 - 0.4).abs() < 1e-10);
    }

    #[test]
    fn carnot_point_flags_limit() {
        let m = zoo::driven_qubit(1.0, 0.5, 0.2, 0.0).unwrap();
        let s = steady_report(&m).unwrap();
        assert!(s.carnot_limit);
        assert!(s.xi.is_none());
        assert!((s.p_i - 1.0).abs() < 1e-12);
    }
}
