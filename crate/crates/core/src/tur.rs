//! Currents, entropy production and the diagonal/coherent split of the uncertainty product.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseOp, TOL_ABS, TOL_REL};
use crate::model::{ModelSpec, Reservoir};
use crate::steady::{report_of, DiagonalSteady, SteadyReport, ThermalState};
use crate::validate::{close, derive_photon_counts, require_valid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct TurReport {
    pub J_c: f64,
    pub J: BTreeMap<String, f64>,
    pub sigma: f64,
    pub var_d: BTreeMap<String, f64>,
    pub var_c: BTreeMap<String, f64>,
    pub Q_d: f64,
    pub Q_c: f64,
    pub Q: f64,
    /// Reservoir the uncertainty product was evaluated on.
    pub reservoir: String,
    pub r: f64,
    pub r0: f64,
    pub p_c: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Currents {
    pub j_c: f64,
    /// Photon current of each reservoir, in reservoir order.
    pub per_reservoir: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceParts {
    /// `(reservoir index, Var_d, Var_c)` for every reservoir with `n ≠ 0`.
    pub entries: Vec<(usize, f64, f64)>,
}

/// Net `Γ`-jump rate `p Tr[(R̄ Γ†Γ - R ΓΓ†) ρ]`.
pub fn trace_current(res: &Reservoir, rho: &DenseOp) -> f64 {
    let g = res.jump.matrix();
    let op = g.adjoint() * g * num_complex::Complex64::new(res.complement(), 0.0)
        - g * g.adjoint() * num_complex::Complex64::new(res.occupation, 0.0);
    res.p * (op * rho.matrix()).trace().re
}

pub(crate) fn currents_of(m: &ModelSpec, counts: &[i32], ds: &DiagonalSteady, rho: &DenseOp) -> Result<Currents> {
    let j_c = 0.5 * ds.p_c * ds.r;
    let mut per_reservoir = Vec::with_capacity(m.reservoirs.len());
    for (res, &n) in m.reservoirs.iter().zip(counts) {
        let j = -(n as f64) * j_c;
        let direct = trace_current(res, rho);
        if (j - direct).abs() > TOL_REL * j_c.abs() + 1e-14 {
            return Err(Error::CrossCheck { quantity: format!("current of `{}`", res.label), deviation: j - direct });
        }
        per_reservoir.push(j);
    }
    Ok(Currents { j_c, per_reservoir })
}

/// `J_c = p_c r / 2` and `J_i = -n_i J_c`, each checked against the trace formula.
pub fn currents(m: &ModelSpec, ds: &DiagonalSteady) -> Result<Currents> {
    require_valid(m)?;
    let counts = derive_photon_counts(m)?;
    let coh = crate::steady::coherent_block(m, ds);
    currents_of(m, &counts, ds, &crate::steady::full_steady_state(m, ds, &coh))
}

/// `ln(P0/P1)`
pub fn affinity(m: &ModelSpec, tau: &[f64]) -> f64 {
    (tau[m.vq.0] / tau[m.vq.1]).ln()
}

pub(crate) fn entropy_of(m: &ModelSpec, tau: &[f64], cur: &Currents) -> Result<f64> {
    let sigma = cur.j_c * affinity(m, tau);
    let direct: f64 = m
        .reservoirs
        .iter()
        .zip(&cur.per_reservoir)
        .map(|(r, j)| j * (r.complement() / r.occupation).ln())
        .sum();
    if !close(sigma, direct) {
        return Err(Error::CrossCheck { quantity: "entropy production".into(), deviation: sigma - direct });
    }
    if sigma < -TOL_ABS {
        return Err(Error::Numerical(format!("negative entropy production {sigma:.3e}")));
    }
    Ok(sigma)
}

/// `σ = J_c ln(P0/P1)`, checked against `Σ J_i ln(R̄_i/R_i)`.
pub fn entropy_production(m: &ModelSpec, ts: &ThermalState, ds: &DiagonalSteady) -> Result<f64> {
    let cur = currents(m, ds)?;
    entropy_of(m, &ts.populations, &cur)
}

/// Shape factor `(γ² - Δ²)/(γ² + Δ²)` of the coherent part.
pub(crate) fn lorentz(gamma: f64, delta: f64) -> f64 {
    (gamma * gamma - delta * delta) / (gamma * gamma + delta * delta)
}

pub(crate) fn variances_of(m: &ModelSpec, counts: &[i32], ss: &SteadyReport) -> Result<VarianceParts> {
    if ss.r0.abs() <= TOL_ABS {
        return Err(Error::CarnotLimit(ss.r0));
    }
    let xi = ss.xi.as_ref().ok_or(Error::SingularGauge)?;
    let (i0, i1) = m.vq;
    let q = ss.rho_d[i0] + ss.rho_d[i1];
    let j_c = 0.5 * ss.p_c * ss.r;
    let shape = lorentz(ss.gamma, m.detuning());
    let entries = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n != 0)
        .map(|(i, &n)| {
            let n = n as f64;
            let j = -n * j_c;
            let var_d = 0.5 * ss.p_c * q * n * n - 2.0 * j * j * xi.trace;
            let var_c = -(2.0 / ss.gamma) * shape * (ss.r / ss.r0) * j * j;
            (i, var_d, var_c)
        })
        .collect();
    Ok(VarianceParts { entries })
}

pub fn variance_decomposition(m: &ModelSpec, ss: &SteadyReport) -> Result<VarianceParts> {
    require_valid(m)?;
    variances_of(m, &derive_photon_counts(m)?, ss)
}

pub(crate) fn uncertainty_of(m: &ModelSpec, counts: &[i32], ss: &SteadyReport) -> Result<TurReport> {
    if ss.r0.abs() <= TOL_ABS {
        return Err(Error::CarnotLimit(ss.r0));
    }
    let ds = DiagonalSteady {
        populations: ss.rho_d.clone(),
        r: ss.r,
        q: ss.rho_d[m.vq.0] + ss.rho_d[m.vq.1],
        p_c: ss.p_c,
        p_i: ss.p_i,
        r0: ss.r0,
        gamma: ss.gamma,
    };
    let cur = currents_of(m, counts, &ds, &ss.state(m))?;
    let sigma = entropy_of(m, &ss.tau, &cur)?;
    let parts = variances_of(m, counts, ss)?;
    let xi = ss.xi.as_ref().ok_or(Error::SingularGauge)?;
    let l = affinity(m, &ss.tau);
    let q_d = l * (ds.q / ss.r - ss.p_c * ss.r * xi.trace);
    let q_c = -l * (ss.p_c * ss.r * ss.r / (ss.r0 * ss.gamma)) * lorentz(ss.gamma, m.detuning());

    let &(first, _, _) = parts
        .entries
        .first()
        .ok_or_else(|| Error::InvalidModel("no reservoir exchanges photons with the drive".into()))?;
    // Every n ≠ 0 reservoir must give the same uncertainty product.
    for &(i, vd, vc) in &parts.entries {
        let j = cur.per_reservoir[i];
        if j.abs() > TOL_ABS * TOL_ABS {
            let qi = sigma * (vd + vc) / (j * j);
            if !close(qi, q_d + q_c) {
                return Err(Error::CrossCheck {
                    quantity: format!("uncertainty product from `{}`", m.reservoirs[i].label),
                    deviation: qi - q_d - q_c,
                });
            }
        }
    }

    let label = |i: usize| m.reservoirs[i].label.clone();
    Ok(TurReport {
        J_c: cur.j_c,
        J: cur.per_reservoir.iter().enumerate().map(|(i, &j)| (label(i), j)).collect(),
        sigma,
        var_d: parts.entries.iter().map(|&(i, v, _)| (label(i), v)).collect(),
        var_c: parts.entries.iter().map(|&(i, _, v)| (label(i), v)).collect(),
        Q_d: q_d,
        Q_c: q_c,
        Q: q_d + q_c,
        reservoir: label(first),
        r: ss.r,
        r0: ss.r0,
        p_c: ss.p_c,
    })
}

/// `Q = Q_d + Q_c`, evaluated on the first reservoir with `n ≠ 0`.
pub fn uncertainty(m: &ModelSpec, ss: &SteadyReport) -> Result<TurReport> {
    require_valid(m)?;
    uncertainty_of(m, &derive_photon_counts(m)?, ss)
}

/// Validate, solve and evaluate in one call.
pub fn evaluate(m: &ModelSpec) -> Result<TurReport> {
    require_valid(m)?;
    let counts = derive_photon_counts(m)?;
    let ss = report_of(m)?;
    uncertainty_of(m, &counts, &ss)
}

/// Undriven copy of `m` plus a symmetric reservoir `Γ_c = |Φ1⟩⟨Φ0|` of strength `p_c`.
pub fn classical_counterpart(m: &ModelSpec) -> Result<ModelSpec> {
    let ds = crate::steady::diagonal_steady_state(m)?;
    let mut label = String::from("c");
    while m.reservoirs.iter().any(|r| r.label == label) {
        label.push('\'');
    }
    if ds.p_c <= 0.0 {
        return Err(Error::InvalidModel("counterpart needs g > 0".into()));
    }
    let mut out = m.with_coupling(0.0);
    let (i0, i1) = m.vq;
    out.reservoirs.push(Reservoir::from_transitions(label, ds.p_c, 0.5, m.dim, &[(i1, i0)])?.with_photons(-1));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn qubit_closed(r0: f64, r: f64) -> (f64, f64) {
        let l = ((1.0 + r0) / (1.0 - r0)).ln();
        (l / r0 * (1.0 - r * (r0 - r)), -l * 2.0 / r0 * r * (r0 - r))
    }

    #[test]
    fn qubit_matches_closed_form() {
        let big_r = 0.8;
        let m0 = zoo::driven_qubit(1.0, big_r, 0.0, 0.0).unwrap();
        let g = crate::steady::coupling_for_ratio(&m0, 0.3).unwrap();
        let rep = evaluate(&m0.with_coupling(g)).unwrap();
        let (qd, qc) = qubit_closed(2.0 * big_r - 1.0, rep.r);
        assert!((rep.Q_d - qd).abs() < 1e-10);
        assert!((rep.Q_c - qc).abs() < 1e-10);
    }

    #[test]
    fn two_qubit_currents_cancel() {
        let m = zoo::two_qubit_transport(1.0, 0.6, 0.8, 0.3, 0.4).unwrap();
        let rep = evaluate(&m).unwrap();
        assert!((rep.J["1"] + rep.J["2"]).abs() < 1e-14);
        assert!(rep.sigma > 0.0);
    }

    #[test]
    fn detuning_at_gamma_kills_coherent_part() {
        let m = zoo::driven_qubit(2.0, 0.8, 0.3, 1.0).unwrap();
        let rep = evaluate(&m).unwrap();
        assert!(rep.Q_c.abs() < 1e-15);
        assert!(rep.var_c["h"].abs() < 1e-15);
    }

    #[test]
    fn large_detuning_makes_coherence_costly() {
        let m = zoo::driven_qubit(1.0, 0.8, 0.3, 2.0).unwrap();
        assert!(evaluate(&m).unwrap().Q_c > 0.0);
    }

    #[test]
    fn carnot_point_refused() {
        let m = zoo::driven_qubit(1.0, 0.5, 0.3, 0.0).unwrap();
        assert!(matches!(evaluate(&m), Err(Error::CarnotLimit(_))));
    }

    #[test]
    fn report_round_trips() {
        let m = zoo::driven_qubit(1.0, 0.3, 0.25, 0.0).unwrap();
        let rep = evaluate(&m).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<TurReport>(&text).unwrap(), rep);
    }
}
