use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{TOL_ABS, TOL_REL};
use crate::model::ModelSpec;
use crate::steady::{coupling_for_ratio, strong_coupling_state, thermal_fixed_point};
use crate::tur::{affinity, evaluate};
use crate::validate::decoherence_rate;

/// `r0` ladder for the reversible-limit extrapolation.
pub const CARNOT_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

const FIT_RATIOS: [f64; 3] = [0.25, 0.5, 0.75];
const HELD_OUT_RATIO: f64 = 0.6;

/// `Q_d = ln(P0/P1)(P/r0)[1 + (r0 - r)(A r + B)]` and its optimum over `r` at `Δ = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticProfile {
    #[serde(rename = "P")]
    pub p_sum: f64,
    pub r0: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    pub r_star: f64,
    #[serde(rename = "Q_min")]
    pub q_min: f64,
    #[serde(rename = "F_c")]
    pub f_c: f64,
    #[serde(rename = "F_d")]
    pub f_d: f64,
    pub carnot_coeff: f64,
    #[serde(rename = "p_I")]
    pub p_i: f64,
    pub gamma: f64,
    pub affinity: f64,
}

impl QuadraticProfile {
    /// `Q_d` predicted at bias `r`.
    pub fn q_d(&self, r: f64) -> f64 {
        self.scale() * (1.0 + (self.r0 - r) * (self.a * r + self.b))
    }

    /// Total `Q` predicted at bias `r`.
    pub fn q(&self, r: f64) -> f64 {
        self.scale() * (1.0 + (self.r0 - r) * (self.a1 * r + self.b))
    }

    fn scale(&self) -> f64 {
        self.affinity * self.p_sum / self.r0
    }

    /// `p_c` needed to reach bias `r`.
    pub fn p_c_at(&self, r: f64) -> f64 {
        self.p_i * (self.r0 - r) / r
    }

    /// Whether the optimum satisfies `0 < p_c ≤ p_I`, i.e. `r*/r0 ∈ [½, 1)`.
    pub fn optimum_in_weak_drive(&self) -> bool {
        let p_c = self.p_c_at(self.r_star);
        p_c > 0.0 && p_c <= self.p_i * (1.0 + TOL_REL)
    }

    /// Whether the optimum satisfies `0 < r*/r0 ≤ ½`, i.e. `p_c ≥ p_I`.
    pub fn optimum_in_strong_drive(&self) -> bool {
        let x = self.r_star / self.r0;
        x > 0.0 && x <= 0.5 * (1.0 + TOL_REL)
    }

    /// Whether the stationary point is a minimum (`A1 < 0`).
    pub fn is_minimum(&self) -> bool {
        self.a1 < 0.0
    }
}

/// Conditioned `Q_d` evaluation at `r = ratio · r0`.
fn q_d_at(base: &ModelSpec, ratio: f64) -> Result<(f64, f64)> {
    let g = coupling_for_ratio(base, ratio)?;
    let rep = evaluate(&base.with_coupling(g))?;
    Ok((rep.r, rep.Q_d))
}

/// Fit the profile from three couplings and verify it at a fourth.
pub fn quadratic_profile(base: &ModelSpec) -> Result<QuadraticProfile> {
    if base.detuning().abs() > TOL_ABS {
        return Err(Error::InvalidModel(format!("profile needs Δ = 0, found {}", base.detuning())));
    }
    let ts = thermal_fixed_point(base)?;
    if ts.r0.abs() <= TOL_ABS {
        return Err(Error::CarnotLimit(ts.r0));
    }
    let si = strong_coupling_state(base)?;
    let gamma = decoherence_rate(base)?;
    let (i0, i1) = base.vq;
    let p_sum = ts.populations[i0] + ts.populations[i1];
    let l = affinity(base, &ts.populations);
    let r0 = ts.r0;
    let scale = l * p_sum / r0;

    let mut pts = [(0.0, 0.0); 3];
    for (k, &ratio) in FIT_RATIOS.iter().enumerate() {
        let (r, qd) = q_d_at(base, ratio)?;
        pts[k] = (r, qd / scale - 1.0);
    }
    // f(r) = c0 + c1 r + c2 r² through three points (Newton divided differences).
    let [(x0, y0), (x1, y1), (x2, y2)] = pts;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let c2 = (d12 - d01) / (x2 - x0);
    let c1 = d01 - c2 * (x0 + x1);
    let c0 = y0 - c1 * x0 - c2 * x0 * x0;
    let a = -c2;
    let b = c0 / r0;
    let slope_defect = (c1 - (a * r0 - b)).abs();
    let slope_scale = c1.abs().max((a * r0).abs()).max(b.abs()).max(f64::MIN_POSITIVE);
    if slope_defect > 1e-6 * slope_scale + 1e-12 {
        return Err(Error::NotQuadratic { residual: slope_defect });
    }

    let a1 = a - si.p_i / (p_sum * gamma);
    let prof = {
        let r_star = r0 / 2.0 - b / (2.0 * a1);
        let f_d = (r0 - r_star) * (a * r_star + b) / (r0 * r0);
        let f_c = -(r0 - r_star) * r_star * si.p_i / (p_sum * gamma * r0 * r0);
        QuadraticProfile {
            p_sum,
            r0,
            a,
            b,
            a1,
            r_star,
            q_min: scale * (1.0 + (a1 * r0 + b).powi(2) / (4.0 * a1)),
            f_c,
            f_d,
            carnot_coeff: f_c + f_d + 1.0 / (3.0 * p_sum * p_sum),
            p_i: si.p_i,
            gamma,
            affinity: l,
        }
    };

    let (r, qd) = q_d_at(base, HELD_OUT_RATIO)?;
    let residual = (prof.q_d(r) - qd).abs() / qd.abs();
    if residual > TOL_REL {
        return Err(Error::NotQuadratic { residual });
    }
    Ok(prof)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarnotEstimate {
    /// `c` in `Q_min ≈ 2(1 + c r0²)`.
    pub coefficient: f64,
    /// `δ = 2c` in `Q_min ≈ 2 + δ r0²`.
    pub delta: f64,
    pub samples: Vec<(f64, f64)>,
    pub error: f64,
}

/// Reversible-limit coefficient along `r0 ↦ path(r0)`, extrapolated over `CARNOT_STEPS`.
pub fn carnot_criterion(path: impl Fn(f64) -> Result<ModelSpec>) -> Result<CarnotEstimate> {
    let mut samples = Vec::with_capacity(CARNOT_STEPS.len());
    for &r0 in &CARNOT_STEPS {
        samples.push((r0, quadratic_profile(&path(r0)?)?.carnot_coeff));
    }
    let e: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let first = [2.0 * e[1] - e[0], 2.0 * e[2] - e[1]];
    let coefficient = (4.0 * first[1] - first[0]) / 3.0;
    Ok(CarnotEstimate { coefficient, delta: 2.0 * coefficient, samples, error: (coefficient - first[1]).abs() })
}
