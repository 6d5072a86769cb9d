//! Machine specification: energies, virtual qubit, drive and reservoirs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, check_dim, DenseOp, TOL_ABS, TOL_REL};

#[derive(Clone, Debug, PartialEq)]
pub struct Reservoir {
    pub label: String,
    /// Coupling rate `p > 0`.
    pub p: f64,
    /// Occupation `R ∈ (0, 1)`; the complement is `1 - R`.
    pub occupation: f64,
    /// Jump operator `Γ`, a combination of `|k⟩⟨l|` sharing one gap `E_l - E_k`.
    pub jump: DenseOp,
    /// Photon count declared by the user; derived counts take precedence.
    pub photons: Option<i32>,
    pub omega: Option<f64>,
    pub temperature: Option<f64>,
}

impl Reservoir {
    pub fn new(label: impl Into<String>, p: f64, occupation: f64, jump: DenseOp) -> Self {
        Self {
            label: label.into(),
            p,
            occupation,
            jump,
            photons: None,
            omega: None,
            temperature: None,
        }
    }

    /// Reservoir whose jump is `Σ |k⟩⟨l|` over the given `(k, l)` pairs.
    pub fn from_transitions(
        label: impl Into<String>,
        p: f64,
        occupation: f64,
        dim: usize,
        transitions: &[(usize, usize)],
    ) -> Result<Self> {
        let mut jump = DenseOp::zeros(dim)?.into_matrix();
        for &(k, l) in transitions {
            if k >= dim || l >= dim {
                return Err(Error::InvalidModel(format!("transition ({k}, {l}) outside dimension {dim}")));
            }
            jump[(k, l)] += c(1.0);
        }
        Ok(Self::new(label, p, occupation, DenseOp::from_matrix(jump)?))
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = Some(omega);
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = Some(t);
        self
    }

    pub fn with_photons(mut self, n: i32) -> Self {
        self.photons = Some(n);
        self
    }

    pub fn complement(&self) -> f64 {
        1.0 - self.occupation
    }

    pub fn transitions(&self) -> Vec<(usize, usize)> {
        self.jump.entries(TOL_ABS).into_iter().map(|(k, l, _)| (k, l)).collect()
    }

    /// Common gap `E_l - E_k` of the jump entries, if they agree.
    pub fn gap(&self, energies: &[f64]) -> Option<f64> {
        let gaps: Vec<f64> = self.transitions().iter().map(|&(k, l)| energies[l] - energies[k]).collect();
        let first = *gaps.first()?;
        let scale = 1.0 + first.abs();
        gaps.iter().all(|g| (g - first).abs() <= TOL_REL * scale).then_some(first)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub dim: usize,
    pub energies: Vec<f64>,
    /// Virtual qubit `(Φ0, Φ1)`.
    pub vq: (usize, usize),
    pub g: f64,
    pub omega_d: f64,
    pub reservoirs: Vec<Reservoir>,
}

impl ModelSpec {
    /// `Δ = E_Φ0 - E_Φ1 - ω_d`
    pub fn detuning(&self) -> f64 {
        self.energies[self.vq.0] - self.energies[self.vq.1] - self.omega_d
    }

    pub fn reservoir_index(&self, label: &str) -> Result<usize> {
        self.reservoirs
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| Error::UnknownReservoir(label.to_string()))
    }

    pub fn with_coupling(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))?;
        Self::try_from(doc)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&ModelDoc::try_from(self)?).map_err(|e| Error::Numerical(e.to_string()))
    }

    /// Problems that make the model unusable, independent of any solve.
    pub fn structural_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if check_dim(self.dim).is_err() {
            issues.push(format!("dimension {} outside 2..=16", self.dim));
            return issues;
        }
        if self.energies.len() != self.dim {
            issues.push(format!("expected {} energies, found {}", self.dim, self.energies.len()));
            return issues;
        }
        if self.energies.iter().any(|e| !e.is_finite()) {
            issues.push("energies must be finite".into());
        }
        let (i0, i1) = self.vq;
        if i0 >= self.dim || i1 >= self.dim || i0 == i1 {
            issues.push(format!("virtual qubit ({i0}, {i1}) must be two distinct levels"));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            issues.push(format!("coupling g = {} must be finite and non-negative", self.g));
        }
        if !self.omega_d.is_finite() {
            issues.push("drive frequency must be finite".into());
        }
        if self.reservoirs.is_empty() {
            issues.push("at least one reservoir is required".into());
        }
        for (k, r) in self.reservoirs.iter().enumerate() {
            if r.label.is_empty() {
                issues.push(format!("reservoir {k} has an empty label"));
            }
            if self.reservoirs[..k].iter().any(|o| o.label == r.label) {
                issues.push(format!("duplicate reservoir label `{}`", r.label));
            }
            if !(r.p.is_finite() && r.p > 0.0) {
                issues.push(format!("reservoir `{}`: p = {} must be positive", r.label, r.p));
            }
            if !(r.occupation > 0.0 && r.occupation < 1.0) {
                issues.push(format!("reservoir `{}`: R = {} must lie in (0, 1)", r.label, r.occupation));
            }
            if r.jump.dim() != self.dim {
                issues.push(format!("reservoir `{}`: jump operator has dimension {}", r.label, r.jump.dim()));
                continue;
            }
            if r.transitions().is_empty() {
                issues.push(format!("reservoir `{}`: jump operator vanishes", r.label));
                continue;
            }
            match r.gap(&self.energies) {
                None => issues.push(format!("reservoir `{}`: jump entries do not share one gap", r.label)),
                Some(gap) => {
                    if let Some(w) = r.omega {
                        if (w - gap).abs() > TOL_REL * (1.0 + gap.abs()) {
                            issues.push(format!("reservoir `{}`: omega {w} differs from the jump gap {gap}", r.label));
                        }
                    }
                }
            }
            if let (Some(w), Some(t)) = (r.omega, r.temperature) {
                let expected = 1.0 / (1.0 + (w / t).exp());
                if (expected - r.occupation).abs() > TOL_REL {
                    issues.push(format!(
                        "reservoir `{}`: R = {} is not 1/(1+exp(omega/T)) = {expected}",
                        r.label, r.occupation
                    ));
                }
            }
        }
        issues
    }
}

/// Wire format. Field names are fixed and unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub dim: usize,
    pub energies: Vec<f64>,
    pub vq: [usize; 2],
    pub g: f64,
    pub omega_d: f64,
    pub reservoirs: Vec<ReservoirDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirDoc {
    pub label: String,
    pub p: f64,
    #[serde(rename = "R")]
    pub occupation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// `(k, l)` pairs of `|k⟩⟨l|` entries.
    pub gamma: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i32>,
}

impl TryFrom<ModelDoc> for ModelSpec {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        check_dim(doc.dim)?;
        let reservoirs = doc
            .reservoirs
            .into_iter()
            .map(|r| {
                let pairs: Vec<(usize, usize)> = r.gamma.iter().map(|&[k, l]| (k, l)).collect();
                let mut res = Reservoir::from_transitions(r.label, r.p, r.occupation, doc.dim, &pairs)?;
                res.omega = r.omega;
                res.temperature = r.temperature;
                res.photons = r.n;
                Ok(res)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelSpec {
            dim: doc.dim,
            energies: doc.energies,
            vq: (doc.vq[0], doc.vq[1]),
            g: doc.g,
            omega_d: doc.omega_d,
            reservoirs,
        })
    }
}

impl TryFrom<&ModelSpec> for ModelDoc {
    type Error = Error;

    fn try_from(m: &ModelSpec) -> Result<Self> {
        let reservoirs = m
            .reservoirs
            .iter()
            .map(|r| {
                let entries = r.jump.entries(TOL_ABS);
                if entries.iter().any(|(_, _, z)| (z - c(1.0)).norm() > TOL_ABS) {
                    return Err(Error::InvalidModel(format!(
                        "reservoir `{}` has non-unit jump coefficients and cannot be written as JSON",
                        r.label
                    )));
                }
                Ok(ReservoirDoc {
                    label: r.label.clone(),
                    p: r.p,
                    occupation: r.occupation,
                    omega: r.omega,
                    temperature: r.temperature,
                    gamma: entries.iter().map(|&(k, l, _)| [k, l]).collect(),
                    n: r.photons,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelDoc {
            dim: m.dim,
            energies: m.energies.clone(),
            vq: [m.vq.0, m.vq.1],
            g: m.g,
            omega_d: m.omega_d,
            reservoirs,
        })
    }
}
