//! Named parameter families over the reference machines.
//!
//! Each family exposes scalar parameters by name, so sweeps, searches and the command line
//! can address any of them. A few derived parameters reshape the others:
//!
//! - `r0` moves one occupation so the undriven bias `P0 - P1` takes the given value
//!   (qubit: `R`; two-qubit: `R1,2 = (1 ± r0)/2`; qutrit and fridge: `R0` resp. `R1`);
//! - `r0_pos` (two-qubit) sets `R1 = ½`, `R2 = ½ - r0`;
//! - `R` (fridge) sets all three occupations before `r0` is applied;
//! - `p_ratio` sets `p1 = p_ratio · p0` (qutrit) or `p2 = p3 = p_ratio · p1` (fridge);
//! - `r_ratio` replaces `g` by the coupling that gives `r = r_ratio · r0`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::steady::coupling_for_ratio;
use crate::zoo;

pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Qubit,
    TwoQubit,
    Qutrit,
    Fridge,
    QutritGlobal,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qubit" => Ok(Self::Qubit),
            "two-qubit" => Ok(Self::TwoQubit),
            "qutrit" => Ok(Self::Qutrit),
            "fridge" => Ok(Self::Fridge),
            "qutrit-global" => Ok(Self::QutritGlobal),
            other => Err(Error::InvalidModel(format!("unknown model family `{other}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Qubit => "qubit",
            Self::TwoQubit => "two-qubit",
            Self::Qutrit => "qutrit",
            Self::Fridge => "fridge",
            Self::QutritGlobal => "qutrit-global",
        })
    }
}

/// Extra admissibility conditions for searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// Qutrit levels `E0`, `E1` on the same side of `E2`: `(R0 - ½)(R1 - ½) ≥ 0`.
    EngineOrdering,
}

impl Constraint {
    pub fn admits(&self, resolved: &Params) -> bool {
        match self {
            Self::EngineOrdering => match (resolved.get("R0"), resolved.get("R1")) {
                (Some(&a), Some(&b)) => zoo::qutrit_engine_ordering(a, b),
                _ => true,
            },
        }
    }
}

const QUBIT: &[(&str, f64)] = &[("p", 1.0), ("R", 0.3), ("g", 0.25), ("delta", 0.0)];
const TWO_QUBIT: &[(&str, f64)] = &[("p1", 1.0), ("p2", 1.0), ("R1", 0.8), ("R2", 0.2), ("g", 0.3)];
const QUTRIT: &[(&str, f64)] = &[
    ("E0", 1.0),
    ("E1", 0.5),
    ("E2", 0.0),
    ("p0", 1.0),
    ("p1", 0.83),
    ("R0", 0.946),
    ("R1", 0.129),
    ("g", 0.2),
    ("delta", 0.0),
];
const FRIDGE: &[(&str, f64)] = &[
    ("w1", 1.0),
    ("w3", 0.7),
    ("p1", 1.0),
    ("p2", 0.7),
    ("p3", 1.4),
    ("R1", 0.3),
    ("R2", 0.6),
    ("R3", 0.2),
    ("g", 0.1),
];
const QUTRIT_GLOBAL: &[(&str, f64)] = &[
    ("E0", 1.0),
    ("E1", 0.4),
    ("E2", 0.0),
    ("g", 0.1),
    ("omega_d", 0.6),
    ("p0", 1.0),
    ("p1", 1.0),
    ("R0", 0.8),
    ("R1", 0.2),
];

impl Family {
    pub const ALL: [Family; 5] = [Self::Qubit, Self::TwoQubit, Self::Qutrit, Self::Fridge, Self::QutritGlobal];

    fn base(&self) -> &'static [(&'static str, f64)] {
        match self {
            Self::Qubit => QUBIT,
            Self::TwoQubit => TWO_QUBIT,
            Self::Qutrit => QUTRIT,
            Self::Fridge => FRIDGE,
            Self::QutritGlobal => QUTRIT_GLOBAL,
        }
    }

    fn derived(&self) -> &'static [&'static str] {
        match self {
            Self::Qubit => &["r0", "r_ratio"],
            Self::TwoQubit => &["r0", "r0_pos", "r_ratio"],
            Self::Qutrit => &["r0", "p_ratio", "r_ratio"],
            Self::Fridge => &["r0", "R", "p_ratio", "r_ratio"],
            Self::QutritGlobal => &[],
        }
    }

    pub fn defaults(&self) -> Params {
        self.base().iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    /// Every parameter name the family accepts.
    pub fn parameter_names(&self) -> Vec<&'static str> {
        self.base().iter().map(|&(k, _)| k).chain(self.derived().iter().copied()).collect()
    }

    /// Fill in defaults and apply derived parameters; the result holds only base names.
    pub fn resolve(&self, overrides: &Params) -> Result<Params> {
        let names = self.parameter_names();
        if let Some(bad) = overrides.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::InvalidModel(format!(
                "family `{self}` has no parameter `{bad}` (accepted: {})",
                names.join(", ")
            )));
        }
        if let Some((k, v)) = overrides.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidModel(format!("parameter `{k}` = {v} is not finite")));
        }
        let mut p = self.defaults();
        for (k, v) in overrides {
            if p.contains_key(k) {
                p.insert(k.clone(), *v);
            }
        }
        let get = |k: &str| overrides.get(k).copied();
        match self {
            Self::Qubit => {
                if let Some(r0) = get("r0") {
                    p.insert("R".into(), 0.5 * (1.0 + r0));
                }
            }
            Self::TwoQubit => {
                if let Some(r0) = get("r0") {
                    p.insert("R1".into(), 0.5 * (1.0 + r0));
                    p.insert("R2".into(), 0.5 * (1.0 - r0));
                }
                if let Some(r0) = get("r0_pos") {
                    p.insert("R1".into(), 0.5);
                    p.insert("R2".into(), 0.5 - r0);
                }
            }
            Self::Qutrit => {
                if let Some(k) = get("p_ratio") {
                    p.insert("p1".into(), k * p["p0"]);
                }
                if let Some(r0) = get("r0") {
                    let r1 = p["R1"];
                    p.insert("R0".into(), (r0 + r1) / (1.0 + r0 * r1));
                }
            }
            Self::Fridge => {
                if let Some(r) = get("R") {
                    for k in ["R1", "R2", "R3"] {
                        p.insert(k.into(), r);
                    }
                }
                if let Some(k) = get("p_ratio") {
                    let p1 = p["p1"];
                    p.insert("p2".into(), k * p1);
                    p.insert("p3".into(), k * p1);
                }
                if let Some(r0) = get("r0") {
                    let (r2, r3) = (p["R2"], p["R3"]);
                    let (a, b) = (r2 * (1.0 - r3), (1.0 - r2) * r3);
                    p.insert("R1".into(), (r0 + a) / (a + b));
                }
            }
            Self::QutritGlobal => {}
        }
        Ok(p)
    }

    fn assemble(&self, p: &Params) -> Result<ModelSpec> {
        match self {
            Self::Qubit => zoo::driven_qubit(p["p"], p["R"], p["g"], p["delta"]),
            Self::TwoQubit => zoo::two_qubit_transport(p["p1"], p["p2"], p["R1"], p["R2"], p["g"]),
            Self::Qutrit => zoo::driven_qutrit(
                [p["E0"], p["E1"], p["E2"]],
                p["p0"],
                p["p1"],
                p["R0"],
                p["R1"],
                p["g"],
                p["E0"] - p["E1"] - p["delta"],
            ),
            Self::Fridge => zoo::three_qubit_fridge(
                [p["w1"], p["w1"] + p["w3"], p["w3"]],
                [p["p1"], p["p2"], p["p3"]],
                [p["R1"], p["R2"], p["R3"]],
                p["g"],
            ),
            Self::QutritGlobal => zoo::global_to_local([p["E0"], p["E1"], p["E2"]], p["g"], p["omega_d"])?
                .local_model(p["p0"], p["p1"], p["R0"], p["R1"]),
        }
    }

    /// Resolved parameters (with the coupling actually used) and the model.
    pub fn build_resolved(&self, overrides: &Params) -> Result<(Params, ModelSpec)> {
        let mut p = self.resolve(overrides)?;
        let mut m = self.assemble(&p)?;
        if let Some(&ratio) = overrides.get("r_ratio") {
            let g = coupling_for_ratio(&m, ratio)?;
            m = m.with_coupling(g);
            p.insert("g".into(), g);
        }
        Ok((p, m))
    }

    pub fn build(&self, overrides: &Params) -> Result<ModelSpec> {
        Ok(self.build_resolved(overrides)?.1)
    }
}

/// Parameter map from `(name, value)` pairs.
pub fn params<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Params {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
