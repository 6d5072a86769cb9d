//! Model validation and photon-count derivation.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{apply_dissipator, population_generator_of};
use crate::linalg::{stationary_distribution, DenseOp, TOL_ABS, TOL_REL};
use crate::model::ModelSpec;

/// Paths explored before falling back to level potentials.
const PATH_BUDGET: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, issues: Vec<String>) -> Self {
        Self { name: name.to_string(), passed: issues.is_empty(), detail: issues.join("; ") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub checks: Vec<Check>,
    /// Photon count of each reservoir, in reservoir order, when derivable.
    pub photon_counts: Option<Vec<i32>>,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn summary(&self) -> String {
        self.failures()
            .iter()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

pub fn validate_model(m: &ModelSpec) -> ValidationReport {
    let structural = m.structural_issues();
    if !structural.is_empty() {
        return ValidationReport {
            valid: false,
            checks: vec![Check::new("structure", structural)],
            photon_counts: None,
        };
    }
    let mut checks = vec![Check::new("structure", vec![])];
    checks.push(Check::new("coherence confinement", confinement_issues(m)));
    let connected = is_connected(m);
    checks.push(Check::new(
        "connectivity",
        if connected { vec![] } else { vec!["transition graph is disconnected".into()] },
    ));
    let counts = if connected { photon_counts_of(m) } else { Err(Error::InvalidModel("disconnected".into())) };
    checks.push(Check::new(
        "photon counts",
        match &counts {
            Ok(_) => vec![],
            Err(e) => vec![e.to_string()],
        },
    ));
    checks.push(Check::new("undriven equilibrium", equilibrium_issues(m)));
    let valid = checks.iter().all(|c| c.passed);
    ValidationReport { valid, checks, photon_counts: counts.ok() }
}

pub(crate) fn require_valid(m: &ModelSpec) -> Result<()> {
    let report = validate_model(m);
    if report.valid {
        Ok(())
    } else {
        Err(Error::InvalidModel(report.summary()))
    }
}

/// `D_i(|Φ0⟩⟨Φ1|)` must stay at `(Φ0, Φ1)`, and populations must not leak into coherences.
fn confinement_issues(m: &ModelSpec) -> Vec<String> {
    let (i0, i1) = m.vq;
    let d = m.dim;
    let unit = DenseOp::ket_bra(d, i0, i1).expect("validated");
    let diagonal: Vec<(usize, usize)> = (0..d).map(|k| (k, k)).collect();
    let mut issues = Vec::new();
    for r in &m.reservoirs {
        let out = apply_dissipator(r, &unit);
        let leak = out.max_outside(&[(i0, i1)]);
        if leak > TOL_ABS {
            issues.push(format!("reservoir `{}` moves the virtual-qubit coherence (leak {leak:.2e})", r.label));
        }
        for k in 0..d {
            let out = apply_dissipator(r, &DenseOp::ket_bra(d, k, k).expect("validated"));
            let leak = out.max_outside(&diagonal);
            if leak > TOL_ABS {
                issues.push(format!("reservoir `{}` creates coherences from level {k}", r.label));
                break;
            }
        }
    }
    issues
}

struct Edge {
    to: usize,
    reservoir: usize,
    sign: i32,
}

fn adjacency(m: &ModelSpec) -> Vec<Vec<Edge>> {
    let mut adj: Vec<Vec<Edge>> = (0..m.dim).map(|_| Vec::new()).collect();
    for (i, r) in m.reservoirs.iter().enumerate() {
        for (k, l) in r.transitions() {
            if k == l {
                continue;
            }
            // A jump of Γ takes l to k.
            adj[l].push(Edge { to: k, reservoir: i, sign: 1 });
            adj[k].push(Edge { to: l, reservoir: i, sign: -1 });
        }
    }
    adj
}

fn is_connected(m: &ModelSpec) -> bool {
    let mut parent: Vec<usize> = (0..m.dim).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut root = x;
        while p[root] != root {
            root = p[root];
        }
        let mut cur = x;
        while p[cur] != root {
            let next = p[cur];
            p[cur] = root;
            cur = next;
        }
        root
    }
    for r in &m.reservoirs {
        for (k, l) in r.transitions() {
            let (a, b) = (find(&mut parent, k), find(&mut parent, l));
            parent[a] = b;
        }
    }
    let root = find(&mut parent, 0);
    (0..m.dim).all(|k| find(&mut parent, k) == root)
}

/// Photon counts from every simple path `Φ0 → Φ1`; `None` if the budget runs out.
fn enumerate_paths(m: &ModelSpec) -> Option<Result<Vec<i32>>> {
    let adj = adjacency(m);
    let (start, target) = m.vq;
    let nres = m.reservoirs.len();
    let mut found: Option<Vec<i32>> = None;
    let mut queue = VecDeque::new();
    queue.push_back((start, 1u32 << start, vec![0i32; nres]));
    let mut expanded = 0usize;
    while let Some((node, visited, counts)) = queue.pop_front() {
        if node == target {
            match &found {
                None => found = Some(counts),
                Some(first) if *first != counts => {
                    return Some(Err(Error::InvalidModel(format!(
                        "paths from Φ0 to Φ1 disagree on photon counts ({first:?} vs {counts:?})"
                    ))))
                }
                Some(_) => {}
            }
            continue;
        }
        for e in &adj[node] {
            if visited & (1 << e.to) != 0 {
                continue;
            }
            expanded += 1;
            if expanded > PATH_BUDGET {
                return None;
            }
            let mut next = counts.clone();
            next[e.reservoir] += e.sign;
            queue.push_back((e.to, visited | (1 << e.to), next));
        }
    }
    Some(found.ok_or_else(|| Error::InvalidModel("Φ1 is unreachable from Φ0".into())))
}

/// Level potentials: consistent counts exist iff every cycle carries zero net count.
fn potential_counts(m: &ModelSpec) -> Result<Vec<i32>> {
    let adj = adjacency(m);
    let nres = m.reservoirs.len();
    let mut pot: Vec<Option<Vec<i32>>> = vec![None; m.dim];
    pot[m.vq.0] = Some(vec![0; nres]);
    let mut queue = VecDeque::from([m.vq.0]);
    while let Some(node) = queue.pop_front() {
        let here = pot[node].clone().expect("visited");
        for e in &adj[node] {
            let mut next = here.clone();
            next[e.reservoir] += e.sign;
            match &pot[e.to] {
                None => {
                    pot[e.to] = Some(next);
                    queue.push_back(e.to);
                }
                Some(existing) if *existing != next => {
                    return Err(Error::InvalidModel("a cycle of the transition graph carries net photons".into()))
                }
                Some(_) => {}
            }
        }
    }
    pot[m.vq.1].clone().ok_or_else(|| Error::InvalidModel("Φ1 is unreachable from Φ0".into()))
}

fn photon_counts_of(m: &ModelSpec) -> Result<Vec<i32>> {
    let counts = match enumerate_paths(m) {
        Some(res) => res?,
        None => potential_counts(m)?,
    };
    for (r, &n) in m.reservoirs.iter().zip(&counts) {
        if let Some(declared) = r.photons {
            if declared != n {
                return Err(Error::InvalidModel(format!(
                    "reservoir `{}` declares n = {declared} but paths give {n}",
                    r.label
                )));
            }
        }
    }
    Ok(counts)
}

/// Photon count of each reservoir, in reservoir order.
pub fn derive_photon_counts(m: &ModelSpec) -> Result<Vec<i32>> {
    let issues = m.structural_issues();
    if !issues.is_empty() {
        return Err(Error::InvalidModel(issues.join("; ")));
    }
    if !is_connected(m) {
        return Err(Error::InvalidModel("transition graph is disconnected".into()));
    }
    photon_counts_of(m)
}

/// Undriven steady state must be unique and carry no reservoir current.
fn equilibrium_issues(m: &ModelSpec) -> Vec<String> {
    let w = population_generator_of(m);
    let tau = match stationary_distribution(&w) {
        Ok(t) => t,
        Err(e) => return vec![e.to_string()],
    };
    let tau: Vec<f64> = tau.iter().copied().collect();
    m.reservoirs
        .iter()
        .filter_map(|r| {
            let j = jump_flux(r, &tau);
            (j.abs() > TOL_ABS).then(|| format!("reservoir `{}` carries current {j:.3e} without drive", r.label))
        })
        .collect()
}

/// Net rate of `Γ` jumps for a diagonal state: `p(R̄⟨Γ†Γ⟩ - R⟨ΓΓ†⟩)`.
pub(crate) fn jump_flux(r: &crate::model::Reservoir, populations: &[f64]) -> f64 {
    let g = r.jump.matrix();
    let gdg = g.adjoint() * g;
    let ggd = g * g.adjoint();
    let (mut a, mut b) = (0.0, 0.0);
    for (k, &q) in populations.iter().enumerate() {
        a += gdg[(k, k)].re * q;
        b += ggd[(k, k)].re * q;
    }
    r.p * (r.complement() * a - r.occupation * b)
}

/// `γ = ½ Σ_i p_i [R_i(⟨Φ0|ΓΓ†|Φ0⟩ + ⟨Φ1|ΓΓ†|Φ1⟩) + R̄_i(⟨Φ0|Γ†Γ|Φ0⟩ + ⟨Φ1|Γ†Γ|Φ1⟩)]`
pub fn decoherence_rate(m: &ModelSpec) -> Result<f64> {
    require_valid(m)?;
    Ok(decoherence_rate_of(m))
}

pub(crate) fn decoherence_rate_of(m: &ModelSpec) -> f64 {
    let (i0, i1) = m.vq;
    m.reservoirs
        .iter()
        .map(|r| {
            let g = r.jump.matrix();
            let ggd = g * g.adjoint();
            let gdg = g.adjoint() * g;
            let up = ggd[(i0, i0)].re + ggd[(i1, i1)].re;
            let down = gdg[(i0, i0)].re + gdg[(i1, i1)].re;
            0.5 * r.p * (r.occupation * up + r.complement() * down)
        })
        .sum()
}

/// Relative agreement helper shared by the cross-checks.
pub(crate) fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL_REL * (1.0 + a.abs().max(b.abs()))
}
