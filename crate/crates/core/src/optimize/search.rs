use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Constraint, Family, Params};
use crate::tur::{evaluate, TurReport};

/// Points with `|r0|` below this are treated as invalid: the uncertainty product is 0/0 there
/// and rounding produces arbitrarily negative values.
pub const CARNOT_GUARD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub starts: usize,
    pub max_iter: usize,
    /// Simplex diameter, in box-normalized coordinates, at which a start stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { starts: 20, max_iter: 500, tol: 1e-7, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn cmp_min(a: &Minimum, b: &Minimum) -> std::cmp::Ordering {
    a.value.total_cmp(&b.value).then_with(|| {
        a.x.iter().zip(&b.x).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// Nelder–Mead on the unit box `[0, 1]^n`; trial points are projected back into the box and
/// `None` from the objective counts as `+∞`.
pub fn nelder_mead(f: &dyn Fn(&[f64]) -> Option<f64>, start: &[f64], max_iter: usize, tol: f64) -> Minimum {
    let n = start.len();
    let eval = |x: &[f64]| f(x).filter(|v| v.is_finite()).unwrap_or(f64::INFINITY);
    let clamp = |x: Vec<f64>| x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<f64>>();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let s0 = clamp(start.to_vec());
    simplex.push((s0.clone(), eval(&s0)));
    for k in 0..n {
        let mut v = s0.clone();
        v[k] += if v[k] + 0.1 <= 1.0 { 0.1 } else { -0.1 };
        let fv = eval(&v);
        simplex.push((v, fv));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| clamp(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < tol {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> =
            (0..n).map(|k| simplex[..n].iter().map(|(v, _)| v[k]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let reflected = lerp(&centroid, &worst.0, -1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst.0, -2.0);
            let fe = eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = lerp(&centroid, &reflected, 0.5);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = lerp(&centroid, &worst.0, 0.5);
            let fc = eval(&c);
            (c, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v = lerp(&best, &vertex.0, 0.5);
            let fv = eval(&v);
            *vertex = (v, fv);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iterations, converged }
}

/// Seeded multi-start over a box. Start points are drawn sequentially from the seed, so
/// the outcome does not depend on how the starts are scheduled.
pub fn multi_start(
    f: &(dyn Fn(&[f64]) -> Option<f64> + Sync),
    bounds: &[Bound],
    opts: &SearchOptions,
) -> Result<(Minimum, Vec<Minimum>)> {
    for b in bounds {
        if !(b.min.is_finite() && b.max.is_finite() && b.min < b.max) {
            return Err(Error::InvalidModel(format!("bounds of `{}` must be finite with min < max", b.name)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.starts).map(|_| bounds.iter().map(|_| rng.gen::<f64>()).collect()).collect();
    let to_box = |u: &[f64]| -> Vec<f64> { u.iter().zip(bounds).map(|(t, b)| b.min + t * (b.max - b.min)).collect() };
    let g = |u: &[f64]| f(&to_box(u));
    let mut runs: Vec<Minimum> = starts
        .par_iter()
        .map(|u| {
            let mut m = nelder_mead(&g, u, opts.max_iter, opts.tol);
            m.x = to_box(&m.x);
            m
        })
        .collect();
    runs.retain(|m| m.value.is_finite());
    let best = runs.iter().min_by(|a, b| cmp_min(a, b)).cloned().ok_or(Error::AllStartsFailed)?;
    Ok((best, runs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub family: Family,
    /// Free-parameter values at the optimum.
    pub free: Params,
    /// All resolved model parameters, with the coupling that was used.
    pub params: Params,
    pub report: TurReport,
    pub starts_succeeded: usize,
    pub starts_converged: usize,
}

/// Minimize `Q` over `free` with everything else taken from `fixed`.
pub fn minimize_q(
    family: Family,
    fixed: &Params,
    free: &[Bound],
    constraints: &[Constraint],
    opts: &SearchOptions,
) -> Result<Optimum> {
    let assemble = |x: &[f64]| -> Params {
        let mut p = fixed.clone();
        for (b, v) in free.iter().zip(x) {
            p.insert(b.name.clone(), *v);
        }
        p
    };
    // Surface a misspelled parameter before the search swallows it as an invalid point.
    family.resolve(&assemble(&free.iter().map(|b| 0.5 * (b.min + b.max)).collect::<Vec<_>>()))?;
    let objective = |x: &[f64]| -> Option<f64> {
        let (resolved, m) = family.build_resolved(&assemble(x)).ok()?;
        if !constraints.iter().all(|c| c.admits(&resolved)) {
            return None;
        }
        let rep = evaluate(&m).ok()?;
        (rep.r0.abs() > CARNOT_GUARD).then_some(rep.Q)
    };
    let (best, runs) = multi_start(&objective, free, opts)?;
    let point = assemble(&best.x);
    let (params, m) = family.build_resolved(&point)?;
    let report = evaluate(&m)?;
    Ok(Optimum {
        family,
        free: free.iter().zip(&best.x).map(|(b, v)| (b.name.clone(), *v)).collect(),
        params,
        report,
        starts_succeeded: runs.len(),
        starts_converged: runs.iter().filter(|r| r.converged).count(),
    })
}
