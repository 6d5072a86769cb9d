//! Full counting statistics of one reservoir's photon exchange.
//!
//! The counting field multiplies that reservoir's gain sandwich by `e^{-χ}` and its loss
//! sandwich by `e^{χ}`, so `λ'(0)` is the net rate of `Γ` jumps.

use nalgebra::Schur;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{jump_terms, liouvillian_of};
use crate::linalg::{c, solve_traceless, stationary_state, trace_row, CMatrix, CVector, Superoperator, TOL_ABS};
use crate::model::ModelSpec;

/// Step ladder for the central differences.
pub const CHI_STEPS: [f64; 3] = [0.1, 0.05, 0.025];
/// Minimum separation between the leading eigenvalue and the rest of the spectrum.
pub const MIN_GAP: f64 = 1e-8;
/// Largest counting field the oracle accepts.
pub const MAX_CHI: f64 = 1.0;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct FcsResult {
    pub reservoir: String,
    pub chi_step: f64,
    pub J_num: f64,
    pub Var_num: f64,
    pub J_err: f64,
    pub Var_err: f64,
    pub lambda_samples: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCumulants {
    pub mean: f64,
    pub variance: f64,
}

fn checked(m: &ModelSpec) -> Result<()> {
    let issues = m.structural_issues();
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidModel(issues.join("; ")))
    }
}

/// Counting-field generator of reservoir `label`.
///
/// Only structural validity is required, so the classical counterpart can be counted too.
pub fn tilted_liouvillian(m: &ModelSpec, label: &str, chi: f64) -> Result<Superoperator> {
    checked(m)?;
    let i = m.reservoir_index(label)?;
    let res = &m.reservoirs[i];
    let (gain, loss) = jump_terms(res);
    let l0 = liouvillian_of(m);
    let gain_w = res.p * res.occupation * ((-chi).exp() - 1.0);
    let loss_w = res.p * res.complement() * (chi.exp() - 1.0);
    Ok(l0 + gain.scaled(gain_w) + loss.scaled(loss_w))
}

/// First and second χ-derivatives of the tilted generator at zero.
pub fn counting_derivatives(m: &ModelSpec, label: &str) -> Result<(Superoperator, Superoperator)> {
    checked(m)?;
    let res = &m.reservoirs[m.reservoir_index(label)?];
    let (gain, loss) = jump_terms(res);
    let (a, b) = (res.p * res.occupation, res.p * res.complement());
    let l1 = gain.scaled(-a) + loss.scaled(b);
    let (gain, loss) = jump_terms(res);
    let l2 = gain.scaled(a) + loss.scaled(b);
    Ok((l1, l2))
}

/// Bordered Newton refinement of an eigenpair, normalized by the trace functional.
fn refine(s: &CMatrix, dim: usize, mut lambda: Complex64) -> Result<Complex64> {
    let n = s.nrows();
    let t = trace_row(dim);
    let id = CMatrix::identity(n, n);
    // Initial vector from one bordered solve; vec(I) is never in the range of S - λ.
    let mut a = CMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&(s - &id * lambda));
    a.view_mut((0, n), (n, 1)).copy_from(&t.transpose());
    a.view_mut((n, 0), (1, n)).copy_from(&t);
    let mut rhs = CVector::zeros(n + 1);
    rhs[n] = c(1.0);
    let sol = a.lu().solve(&rhs).ok_or_else(|| Error::Numerical("eigenvector border is singular".into()))?;
    let mut v: CVector = sol.rows(0, n).into_owned();
    for _ in 0..4 {
        let res = s * &v - &v * lambda;
        let norm = (&t * &v)[0] - c(1.0);
        if res.norm() < 1e-15 * (1.0 + s.norm()) && norm.norm() < 1e-15 {
            break;
        }
        let mut j = CMatrix::zeros(n + 1, n + 1);
        j.view_mut((0, 0), (n, n)).copy_from(&(s - &id * lambda));
        j.view_mut((0, n), (n, 1)).copy_from(&(-&v));
        j.view_mut((n, 0), (1, n)).copy_from(&t);
        let mut f = CVector::zeros(n + 1);
        f.rows_mut(0, n).copy_from(&(-res));
        f[n] = -norm;
        let step = j.lu().solve(&f).ok_or_else(|| Error::Numerical("Newton step is singular".into()))?;
        v += step.rows(0, n);
        lambda += step[n];
    }
    Ok(lambda)
}

/// All eigenvalues via a capped Schur iteration.
///
/// Unbounded QR sweeps at machine-epsilon tolerance can stall on the block structure of a
/// Liouvillian, so a stalled solve is retried on a fixed random unitary rotation.
fn spectrum(s: &CMatrix) -> Result<Vec<Complex64>> {
    let collect = |m: CMatrix| {
        Schur::try_new(m, SCHUR_EPS, SCHUR_MAX_ITER).and_then(|sch| sch.eigenvalues()).map(|v| v.iter().copied().collect())
    };
    if let Some(e) = collect(s.clone()) {
        return Ok(e);
    }
    let n = s.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let q = g.qr().q();
    collect(q.adjoint() * s * &q).ok_or_else(|| Error::Numerical("eigenvalue solve did not converge".into()))
}

fn leading(s: &Superoperator, chi: f64, near: Option<f64>) -> Result<f64> {
    let eig = spectrum(s.matrix())?;
    let mut idx: Vec<usize> = (0..eig.len()).collect();
    idx.sort_by(|&a, &b| eig[b].re.total_cmp(&eig[a].re));
    let top = eig[idx[0]];
    let gap = top.re - eig[idx[1]].re;
    if gap < MIN_GAP {
        return Err(Error::GapCollapse { chi, gap });
    }
    if let Some(prev) = near {
        // Continuation: the tracked branch must still be the leading one.
        let nearest = idx
            .iter()
            .copied()
            .min_by(|&a, &b| (eig[a] - c(prev)).norm().total_cmp(&(eig[b] - c(prev)).norm()))
            .expect("nonempty spectrum");
        if nearest != idx[0] {
            return Err(Error::GapCollapse { chi, gap });
        }
    }
    let lambda = refine(s.matrix(), s.dim(), top)?;
    if lambda.im.abs() > TOL_ABS {
        return Err(Error::Numerical(format!("leading eigenvalue has imaginary part {:.3e}", lambda.im)));
    }
    Ok(lambda.re)
}

/// Eigenvalue with the largest real part, refined and checked to be real and isolated.
pub fn dominant_eigenvalue(s: &Superoperator) -> Result<f64> {
    leading(s, f64::NAN, None)
}

/// `λ(χ)` on the given grid, tracked outward from `χ = 0` on each side.
pub fn lambda_curve(m: &ModelSpec, label: &str, chis: &[f64]) -> Result<Vec<(f64, f64)>> {
    if let Some(&bad) = chis.iter().find(|x| x.abs() > MAX_CHI || !x.is_finite()) {
        return Err(Error::InvalidModel(format!("counting field {bad} outside [-{MAX_CHI}, {MAX_CHI}]")));
    }
    let mut order: Vec<usize> = (0..chis.len()).collect();
    order.sort_by(|&a, &b| chis[a].abs().total_cmp(&chis[b].abs()));
    let mut out = vec![(0.0, 0.0); chis.len()];
    let (mut pos, mut neg) = (0.0, 0.0);
    for i in order {
        let chi = chis[i];
        let prev = if chi >= 0.0 { pos } else { neg };
        let lambda = leading(&tilted_liouvillian(m, label, chi)?, chi, Some(prev))?;
        if chi >= 0.0 {
            pos = lambda;
        } else {
            neg = lambda;
        }
        out[i] = (chi, lambda);
    }
    Ok(out)
}

fn richardson(d: [f64; 3]) -> (f64, f64) {
    let a = (4.0 * d[1] - d[0]) / 3.0;
    let b = (4.0 * d[2] - d[1]) / 3.0;
    let best = (16.0 * b - a) / 15.0;
    (best, (best - b).abs())
}

/// Mean and variance of the photon current from finite differences of `λ(χ)`.
pub fn cumulants_numeric(m: &ModelSpec, label: &str) -> Result<FcsResult> {
    let l0 = leading(&tilted_liouvillian(m, label, 0.0)?, 0.0, None)?;
    if l0.abs() > TOL_ABS {
        return Err(Error::Numerical(format!("λ(0) = {l0:.3e} is not zero")));
    }
    let grid: Vec<f64> = CHI_STEPS.iter().flat_map(|&h| [h, -h]).collect();
    let samples = lambda_curve(m, label, &grid)?;
    let mut first = [0.0; 3];
    let mut second = [0.0; 3];
    for (k, &h) in CHI_STEPS.iter().enumerate() {
        let (lp, lm) = (samples[2 * k].1, samples[2 * k + 1].1);
        first[k] = (lp - lm) / (2.0 * h);
        second[k] = (lp - 2.0 * l0 + lm) / (h * h);
    }
    let (j, j_err) = richardson(first);
    let (var, var_err) = richardson(second);
    let mut lambda_samples = samples;
    lambda_samples.push((0.0, l0));
    lambda_samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(FcsResult {
        reservoir: label.to_string(),
        chi_step: CHI_STEPS[CHI_STEPS.len() - 1],
        J_num: j,
        Var_num: var,
        J_err: j_err,
        Var_err: var_err,
        lambda_samples,
    })
}

/// Perturbative cumulants: `J = Tr L1 ρ`, `Var = Tr L2 ρ + 2 Tr L1 ϱ1` with `L0 ϱ1 = Jρ - L1 ρ`.
pub fn cumulants_exact(m: &ModelSpec, label: &str) -> Result<ExactCumulants> {
    checked(m)?;
    let (l1, l2) = counting_derivatives(m, label)?;
    let l0 = liouvillian_of(m);
    let rho = stationary_state(&l0)?;
    let t = trace_row(m.dim);
    let v = rho.vectorize();
    let l1v = l1.matrix() * &v;
    let mean = (&t * &l1v)[0].re;
    let y = &v * c(mean) - &l1v;
    let varrho = solve_traceless(&l0, &rho, &y)?;
    let variance = (&t * (l2.matrix() * &v))[0].re + 2.0 * (&t * (l1.matrix() * varrho))[0].re;
    Ok(ExactCumulants { mean, variance })
}
