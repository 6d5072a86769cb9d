#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use turbox::{params, thermal_fixed_point, validate_model, Family, ModelSpec, Params};

/// Smallest |r0| accepted for a random draw.
pub const MIN_BIAS: f64 = 0.02;

pub struct Draw {
    pub family: Family,
    pub params: Params,
    pub model: ModelSpec,
}

fn draw_params(family: Family, rng: &mut ChaCha8Rng) -> Params {
    let mut u = |a: f64, b: f64| rng.gen_range(a..b);
    match family {
        Family::Qubit => params([("p", u(0.2, 2.0)), ("R", u(0.05, 0.95)), ("g", u(0.02, 0.6)), ("delta", u(-0.8, 0.8))]),
        Family::TwoQubit => params([
            ("p1", u(0.2, 2.0)),
            ("p2", u(0.2, 2.0)),
            ("R1", u(0.05, 0.95)),
            ("R2", u(0.05, 0.95)),
            ("g", u(0.02, 0.6)),
        ]),
        Family::Qutrit => params([
            ("E0", u(0.8, 1.5)),
            ("E1", u(0.2, 0.6)),
            ("p0", u(0.2, 2.0)),
            ("p1", u(0.2, 2.0)),
            ("R0", u(0.05, 0.95)),
            ("R1", u(0.05, 0.95)),
            ("g", u(0.02, 0.6)),
            ("delta", u(-0.8, 0.8)),
        ]),
        Family::Fridge => params([
            ("w1", u(0.5, 1.5)),
            ("w3", u(0.3, 1.2)),
            ("p1", u(0.2, 2.0)),
            ("p2", u(0.2, 2.0)),
            ("p3", u(0.2, 2.0)),
            ("R1", u(0.05, 0.95)),
            ("R2", u(0.05, 0.95)),
            ("R3", u(0.05, 0.95)),
            ("g", u(0.02, 0.4)),
        ]),
        Family::QutritGlobal => unreachable!("not part of the random pool"),
    }
}

/// `per_family` valid models from each of the four local families, reproducible from `seed`.
pub fn random_models(seed: u64, per_family: usize) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for family in [Family::Qubit, Family::TwoQubit, Family::Qutrit, Family::Fridge] {
        let mut kept = 0;
        while kept < per_family {
            let p = draw_params(family, &mut rng);
            let Ok(model) = family.build(&p) else { continue };
            if !validate_model(&model).valid {
                continue;
            }
            if thermal_fixed_point(&model).map_or(true, |t| t.r0.abs() < MIN_BIAS) {
                continue;
            }
            out.push(Draw { family, params: p, model });
            kept += 1;
        }
    }
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Self-contained Lindblad evaluator with row-stacked vectorization, independent of the library.
pub mod oracle {
    use super::*;

    pub type C = Complex64;
    pub type M = DMatrix<C>;

    /// `Γ` with rate `down` for `ΓρΓ†` and `up` for `Γ†ρΓ`.
    pub struct Channel {
        pub jump: M,
        pub down: f64,
        pub up: f64,
    }

    pub fn ket_bra(d: usize, k: usize, l: usize) -> M {
        let mut m = M::zeros(d, d);
        m[(k, l)] = C::new(1.0, 0.0);
        m
    }

    /// Row stacking: `vec(A X B) = (A ⊗ Bᵀ) vec(X)`.
    fn sandwich(a: &M, b: &M) -> M {
        a.kronecker(&b.transpose())
    }

    fn dissipator(l: &M, rate: f64) -> M {
        let d = l.nrows();
        let id = M::identity(d, d);
        let ldl = l.adjoint() * l;
        let k = sandwich(l, &l.adjoint()) - (sandwich(&ldl, &id) + sandwich(&id, &ldl)) * C::new(0.5, 0.0);
        k * C::new(rate, 0.0)
    }

    pub fn generator(h: &M, channels: &[Channel]) -> M {
        let d = h.nrows();
        let id = M::identity(d, d);
        let mut l = (sandwich(h, &id) - sandwich(&id, h)) * C::new(0.0, -1.0);
        for ch in channels {
            l += dissipator(&ch.jump, ch.down) + dissipator(&ch.jump.adjoint(), ch.up);
        }
        l
    }

    fn trace_vec(d: usize) -> DVector<C> {
        let mut t = DVector::zeros(d * d);
        for k in 0..d {
            t[k * d + k] = C::new(1.0, 0.0);
        }
        t
    }

    /// Least-squares solve of `[L; Trᵀ] x = [y; s]`.
    fn bordered(l: &M, y: &DVector<C>, s: C) -> DVector<C> {
        let n = l.nrows();
        let d = (n as f64).sqrt().round() as usize;
        let mut a = M::zeros(n + 1, n);
        a.view_mut((0, 0), (n, n)).copy_from(l);
        a.row_mut(n).copy_from(&trace_vec(d).transpose());
        let mut b = DVector::zeros(n + 1);
        b.rows_mut(0, n).copy_from(y);
        b[n] = s;
        a.svd(true, true).solve(&b, 1e-14).expect("svd solve")
    }

    pub fn steady(l: &M) -> DVector<C> {
        bordered(l, &DVector::zeros(l.nrows()), C::new(1.0, 0.0))
    }

    pub fn unvec(v: &DVector<C>) -> M {
        let d = (v.len() as f64).sqrt().round() as usize;
        M::from_fn(d, d, |i, j| v[i * d + j])
    }

    /// Mean and variance of the net `Γ` count of `channels[k]`.
    pub fn cumulants(h: &M, channels: &[Channel], k: usize) -> (f64, f64) {
        let d = h.nrows();
        let l0 = generator(h, channels);
        let rho = steady(&l0);
        let ch = &channels[k];
        let down = sandwich(&ch.jump, &ch.jump.adjoint()) * C::new(ch.down, 0.0);
        let up = sandwich(&ch.jump.adjoint(), &ch.jump) * C::new(ch.up, 0.0);
        let l1 = &down - &up;
        let l2 = &down + &up;
        let t = trace_vec(d);
        let mean = t.dot(&(&l1 * &rho));
        let y = &rho * mean - &l1 * &rho;
        let x = bordered(&l0, &y, C::new(0.0, 0.0));
        let var = t.dot(&(&l2 * &rho)) + t.dot(&(&l1 * &x)) * C::new(2.0, 0.0);
        (mean.re, var.re)
    }

    pub fn flux(h: &M, channels: &[Channel], k: usize) -> f64 {
        cumulants(h, channels, k).0
    }
}

/// Rotating-frame Hamiltonian and channels read straight off the model data.
pub fn oracle_system(m: &ModelSpec) -> (oracle::M, Vec<oracle::Channel>) {
    let d = m.dim;
    let (i0, i1) = m.vq;
    let mut h = oracle::M::zeros(d, d);
    h[(i0, i0)] = Complex64::new(m.energies[i0] - m.energies[i1] - m.omega_d, 0.0);
    h[(i0, i1)] = Complex64::new(m.g, 0.0);
    h[(i1, i0)] = Complex64::new(m.g, 0.0);
    let channels = m
        .reservoirs
        .iter()
        .map(|r| oracle::Channel { jump: r.jump.matrix().clone(), down: r.p * (1.0 - r.occupation), up: r.p * r.occupation })
        .collect();
    (h, channels)
}
