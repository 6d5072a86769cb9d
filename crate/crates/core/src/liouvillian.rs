//! Reservoir dissipators, the rotating-frame Hamiltonian and the full generator.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::linalg::{c, DenseOp, Superoperator};
use crate::model::{ModelSpec, Reservoir};
use crate::validate::require_valid;

/// Gain (`Γ† ρ Γ`) and loss (`Γ ρ Γ†`) jump superoperators of one reservoir.
pub(crate) fn jump_terms(res: &Reservoir) -> (Superoperator, Superoperator) {
    let g = res.jump.matrix();
    let gd = g.adjoint();
    (Superoperator::sandwich(&gd, g), Superoperator::sandwich(g, &gd))
}

/// `D(ρ) = pR(Γ†ρΓ - ½{ΓΓ†, ρ}) + pR̄(ΓρΓ† - ½{Γ†Γ, ρ})`
pub fn build_dissipator(res: &Reservoir) -> Superoperator {
    let g = res.jump.matrix();
    let gd = g.adjoint();
    let (gain, loss) = jump_terms(res);
    let up = gain - Superoperator::anticommutator(&(g * &gd)).scaled(0.5);
    let down = loss - Superoperator::anticommutator(&(&gd * g)).scaled(0.5);
    up.scaled(res.p * res.occupation) + down.scaled(res.p * res.complement())
}

/// Same map applied directly to an operator, without vectorizing.
pub fn apply_dissipator(res: &Reservoir, rho: &DenseOp) -> DenseOp {
    let g = res.jump.matrix();
    let gd = g.adjoint();
    let x = rho.matrix();
    let gg = g * &gd;
    let gdg = &gd * g;
    let up = &gd * x * g - (&gg * x + x * &gg) * c(0.5);
    let down = g * x * &gd - (&gdg * x + x * &gdg) * c(0.5);
    DenseOp::from_matrix(up * c(res.p * res.occupation) + down * c(res.p * res.complement()))
        .expect("dimension preserved")
}

/// `H = Δ|Φ0⟩⟨Φ0| + g(|Φ0⟩⟨Φ1| + |Φ1⟩⟨Φ0|)`
pub fn rotating_hamiltonian(m: &ModelSpec) -> DenseOp {
    let (i0, i1) = m.vq;
    let mut h = DenseOp::zeros(m.dim).expect("checked dimension").into_matrix();
    h[(i0, i0)] = c(m.detuning());
    h[(i0, i1)] = c(m.g);
    h[(i1, i0)] = c(m.g);
    DenseOp::from_matrix(h).expect("square")
}

pub(crate) fn liouvillian_of(m: &ModelSpec) -> Superoperator {
    let mut l = Superoperator::hamiltonian(rotating_hamiltonian(m).matrix());
    for r in &m.reservoirs {
        l += build_dissipator(r);
    }
    l
}

/// `𝓛 = -i[H, ·] + Σ D_i`, after validating the model.
pub fn assemble_liouvillian(m: &ModelSpec) -> Result<Superoperator> {
    require_valid(m)?;
    Ok(liouvillian_of(m))
}

/// Rate matrix of the dissipators restricted to populations: `W[j][k] = ⟨j|D(|k⟩⟨k|)|j⟩`.
pub(crate) fn population_generator_of(m: &ModelSpec) -> DMatrix<f64> {
    let d = m.dim;
    let mut w = DMatrix::zeros(d, d);
    for r in &m.reservoirs {
        for k in 0..d {
            let out = apply_dissipator(r, &DenseOp::ket_bra(d, k, k).expect("in range"));
            for j in 0..d {
                w[(j, k)] += out.matrix()[(j, j)].re;
            }
        }
    }
    w
}

pub fn population_generator(m: &ModelSpec) -> Result<DMatrix<f64>> {
    require_valid(m)?;
    Ok(population_generator_of(m))
}
