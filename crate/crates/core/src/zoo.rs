//! Builders for the reference machines, their closed forms, and the global-frame qutrit mapping.
//!
//! Qubit levels are ordered excited first: `|0⟩` has energy `+ω/2`, `|1⟩` has `-ω/2`, and
//! `σ⁻ = |1⟩⟨0|`. Multi-qubit basis indices read the ket string as a binary number with
//! qubit 1 as the most significant digit, so `|01⟩ = 1` and `|101⟩ = 5`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::TOL_REL;
use crate::model::{ModelSpec, Reservoir};

fn check_rates(ps: &[f64], rs: &[f64]) -> Result<()> {
    if let Some(p) = ps.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(Error::InvalidModel(format!("rate {p} must be positive")));
    }
    if let Some(r) = rs.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::InvalidModel(format!("occupation {r} must lie in (0, 1)")));
    }
    Ok(())
}

/// Energies of `n` qubits with frequencies `omegas`, bit value 0 meaning excited.
fn qubit_register_energies(omegas: &[f64]) -> Vec<f64> {
    let n = omegas.len();
    (0..1usize << n)
        .map(|s| {
            omegas
                .iter()
                .enumerate()
                .map(|(a, w)| if s >> (n - 1 - a) & 1 == 0 { 0.5 * w } else { -0.5 * w })
                .sum()
        })
        .collect()
}

/// Transitions of `σ⁻` on qubit `a` (0-based, most significant first) in an `n`-qubit register.
fn lowering(n: usize, a: usize) -> Vec<(usize, usize)> {
    let bit = 1usize << (n - 1 - a);
    (0..1usize << n).filter(|s| s & bit == 0).map(|s| (s | bit, s)).collect()
}

/// Single qubit with `Γ = σ⁻`, `ω = 1`, detuned by `delta`.
pub fn driven_qubit(p: f64, occupation: f64, g: f64, delta: f64) -> Result<ModelSpec> {
    check_rates(&[p], &[occupation])?;
    let m = ModelSpec {
        dim: 2,
        energies: vec![0.5, -0.5],
        vq: (0, 1),
        g,
        omega_d: 1.0 - delta,
        reservoirs: vec![Reservoir::from_transitions("h", p, occupation, 2, &[(1, 0)])?.with_omega(1.0)],
    };
    Ok(m)
}

/// Two resonant qubits (`ω = 1`), each with its own reservoir; `vq = (|01⟩, |10⟩)`.
pub fn two_qubit_transport(p1: f64, p2: f64, r1: f64, r2: f64, g: f64) -> Result<ModelSpec> {
    check_rates(&[p1, p2], &[r1, r2])?;
    Ok(ModelSpec {
        dim: 4,
        energies: qubit_register_energies(&[1.0, 1.0]),
        vq: (1, 2),
        g,
        omega_d: 0.0,
        reservoirs: vec![
            Reservoir::from_transitions("1", p1, r1, 4, &lowering(2, 0))?.with_omega(1.0),
            Reservoir::from_transitions("2", p2, r2, 4, &lowering(2, 1))?.with_omega(1.0),
        ],
    })
}

/// Qutrit with reservoirs on `|0⟩ ↔ |2⟩` and `|1⟩ ↔ |2⟩`; `vq = (0, 1)`.
///
/// `R_i` is the occupation paired with `Γ_i = |2⟩⟨i|`. When `E_i < E_2` the reservoir is
/// stored with the adjoint jump and complementary occupation, which is the same dissipator
/// written with a lowering operator.
pub fn driven_qutrit(
    energies: [f64; 3],
    p0: f64,
    p1: f64,
    r0: f64,
    r1: f64,
    g: f64,
    omega_d: f64,
) -> Result<ModelSpec> {
    check_rates(&[p0, p1], &[r0, r1])?;
    let e2 = energies[2];
    let res = |label: &str, i: usize, p: f64, occ: f64| -> Result<Reservoir> {
        let w = energies[i] - e2;
        let r = if w >= 0.0 {
            Reservoir::from_transitions(label, p, occ, 3, &[(2, i)])?
        } else {
            Reservoir::from_transitions(label, p, 1.0 - occ, 3, &[(i, 2)])?
        };
        Ok(r.with_omega(w.abs()))
    };
    Ok(ModelSpec {
        dim: 3,
        energies: energies.to_vec(),
        vq: (0, 1),
        g,
        omega_d,
        reservoirs: vec![res("0", 0, p0, r0)?, res("1", 1, p1, r1)?],
    })
}

/// Default qutrit level scheme used when only occupations matter.
pub const QUTRIT_ENERGIES: [f64; 3] = [1.0, 0.5, 0.0];

/// `E0` and `E1` on the same side of `E2` for positive temperatures.
pub fn qutrit_engine_ordering(r0: f64, r1: f64) -> bool {
    (r0 - 0.5) * (r1 - 0.5) >= 0.0
}

/// Three-qubit absorption refrigerator with `ω1 + ω3 = ω2`; `vq = (|010⟩, |101⟩)`.
pub fn three_qubit_fridge(omegas: [f64; 3], p: [f64; 3], r: [f64; 3], g: f64) -> Result<ModelSpec> {
    check_rates(&p, &r)?;
    let mismatch = omegas[0] + omegas[2] - omegas[1];
    if mismatch.abs() > TOL_REL * (1.0 + omegas[1].abs()) {
        return Err(Error::InvalidModel(format!("resonance ω1 + ω3 = ω2 violated by {mismatch:.3e}")));
    }
    let reservoirs = (0..3)
        .map(|a| Ok(Reservoir::from_transitions((a + 1).to_string(), p[a], r[a], 8, &lowering(3, a))?.with_omega(omegas[a])))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelSpec { dim: 8, energies: qubit_register_energies(&omegas), vq: (2, 5), g, omega_d: 0.0, reservoirs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalMapping {
    pub theta: f64,
    pub eps: [f64; 3],
    pub g_tilde: f64,
    pub delta_tilde: f64,
    /// Drive frequency of the local model, `ω_d cos 2θ`.
    pub omega_local: f64,
}

impl GlobalMapping {
    /// Local qutrit with energies `ε`, coupling `g̃` and detuning `Δ̃`.
    ///
    /// A negative `g̃` is absorbed into the phase of `|1⟩`, so the coupling is stored as `|g̃|`.
    pub fn local_model(&self, p0: f64, p1: f64, r0: f64, r1: f64) -> Result<ModelSpec> {
        driven_qutrit(self.eps, p0, p1, r0, r1, self.g_tilde.abs(), self.omega_local)
    }
}

/// Diagonalize the driven qutrit in its instantaneous eigenbasis.
pub fn global_to_local(energies: [f64; 3], g: f64, omega_d: f64) -> Result<GlobalMapping> {
    let [e0, e1, e2] = energies;
    if !(g.is_finite() && g >= 0.0) || energies.iter().any(|e| !e.is_finite()) || !omega_d.is_finite() {
        return Err(Error::InvalidModel("mapping needs finite energies, drive and g ≥ 0".into()));
    }
    if e0 == e1 && g == 0.0 {
        return Err(Error::InvalidModel("mixing angle is undefined for E0 = E1 and g = 0".into()));
    }
    let theta = 0.5 * (2.0 * g).atan2(e0 - e1);
    let mean = 0.5 * (e0 + e1);
    let half = 0.5 * ((e0 - e1).powi(2) + 4.0 * g * g).sqrt();
    let eps = [mean + half, mean - half, e2];
    let (s2, c2) = (2.0 * theta).sin_cos();
    Ok(GlobalMapping {
        theta,
        eps,
        g_tilde: 0.5 * omega_d * s2,
        delta_tilde: eps[0] - eps[1] - omega_d * c2,
        omega_local: omega_d * c2,
    })
}

/// Closed forms attached to the builders, used as regression anchors.
pub mod reference {
    pub mod qubit {
        pub fn gamma(p: f64) -> f64 {
            0.5 * p
        }

        pub fn p_i(p: f64) -> f64 {
            p
        }

        pub fn trace_xi(p: f64, r0: f64, r: f64) -> f64 {
            (r + 1.0 / r) / (p * r0)
        }

        fn affinity(r0: f64) -> f64 {
            ((1.0 + r0) / (1.0 - r0)).ln()
        }

        /// Resonant diagonal part.
        pub fn q_d(r0: f64, r: f64) -> f64 {
            affinity(r0) / r0 * (1.0 - r * (r0 - r))
        }

        /// Resonant coherent part.
        pub fn q_c(r0: f64, r: f64) -> f64 {
            -affinity(r0) * 2.0 / r0 * r * (r0 - r)
        }

        /// Near-reversible coefficient `c` in `Q ≈ 2(1 + c r0²)`.
        pub const CARNOT_COEFF: f64 = -5.0 / 12.0;
    }

    pub mod two_qubit {
        pub fn gamma(p1: f64, p2: f64) -> f64 {
            0.5 * (p1 + p2)
        }

        pub fn p_i(p1: f64, p2: f64) -> f64 {
            p1 * p2 / gamma(p1, p2)
        }

        /// `(d, d0, d1)` of `ρ_I = ½d(|01⟩⟨01| + |10⟩⟨10|) + d0|00⟩⟨00| + d1|11⟩⟨11|`.
        pub fn rho_i(p1: f64, p2: f64, r1: f64, r2: f64) -> (f64, f64, f64) {
            let g = gamma(p1, p2);
            let up = p1 * r1 + p2 * r2;
            let down = p1 * (1.0 - r1) + p2 * (1.0 - r2);
            let d = up * down / (2.0 * g * g);
            let d0 = up / down * d / 2.0;
            (d, d0, 1.0 - d - d0)
        }

        pub fn coeff_a(p1: f64, p2: f64, big_p: f64) -> f64 {
            -2.0 * (p1 * p1 + p2 * p2) / ((p1 + p2).powi(2) * big_p)
        }

        pub fn coeff_b(p1: f64, p2: f64, r0: f64, big_p: f64) -> f64 {
            -2.0 * p1 * p2 * r0 / ((p1 + p2).powi(2) * big_p)
        }

        pub fn coeff_a1(big_p: f64) -> f64 {
            -2.0 / big_p
        }

        /// Optimum at `p1 = p2`, `r = 3r0/8`.
        pub fn q_optimal(affinity: f64, r0: f64, big_p: f64) -> f64 {
            affinity * big_p / r0 * (1.0 - 25.0 * r0 * r0 / (32.0 * big_p))
        }

        /// `c` in `Q ≈ 2(1 + c r0²)`.
        pub const CARNOT_COEFF: f64 = -11.0 / 48.0;
    }

    pub mod qutrit {
        pub fn gamma(p0: f64, p1: f64, r0: f64, r1: f64) -> f64 {
            0.5 * (p0 * (1.0 - r0) + p1 * (1.0 - r1))
        }

        pub fn populations(r0: f64, r1: f64) -> [f64; 3] {
            let den = 1.0 - r0 * r1;
            [r0 * (1.0 - r1) / den, (1.0 - r0) * r1 / den, (1.0 - r0) * (1.0 - r1) / den]
        }

        pub fn d(p0: f64, p1: f64, r0: f64, r1: f64) -> f64 {
            2.0 * (p0 * r0 + p1 * r1) / (p0 + p1 + p0 * r0 + p1 * r1)
        }

        pub fn p_i(p0: f64, p1: f64, r0: f64, r1: f64) -> f64 {
            2.0 * p0 * p1 * (1.0 - r0 * r1) / (p0 + p1 + p0 * r0 + p1 * r1)
        }

        /// Weight of `|2⟩⟨2|` in `ξ_d = x_I ρ_I + x_2 |2⟩⟨2|`.
        pub fn x2(p0: f64, p1: f64, r0: f64, r1: f64, q2: f64) -> f64 {
            -q2 / (p0 * r0 + p1 * r1)
        }

        fn den(p0: f64, p1: f64, r0: f64, r1: f64) -> f64 {
            (p0 * (1.0 + r0) + p1 * (1.0 + r1)).powi(2)
        }

        pub fn coeff_a(p0: f64, p1: f64, r0: f64, r1: f64, big_p: f64) -> f64 {
            let num = p0 * p0 * (1.0 + r0) + p1 * p1 * (1.0 + r1) + p0 * p1 * (r0 + r1 + 2.0 * r0 * r1);
            -2.0 * num / (den(p0, p1, r0, r1) * big_p)
        }

        pub fn coeff_b(p0: f64, p1: f64, r0: f64, r1: f64, big_p: f64) -> f64 {
            -4.0 * p0 * p1 * (r0 - r1) / (den(p0, p1, r0, r1) * big_p)
        }

        /// `δ` in `Q ≈ 2 + δ r0²` at `Δ = 0`, `p0 = p1`, `R0 = R1 = R`.
        pub fn delta_min(r: f64) -> f64 {
            (4.0 - 15.0 * r - 6.0 * r * r + r.powi(3)) / (24.0 * r * r * (1.0 + r))
        }

        /// Root of `δ_min` in (0, 1), where the reversible regime starts to violate `Q ≥ 2`.
        pub fn violation_threshold() -> f64 {
            let f = |r: f64| 4.0 - 15.0 * r - 6.0 * r * r + r.powi(3);
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }

    pub mod fridge {
        pub fn gamma(p: [f64; 3]) -> f64 {
            0.5 * (p[0] + p[1] + p[2])
        }

        pub fn p_i(p: [f64; 3], r: [f64; 3]) -> f64 {
            let s = [2.0 * r[0] - 1.0, 1.0 - 2.0 * r[1], 2.0 * r[2] - 1.0];
            let g = gamma(p);
            let prod = p[0] * p[1] * p[2];
            let x = prod * (p[0] + p[1]) * (p[0] + p[2]) * (p[1] + p[2]);
            let mut sum = 0.0;
            for i in 0..3 {
                for j in i + 1..3 {
                    let w = 1.0 + s[i] * s[j];
                    sum += w * (p[i] * p[j]).powi(2) * (p[i] + p[j]) * (4.0 * g - p[i] - p[j]);
                }
            }
            8.0 * g * x / (sum + 2.0 * prod * (8.0 * g.powi(3) + prod))
        }

        /// Symmetric `p1 = p2 = p3`.
        pub fn coeff_a1(big_p: f64) -> f64 {
            -6.0 * (27.0 + 20.0 * big_p) / ((9.0 + 4.0 * big_p).powi(2) * big_p)
        }

        pub fn coeff_b(r0: f64, big_p: f64) -> f64 {
            -108.0 * r0 / ((9.0 + 4.0 * big_p).powi(2) * big_p)
        }
    }
}
