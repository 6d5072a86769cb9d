//! Perturbative steady state of the two-qubit transport model against the full Lindblad solve.

use turbox::linalg::stationary_state;
use turbox::{assemble_liouvillian, steady_report, zoo};

fn main() -> turbox::Result<()> {
    let m = zoo::two_qubit_transport(1.0, 0.7, 0.8, 0.2, 0.02)?;
    let ss = steady_report(&m)?;
    println!("tau    = {:?}", ss.tau);
    println!("rho_I  = {:?}", ss.rho_i);
    println!("p_I = {:.6}  gamma = {:.6}  p_c = {:.6}", ss.p_i, ss.gamma, ss.p_c);
    println!("r0 = {:.6}  r = {:.6}", ss.r0, ss.r);
    println!("coherence = {:.6e} + {:.6e} i", ss.coherence.x, ss.coherence.y);

    let exact = stationary_state(&assemble_liouvillian(&m)?)?;
    let approx = ss.state(&m);
    let diff = (exact.matrix() - approx.matrix()).map(|z| z.norm()).max();
    println!("max |rho_exact - rho_perturbative| = {diff:.3e}  (g = {})", m.g);
    Ok(())
}
