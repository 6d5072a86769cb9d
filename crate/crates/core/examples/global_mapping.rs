//! Map a strongly driven qutrit onto the weak-drive local model in its dressed basis.

use turbox::zoo::global_to_local;
use turbox::{evaluate, validate_model};

fn main() -> turbox::Result<()> {
    let map = global_to_local([1.0, 0.6, 0.0], 0.05, 0.45)?;
    println!("theta = {:.6}", map.theta);
    println!("eps   = {:?}", map.eps);
    println!("g~ = {:.6}  Delta~ = {:.6}  omega_local = {:.6}", map.g_tilde, map.delta_tilde, map.omega_local);
    let m = map.local_model(1.0, 0.8, 0.9, 0.2)?;
    let rep = validate_model(&m);
    println!("local model valid: {}", rep.valid);
    if rep.valid {
        let t = evaluate(&m)?;
        println!("Q_d = {:.6}  Q_c = {:.6}  Q = {:.6}", t.Q_d, t.Q_c, t.Q);
    }
    Ok(())
}
