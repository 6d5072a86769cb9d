//! Split the uncertainty product of a driven qutrit into its diagonal and coherent parts.

use turbox::{evaluate, params, Family};

fn main() -> turbox::Result<()> {
    let m = Family::Qutrit.build(&params([("R0", 0.946), ("R1", 0.129), ("p_ratio", 0.83), ("delta", 0.0)]))?;
    let rep = evaluate(&m)?;
    println!("J_c   = {:.6e}", rep.J_c);
    for (label, j) in &rep.J {
        println!("J[{label}]  = {j:.6e}  var_d = {:.6e}  var_c = {:.6e}", rep.var_d[label], rep.var_c[label]);
    }
    println!("sigma = {:.6e}", rep.sigma);
    println!("Q_d = {:.6}  Q_c = {:.6}  Q = {:.6}", rep.Q_d, rep.Q_c, rep.Q);
    Ok(())
}
