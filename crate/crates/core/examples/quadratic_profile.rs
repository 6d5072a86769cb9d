//! Quadratic profile of `Q_d` in `r` for the two-qubit model and its predicted optimum.

use turbox::optimize::quadratic_profile;
use turbox::{evaluate, params, Family};

fn main() -> turbox::Result<()> {
    let base = Family::TwoQubit.build(&params([("r0", 0.835)]))?;
    let prof = quadratic_profile(&base)?;
    println!("A = {:.6}  B = {:.6}  P = {:.6}", prof.a, prof.b, prof.p_sum);
    println!("r* = {:.6}  (r*/r0 = {:.4})  Q_min = {:.6}", prof.r_star, prof.r_star / 0.835, prof.q_min);

    for ratio in [0.2, 0.3, prof.r_star / 0.835, 0.45, 0.6] {
        let m = Family::TwoQubit.build(&params([("r0", 0.835), ("r_ratio", ratio)]))?;
        println!("r/r0 = {ratio:.4}  Q = {:.6}", evaluate(&m)?.Q);
    }
    Ok(())
}
