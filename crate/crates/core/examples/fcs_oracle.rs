//! Counting statistics of the refrigerator: tilted-Liouvillian cumulants vs the closed forms.

use turbox::{cumulants_exact, cumulants_numeric, evaluate, lambda_curve, Family, Params};

fn main() -> turbox::Result<()> {
    let m = Family::Fridge.build(&Params::new())?;
    let rep = evaluate(&m)?;
    for r in &m.reservoirs {
        let num = cumulants_numeric(&m, &r.label)?;
        let ex = cumulants_exact(&m, &r.label)?;
        let var = rep.var_d[&r.label] + rep.var_c[&r.label];
        println!("reservoir {}", r.label);
        println!("    J   closed {:+.10e}  numeric {:+.10e}  exact {:+.10e}", rep.J[&r.label], num.J_num, ex.mean);
        println!("    Var closed {:+.10e}  numeric {:+.10e}  exact {:+.10e}", var, num.Var_num, ex.variance);
    }
    let chis: Vec<f64> = (-4..=4).map(|k| 0.1 * k as f64).collect();
    for (chi, l) in lambda_curve(&m, "1", &chis)? {
        println!("lambda({chi:+.1}) = {l:+.6e}");
    }
    Ok(())
}
