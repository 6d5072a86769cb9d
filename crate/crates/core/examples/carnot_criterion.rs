//! Near-reversible expansion of the optimal uncertainty: `Q_min ≈ 2 + δ r0`.

use turbox::optimize::carnot_criterion;
use turbox::{params, Family};

fn main() -> turbox::Result<()> {
    let paths: [(&str, Family, Vec<(&str, f64)>); 4] = [
        ("qubit", Family::Qubit, vec![("delta", 0.0)]),
        ("two-qubit", Family::TwoQubit, vec![]),
        ("qutrit R1=0.5", Family::Qutrit, vec![("R1", 0.5), ("p_ratio", 1.0), ("delta", 0.0)]),
        ("fridge R=0.5", Family::Fridge, vec![("R", 0.5)]),
    ];
    for (name, family, fixed) in paths {
        let est = carnot_criterion(|r0| {
            let mut p = params(fixed.iter().copied());
            p.insert("r0".into(), r0);
            family.build(&p)
        })?;
        let verdict = if est.delta < 0.0 { "TUR can be beaten" } else { "bounded near Carnot" };
        println!("{name:<14} delta = {:+.6} (+/- {:.1e})  {verdict}", est.delta, est.error);
    }
    Ok(())
}
