//! Multi-start search for the smallest `Q` of the driven qutrit, with and without the engine ordering.

use turbox::optimize::{minimize_q, Bound, SearchOptions};
use turbox::{params, Constraint, Family};

fn bound(name: &str, min: f64, max: f64) -> Bound {
    Bound { name: name.into(), min, max }
}

fn main() -> turbox::Result<()> {
    let free = [bound("p_ratio", 0.05, 5.0), bound("R0", 0.01, 0.99), bound("R1", 0.01, 0.99), bound("r_ratio", 0.02, 0.98)];
    let fixed = params([("delta", 0.0)]);
    let opts = SearchOptions { seed: 7, ..SearchOptions::default() };
    for (name, constraints) in [("open", vec![]), ("engine ordering", vec![Constraint::EngineOrdering])] {
        let opt = minimize_q(Family::Qutrit, &fixed, &free, &constraints, &opts)?;
        println!("{name}: Q = {:.6}  ({} of {} starts converged)", opt.report.Q, opt.starts_converged, opt.starts_succeeded);
        for (k, v) in &opt.free {
            println!("    {k} = {v:.6}");
        }
    }
    Ok(())
}
