//! Grid sweep over the qubit coupling ratio, written as CSV to stdout.

use turbox::optimize::{sweep, GridAxis};
use turbox::{params, Family};

fn main() {
    let axes = [
        GridAxis { name: "r0".into(), values: vec![0.5, 0.8, 0.947] },
        GridAxis { name: "r_ratio".into(), values: (1..10).map(|k| 0.1 * k as f64).collect() },
    ];
    let table = sweep(Family::Qubit, &params([("delta", 0.0)]), &axes);
    print!("{}", table.to_csv());
    if let Some(best) = table.best() {
        eprintln!("best: {:?} Q = {:.6}", best.point, best.report.as_ref().unwrap().Q);
    }
}
