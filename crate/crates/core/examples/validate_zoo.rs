//! Validate every model family at its default parameters and print the check table.

use turbox::{validate_model, Family, Params};

fn main() -> turbox::Result<()> {
    for family in Family::ALL {
        let m = family.build(&Params::new())?;
        let rep = validate_model(&m);
        println!("{:<14} dim={} valid={}", family.to_string(), m.dim, rep.valid);
        for c in &rep.checks {
            println!("    [{}] {:<28} {}", if c.passed { "ok" } else { "!!" }, c.name, c.detail);
        }
        if let Some(n) = &rep.photon_counts {
            println!("    photon counts {n:?}");
        }
    }
    Ok(())
}
