//! Regularity diagnostics for a Cantor measure and for a measure with an isolated atom.

use lqdim::regularity::{regularity_report, RegularityOptions};
use lqdim::{generate, DyadicMeasure, MeasureSpec};

fn show(name: &str, mu: &DyadicMeasure) -> lqdim::Result<()> {
    let r = regularity_report(mu, &RegularityOptions::default())?;
    println!("{name} (level {})", r.level);
    match r.uniform_perfect {
        Some(p) => println!("  uniformly perfect with N = {}, gamma = {}", p.n, p.gamma),
        None => println!("  not uniformly perfect on the grid"),
    }
    if let Some(a) = &r.ahlfors {
        println!("  Ahlfors fit: alpha {:.3}, C {:.3}", a.alpha, a.constant);
    }
    println!("  doubling constant {:?}, porosity k {:?}", r.doubling_constant, r.porosity_k);
    println!("  lower dimension ~ {:.3}", r.lower_dim.t);
    Ok(())
}

fn main() -> lqdim::Result<()> {
    let mu = generate(&MeasureSpec::middle_thirds(), 14)?;
    show("middle thirds", &mu)?;

    // most of the mass on [0, 1/4), plus one far atom
    let atoms = (0..1024).map(|k| (k, 1.0)).chain([(16000, 1.0)]);
    show("interval + atom", &DyadicMeasure::from_atoms(14, atoms)?)
}
