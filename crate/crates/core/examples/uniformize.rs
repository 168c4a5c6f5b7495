//! Prune a lopsided measure to a uniform tree and compare what was kept.

use lqdim::uniformity::{retention_bound, uniformize, Objective};
use lqdim::{lq_exponent, DyadicMeasure};

fn main() -> lqdim::Result<()> {
    let (d, ell) = (2, 6);
    // dense on the left quarter, sparse digits elsewhere
    let atoms = (0..1i64 << 12)
        .filter(|&k| k < 1024 || k % 7 == 0)
        .map(|k| (k, 1.0 + (k % 5) as f64));
    let mu = DyadicMeasure::from_atoms(d * ell, atoms)?;

    for objective in [Objective::Count, Objective::LqNorm { q: 2.0 }] {
        let u = uniformize(&mu, d, ell, objective)?;
        println!("{objective:?}");
        println!("  branching {:?}", u.tree.branching);
        println!(
            "  leaves {} of {}, retention {:.4} (bound {:.2e})",
            u.tree.leaf_count(),
            mu.len(),
            u.leaf_retention,
            retention_bound(d, ell)
        );
        println!(
            "  L^2 exponent {:.4} -> {:.4}",
            lq_exponent(&mu, 2.0)?,
            lq_exponent(&u.measure, 2.0)?
        );
    }
    Ok(())
}
