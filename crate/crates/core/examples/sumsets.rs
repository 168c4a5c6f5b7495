//! Thickness, the Astels test and n-fold sumsets of Cantor sets.

use lqdim::generators::{generate_set, BlockRule};
use lqdim::sumsets::{astels_check, interval_detect, nfold_sumset_experiment, spec_thickness, sumset};
use lqdim::MeasureSpec;

fn main() -> lqdim::Result<()> {
    for ratio in [1.0 / 3.0, 0.25, 0.2] {
        let spec = MeasureSpec::central_cantor(ratio);
        let t = spec_thickness(&spec, 14)?;
        let a = astels_check(&[t.tau, t.tau])?;
        let c = generate_set(&spec, 14)?;
        let two = interval_detect(&sumset(&c, &c)?);
        println!(
            "ratio {ratio:.3}: tau {:.4} (exact {}), Astels sum {:.3}, C + C interval at 14: {two}",
            t.tau, t.exact, a.sum
        );
    }

    let sparse = MeasureSpec::digit_blocks(BlockRule::Tower { base: 16 });
    let r = nfold_sumset_experiment(&sparse, 4, 16, lqdim::convolve::default_max_work())?;
    for row in &r.rows {
        println!("n = {}: N = {}, box {:.4}, interval {}", row.n, row.count, row.box_exponent, row.is_interval);
    }
    Ok(())
}
