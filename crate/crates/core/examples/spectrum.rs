//! L^q spectrum of a few generated measures, per-scale value and trailing slope.

use lqdim::generators::BlockRule;
use lqdim::{linf_dimension_estimate, lq_dimension_estimate, MeasureSpec};

fn main() -> lqdim::Result<()> {
    // even levels only: the 1/4 Cantor set is a staircase at odd m. The sparse
    // digits are forced on [16, 32], so their slope sags over that block.
    let levels: Vec<u32> = (10..=20).step_by(2).collect();
    let specs = [
        ("middle thirds", MeasureSpec::middle_thirds()),
        ("central cantor 1/4", MeasureSpec::central_cantor(0.25)),
        ("sparse digits", MeasureSpec::digit_blocks(BlockRule::Tower { base: 16 })),
    ];
    for (name, spec) in &specs {
        println!("{name}");
        for q in [1.5, 2.0, 4.0, 8.0] {
            let e = lq_dimension_estimate(spec, q, &levels)?;
            println!("  q = {q:<4} point {:.4}  slope {:.4}", e.point_estimate, e.slope_estimate);
        }
        let e = linf_dimension_estimate(spec, &levels)?;
        println!("  q = inf  point {:.4}  slope {:.4}", e.point_estimate, e.slope_estimate);
    }
    Ok(())
}
