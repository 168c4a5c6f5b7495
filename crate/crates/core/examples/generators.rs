//! Measures from JSON specs: an IFS, a forced-zero digit pattern and an Ahlfors-regular Cantor set.

use lqdim::generators::{generate_set, AhlforsExample};
use lqdim::{generate, MeasureSpec};

const SPECS: &str = r#"[
    {"kind": "ifs", "maps": [{"ratio": 0.5, "shift": 0.0}, {"ratio": 0.25, "shift": 0.75}],
     "weights": [0.7, 0.3]},
    {"kind": "digit_pattern", "forced_zero": {"rule": "digits", "digits": [2, 4, 6, 8, 10, 12]}},
    {"kind": "digit_pattern", "forced_zero": {"rule": "blocks", "blocks": {"sequence": "tower", "base": 4}}},
    {"kind": "lebesgue"}
]"#;

fn main() -> lqdim::Result<()> {
    let specs: Vec<MeasureSpec> = serde_json::from_str(SPECS).expect("example specs parse");
    for spec in &specs {
        spec.validate("spec")?;
        let mu = generate(spec, 12)?;
        println!(
            "{:<14} atoms {:>5}  max mass {:.3e}  diameter {:.4}",
            serde_json::to_value(spec).unwrap()["kind"].as_str().unwrap(),
            mu.len(),
            mu.linf_norm(),
            mu.diameter()
        );
    }

    let ex = AhlforsExample::new(0.5)?;
    let set = generate_set(&ex.spec(), 16)?;
    println!("Ahlfors alpha = 0.5: ratio {:.4}, C = {}, {} cells at level 16", ex.ratio, ex.constant, set.len());
    Ok(())
}
