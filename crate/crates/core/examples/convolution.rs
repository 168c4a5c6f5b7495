//! Convolve the Cantor-Lebesgue measure with itself and watch the L^2 exponent rise.

use lqdim::convolve::{convolve_with, plan, ConvolveOptions};
use lqdim::{generate, lq_exponent, MeasureSpec};

fn main() -> lqdim::Result<()> {
    let spec = MeasureSpec::middle_thirds();
    let opts = ConvolveOptions::default();
    println!("{:>3}  {:>8}  {:>8}  {:>7}  method", "m", "D(mu)", "D(mu*mu)", "gain");
    for m in (10..=20).step_by(2) {
        let mu = generate(&spec, m)?;
        let est = plan(&mu, &mu, &opts)?;
        let nu = convolve_with(&mu, &mu, &opts)?;
        let (a, b) = (lq_exponent(&mu, 2.0)?, lq_exponent(&nu, 2.0)?);
        println!("{m:>3}  {a:>8.4}  {b:>8.4}  {:>7.4}  {:?}", b - a, est.method);
    }
    Ok(())
}
