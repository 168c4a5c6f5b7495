//! Convolution of dyadic measures on a common grid.
//!
//! Small inputs use an exact double loop. Large dense inputs may use an FFT
//! whose support is recovered exactly from a second transform of the indicator
//! functions.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::{DyadicMeasure, DyadicSet};

/// Default cap on convolution work, in atom-pair operations.
pub const DEFAULT_MAX_WORK: u64 = 1 << 34;

/// Environment variable overriding [`DEFAULT_MAX_WORK`].
pub const MAX_WORK_ENV: &str = "LQDIM_MAX_WORK";

/// Below this many atom pairs the direct method is always used.
pub const DIRECT_ALWAYS_PAIRS: u64 = 1 << 24;

/// Largest FFT length attempted (complex f64 buffer of 512 MiB).
pub const MAX_FFT_LEN: usize = 1 << 25;

/// Largest dense accumulation buffer used by the direct method.
const MAX_DENSE_SPAN: u64 = 1 << 28;

/// Work cap from [`MAX_WORK_ENV`] if set and parseable, else the default.
pub fn default_max_work() -> u64 {
    std::env::var(MAX_WORK_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_WORK)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMethod {
    /// Cheapest method within the work cap.
    #[default]
    Auto,
    /// Exact double loop.
    Direct,
    Fft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvolveOptions {
    pub max_work: u64,
    pub method: ConvolutionMethod,
}

impl Default for ConvolveOptions {
    fn default() -> Self {
        ConvolveOptions {
            max_work: default_max_work(),
            method: ConvolutionMethod::Auto,
        }
    }
}

impl ConvolveOptions {
    pub fn with_max_work(max_work: u64) -> Self {
        ConvolveOptions {
            max_work,
            ..Self::default()
        }
    }
}

/// Planned method and its cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkEstimate {
    pub method: ConvolutionMethod,
    pub work: u64,
}

fn span(mu: &DyadicMeasure, nu: &DyadicMeasure) -> u64 {
    (mu.max_index() - mu.min_index()) as u64 + (nu.max_index() - nu.min_index()) as u64 + 1
}

fn fft_len(mu: &DyadicMeasure, nu: &DyadicMeasure) -> Option<usize> {
    let s = span(mu, nu);
    let l = s.checked_next_power_of_two()?;
    (l as usize <= MAX_FFT_LEN).then_some(l as usize)
}

fn fft_work(len: usize) -> u64 {
    let l = len as u64;
    // four transforms plus the pointwise passes
    4 * l * (l.trailing_zeros() as u64).max(1) + 4 * l
}

fn direct_work(mu: &DyadicMeasure, nu: &DyadicMeasure) -> u64 {
    (mu.len() as u64).saturating_mul(nu.len() as u64)
}

/// Chooses a method for `mu ∗ nu` under `opts`, or reports why none fits.
pub fn plan(
    mu: &DyadicMeasure,
    nu: &DyadicMeasure,
    opts: &ConvolveOptions,
) -> Result<WorkEstimate> {
    if mu.level() != nu.level() {
        return Err(invalid(format!(
            "level mismatch: {} vs {}",
            mu.level(),
            nu.level()
        )));
    }
    let direct = WorkEstimate {
        method: ConvolutionMethod::Direct,
        work: direct_work(mu, nu),
    };
    let fft = fft_len(mu, nu).map(|l| WorkEstimate {
        method: ConvolutionMethod::Fft,
        work: fft_work(l),
    });
    let chosen = match opts.method {
        ConvolutionMethod::Direct => direct,
        ConvolutionMethod::Fft => fft.ok_or_else(|| {
            Error::ResourceLimit(format!(
                "FFT length for span {} exceeds {MAX_FFT_LEN}; coarsen first",
                span(mu, nu)
            ))
        })?,
        ConvolutionMethod::Auto => match fft {
            Some(f) if direct.work > DIRECT_ALWAYS_PAIRS && f.work < direct.work => f,
            _ => direct,
        },
    };
    if chosen.work > opts.max_work {
        return Err(Error::ResourceLimit(format!(
            "convolution needs {} work units ({:?}) but the cap is {}; coarsen the inputs first \
             (discrete L^q norms at adjacent levels are comparable up to a factor 2^q)",
            chosen.work, chosen.method, opts.max_work
        )));
    }
    Ok(chosen)
}

/// μ ∗ ν on the common grid, with the default options.
pub fn convolve(mu: &DyadicMeasure, nu: &DyadicMeasure) -> Result<DyadicMeasure> {
    convolve_with(mu, nu, &ConvolveOptions::default())
}

pub fn convolve_with(
    mu: &DyadicMeasure,
    nu: &DyadicMeasure,
    opts: &ConvolveOptions,
) -> Result<DyadicMeasure> {
    match plan(mu, nu, opts)?.method {
        ConvolutionMethod::Fft => convolve_fft(mu, nu),
        _ => convolve_direct(mu, nu),
    }
}

/// Exact convolution by the double loop, no work cap. Each output cell accumulates
/// its products with the μ index ascending.
pub fn convolve_direct(mu: &DyadicMeasure, nu: &DyadicMeasure) -> Result<DyadicMeasure> {
    if mu.level() != nu.level() {
        return Err(invalid("level mismatch"));
    }
    let base = mu.min_index() + nu.min_index();
    let s = span(mu, nu);
    if s <= MAX_DENSE_SPAN {
        let mut out = vec![0.0f64; s as usize];
        let nu_off: Vec<usize> = nu
            .indices()
            .iter()
            .map(|&k| (k - nu.min_index()) as usize)
            .collect();
        for (i, a) in mu.atoms() {
            let row = &mut out[(i - mu.min_index()) as usize..];
            for (&j, &b) in nu_off.iter().zip(nu.masses()) {
                row[j] += a * b;
            }
        }
        let mut idx = Vec::new();
        let mut mass = Vec::new();
        for (off, w) in out.into_iter().enumerate() {
            if w > 0.0 {
                idx.push(base + off as i64);
                mass.push(w);
            }
        }
        DyadicMeasure::from_sorted(mu.level(), idx, mass)
    } else {
        // very sparse inputs far apart: sort the products instead
        let mut prods: Vec<(i64, f64)> = Vec::with_capacity(mu.len() * nu.len());
        for (i, a) in mu.atoms() {
            for (j, b) in nu.atoms() {
                prods.push((i + j, a * b));
            }
        }
        prods.sort_by_key(|p| p.0);
        let mut idx: Vec<i64> = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        for (k, w) in prods {
            if idx.last() == Some(&k) {
                *mass.last_mut().unwrap() += w;
            } else {
                idx.push(k);
                mass.push(w);
            }
        }
        DyadicMeasure::from_sorted(mu.level(), idx, mass)
    }
}

/// Convolves two real sequences packed as `re + i·im` in `buf` (in place).
/// On return `buf[k].re` holds the linear convolution, unscaled noise aside.
fn packed_real_convolution(buf: &mut [Complex<f64>], planner: &mut FftPlanner<f64>) {
    let l = buf.len();
    let fwd = planner.plan_fft_forward(l);
    let inv = planner.plan_fft_inverse(l);
    let mut scratch = vec![
        Complex::new(0.0, 0.0);
        fwd.get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len())
    ];
    fwd.process_with_scratch(buf, &mut scratch);
    // For Z = FFT(a + i b): FFT(a)·FFT(b) at k is (Z_k² − conj(Z_{-k})²) / 4i.
    let quarter_i = Complex::new(0.0, -0.25);
    for k in 0..=l / 2 {
        let n = (l - k) % l;
        let zk = buf[k];
        let zn = buf[n];
        let pk = (zk * zk - zn.conj() * zn.conj()) * quarter_i;
        let pn = (zn * zn - zk.conj() * zk.conj()) * quarter_i;
        buf[k] = pk;
        buf[n] = pn;
    }
    inv.process_with_scratch(buf, &mut scratch);
    let scale = 1.0 / l as f64;
    for z in buf.iter_mut() {
        z.re *= scale;
    }
}

/// Convolution through the FFT. The support is the exact index sumset (recovered
/// from a transform of the indicators, where the rounding error is far below 1/2);
/// masses on it are floored at min μ · min ν, the least possible exact value.
pub fn convolve_fft(mu: &DyadicMeasure, nu: &DyadicMeasure) -> Result<DyadicMeasure> {
    if mu.level() != nu.level() {
        return Err(invalid("level mismatch"));
    }
    let l = fft_len(mu, nu).ok_or_else(|| {
        Error::ResourceLimit(format!("FFT length exceeds {MAX_FFT_LEN}; coarsen first"))
    })?;
    let (a0, b0) = (mu.min_index(), nu.min_index());
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    for &k in mu.indices() {
        buf[(k - a0) as usize].re = 1.0;
    }
    for &k in nu.indices() {
        buf[(k - b0) as usize].im = 1.0;
    }
    packed_real_convolution(&mut buf, &mut planner);
    let support: Vec<usize> = (0..l).filter(|&k| buf[k].re > 0.5).collect();

    buf.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
    for (k, w) in mu.atoms() {
        buf[(k - a0) as usize].re = w;
    }
    for (k, w) in nu.atoms() {
        buf[(k - b0) as usize].im = w;
    }
    packed_real_convolution(&mut buf, &mut planner);
    let floor = mu.masses().iter().copied().fold(1.0, f64::min)
        * nu.masses().iter().copied().fold(1.0, f64::min);
    let idx = support.iter().map(|&k| a0 + b0 + k as i64).collect();
    let mass = support.iter().map(|&k| buf[k].re.max(floor)).collect();
    DyadicMeasure::from_sorted(mu.level(), idx, mass)
}

/// n-fold convolution power μ ∗ ⋯ ∗ μ, computed left to right.
pub fn convolution_power(
    mu: &DyadicMeasure,
    n: usize,
    opts: &ConvolveOptions,
) -> Result<DyadicMeasure> {
    if n == 0 {
        return Err(invalid("convolution power needs n ≥ 1"));
    }
    let mut acc = mu.clone();
    for _ in 1..n {
        acc = convolve_with(&acc, mu, opts)?;
    }
    Ok(acc)
}

/// Index sumset of two supports (the support of μ ∗ ν).
pub fn support_sumset(a: &DyadicSet, b: &DyadicSet) -> Result<DyadicSet> {
    if a.level() != b.level() {
        return Err(invalid("level mismatch"));
    }
    let mut out: Vec<i64> = Vec::with_capacity(a.len() + b.len());
    for &i in a.indices() {
        for &j in b.indices() {
            out.push(i + j);
        }
    }
    DyadicSet::new(a.level(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &DyadicMeasure, b: &DyadicMeasure, tol: f64) {
        assert_eq!(a.indices(), b.indices());
        for (x, y) in a.masses().iter().zip(b.masses()) {
            assert!((x - y).abs() <= tol * y.max(1e-300), "{x} vs {y}");
        }
    }

    #[test]
    fn dirac_is_identity() {
        let mu = DyadicMeasure::from_atoms(5, [(1, 0.2), (4, 0.3), (9, 0.5)]).unwrap();
        let d = DyadicMeasure::dirac(5, 0).unwrap();
        assert_eq!(convolve(&d, &mu).unwrap(), mu);
        let shifted = convolve(&DyadicMeasure::dirac(5, 3).unwrap(), &mu).unwrap();
        assert_eq!(shifted, mu.translate(3));
    }

    #[test]
    fn two_atom_square() {
        let mu = DyadicMeasure::uniform(7, 0, 2).unwrap();
        let sq = convolve(&mu, &mu).unwrap();
        assert_eq!(sq.indices(), &[0, 1, 2]);
        assert_eq!(sq.masses(), &[0.25, 0.5, 0.25]);
        assert_eq!(sq.linf_norm(), 0.5);
    }

    #[test]
    fn level_mismatch_rejected() {
        let a = DyadicMeasure::dirac(3, 0).unwrap();
        let b = DyadicMeasure::dirac(4, 0).unwrap();
        assert!(matches!(convolve(&a, &b), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn work_cap_is_enforced() {
        let a = DyadicMeasure::uniform(10, 0, 1000).unwrap();
        let opts = ConvolveOptions::with_max_work(999_999);
        assert!(matches!(
            convolve_with(&a, &a, &opts),
            Err(Error::ResourceLimit(_))
        ));
        let opts = ConvolveOptions::with_max_work(1_000_000);
        assert!(convolve_with(&a, &a, &opts).is_ok());
    }

    #[test]
    fn far_apart_sparse_inputs_use_sorted_products() {
        let a = DyadicMeasure::from_atoms(40, [(0, 1.0), (1 << 35, 1.0)]).unwrap();
        let c = convolve(&a, &a).unwrap();
        assert_eq!(c.indices(), &[0, 1 << 35, 1 << 36]);
        assert_eq!(c.masses(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn fft_agrees_with_direct() {
        let a = DyadicMeasure::from_atoms(
            12,
            (0..700)
                .filter(|k| k % 3 != 1)
                .map(|k| (k * 5 - 40, 1.0 + (k % 7) as f64)),
        )
        .unwrap();
        let b =
            DyadicMeasure::from_atoms(12, (0..300).map(|k| (k * k % 997, 1.0 + (k % 4) as f64)))
                .unwrap();
        let d = convolve_direct(&a, &b).unwrap();
        let f = convolve_fft(&a, &b).unwrap();
        assert_close(&f, &d, 1e-9);
    }

    #[test]
    fn fft_forced_on_tiny_support() {
        let mu = DyadicMeasure::uniform(7, 0, 2).unwrap();
        let opts = ConvolveOptions {
            max_work: u64::MAX,
            method: ConvolutionMethod::Fft,
        };
        let sq = convolve_with(&mu, &mu, &opts).unwrap();
        assert_close(&sq, &convolve_direct(&mu, &mu).unwrap(), 1e-12);
    }

    #[test]
    fn power_and_support_sumset() {
        let mu = DyadicMeasure::uniform(4, 0, 2).unwrap();
        let p = convolution_power(&mu, 3, &ConvolveOptions::default()).unwrap();
        assert_eq!(p.masses(), &[0.125, 0.375, 0.375, 0.125]);
        let s = support_sumset(&mu.support(), &p.support()).unwrap();
        assert_eq!(s.indices(), &[0, 1, 2, 3, 4]);
    }
}
