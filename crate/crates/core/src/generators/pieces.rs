//! Depth-first subdivision shared by the IFS and Moran generators.

use crate::error::{Error, Result};
use crate::measure::DyadicMeasure;

/// Cap on the number of construction pieces visited for one measure.
pub const MAX_PIECES: u64 = 1 << 27;

/// Pieces lighter than this are split across a cell boundary by length instead of
/// being refined further.
pub const STRADDLE_MASS_FLOOR: f64 = 1e-16;

const MAX_DEPTH: u32 = 4096;

/// Absolute tolerance for piece endpoints against cell boundaries.
const ENDPOINT_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug)]
pub(crate) struct Piece<S> {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    pub depth: u32,
    pub state: S,
}

/// Subdivides from `root` until every piece has diameter ≤ 2^-level and lies in a
/// single cell, then deposits each piece's mass on its cell.
pub(crate) fn deposit<S, F>(root: Piece<S>, level: u32, mut children: F) -> Result<DyadicMeasure>
where
    F: FnMut(&Piece<S>) -> Vec<Piece<S>>,
{
    let scale = (level as f64).exp2();
    let h = 1.0 / scale;
    let mut atoms: Vec<(i64, f64)> = Vec::new();
    let mut stack = vec![root];
    let mut visited: u64 = 0;
    while let Some(p) = stack.pop() {
        visited += 1;
        if visited > MAX_PIECES {
            return Err(Error::ResourceLimit(format!(
                "more than {MAX_PIECES} construction pieces at level {level}"
            )));
        }
        if p.depth > MAX_DEPTH {
            return Err(Error::ResourceLimit(format!(
                "subdivision depth exceeded {MAX_DEPTH} (contraction too slow)"
            )));
        }
        let (a, b) = (p.lo * scale, p.hi * scale);
        // endpoints within rounding noise of a cell boundary are snapped to it
        let tol = ENDPOINT_TOLERANCE * scale;
        let first = (a + tol).floor();
        let last = if b - a > 2.0 * tol {
            (b - tol).ceil() - 1.0
        } else {
            first
        };
        let last = last.max(first);
        if p.hi - p.lo <= h {
            if first == last {
                atoms.push((first as i64, p.mass));
                continue;
            }
            if p.mass < STRADDLE_MASS_FLOOR {
                let frac = ((first + 1.0 - a) / (b - a)).clamp(0.0, 1.0);
                atoms.push((first as i64, p.mass * frac));
                atoms.push((last as i64, p.mass * (1.0 - frac)));
                continue;
            }
        }
        let mut kids = children(&p);
        // reversed so that the leftmost child is processed first
        kids.reverse();
        stack.extend(kids);
    }
    DyadicMeasure::from_atoms(level, atoms)
}
