//! Exact construction intervals for IFS specs whose parameters are short
//! rationals.
//!
//! Each parameter is read as the rational with the smallest denominator (at most
//! [`MAX_DENOMINATOR`]) lying within one ulp of it, so 0.333… becomes 1/3. Piece
//! endpoints are then computed in checked i128 arithmetic. Any overflow, or a
//! parameter with no short rational, sends the caller back to floating point.

use std::cmp::Ordering;

use crate::generators::IfsSpec;

pub const MAX_DENOMINATOR: i128 = 1 << 20;

/// Reduced fraction n/d with d > 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Q {
    n: i128,
    d: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Q {
    pub fn new(n: i128, d: i128) -> Option<Q> {
        if d == 0 {
            return None;
        }
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Some(Q {
            n: s * n / g,
            d: s * d / g,
        })
    }

    pub fn int(n: i128) -> Q {
        Q { n, d: 1 }
    }

    pub fn add(self, o: Q) -> Option<Q> {
        let g = gcd(self.d, o.d);
        let d = (self.d / g).checked_mul(o.d)?;
        let n = self
            .n
            .checked_mul(o.d / g)?
            .checked_add(o.n.checked_mul(self.d / g)?)?;
        Q::new(n, d)
    }

    pub fn neg(self) -> Q {
        Q {
            n: -self.n,
            d: self.d,
        }
    }

    pub fn mul(self, o: Q) -> Option<Q> {
        let g1 = gcd(self.n, o.d).max(1);
        let g2 = gcd(o.n, self.d).max(1);
        Q::new(
            (self.n / g1).checked_mul(o.n / g2)?,
            (self.d / g2).checked_mul(o.d / g1)?,
        )
    }

    pub fn div(self, o: Q) -> Option<Q> {
        if o.n == 0 {
            return None;
        }
        self.mul(Q { n: o.d, d: o.n }.normalized())
    }

    fn normalized(self) -> Q {
        if self.d < 0 {
            Q {
                n: -self.n,
                d: -self.d,
            }
        } else {
            self
        }
    }

    pub fn to_f64(self) -> f64 {
        self.n as f64 / self.d as f64
    }

    /// Smallest-denominator rational within one ulp of `x`.
    pub fn from_f64(x: f64) -> Option<Q> {
        if x == 0.0 {
            return Some(Q::int(0));
        }
        if !x.is_finite() {
            return None;
        }
        // x = mant·2^exp exactly
        let bits = x.abs().to_bits();
        let e = ((bits >> 52) & 0x7ff) as i32;
        let mut mant = (bits & ((1u64 << 52) - 1)) as i128;
        let mut exp = if e == 0 { -1074 } else { e - 1075 };
        if e != 0 {
            mant |= 1 << 52;
        }
        while mant & 1 == 0 && exp < 0 {
            mant >>= 1;
            exp += 1;
        }
        if exp >= 0 {
            let n = mant.checked_shl(exp as u32).filter(|&v| v >> exp == mant)?;
            return Some(Q::int(if x < 0.0 { -n } else { n }));
        }
        if exp < -120 {
            return None;
        }
        let (num, den) = (mant, 1i128 << (-exp));
        // one ulp of x is 2^ulp
        let ulp = (e - 1075).max(-1074);
        // convergents of num/den
        let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
        let (mut a, mut b) = (num, den);
        while b != 0 {
            let t = a / b;
            let p2 = t.checked_mul(p1)?.checked_add(p0)?;
            let q2 = t.checked_mul(q1)?.checked_add(q0)?;
            if q2 > MAX_DENOMINATOR {
                return None;
            }
            // |p2/q2 − num/den| ≤ 2^ulp  ⇔  |p2·den − q2·num| ≤ q2·den·2^ulp
            let err = (p2.checked_mul(den)? - q2.checked_mul(num)?).abs();
            let bound_shift = ulp - exp;
            let within = if bound_shift >= 0 {
                q2.checked_shl(bound_shift as u32)
                    .map_or(true, |v| err <= v)
            } else {
                err <= q2 >> (-bound_shift)
            };
            if within {
                let n = if x < 0.0 { -p2 } else { p2 };
                return Q::new(n, q2);
            }
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            (a, b) = (b, a - t * b);
        }
        None
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, o: &Q) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Q {
    fn cmp(&self, o: &Q) -> Ordering {
        match (self.n.checked_mul(o.d), o.n.checked_mul(self.d)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.to_f64().total_cmp(&o.to_f64()),
        }
    }
}

/// Closed construction pieces of diameter ≤ 2^-level, merged where they touch
/// or overlap, as integer endpoints over a common denominator. `None` if the
/// spec has a reflection, a parameter without a short rational form, or the
/// arithmetic overflows.
pub fn ifs_intervals(spec: &IfsSpec, level: u32) -> Option<(Vec<(i128, i128)>, i128)> {
    let maps: Vec<(Q, Q)> = spec
        .maps
        .iter()
        .map(|f| Some((Q::from_f64(f.ratio)?, Q::from_f64(f.shift)?)))
        .collect::<Option<_>>()?;
    if maps.iter().any(|m| m.0 <= Q::int(0)) {
        return None;
    }
    // increasing maps: the hull is spanned by the extreme fixed points
    let fps: Vec<Q> = maps
        .iter()
        .map(|&(r, s)| s.div(Q::int(1).add(r.neg())?))
        .collect::<Option<_>>()?;
    let lo = *fps.iter().min()?;
    let hi = *fps.iter().max()?;
    let width = hi.add(lo.neg())?;
    let h = (-(level as f64)).exp2();
    let mut out = Vec::new();
    let mut stack = vec![(Q::int(1), Q::int(0))];
    let mut visited = 0u64;
    while let Some((scale, offset)) = stack.pop() {
        visited += 1;
        if visited > crate::generators::MAX_PIECES {
            return None;
        }
        let a = scale.mul(lo)?.add(offset)?;
        let len = scale.mul(width)?;
        if len.to_f64() <= h {
            out.push((a, a.add(len)?));
            continue;
        }
        for &(r, s) in maps.iter().rev() {
            stack.push((scale.mul(r)?, scale.mul(s)?.add(offset)?));
        }
    }
    out.sort();
    let mut merged: Vec<(Q, Q)> = Vec::with_capacity(out.len());
    for (a, b) in out {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let mut den = 1i128;
    for &(a, b) in &merged {
        den = lcm(lcm(den, a.d)?, b.d)?;
    }
    let scaled = merged
        .iter()
        .map(|&(a, b)| Some((a.n.checked_mul(den / a.d)?, b.n.checked_mul(den / b.d)?)))
        .collect::<Option<_>>()?;
    Some((scaled, den))
}

fn lcm(a: i128, b: i128) -> Option<i128> {
    (a / gcd(a, b)).checked_mul(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::MeasureSpec;

    #[test]
    fn rational_reconstruction() {
        assert_eq!(Q::from_f64(1.0 / 3.0), Q::new(1, 3));
        assert_eq!(Q::from_f64(1.0 - 1.0 / 3.0), Q::new(2, 3));
        assert_eq!(Q::from_f64(0.2), Q::new(1, 5));
        assert_eq!(Q::from_f64(-0.75), Q::new(-3, 4));
        assert_eq!(Q::from_f64(5.0), Q::new(5, 1));
        assert_eq!(Q::from_f64(2f64.sqrt() / 2.0), None);
    }

    #[test]
    fn middle_thirds_pieces() {
        let MeasureSpec::Ifs(s) = MeasureSpec::middle_thirds() else {
            unreachable!()
        };
        let (iv, den) = ifs_intervals(&s, 4).unwrap();
        assert_eq!(den, 27);
        assert_eq!(iv.len(), 8);
        assert_eq!(iv[0], (0, 1));
        assert_eq!(iv[7], (26, 27));
    }
}
