//! Cocycles on the integers built from Følner intervals.
//!
//! `f = sum_n eps_n |A_n|^{-1/2} 1_{A_n}` over disjoint intervals `A_n`.
//! Choosing `sum_{n<=k} eps_n^2 <= phi(g_k)^2 / 2` and intervals long enough
//! that `eps_n^2 |g_k A_n ^ A_n| / |A_n| <= eps_k^2 2^-n` for `k <= n` gives
//! `||f - g_k f|| <= phi(g_k)` for every `k`. Interval lengths are powers of
//! four so every value stays rational.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{integer_enumeration, Group};
use crate::marginals::{ActionSpec, GrowthBound, MarginalFamily};
use crate::num::{floor_rational, format_rational, int, rat, serde_rational, to_f64, Rational};

/// `f = value` on `[start, start + len)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: i64,
    pub len: u64,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

impl Block {
    pub fn end(&self) -> i64 {
        self.start + self.len as i64
    }
}

pub fn validate_blocks(blocks: &[Block]) -> Result<()> {
    for b in blocks {
        if b.len == 0 || b.value.is_negative() {
            return Err(Error::InvalidSpec("blocks need positive length and nonnegative value".into()));
        }
        if b.start.checked_add(b.len as i64).is_none() {
            return Err(Error::InvalidSpec("block overflows i64".into()));
        }
    }
    if blocks.windows(2).any(|w| w[1].start < w[0].end()) {
        return Err(Error::InvalidSpec("blocks must be sorted and disjoint".into()));
    }
    Ok(())
}

pub fn block_value(blocks: &[Block], n: i64) -> Rational {
    let i = blocks.partition_point(|b| b.end() <= n);
    match blocks.get(i) {
        Some(b) if b.start <= n => b.value.clone(),
        _ => rat(0, 1),
    }
}

/// `sum_n (f(n) - f(n - k))^2`, computed segment by segment.
pub fn shift_norm_sq(blocks: &[Block], k: i64) -> Rational {
    if k == 0 || blocks.is_empty() {
        return rat(0, 1);
    }
    let mut cuts: Vec<i64> = Vec::with_capacity(4 * blocks.len());
    for b in blocks {
        cuts.extend([b.start, b.end(), b.start + k, b.end() + k]);
    }
    cuts.sort_unstable();
    cuts.dedup();
    let mut total = rat(0, 1);
    for w in cuts.windows(2) {
        let (x, y) = (w[0], w[1]);
        let d = block_value(blocks, x) - block_value(blocks, x - k);
        if !d.is_zero() {
            total += &d * &d * int(y - x);
        }
    }
    total
}

/// `sum_{|x| > r} f(x)^2`.
pub fn outer_mass(blocks: &[Block], r: i64) -> Rational {
    let mut total = rat(0, 1);
    for b in blocks {
        let lo = b.start;
        let hi = b.end() - 1;
        let count_above = (hi - lo.max(r + 1) + 1).max(0);
        let count_below = (hi.min(-r - 1) - lo + 1).max(0);
        total += &b.value * &b.value * int(count_above + count_below);
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FolnerCocycle {
    pub growth: GrowthBound,
    #[serde(with = "crate::num::serde_rational_vec")]
    pub eps: Vec<Rational>,
    pub blocks: Vec<Block>,
}

const EPS_DEN: i64 = 1 << 12;

/// Greedy construction with `sets` intervals. `eps_bound` is a strict upper
/// bound for every value of `f`; the sum constraints are enforced along
/// `g_1, .., g_horizon`.
pub fn build_folner(growth: &GrowthBound, eps_bound: &Rational, sets: usize, horizon: u64) -> Result<FolnerCocycle> {
    if sets == 0 || sets > 30 {
        return Err(Error::InvalidArgument("number of intervals must be in 1..=30".into()));
    }
    if !eps_bound.is_positive() {
        return Err(Error::InvalidArgument("eps bound must be positive".into()));
    }
    let horizon = horizon.max(sets as u64);
    let budget_at = |k: u64| growth.phi(k).powi(2) / 2.0;
    let cap = to_f64(eps_bound) - 1.0 / EPS_DEN as f64;
    let mut eps: Vec<Rational> = Vec::with_capacity(sets);
    let mut used = rat(0, 1);
    for n in 1..=sets as u64 {
        let min_budget = (n..=horizon).map(budget_at).fold(f64::INFINITY, f64::min);
        if !(min_budget > 0.0) {
            return Err(Error::Domain(format!("growth bound vanishes at or after g_{n}")));
        }
        let room = min_budget - to_f64(&used);
        let mut target = cap.min(room.max(0.0).sqrt());
        if let Some(first) = eps.first() {
            target = target.min(to_f64(first) / (n as f64).sqrt());
        }
        if let Some(prev) = eps.last() {
            target = target.min(to_f64(prev));
        }
        let mut e = floor_rational(target, EPS_DEN);
        // Guard against float rounding in the budget.
        while e.is_positive() && to_f64(&(&used + &e * &e)) > min_budget {
            e -= rat(1, EPS_DEN);
        }
        if !e.is_positive() {
            return Err(Error::Domain(format!(
                "growth bound leaves no room for interval {n}; it is not proper on the horizon"
            )));
        }
        used += &e * &e;
        eps.push(e);
    }
    let mut blocks = Vec::with_capacity(sets);
    let mut start = 1i64;
    for n in 1..=sets {
        let en2 = &eps[n - 1] * &eps[n - 1];
        let mut side = 1u64;
        loop {
            let len = side * side;
            let ok = (1..=n).all(|k| {
                let g = integer_enumeration(k as u64).unsigned_abs();
                let sym = 2 * g.min(len);
                let lhs = &en2 * int(sym as i64) / int(len as i64);
                let rhs = &eps[k - 1] * &eps[k - 1] / Rational::from_integer(BigInt::one() << n);
                lhs <= rhs
            });
            if ok {
                break;
            }
            side *= 2;
            if side > 1 << 24 {
                return Err(Error::Budget(format!("interval {n} would exceed 2^48 points")));
            }
        }
        let len = side * side;
        blocks.push(Block { start, len, value: &eps[n - 1] / int(side as i64) });
        start += len as i64;
    }
    Ok(FolnerCocycle { growth: growth.clone(), eps, blocks })
}

impl FolnerCocycle {
    /// Marginals `F = offset + f` with the given delta.
    pub fn spec(&self, offset: Rational, delta: Rational) -> Result<ActionSpec> {
        ActionSpec::new(
            Group::integers(),
            MarginalFamily::FolnerInduced { offset, blocks: self.blocks.clone(), growth: Some(self.growth.clone()) },
            delta,
        )
    }

    pub fn support_len(&self) -> u64 {
        self.blocks.iter().map(|b| b.len).sum()
    }

    pub fn describe(&self) -> String {
        let e: Vec<String> = self.eps.iter().map(format_rational).collect();
        format!("{} intervals, {} points, eps = [{}]", self.blocks.len(), self.support_len(), e.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(blocks: &[Block], k: i64) -> Rational {
        let lo = blocks.first().unwrap().start - k.abs() - 2;
        let hi = blocks.last().unwrap().end() + k.abs() + 2;
        (lo..hi)
            .map(|n| {
                let d = block_value(blocks, n) - block_value(blocks, n - k);
                &d * &d
            })
            .sum()
    }

    #[test]
    fn shift_norm_matches_pointwise() {
        let blocks = vec![
            Block { start: -3, len: 4, value: rat(1, 3) },
            Block { start: 1, len: 2, value: rat(1, 5) },
            Block { start: 7, len: 9, value: rat(1, 7) },
        ];
        for k in -12..=12 {
            assert_eq!(shift_norm_sq(&blocks, k), brute(&blocks, k), "k={k}");
        }
        assert_eq!(block_value(&blocks, 0), rat(1, 3));
        assert_eq!(block_value(&blocks, 5), rat(0, 1));
        let total: Rational = blocks.iter().map(|b| &b.value * &b.value * int(b.len as i64)).sum();
        assert_eq!(outer_mass(&blocks, 0), total - rat(1, 9));
    }

    #[test]
    fn construction_meets_conditions() {
        let g = GrowthBound::Log { alpha: int(1) };
        let f = build_folner(&g, &rat(1, 6), 6, 200).unwrap();
        assert!(f.eps.windows(2).all(|w| w[1] <= w[0]));
        assert!(f.eps.iter().all(|e| *e < rat(1, 6)));
        for k in 1..=200u64 {
            let s: Rational = f.eps.iter().take(k as usize).map(|e| e * e).sum();
            assert!(to_f64(&s) <= g.phi(k).powi(2) / 2.0);
        }
        validate_blocks(&f.blocks).unwrap();
        for b in &f.blocks {
            let side = (b.len as f64).sqrt() as u64;
            assert_eq!(side * side, b.len);
        }
    }

    #[test]
    fn rejects_bad_growth() {
        let g = GrowthBound::Log { alpha: int(0) };
        assert!(build_folner(&g, &rat(1, 6), 3, 10).is_err());
    }
}
