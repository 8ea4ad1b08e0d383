//! Tent-bump functions on the integers.
//!
//! `H` is a sequence of tents laid end to end on the positive integers: tent
//! `m` has half-width `a_m` (`a_0 = 1`, `a_m = ceil(delta m^2)`), starts at
//! `b_m = 2 (a_0 + .. + a_{m-1})` and rises linearly from `0` to `1` and back.
//! With `delta = min(1, 1/(144 D^2))` the shifted differences
//! `gamma_k(n) = H(n) - H(n - k)` satisfy `||gamma_k||^2 >= D |k|^{3/2}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::marginals::BoundedValue;
use crate::num::{int, rat, to_f64, KahanSum, Rational};

const TABLE_BUMPS: usize = 1 << 16;
const MAX_STREAM_BUMPS: u64 = 400_000_000;

#[derive(Debug)]
pub struct BumpCocycle {
    d: Rational,
    delta: Rational,
    delta_num: u128,
    delta_den: u128,
    truncate: Option<u64>,
    /// `b_m` for `m < TABLE_BUMPS`, plus the end of the last tabulated tent.
    starts: Vec<u64>,
    memo: Mutex<HashMap<u64, (f64, BoundedValue)>>,
}

/// `min(1, 1/(144 D^2))`.
pub fn delta_for(d: &Rational) -> Rational {
    let v = (int(144) * d * d).recip();
    if v > Rational::one() {
        Rational::one()
    } else {
        v
    }
}

/// Builds the bump cocycle with growth constant `d`.
pub fn build_special(d: &Rational) -> Result<BumpCocycle> {
    BumpCocycle::new(d, None)
}

impl BumpCocycle {
    pub fn new(d: &Rational, truncate: Option<u64>) -> Result<Self> {
        if *d <= rat(0, 1) {
            return Err(Error::Domain("bump growth constant must be positive".into()));
        }
        let delta = delta_for(d);
        let to_u128 = |x: &BigInt| {
            x.to_u128()
                .filter(|v| *v < 1u128 << 100)
                .ok_or_else(|| Error::Domain("bump growth constant too large".into()))
        };
        let delta_num = to_u128(delta.numer())?;
        let delta_den = to_u128(delta.denom())?;
        let mut bc = BumpCocycle { d: d.clone(), delta, delta_num, delta_den, truncate, starts: Vec::new(), memo: Mutex::default() };
        let n = truncate.map_or(TABLE_BUMPS, |t| (t as usize).min(TABLE_BUMPS));
        let mut starts = Vec::with_capacity(n + 1);
        let mut b = 0u64;
        for m in 0..n as u64 {
            starts.push(b);
            b += 2 * bc.width(m);
        }
        starts.push(b);
        bc.starts = starts;
        Ok(bc)
    }

    /// Process-wide cache, so repeated marginal lookups share one table.
    pub fn shared(d: &Rational, truncate: Option<u64>) -> Arc<BumpCocycle> {
        static CACHE: OnceLock<Mutex<HashMap<(Rational, Option<u64>), Arc<BumpCocycle>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().expect("bump cache poisoned");
        map.entry((d.clone(), truncate))
            .or_insert_with(|| Arc::new(BumpCocycle::new(d, truncate).expect("validated growth constant")))
            .clone()
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn delta_f64(&self) -> f64 {
        to_f64(&self.delta)
    }

    pub fn truncation(&self) -> Option<u64> {
        self.truncate
    }

    /// Half-width `a_m`.
    pub fn width(&self, m: u64) -> u64 {
        if m == 0 {
            return 1;
        }
        let m2 = (m as u128) * (m as u128);
        let w = (self.delta_num * m2).div_ceil(self.delta_den);
        w.max(1) as u64
    }

    /// Start `b_m` of tent `m`.
    pub fn start(&self, m: u64) -> u64 {
        if (m as usize) < self.starts.len() {
            return self.starts[m as usize];
        }
        let last = self.starts.len() as u64 - 1;
        let mut b = self.starts[last as usize];
        for j in last..m {
            b += 2 * self.width(j);
        }
        b
    }

    fn active(&self, m: u64) -> bool {
        self.truncate.is_none_or(|t| m < t)
    }

    /// Tent containing position `n >= 0`, as `(m, b_m, a_m)` with
    /// `b_m <= n < b_m + 2 a_m`.
    pub fn locate(&self, n: u64) -> (u64, u64, u64) {
        let table_end = *self.starts.last().unwrap();
        if n < table_end {
            let m = self.starts.partition_point(|&b| b <= n) - 1;
            return (m as u64, self.starts[m], self.width(m as u64));
        }
        let mut m = self.starts.len() as u64 - 1;
        let mut b = table_end;
        loop {
            let a = self.width(m);
            if n < b + 2 * a {
                return (m, b, a);
            }
            b += 2 * a;
            m += 1;
        }
    }

    /// `H(n)` as an exact rational.
    pub fn h_exact(&self, n: i64) -> Rational {
        if n <= 0 {
            return rat(0, 1);
        }
        let (m, b, a) = self.locate(n as u64);
        if !self.active(m) {
            return rat(0, 1);
        }
        let x = n as u64 - b;
        let up = x.min(2 * a - x);
        Rational::new(BigInt::from(up), BigInt::from(a))
    }

    pub fn h(&self, n: i64) -> f64 {
        if n <= 0 {
            return 0.0;
        }
        let (m, b, a) = self.locate(n as u64);
        if !self.active(m) {
            return 0.0;
        }
        let x = n as u64 - b;
        x.min(2 * a - x) as f64 / a as f64
    }

    fn cursor(&self) -> Cursor<'_> {
        Cursor { bc: self, m: 0, b: 0, a: 1 }
    }

    /// Last position where `H` can be nonzero, for truncated cocycles.
    pub fn support_end(&self) -> Option<u64> {
        self.truncate.map(|t| self.start(t))
    }

    /// `||gamma_k||^2 = sum_n (H(n) - H(n - k))^2` to within `tol`.
    pub fn gamma_norm_sq(&self, k: i64, tol: f64) -> Result<BoundedValue> {
        let k = k.unsigned_abs();
        if let Some(&(t, v)) = self.memo.lock().expect("memo poisoned").get(&k) {
            if t <= tol {
                return Ok(v);
            }
        }
        let v = self.gamma_norm_sq_uncached(k, tol)?;
        self.memo.lock().expect("memo poisoned").insert(k, (tol, v));
        Ok(v)
    }

    fn gamma_norm_sq_uncached(&self, k: u64, tol: f64) -> Result<BoundedValue> {
        if k == 0 {
            return Ok(BoundedValue::new(0.0, 0.0));
        }
        if let Some(end) = self.support_end() {
            let mut s = KahanSum::default();
            let mut cur = self.cursor();
            let mut prev = self.cursor();
            for n in 1..=end + k {
                let d = cur.h(n as i64) - prev.h(n as i64 - k as i64);
                s.add(d * d);
            }
            return Ok(BoundedValue::new(s.value(), s.rounding_bound()));
        }
        // Direct summation until both tents around each position are wide.
        let mut m0 = 1u64;
        while self.width(m0 - 1) < k {
            m0 += 1;
        }
        let end = self.start(m0);
        let mut s = KahanSum::default();
        let mut cur = self.cursor();
        let mut prev = self.cursor();
        for n in 1..=end {
            let d = cur.h(n as i64) - prev.h(n as i64 - k as i64);
            s.add(d * d);
        }
        // Closed form per tent afterwards.
        let kf = k as f64;
        let s1 = kf * (kf - 1.0) / 2.0;
        let s2 = (kf - 1.0) * kf * (2.0 * kf - 1.0) / 6.0;
        let mid = (kf - 1.0) * kf * kf - 4.0 * kf * s1 + 4.0 * s2;
        let cross = kf * s1 - s2;
        let delta = self.delta_f64();
        let sd = delta.sqrt();
        let kk = kf * kf;
        let mut m = m0;
        let mut a_prev = self.width(m0 - 1) as f64;
        loop {
            if m >= m0 + 2 && m % 1024 == 0 {
                let n = m as f64;
                let s1_hi = 1.0 / (delta * (n - 1.0));
                let s1_lo = (std::f64::consts::FRAC_PI_2 - (sd * n).atan()) / sd;
                let s2_hi = 1.0 / (3.0 * delta * delta * (n - 2.0).powi(3));
                let lo = (2.0 * kk * s1_lo - 2.0 * (kf - 1.0) * kk * s2_hi).max(0.0);
                let hi = 2.0 * kk * s1_hi + (kf - 1.0) * kk * s2_hi;
                if hi - lo <= 2.0 * tol {
                    let v = s.value();
                    return Ok(BoundedValue::new(
                        v + 0.5 * (lo + hi),
                        0.5 * (hi - lo) * (1.0 + 1e-9) + s.rounding_bound() + 1e-12 * hi,
                    ));
                }
                if m >= MAX_STREAM_BUMPS {
                    return Err(Error::Budget(format!(
                        "tail of ||gamma_{k}||^2 still wider than {tol} after {m} tents"
                    )));
                }
            }
            let a = self.width(m) as f64;
            let r1 = s2 / (a * a) - 2.0 * cross / (a * a_prev) + s2 / (a_prev * a_prev);
            let r2 = 2.0 * (a - kf + 1.0) * kk / (a * a);
            let r3 = mid / (a * a);
            s.add(r1 + r2 + r3);
            a_prev = a;
            m += 1;
        }
    }

    /// Upper bound for `sum_{j > j0} (H(j) - H(j - 1))^2`.
    pub fn increment_tail(&self, j0: u64) -> f64 {
        let (m, _, a) = self.locate(j0 + 1);
        if let Some(t) = self.truncate {
            return (m..t).map(|i| 2.0 / self.width(i) as f64).sum();
        }
        2.0 / a as f64 + 2.0 / (self.delta_f64() * m.max(1) as f64)
    }
}

/// Forward-only tent lookup for increasing positions.
struct Cursor<'a> {
    bc: &'a BumpCocycle,
    m: u64,
    b: u64,
    a: u64,
}

impl Cursor<'_> {
    fn h(&mut self, n: i64) -> f64 {
        if n <= 0 {
            return 0.0;
        }
        let n = n as u64;
        while n >= self.b + 2 * self.a {
            self.b += 2 * self.a;
            self.m += 1;
            self.a = self.bc.width(self.m);
        }
        if !self.bc.active(self.m) {
            return 0.0;
        }
        let x = n - self.b;
        x.min(2 * self.a - x) as f64 / self.a as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(bc: &BumpCocycle, k: i64, upto: i64) -> f64 {
        (1..=upto).map(|n| (bc.h(n) - bc.h(n - k)).powi(2)).sum()
    }

    #[test]
    fn widths_and_starts() {
        let bc = BumpCocycle::new(&rat(1, 2), None).unwrap();
        assert_eq!(bc.delta(), &rat(1, 36));
        assert_eq!(bc.width(0), 1);
        assert_eq!(bc.width(1), 1);
        assert_eq!(bc.width(6), 1);
        assert_eq!(bc.width(7), 2);
        assert_eq!(bc.start(1), 2);
        assert_eq!(bc.start(70_000), bc.start(69_999) + 2 * bc.width(69_999));
        assert_eq!(delta_for(&int(36)), Rational::new(1.into(), 186_624.into()));
        assert_eq!(delta_for(&rat(1, 100)), int(1));
    }

    #[test]
    fn tent_shape() {
        let bc = BumpCocycle::new(&rat(1, 12), None).unwrap();
        // delta = 1: widths 1, 1, 4, 9, ...
        let v: Vec<f64> = (0..=6).map(|n| bc.h(n)).collect();
        assert_eq!(v, [0.0, 1.0, 0.0, 1.0, 0.0, 0.25, 0.5]);
        assert_eq!(bc.h_exact(5), rat(1, 4));
        assert_eq!(bc.h(-3), 0.0);
    }

    #[test]
    fn closed_form_matches_direct_partial_sums() {
        for d in [rat(1, 4), rat(1, 2), int(1)] {
            let bc = BumpCocycle::new(&d, None).unwrap();
            for k in [1i64, 2, 3, 7, 16] {
                let v = bc.gamma_norm_sq(k, 1e-3).unwrap();
                // The direct sum over a long prefix is a lower bound.
                let far = bc.start(600) as i64;
                let p = direct(&bc, k, far);
                assert!(p <= v.upper() + 1e-9, "d={d} k={k} p={p} v={v:?}");
                let tail = 2.0 * (k * k) as f64 / (bc.delta_f64() * 599.0);
                assert!(v.lower() <= p + tail + 1e-9);
            }
        }
    }

    #[test]
    fn gamma_one_is_twice_reciprocal_sum() {
        let bc = BumpCocycle::new(&int(1), None).unwrap();
        let v = bc.gamma_norm_sq(1, 1e-6).unwrap();
        let head: f64 = (0..2_000_000u64).map(|m| 2.0 / bc.width(m) as f64).sum();
        assert!(v.value >= head - 1e-6);
        assert!(v.value - head < 2.0 / (bc.delta_f64() * 1_999_999.0) + 2.0 * v.err);
    }

    #[test]
    fn truncated_is_finite_sum() {
        let bc = BumpCocycle::new(&rat(1, 4), Some(4)).unwrap();
        let end = bc.support_end().unwrap() as i64;
        assert_eq!(bc.h(end + 1), 0.0);
        let v = bc.gamma_norm_sq(3, 0.0).unwrap();
        assert!((v.value - direct(&bc, 3, end + 3)).abs() < 1e-12);
    }

    #[test]
    fn growth_lower_bound_small_k() {
        let d = rat(1, 2);
        let bc = BumpCocycle::new(&d, None).unwrap();
        for k in 1..=24 {
            let v = bc.gamma_norm_sq(k, 1e-2).unwrap();
            assert!(v.lower() >= 0.5 * (k as f64).powf(1.5), "k={k} {v:?}");
        }
    }
}
