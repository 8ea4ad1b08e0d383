//! Multiplicative subgroups of the positive rationals as integer lattices
//! of prime exponents.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::num::Rational;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Pollard rho with Floyd cycle detection; n is composite with no factor below 1000.
fn rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorisation as `(prime, exponent)` in increasing order.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut out: BTreeMap<u64, u32> = BTreeMap::new();
    let mut n = n;
    for p in 2u64..1000 {
        if p * p > n {
            break;
        }
        while n % p == 0 {
            *out.entry(p).or_default() += 1;
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            *out.entry(m).or_default() += 1;
        } else {
            let d = rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    out.into_iter().collect()
}

fn factor_big(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let v = n
        .to_u64()
        .ok_or_else(|| Error::Unsupported(format!("cannot factor {n}: more than 64 bits")))?;
    Ok(factor_u64(v))
}

/// Prime exponents of a positive rational.
pub fn exponents(r: &Rational) -> Result<BTreeMap<u64, i64>> {
    if !r.is_positive() {
        return Err(Error::Domain("ratio group inputs must be positive".into()));
    }
    let mut out = BTreeMap::new();
    for (p, e) in factor_big(r.numer())? {
        *out.entry(p).or_insert(0) += e as i64;
    }
    for (p, e) in factor_big(r.denom())? {
        *out.entry(p).or_insert(0) -= e as i64;
    }
    Ok(out)
}

/// Lattice spanned by exponent vectors over a fixed list of primes, kept
/// in Hermite normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentLattice {
    pub primes: Vec<u64>,
    pub rows: Vec<Vec<i64>>,
}

fn checked(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Unsupported("exponent overflow in lattice reduction".into()))
}

/// Row Hermite normal form: pivots positive, entries above pivots reduced.
pub fn hermite(mut rows: Vec<Vec<i64>>, cols: usize) -> Result<Vec<Vec<i64>>> {
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        // Euclid on column c among rows r.. until one nonzero remains.
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows.len() {
                if rows[i][c] != 0 && best.map_or(true, |b| rows[i][c].abs() < rows[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            rows.swap(r, b);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][c] != 0 {
                    let q = rows[i][c].div_euclid(rows[r][c]);
                    for j in 0..cols {
                        rows[i][j] = checked(rows[i][j] as i128 - q as i128 * rows[r][j] as i128)?;
                    }
                    if rows[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if rows[r][c] == 0 {
            continue;
        }
        if rows[r][c] < 0 {
            for x in rows[r].iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..r {
            let q = rows[i][c].div_euclid(rows[r][c]);
            if q != 0 {
                for j in 0..cols {
                    rows[i][j] = checked(rows[i][j] as i128 - q as i128 * rows[r][j] as i128)?;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows.retain(|row| row.iter().any(|&x| x != 0));
    Ok(rows)
}

impl ExponentLattice {
    pub fn generated_by(values: &[Rational]) -> Result<Self> {
        let vecs: Vec<BTreeMap<u64, i64>> = values.iter().map(exponents).collect::<Result<_>>()?;
        let mut primes: Vec<u64> = vecs.iter().flat_map(|v| v.keys().copied()).collect();
        primes.sort_unstable();
        primes.dedup();
        let rows = vecs
            .iter()
            .map(|v| primes.iter().map(|p| v.get(p).copied().unwrap_or(0)).collect())
            .collect();
        let rows = hermite(rows, primes.len())?;
        Ok(ExponentLattice { primes, rows })
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Exponent vector of `r` over this lattice's primes, `None` if `r`
    /// involves other primes.
    pub fn coords(&self, r: &Rational) -> Result<Option<Vec<i64>>> {
        let e = exponents(r)?;
        if e.keys().any(|p| !self.primes.contains(p)) {
            return Ok(None);
        }
        Ok(Some(self.primes.iter().map(|p| e.get(p).copied().unwrap_or(0)).collect()))
    }

    pub fn contains(&self, r: &Rational) -> Result<bool> {
        let Some(mut v) = self.coords(r)? else { return Ok(false) };
        let mut col = 0;
        for row in &self.rows {
            while row[col] == 0 {
                if v[col] != 0 {
                    return Ok(false);
                }
                col += 1;
            }
            if v[col] % row[col] != 0 {
                return Ok(false);
            }
            let q = v[col] / row[col];
            for j in 0..v.len() {
                v[j] = checked(v[j] as i128 - q as i128 * row[j] as i128)?;
            }
            col += 1;
        }
        Ok(v.iter().all(|&x| x == 0))
    }

    /// Basis rationals, each inverted if needed so that it is below 1.
    pub fn basis(&self) -> Vec<Rational> {
        self.rows.iter().map(|row| below_one(self.rational(row))).collect()
    }

    pub fn rational(&self, row: &[i64]) -> Rational {
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for (p, &e) in self.primes.iter().zip(row) {
            let pp = BigInt::from(*p).pow(e.unsigned_abs() as u32);
            if e > 0 {
                num *= pp;
            } else if e < 0 {
                den *= pp;
            }
        }
        Rational::new(num, den)
    }
}

pub fn below_one(r: Rational) -> Rational {
    if r > Rational::one() {
        r.recip()
    } else {
        r
    }
}

/// `t` with `v = t w` when the vectors are parallel, `w` nonzero.
pub fn parallel_ratio(v: &[i64], w: &[i64]) -> Option<Rational> {
    let j = w.iter().position(|&x| x != 0)?;
    let t = Rational::new(BigInt::from(v[j]), BigInt::from(w[j]));
    let ok = v.iter().zip(w).all(|(&a, &b)| Rational::from_integer(BigInt::from(a)) == &t * BigInt::from(b));
    ok.then_some(t)
}

/// Integer `k` with `k`-th root of `r` rational, the largest one.
pub fn root_degree(r: &Rational) -> Result<u64> {
    let e = exponents(r)?;
    let g = e.values().fold(0u64, |g, &x| g.gcd(&x.unsigned_abs()));
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn factorisation() {
        assert_eq!(factor_u64(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factor_u64(1), vec![]);
        let p = 1_000_000_007u64;
        let q = 998_244_353u64;
        assert_eq!(factor_u64(p * q), vec![(q, 1), (p, 1)]);
        assert_eq!(factor_u64(1009 * 1009 * 1013), vec![(1009, 2), (1013, 1)]);
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn lattice_rank_and_membership() {
        let l = ExponentLattice::generated_by(&[rat(6, 5), rat(4, 5)]).unwrap();
        assert_eq!(l.rank(), 2);
        let c = ExponentLattice::generated_by(&[rat(3, 2), rat(9, 4)]).unwrap();
        assert_eq!(c.rank(), 1);
        assert_eq!(c.basis(), vec![rat(2, 3)]);
        assert!(c.contains(&rat(8, 27)).unwrap());
        assert!(!c.contains(&rat(2, 1)).unwrap());
        assert!(!c.contains(&rat(5, 1)).unwrap());
        let t = ExponentLattice::generated_by(&[rat(1, 1)]).unwrap();
        assert_eq!(t.rank(), 0);
        assert!(t.contains(&rat(1, 1)).unwrap());
    }

    #[test]
    fn hermite_form() {
        let h = hermite(vec![vec![2, 4], vec![3, 5], vec![1, 1]], 2).unwrap();
        assert_eq!(h, vec![vec![1, 1], vec![0, 2]]);
        let h = hermite(vec![vec![-2, 2], vec![-4, 4]], 2).unwrap();
        assert_eq!(h, vec![vec![2, -2]]);
    }

    #[test]
    fn roots() {
        assert_eq!(root_degree(&rat(4, 9)).unwrap(), 2);
        assert_eq!(root_degree(&rat(1, 8)).unwrap(), 3);
        assert_eq!(root_degree(&rat(6, 5)).unwrap(), 1);
    }
}
