//! Cocycle coefficients `c_g(h) = F(h) - F(g^-1 h)` and their norms.
//!
//! `norm_sq` uses per-family closed forms. `norm_sq_bruteforce` sums the
//! coefficients directly over a window and is kept independent of them so
//! the two can be compared.

pub mod bump;
pub mod folner;

use std::collections::HashSet;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::group::{Element, Word};
use crate::marginals::{f_value, f_value_unchecked, ActionSpec, BoundedValue, MarginalFamily, Real};
use crate::num::{int, to_f64, KahanSum, Rational};

pub const DEFAULT_TOL: f64 = 1e-9;

/// `c_g(h)` for a single copy.
pub fn cocycle_coeff(spec: &ActionSpec, g: &Element, h: &Element) -> Result<Real> {
    spec.group.check(g)?;
    let a = f_value(spec, h)?;
    let b = f_value(spec, &g.inv().mul(h)?)?;
    Ok(a.sub(&b))
}

/// `||c_g||^2` over the whole index set, multiplicity included.
pub fn norm_sq(spec: &ActionSpec, g: &Element) -> Result<Real> {
    norm_sq_tol(spec, g, DEFAULT_TOL)
}

pub fn norm_sq_tol(spec: &ActionSpec, g: &Element, tol: f64) -> Result<Real> {
    spec.group.check(g)?;
    let m = spec.multiplicity as i64;
    let single = match (&spec.family, g) {
        (MarginalFamily::WSplit { p_a, p_b, p_w }, Element::Word(w)) => {
            Real::Exact(wsplit_norm_sq(p_a, p_b, p_w, w))
        }
        (MarginalFamily::FreeProductW { mu0, mu1, distinguished }, Element::Word(w)) => {
            if mu0.len() != 2 {
                return Err(Error::Unsupported("cocycle norms need two-point base measures".into()));
            }
            let p0 = &mu0.weights()[0];
            let p1 = &mu1.weights()[0];
            let f = |letter: Option<(u8, i8)>| match letter {
                Some((g, 1)) if g == *distinguished => p1,
                _ => p0,
            };
            Real::Exact(last_letter_norm_sq(w, f))
        }
        (MarginalFamily::ZSequence { seq, .. }, Element::Int(k)) => {
            Real::Approx(z_sequence_norm_sq(seq, k.unsigned_abs(), tol / m as f64)?)
        }
        (MarginalFamily::SpecialCocycle { scale, .. }, e) => {
            let bc = spec.bump().expect("special family");
            let s2 = to_f64(scale).powi(2);
            let t = tol / (m as f64 * s2);
            let v = match e {
                Element::Int(k) => bc.gamma_norm_sq(*k, t)?,
                Element::Word(w) => special_word_norm(&bc, w, t)?,
            };
            Real::Approx(v.scale(s2))
        }
        (MarginalFamily::FolnerInduced { blocks, .. }, Element::Int(k)) => {
            Real::Exact(folner::shift_norm_sq(blocks, *k))
        }
        _ => return Err(Error::InvalidArgument(format!("{g} is not an element of this group"))),
    };
    Ok(match single {
        Real::Exact(r) => Real::Exact(r * int(m)),
        Real::Approx(b) => Real::Approx(b.scale(m as f64)),
    })
}

/// `alpha^2 #a + beta^2 #b - 2 alpha beta D(g)` with `alpha = p_a - p_w`,
/// `beta = p_b - p_w` and `D(g)` the descending sign changes.
pub fn wsplit_norm_sq(p_a: &Rational, p_b: &Rational, p_w: &Rational, w: &Word) -> Rational {
    let alpha = p_a - p_w;
    let beta = p_b - p_w;
    let (mut na, mut nb) = (0i64, 0i64);
    for s in w.syllables() {
        if s.gen == 0 {
            na += s.exp.abs();
        } else {
            nb += s.exp.abs();
        }
    }
    let d = w.descending_sign_changes() as i64;
    &alpha * &alpha * int(na) + &beta * &beta * int(nb) - int(2 * d) * &alpha * &beta
}

/// Norm for marginals that depend only on the final letter: `c_g` lives on
/// the prefixes `P_0 .. P_L` of `g` with `c_g(P_j) = f(x_j) - f(x_{j+1}^-1)`.
pub fn last_letter_norm_sq<'a>(w: &Word, f: impl Fn(Option<(u8, i8)>) -> &'a Rational) -> Rational {
    let letters: Vec<(u8, i8)> = w.letters().collect();
    let mut total = Rational::zero();
    for j in 0..=letters.len() {
        let here = if j == 0 { None } else { Some(letters[j - 1]) };
        let next_inv = letters.get(j).map(|&(g, s)| (g, -s));
        let d = f(here) - f(next_inv);
        total += &d * &d;
    }
    total
}

/// `sum_{j<k} a_j^2 + sum_{j>=k} (a_{j-k} - a_j)^2` with a certified tail.
pub fn z_sequence_norm_sq(seq: &crate::marginals::DecreasingSequence, k: u64, tol: f64) -> Result<BoundedValue> {
    if k == 0 {
        return Ok(BoundedValue::new(0.0, 0.0));
    }
    let tol = tol.max(1e-15);
    let mut n = 2 * k + 16;
    loop {
        if seq.tail_sq_diff_bound(k, n) <= 0.5 * tol {
            break;
        }
        n = n.saturating_mul(2);
        if n > 2_000_000_000 {
            return Err(Error::Budget(format!("tail of ||c_{k}||^2 does not reach {tol}")));
        }
    }
    // Shrink back toward the smallest n that meets the tail budget.
    let mut lo = n / 2;
    while n - lo > 64 {
        let mid = lo + (n - lo) / 2;
        if seq.tail_sq_diff_bound(k, mid) <= 0.5 * tol {
            n = mid;
        } else {
            lo = mid;
        }
    }
    let tail = seq.tail_sq_diff_bound(k, n);
    let a: Vec<f64> = (0..=n).map(|j| seq.term(j)).collect();
    let mut s = KahanSum::default();
    for &x in &a[..k as usize] {
        s.add(x * x);
    }
    for j in k as usize..=n as usize {
        let d = a[j - k as usize] - a[j];
        s.add(d * d);
    }
    let rounding = s.rounding_bound() + 4.0 * f64::EPSILON * s.value() * (n as f64).sqrt();
    Ok(BoundedValue::new(s.value() + 0.5 * tail, 0.5 * tail + rounding))
}

/// `sum ||gamma_{e_j}||^2 + 2 sum H(e_j) H(-e_{j+1})` over syllables, the
/// second sum running over descending pairs.
fn special_word_norm(bc: &bump::BumpCocycle, w: &Word, tol: f64) -> Result<BoundedValue> {
    let syl = w.syllables();
    let per = tol / (syl.len().max(1) as f64);
    let mut value = 0.0;
    let mut err = 0.0;
    for s in syl {
        let g = bc.gamma_norm_sq(s.exp, per)?;
        value += g.value;
        err += g.err;
    }
    for p in syl.windows(2) {
        value += 2.0 * bc.h(p[0].exp) * bc.h(-p[1].exp);
    }
    Ok(BoundedValue::new(value, err + 4.0 * f64::EPSILON * value))
}

/// Outcome of direct summation over a window.
#[derive(Debug, Clone)]
pub struct WindowSum {
    /// Sum over the window, exact when every coefficient is rational.
    pub partial: Real,
    /// Upper bound for the contribution from outside the window.
    pub tail: f64,
}

impl WindowSum {
    pub fn bounded(&self) -> BoundedValue {
        BoundedValue::new(
            self.partial.value() + 0.5 * self.tail,
            0.5 * self.tail + self.partial.err(),
        )
    }

    pub fn lower(&self) -> f64 {
        self.partial.lower()
    }

    pub fn upper(&self) -> f64 {
        self.partial.upper() + self.tail
    }
}

/// Window on which `c_g` is summed directly, together with the tail bound
/// for one copy. Elements are `h` with `c_g(h)` possibly nonzero.
pub(crate) fn support_window(spec: &ActionSpec, g: &Element, radius: u32) -> Result<(Vec<Element>, Real)> {
    let r = radius as i64;
    let glen = g.len() as i64;
    match (&spec.family, g) {
        (MarginalFamily::WSplit { .. } | MarginalFamily::FreeProductW { .. }, Element::Word(_)) => {
            if r < glen {
                return Err(Error::InvalidArgument(format!("radius {radius} is below |g| = {glen}")));
            }
            Ok((spec.group.ball(radius), Real::Exact(Rational::zero())))
        }
        (MarginalFamily::SpecialCocycle { scale, .. }, Element::Word(w)) => {
            if r < glen {
                return Err(Error::InvalidArgument(format!("radius {radius} is below |g| = {glen}")));
            }
            // If h = p t with p the longest common prefix of h and g and t
            // has two or more syllables, h and g^-1 h share their final
            // syllable. So the support lies on the rays p x^i.
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for j in 0..=w.len() {
                let p = w.prefix(j);
                for x in 0..spec.group.rank {
                    for i in -r..=r {
                        let h = p.mul(&Word::power(x, i));
                        if seen.insert(h.clone()) {
                            out.push(Element::Word(h));
                        }
                    }
                }
            }
            let bc = spec.bump().expect("special family");
            let rays = (glen as f64 + 1.0) * spec.group.rank as f64;
            let k2 = (2.0 * glen as f64).powi(2);
            let tail = rays * to_f64(scale).powi(2) * k2 * bc.increment_tail((r - glen).max(0) as u64);
            Ok((out, Real::approx(tail)))
        }
        (_, Element::Int(k)) => {
            let k = *k;
            let window: Vec<Element> = (-r..=r).map(Element::Int).collect();
            let tail = match &spec.family {
                MarginalFamily::ZSequence { n0, seq, .. } => {
                    if r < k.abs() + n0.abs() {
                        return Err(Error::InvalidArgument(format!(
                            "radius {radius} must be at least |k| + |n0| = {}",
                            k.abs() + n0.abs()
                        )));
                    }
                    let base = (r - n0) as u64;
                    let ka = k.unsigned_abs();
                    if k == 0 {
                        0.0
                    } else if k > 0 {
                        seq.tail_sq_diff_bound(ka, base)
                    } else {
                        seq.tail_sq_diff_bound(ka, base + ka)
                    }
                }
                MarginalFamily::SpecialCocycle { scale, .. } => {
                    if r < k.abs() {
                        return Err(Error::InvalidArgument(format!("radius {radius} is below |k|")));
                    }
                    let bc = spec.bump().expect("special family");
                    let ka = k.unsigned_abs() as f64;
                    to_f64(scale).powi(2) * ka * ka * bc.increment_tail((r - k.abs()) as u64)
                }
                MarginalFamily::FolnerInduced { blocks, .. } => {
                    return Ok((window, Real::Exact(int(4) * folner::outer_mass(blocks, r - k.abs()))));
                }
                _ => return Err(Error::InvalidArgument("element does not match the group".into())),
            };
            Ok((window, Real::approx(tail)))
        }
        _ => Err(Error::InvalidArgument(format!("{g} is not an element of this group"))),
    }
}

/// Direct summation of `c_g(h)^2` over `h` in the ball of the given radius
/// (along the support rays for bump families on free groups), plus the
/// family's tail bound. Multiplicity included.
pub fn norm_sq_bruteforce(spec: &ActionSpec, g: &Element, radius: u32) -> Result<WindowSum> {
    spec.group.check(g)?;
    let (window, tail) = support_window(spec, g, radius)?;
    let bump = spec.bump();
    let ginv = g.inv();
    let m = spec.multiplicity as i64;
    let mut exact = Some(Rational::zero());
    let mut approx = KahanSum::default();
    let mut approx_err = 0.0;
    for h in &window {
        let a = f_value_unchecked(spec, h, bump.as_deref())?;
        let b = f_value_unchecked(spec, &ginv.mul(h)?, bump.as_deref())?;
        match (a, b) {
            (Real::Exact(x), Real::Exact(y)) => {
                if x != y {
                    let d = x - y;
                    let d2 = &d * &d;
                    approx.add(to_f64(&d2));
                    if let Some(e) = exact.as_mut() {
                        *e += d2;
                    }
                }
            }
            (x, y) => {
                let d = x.value() - y.value();
                approx.add(d * d);
                approx_err += 2.0 * d.abs() * (x.err() + y.err()) + (x.err() + y.err()).powi(2);
                exact = None;
            }
        }
    }
    let tail_f = tail.upper() * m as f64;
    let partial = match exact {
        Some(e) if tail.exact().is_some() => Real::Exact(e * int(m)),
        _ => Real::Approx(BoundedValue::new(
            approx.value() * m as f64,
            (approx_err + approx.rounding_bound()) * m as f64,
        )),
    };
    Ok(WindowSum { partial, tail: tail_f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use crate::marginals::DecreasingSequence;
    use crate::num::rat;

    fn wsplit(pb: Rational) -> ActionSpec {
        ActionSpec::new(
            Group::free(2),
            MarginalFamily::WSplit { p_a: rat(3, 5), p_b: pb, p_w: rat(1, 2) },
            rat(1, 3),
        )
        .unwrap()
    }

    fn word(s: &str) -> Element {
        Element::Word(Word::parse(s).unwrap())
    }

    #[test]
    fn wsplit_known_values() {
        let s = wsplit(rat(2, 5));
        let n = |w: &str| norm_sq(&s, &word(w)).unwrap().exact().unwrap().clone();
        assert_eq!(n("a"), rat(1, 100));
        assert_eq!(n("b"), rat(1, 100));
        assert_eq!(n("a b^-1"), rat(4, 100));
        assert_eq!(n("a^-1 b"), rat(2, 100));
        assert_eq!(n("a b^-1 a"), rat(5, 100));
        assert_eq!(n("e"), rat(0, 1));
    }

    #[test]
    fn coefficients_of_generators() {
        let s = wsplit(rat(2, 5));
        assert_eq!(cocycle_coeff(&s, &word("a"), &word("a")).unwrap(), Real::Exact(rat(1, 10)));
        assert_eq!(cocycle_coeff(&s, &word("b"), &word("b")).unwrap(), Real::Exact(rat(-1, 10)));
        assert_eq!(cocycle_coeff(&s, &word("a"), &word("b a")).unwrap(), Real::Exact(rat(0, 1)));
    }

    #[test]
    fn closed_forms_match_window_sums() {
        for pb in [rat(2, 5), rat(5, 12)] {
            let s = wsplit(pb);
            for w in crate::group::ball(2, 4) {
                let g = Element::Word(w);
                let c = norm_sq(&s, &g).unwrap();
                let b = norm_sq_bruteforce(&s, &g, g.len() as u32).unwrap();
                assert_eq!(c.exact(), b.partial.exact(), "g = {g}");
                assert_eq!(b.tail, 0.0);
            }
        }
    }

    #[test]
    fn free_product_matches_window_sums() {
        let (m0, m1) = crate::marginals::measures_from_lambda(&rat(1, 2)).unwrap();
        let s = ActionSpec::new(
            Group::free(3),
            MarginalFamily::FreeProductW { mu0: m0, mu1: m1, distinguished: 1 },
            rat(1, 3),
        )
        .unwrap();
        for w in crate::group::ball(3, 3) {
            let g = Element::Word(w);
            let c = norm_sq(&s, &g).unwrap();
            let b = norm_sq_bruteforce(&s, &g, 3).unwrap();
            assert_eq!(c.exact(), b.partial.exact(), "g = {g}");
        }
    }

    #[test]
    fn z_sequence_within_window_bounds() {
        let s = ActionSpec::new(
            Group::integers(),
            MarginalFamily::ZSequence {
                lambda: rat(1, 2),
                n0: 1,
                seq: DecreasingSequence::InvSqrt { scale: rat(1, 6) },
            },
            rat(1, 3),
        )
        .unwrap();
        for k in [-7i64, -1, 1, 2, 5, 30] {
            let c = norm_sq(&s, &Element::Int(k)).unwrap();
            let b = norm_sq_bruteforce(&s, &Element::Int(k), 4000).unwrap();
            assert!(c.lower() <= b.upper() + 1e-12 && b.lower() <= c.upper() + 1e-12, "k={k}");
            assert!(c.err() < 1e-8);
        }
    }

    #[test]
    fn multiplicity_scales_norm() {
        let s = wsplit(rat(2, 5)).with_multiplicity(7).unwrap();
        assert_eq!(norm_sq(&s, &word("a b^-1")).unwrap(), Real::Exact(rat(28, 100)));
        let b = norm_sq_bruteforce(&s, &word("a b^-1"), 2).unwrap();
        assert_eq!(b.partial, Real::Exact(rat(28, 100)));
    }

    #[test]
    fn radius_below_length_is_rejected() {
        let s = wsplit(rat(2, 5));
        assert!(norm_sq_bruteforce(&s, &word("a b a"), 2).is_err());
    }
}
