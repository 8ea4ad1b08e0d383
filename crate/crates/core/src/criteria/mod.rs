//! Conservativity tests driven by cocycle growth.
//!
//! With `kappa > kappa0(delta) = delta^-2 + delta^-1 (1 - delta)^-2`, a
//! divergent `sum_g exp(-kappa ||c_g||^2)` makes the action conservative; a
//! convergent `sum_g exp(-||c_g||^2 / 2)` makes it dissipative. Both series
//! are infinite, so every verdict rests on an analytic bound that is stored
//! with the verdict and can be rechecked on its own.

pub mod montecarlo;
pub mod products;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycles::norm_sq_tol;
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind, Word};
use crate::marginals::{ActionSpec, DecreasingSequence, MarginalFamily};
use crate::num::{format_rational, int, rat, to_f64, Rational};
use crate::pool;

/// `delta^-2 + delta^-1 (1 - delta)^-2`.
pub fn kappa0(delta: &Rational) -> Result<Rational> {
    if !delta.is_positive() || *delta > rat(1, 2) {
        return Err(Error::Domain("delta must lie in (0, 1/2]".into()));
    }
    let one = Rational::one();
    let q = &one - delta;
    Ok((delta * delta).recip() + (delta * &q * &q).recip())
}

/// Smallest integer strictly above `kappa0(delta)`.
pub fn auto_kappa(delta: &Rational) -> Result<Rational> {
    Ok(kappa0(delta)?.floor() + int(1))
}

#[derive(Debug, Clone, PartialEq)]
pub enum KappaChoice {
    Auto,
    Value(Rational),
}

impl KappaChoice {
    pub fn resolve(&self, delta: &Rational) -> Result<Rational> {
        match self {
            KappaChoice::Auto => auto_kappa(delta),
            KappaChoice::Value(k) if k.is_positive() => Ok(k.clone()),
            KappaChoice::Value(_) => Err(Error::InvalidArgument("kappa must be positive".into())),
        }
    }
}

/// `sum_{|g| <= radius} exp(-kappa ||c_g||^2)` bracketed by norm errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSum {
    pub radius: u32,
    pub lower: f64,
    pub upper: f64,
}

const SUM_TOL: f64 = 1e-6;

pub fn criterion_partial_sums(spec: &ActionSpec, kappa: f64, radius: u32) -> Result<Vec<PartialSum>> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument("kappa must be positive".into()));
    }
    let mut out = Vec::with_capacity(radius as usize + 1);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for n in 0..=radius {
        let sphere = spec.group.sphere(n);
        let terms: Vec<Result<(f64, f64)>> = pool::install(|| {
            sphere
                .par_iter()
                .map(|g| {
                    let v = norm_sq_tol(spec, g, SUM_TOL)?;
                    Ok(((-kappa * v.upper()).exp(), (-kappa * v.lower().max(0.0)).exp()))
                })
                .collect()
        });
        for t in terms {
            let (a, b) = t?;
            lo += a;
            hi += b;
        }
        let slack = 4.0 * f64::EPSILON * out.len().max(1) as f64;
        // The exact sums grow with the radius, so earlier lower bounds still apply.
        let floor = out.last().map_or(0.0, |p: &PartialSum| p.lower);
        out.push(PartialSum { radius: n, lower: (lo * (1.0 - slack)).max(floor), upper: hi * (1.0 + slack) });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Conservative,
    Dissipative,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// `||c_g||^2 >= slope |g|`, so the sphere of radius `n` contributes at
    /// most `beta rho^n` to `sum exp(-||c_g||^2 / 2)` with
    /// `rho = growth exp(-slope / 2)`.
    SphereGeometric {
        slope: f64,
        growth: f64,
        beta: f64,
        rho: f64,
        head_radius: u32,
        head_upper: f64,
        tail_upper: f64,
        total_upper: f64,
        basis: String,
    },
    /// The term at `k` is at most `(1 + |k|)^-exponent`.
    PowerLaw {
        exponent: f64,
        head_radius: u32,
        head_upper: f64,
        tail_upper: f64,
        total_upper: f64,
        basis: String,
    },
    /// Words `x^-1 y^n1 x y^m1 ... x^-1 y^nk x y^mk` with `n_i, m_i >= 1`
    /// have `||c||^2 = mult (2k A + (sum n_i + m_i) B + (k - 1) C)`, and the
    /// family sum is `exp(kappa mult C) sum_k q^k`.
    WordFamily {
        kappa: f64,
        multiplicity: u32,
        x: char,
        y: char,
        a: String,
        b: String,
        c: String,
        q: f64,
        enumerated_words: u64,
        enumerated_sum: f64,
    },
    /// `exp(-kappa ||c_k||^2) >= constant k^-exponent` for `k >= 1`.
    PowerMinorant { kappa: f64, constant: f64, exponent: f64, basis: String },
    /// `exp(-kappa ||c_k||^2) >= constant ln(k + shift)^-power` for `k >= 1`.
    LogMinorant { kappa: f64, constant: f64, power: f64, shift: u64, basis: String },
    /// `||c_{s^n}||^2 <= bound` for every `n`.
    BoundedNorm { element: Element, bound: f64, checked_up_to: u32, basis: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionVerdict {
    pub verdict: Verdict,
    pub kappa: String,
    pub kappa0: String,
    pub multiplicity: u32,
    pub evidence: Option<Evidence>,
    pub partial_sums: Vec<PartialSum>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CriterionOptions {
    pub kappa: KappaChoice,
    /// Radius for the reported partial sums; `None` picks a small default.
    pub radius: Option<u32>,
    /// Stop enumerating witness words once their sum exceeds this.
    pub witness_target: f64,
    pub witness_budget: u64,
}

impl Default for CriterionOptions {
    fn default() -> Self {
        CriterionOptions { kappa: KappaChoice::Auto, radius: None, witness_target: 1e3, witness_budget: 2_000_000 }
    }
}

pub fn default_radius(spec: &ActionSpec) -> u32 {
    match spec.group.kind {
        GroupKind::Free => match spec.group.rank {
            1 => 64,
            2 => 5,
            3 => 4,
            _ => 2,
        },
        GroupKind::Integers => 128,
    }
}

pub fn classify_conservativity(spec: &ActionSpec, opts: &CriterionOptions) -> Result<CriterionVerdict> {
    spec.validate()?;
    let k0 = kappa0(&spec.delta)?;
    let kappa = opts.kappa.resolve(&spec.delta)?;
    let kf = to_f64(&kappa);
    let mut notes = Vec::new();
    let diss = dissipative_evidence(spec, &mut notes)?;
    let cons = if kappa > k0 {
        conservative_evidence(spec, kf, opts, &mut notes)?
    } else {
        notes.push(format!(
            "kappa = {} does not exceed kappa0 = {}; the divergence test does not apply",
            format_rational(&kappa),
            format_rational(&k0)
        ));
        None
    };
    let (verdict, evidence) = match (diss, cons) {
        (Some(_), Some(_)) => {
            return Err(Error::Domain("both a convergence and a divergence certificate hold".into()));
        }
        (Some(d), None) => (Verdict::Dissipative, Some(d)),
        (None, Some(c)) => (Verdict::Conservative, Some(c)),
        (None, None) => (Verdict::Inconclusive, None),
    };
    let radius = opts.radius.unwrap_or_else(|| default_radius(spec));
    let sum_kappa = if verdict == Verdict::Dissipative { 0.5 } else { kf };
    let partial_sums = match criterion_partial_sums(spec, sum_kappa, radius) {
        Ok(p) => p,
        Err(e) => {
            notes.push(format!("partial sums unavailable: {e}"));
            Vec::new()
        }
    };
    let out = CriterionVerdict {
        verdict,
        kappa: format_rational(&kappa),
        kappa0: format_rational(&k0),
        multiplicity: spec.multiplicity,
        evidence,
        partial_sums,
        notes,
    };
    recheck(&out)?;
    Ok(out)
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

fn geometric_tail(beta: f64, rho: f64, head_radius: u32) -> f64 {
    beta * rho.powi(head_radius as i32 + 1) / (1.0 - rho)
}

fn power_tail(exponent: f64, head_radius: u32) -> f64 {
    2.0 * (1.0 + head_radius as f64).powf(1.0 - exponent) / (exponent - 1.0)
}

/// `q = exp(-kappa m (2A + C)) (x / (1 - x))^2` with `x = exp(-kappa m B)`.
pub fn word_family_ratio(kappa: f64, m: u32, a: f64, b: f64, c: f64) -> f64 {
    let km = kappa * m as f64;
    let x = (-km * b).exp();
    if x >= 1.0 {
        return f64::INFINITY;
    }
    (-km * (2.0 * a + c)).exp() * (x / (1.0 - x)).powi(2)
}

/// Re-derives every stored quantity of the certificate.
pub fn recheck(v: &CriterionVerdict) -> Result<()> {
    let fail = |msg: &str| Err(Error::Domain(format!("certificate check failed: {msg}")));
    let k0 = crate::num::parse_rational(&v.kappa0)?;
    let kappa = crate::num::parse_rational(&v.kappa)?;
    match (&v.verdict, &v.evidence) {
        (Verdict::Inconclusive, None) => return Ok(()),
        (Verdict::Inconclusive, Some(_)) => return fail("inconclusive verdict carries evidence"),
        (_, None) => return fail("missing evidence"),
        _ => {}
    }
    let ev = v.evidence.as_ref().unwrap();
    match (v.verdict, ev) {
        (
            Verdict::Dissipative,
            Evidence::SphereGeometric { slope, growth, beta, rho, head_radius, head_upper, tail_upper, total_upper, .. },
        ) => {
            if !rel_eq(*rho, growth * (-slope / 2.0).exp()) {
                return fail("rho does not match slope");
            }
            if !(*rho < 1.0) {
                return fail("rho is not below 1");
            }
            if !rel_eq(*tail_upper, geometric_tail(*beta, *rho, *head_radius)) {
                return fail("geometric tail mismatch");
            }
            if !rel_eq(*total_upper, head_upper + tail_upper) || !total_upper.is_finite() {
                return fail("total mismatch");
            }
        }
        (Verdict::Dissipative, Evidence::PowerLaw { exponent, head_radius, head_upper, tail_upper, total_upper, .. }) => {
            if !(*exponent > 1.0) {
                return fail("power law exponent is not above 1");
            }
            if !rel_eq(*tail_upper, power_tail(*exponent, *head_radius)) {
                return fail("integral tail mismatch");
            }
            if !rel_eq(*total_upper, head_upper + tail_upper) || !total_upper.is_finite() {
                return fail("total mismatch");
            }
        }
        (Verdict::Conservative, e) => {
            if kappa <= k0 {
                return fail("kappa does not exceed kappa0");
            }
            let kf = to_f64(&kappa);
            match e {
                Evidence::WordFamily { kappa, multiplicity, a, b, c, q, .. } => {
                    let p = |s: &str| crate::num::parse_rational(s).map(|r| to_f64(&r));
                    let r = word_family_ratio(*kappa, *multiplicity, p(a)?, p(b)?, p(c)?);
                    if !(r >= 1.0) || !(rel_eq(r, *q) || (r.is_infinite() && q.is_infinite())) {
                        return fail("word family ratio");
                    }
                    if !rel_eq(*kappa, kf) {
                        return fail("kappa mismatch");
                    }
                }
                Evidence::PowerMinorant { kappa, constant, exponent, .. } => {
                    if !(*exponent <= 1.0) || !rel_eq(*constant, (-exponent).exp()) || !rel_eq(*kappa, kf) {
                        return fail("power minorant");
                    }
                }
                Evidence::LogMinorant { constant, power, kappa, .. } => {
                    if !(*constant > 0.0) || !power.is_finite() || !rel_eq(*kappa, kf) {
                        return fail("log minorant");
                    }
                }
                Evidence::BoundedNorm { bound, element, .. } => {
                    if !bound.is_finite() || element.is_identity() {
                        return fail("bounded norm");
                    }
                }
                _ => return fail("evidence does not prove conservativity"),
            }
        }
        _ => return fail("evidence does not match the verdict"),
    }
    Ok(())
}

fn head_sum(spec: &ActionSpec, head_radius: u32) -> Result<f64> {
    let ball = spec.group.ball(head_radius);
    let terms: Vec<Result<f64>> = pool::install(|| {
        ball.par_iter()
            .map(|g| Ok((-0.5 * norm_sq_tol(spec, g, SUM_TOL)?.lower().max(0.0)).exp()))
            .collect()
    });
    let mut s = 0.0;
    for t in terms {
        s += t?;
    }
    Ok(s * (1.0 + 4.0 * f64::EPSILON * ball.len() as f64))
}

fn sphere_geometric(spec: &ActionSpec, slope: f64, head_radius: u32, basis: String) -> Result<Option<Evidence>> {
    let (growth, beta) = match spec.group.kind {
        GroupKind::Integers => (1.0, 2.0),
        GroupKind::Free => {
            let r = spec.group.rank as f64;
            // |S_n| = 2r (2r - 1)^(n - 1).
            (2.0 * r - 1.0, 2.0 * r / (2.0 * r - 1.0))
        }
    };
    let rho = growth * (-slope / 2.0).exp();
    if !(slope > 0.0) || !(rho < 1.0) {
        return Ok(None);
    }
    let head_upper = head_sum(spec, head_radius)?;
    let tail_upper = geometric_tail(beta, rho, head_radius);
    Ok(Some(Evidence::SphereGeometric {
        slope,
        growth,
        beta,
        rho,
        head_radius,
        head_upper,
        tail_upper,
        total_upper: head_upper + tail_upper,
        basis,
    }))
}

fn dissipative_evidence(spec: &ActionSpec, notes: &mut Vec<String>) -> Result<Option<Evidence>> {
    let m = spec.multiplicity;
    let mf = m as f64;
    match &spec.family {
        MarginalFamily::WSplit { p_a, p_b, p_w } => {
            let alpha = p_a - p_w;
            let beta = p_b - p_w;
            let (a2, b2) = (&alpha * &alpha, &beta * &beta);
            let per_letter = if (&alpha * &beta) <= Rational::zero() {
                a2.min(b2)
            } else {
                let d = &alpha - &beta;
                a2.min(b2).min(&d * &d) / int(2)
            };
            let slope = mf * to_f64(&per_letter);
            let basis = format!(
                "||c_g||^2 >= {} |g| from the syllable formula",
                format_rational(&(per_letter * int(m as i64)))
            );
            let ev = sphere_geometric(spec, slope, 4, basis)?;
            if ev.is_none() {
                notes.push(format!("sphere bound ratio 3 exp(-{slope}/2) is not below 1"));
            }
            Ok(ev)
        }
        MarginalFamily::SpecialCocycle { d, scale, bumps, .. } => {
            if bumps.is_some() {
                notes.push("truncated bump function: no linear growth bound".into());
                return Ok(None);
            }
            // ||gamma_k||^2 >= d |k|^(3/2) >= d |k|, summed over syllables.
            let per_letter = d * scale * scale;
            let slope = mf * to_f64(&per_letter);
            let basis = format!(
                "||c_g||^2 >= {} |g| from ||gamma_k||^2 >= d |k|^(3/2)",
                format_rational(&(per_letter * int(m as i64)))
            );
            let head = if spec.group.is_integers() { 16 } else { 2 };
            let ev = sphere_geometric(spec, slope, head, basis)?;
            if ev.is_none() {
                notes.push(format!("sphere bound ratio with slope {slope} is not below 1"));
            }
            Ok(ev)
        }
        MarginalFamily::ZSequence { seq, .. } => match seq {
            DecreasingSequence::InvSqrt { scale } => {
                // ||c_k||^2 >= s^2 H_|k| >= s^2 ln(1 + |k|).
                let s2 = to_f64(&(scale * scale));
                let exponent = mf * s2 / 2.0;
                if exponent <= 1.0 {
                    notes.push(format!("terms are only bounded by (1 + |k|)^-{exponent}"));
                    return Ok(None);
                }
                let head_radius = 64;
                let head_upper = head_sum(spec, head_radius)?;
                let tail_upper = power_tail(exponent, head_radius);
                Ok(Some(Evidence::PowerLaw {
                    exponent,
                    head_radius,
                    head_upper,
                    tail_upper,
                    total_upper: head_upper + tail_upper,
                    basis: format!("||c_k||^2 >= {} ln(1 + |k|)", mf * s2),
                }))
            }
            DecreasingSequence::Explicit { values } => {
                // ||c_k||^2 >= sum_{j<|k|} a_j^2 >= |k| a_last^2.
                let last = values.last().expect("validated");
                let per = last * last * int(m as i64);
                let basis = format!("||c_k||^2 >= {} |k|", format_rational(&per));
                sphere_geometric(spec, to_f64(&per), 16, basis)
            }
            _ => Ok(None),
        },
        MarginalFamily::FreeProductW { .. } | MarginalFamily::FolnerInduced { .. } => Ok(None),
    }
}

fn generator_power(s: &Element, n: i64) -> Element {
    match s {
        Element::Int(k) => Element::Int(k * n),
        Element::Word(w) => Element::Word(Word::power(w.syllables()[0].gen, n)),
    }
}

/// A generator with `c_s = 0`, for families with exact norms.
fn zero_generator(spec: &ActionSpec) -> Result<Option<Evidence>> {
    let exact = matches!(
        spec.family,
        MarginalFamily::WSplit { .. } | MarginalFamily::FolnerInduced { .. } | MarginalFamily::FreeProductW { .. }
    );
    if !exact || !spec.is_binary() {
        return Ok(None);
    }
    for s in spec.group.generators().into_iter().step_by(2) {
        if norm_sq_tol(spec, &s, 0.0)?.exact().is_some_and(|r| r.is_zero()) {
            let checked = 64;
            for n in 1..=checked {
                let g = generator_power(&s, n as i64);
                if !norm_sq_tol(spec, &g, 0.0)?.exact().is_some_and(|r| r.is_zero()) {
                    return Err(Error::Domain(format!("c_{s} vanishes but c_({s})^{n} does not")));
                }
            }
            return Ok(Some(Evidence::BoundedNorm {
                element: s.clone(),
                bound: 0.0,
                checked_up_to: checked,
                basis: format!("c_{s} = 0, so c vanishes on all powers of {s}"),
            }));
        }
    }
    Ok(None)
}

fn conservative_evidence(
    spec: &ActionSpec,
    kappa: f64,
    opts: &CriterionOptions,
    notes: &mut Vec<String>,
) -> Result<Option<Evidence>> {
    if let Some(e) = zero_generator(spec)? {
        return Ok(Some(e));
    }
    let m = spec.multiplicity;
    let mf = m as f64;
    match &spec.family {
        MarginalFamily::WSplit { p_a, p_b, p_w } => {
            let alpha = p_a - p_w;
            let beta = p_b - p_w;
            let mut best: Option<Evidence> = None;
            let mut pair = (0u8, 1u8);
            for (x, ax, y, ay) in [(0u8, &alpha, 1u8, &beta), (1, &beta, 0, &alpha)] {
                let a = ax * ax;
                let b = ay * ay;
                let c = int(-2) * ax * ay;
                let q = word_family_ratio(kappa, m, to_f64(&a), to_f64(&b), to_f64(&c));
                let better = match &best {
                    Some(Evidence::WordFamily { q: q0, .. }) => q > *q0,
                    _ => true,
                };
                if better {
                    pair = (x, y);
                    best = Some(Evidence::WordFamily {
                        kappa,
                        multiplicity: m,
                        x: crate::group::gen_name(x),
                        y: crate::group::gen_name(y),
                        a: format_rational(&a),
                        b: format_rational(&b),
                        c: format_rational(&c),
                        q,
                        enumerated_words: 0,
                        enumerated_sum: 0.0,
                    });
                }
            }
            let Some(Evidence::WordFamily { q, .. }) = &best else { unreachable!() };
            if *q < 1.0 {
                notes.push(format!("witness words give a convergent series (ratio {q:.3e})"));
                return Ok(None);
            }
            let (words, sum) = witness_partial_sum(spec, pair.0, pair.1, kappa, opts.witness_budget, opts.witness_target)?;
            if let Some(Evidence::WordFamily { enumerated_words, enumerated_sum, .. }) = best.as_mut() {
                *enumerated_words = words;
                *enumerated_sum = sum;
            }
            Ok(best)
        }
        MarginalFamily::ZSequence { seq, .. } => match seq {
            DecreasingSequence::InvSqrt { scale } => {
                // ||c_k||^2 <= 2 s^2 H_k <= 2 s^2 (1 + ln k).
                let s2 = to_f64(&(scale * scale));
                let exponent = 2.0 * kappa * mf * s2;
                if exponent > 1.0 {
                    notes.push(format!("minorant k^-{exponent} is summable"));
                    return Ok(None);
                }
                Ok(Some(Evidence::PowerMinorant {
                    kappa,
                    constant: (-exponent).exp(),
                    exponent,
                    basis: format!("||c_k||^2 <= {} (1 + ln k)", 2.0 * mf * s2),
                }))
            }
            DecreasingSequence::InvSqrtLog { shift } => {
                // 2 sum_{j<k} 1/(y ln y) <= 2/(y0 ln y0) + 2 ln ln(y0 + k) - 2 ln ln y0.
                let y0 = *shift as f64;
                let c0 = 1.0 / (y0 * y0.ln()) - y0.ln().ln();
                let power = 2.0 * kappa * mf;
                Ok(Some(Evidence::LogMinorant {
                    kappa,
                    constant: (-power * c0).exp(),
                    power,
                    shift: *shift,
                    basis: format!(
                        "||c_k||^2 <= {} (1/(y0 ln y0) + ln ln(k + y0) - ln ln y0) with y0 = {shift}",
                        2.0 * mf
                    ),
                }))
            }
            DecreasingSequence::Geometric { first, ratio } => {
                let total = first * first / (Rational::one() - ratio * ratio);
                let bound = 2.0 * mf * to_f64(&total);
                Ok(Some(Evidence::BoundedNorm {
                    element: Element::Int(1),
                    bound,
                    checked_up_to: 0,
                    basis: "||c_k||^2 <= 2 sum_j a_j^2".into(),
                }))
            }
            DecreasingSequence::Explicit { .. } => Ok(None),
        },
        MarginalFamily::FolnerInduced { blocks, .. } => {
            // ||f - k.f||^2 = 2 ||f||^2 - 2 <f, k.f> <= 2 ||f||^2 for f >= 0.
            let total: Rational = blocks.iter().map(|b| &b.value * &b.value * int(b.len as i64)).sum();
            let bound = int(2 * m as i64) * total;
            Ok(Some(Evidence::BoundedNorm {
                element: Element::Int(1),
                bound: to_f64(&bound),
                checked_up_to: 0,
                basis: format!("||c_k||^2 <= 2 ||f||^2 = {}", format_rational(&bound)),
            }))
        }
        MarginalFamily::SpecialCocycle { scale, bumps: Some(_), .. } if spec.group.is_integers() => {
            let bc = spec.bump().expect("special family");
            let end = bc.support_end().expect("truncated");
            let h2: Rational = (0..=end as i64).map(|n| bc.h_exact(n)).map(|h| &h * &h).sum();
            let bound = int(2 * m as i64) * scale * scale * h2;
            Ok(Some(Evidence::BoundedNorm {
                element: Element::Int(1),
                bound: to_f64(&bound),
                checked_up_to: 0,
                basis: "finitely supported bump function: ||c_k||^2 <= 2 s^2 ||H||^2".into(),
            }))
        }
        _ => Ok(None),
    }
}

/// Word `x^-1 y^n1 x y^m1 ... x^-1 y^nk x y^mk`.
pub fn witness_word(x: u8, y: u8, exps: &[(i64, i64)]) -> Word {
    let mut parts = Vec::with_capacity(4 * exps.len());
    for &(n, m) in exps {
        parts.extend([(x, -1), (y, n), (x, 1), (y, m)]);
    }
    Word::from_powers(&parts)
}

/// Enumerates witness words for `k = 1, 2, ..` with exponents up to a
/// bound that keeps the total count within `budget`, summing
/// `exp(-kappa ||c_g||^2)` until the sum passes `target`.
pub fn witness_partial_sum(spec: &ActionSpec, x: u8, y: u8, kappa: f64, budget: u64, target: f64) -> Result<(u64, f64)> {
    let mut words = 0u64;
    let mut sum = 0.0;
    let mut k = 1u32;
    while sum <= target {
        let left = budget.saturating_sub(words);
        let mut top = 16u64;
        while top > 0 && top.checked_pow(2 * k).map_or(true, |c| c > left) {
            top -= 1;
        }
        if top == 0 {
            break;
        }
        let count = top.pow(2 * k);
        let failed = std::sync::atomic::AtomicBool::new(false);
        let part = pool::ordered_sum(count, 4096, |idx| {
            let mut rest = idx;
            let mut exps = Vec::with_capacity(k as usize);
            for _ in 0..k {
                let n = (rest % top) as i64 + 1;
                rest /= top;
                let m = (rest % top) as i64 + 1;
                rest /= top;
                exps.push((n, m));
            }
            let g = Element::Word(witness_word(x, y, &exps));
            match norm_sq_tol(spec, &g, 0.0) {
                Ok(v) => (-kappa * v.upper()).exp(),
                Err(_) => {
                    failed.store(true, std::sync::atomic::Ordering::Relaxed);
                    0.0
                }
            }
        });
        if failed.into_inner() {
            return Err(Error::Domain("witness norm failed".into()));
        }
        sum += part;
        words += count;
        k += 1;
    }
    Ok((words, sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn kappa0_values() {
        assert_eq!(kappa0(&rat(1, 3)).unwrap(), rat(63, 4));
        assert_eq!(kappa0(&rat(1, 2)).unwrap(), int(12));
        assert_eq!(auto_kappa(&rat(1, 3)).unwrap(), int(16));
        assert!(kappa0(&rat(2, 3)).is_err());
    }

    #[test]
    fn witness_word_statistics() {
        let w = witness_word(0, 1, &[(1, 2), (3, 1)]);
        assert_eq!(w.to_string(), "a^-1 b a b^2 a^-1 b^3 a b");
        assert_eq!(w.descending_sign_changes(), 1);
    }

    #[test]
    fn zero_cocycle_sums_count_the_ball() {
        let s = ActionSpec::new(
            Group::free(2),
            MarginalFamily::WSplit { p_a: rat(1, 2), p_b: rat(1, 2), p_w: rat(1, 2) },
            rat(1, 2),
        )
        .unwrap();
        let p = criterion_partial_sums(&s, 1.0, 3).unwrap();
        assert_eq!(p.iter().map(|x| x.lower.round() as u64).collect::<Vec<_>>(), vec![1, 5, 17, 53]);
        let v = classify_conservativity(&s, &CriterionOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Conservative);
        assert!(matches!(v.evidence, Some(Evidence::BoundedNorm { .. })));
    }

    #[test]
    fn tampered_certificate_fails() {
        let s = ActionSpec::new(
            Group::free(2),
            MarginalFamily::WSplit { p_a: rat(3, 5), p_b: rat(2, 5), p_w: rat(1, 2) },
            rat(1, 3),
        )
        .unwrap()
        .with_multiplicity(220)
        .unwrap();
        let mut v = classify_conservativity(&s, &CriterionOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Dissipative);
        recheck(&v).unwrap();
        if let Some(Evidence::SphereGeometric { rho, .. }) = v.evidence.as_mut() {
            *rho = 1.01;
        }
        assert!(recheck(&v).is_err());
    }

    #[test]
    fn ratio_is_monotone_in_kappa() {
        let a = word_family_ratio(16.0, 1, 0.01, 0.01, 0.02);
        let b = word_family_ratio(20.0, 1, 0.01, 0.01, 0.02);
        assert!(a > b && a > 1.0);
    }
}
