//! Base measures, marginal families and action specifications.

use std::hash::{Hash, Hasher};

use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycles::bump::BumpCocycle;
use crate::cocycles::folner::Block;
use crate::error::{Error, Result};
use crate::group::{ending_generator, last_class, Element, Group, GroupKind, LastClass};
use crate::num::{format_rational, int, rat, serde_rational, serde_rational_vec, to_f64, Rational};

/// Probability vector on `{0, .., d-1}` with positive rational weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BaseMeasure {
    #[serde(with = "serde_rational_vec")]
    weights: Vec<Rational>,
}

impl BaseMeasure {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        let m = BaseMeasure { weights };
        m.validate()?;
        Ok(m)
    }

    pub fn bernoulli(p0: Rational) -> Result<Self> {
        let q = Rational::one() - &p0;
        Self::new(vec![p0, q])
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() < 2 {
            return Err(Error::InvalidSpec("base measure needs at least two points".into()));
        }
        if self.weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidSpec("base measure weights must be positive".into()));
        }
        let total: Rational = self.weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidSpec(format!(
                "base measure weights sum to {}, not 1",
                format_rational(&total)
            )));
        }
        Ok(())
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(to_f64).collect()
    }
}

/// Pointwise ratio `mu1(x) / mu0(x)` on a common base space.
pub fn density_ratio(mu0: &BaseMeasure, mu1: &BaseMeasure) -> Result<Vec<Rational>> {
    if mu0.len() != mu1.len() {
        return Err(Error::InvalidArgument("base measures live on different spaces".into()));
    }
    Ok(mu0
        .weights
        .iter()
        .zip(&mu1.weights)
        .map(|(p, q)| q / p)
        .collect())
}

/// Nonincreasing positive sequence `a_0 >= a_1 >= ... > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecreasingSequence {
    /// `a_n = scale / sqrt(n + 1)`.
    InvSqrt {
        #[serde(with = "serde_rational")]
        scale: Rational,
    },
    /// `a_n = 1 / sqrt(y ln y)` with `y = n + shift`.
    InvSqrtLog { shift: u64 },
    /// `a_n = first * ratio^n`.
    Geometric {
        #[serde(with = "serde_rational")]
        first: Rational,
        #[serde(with = "serde_rational")]
        ratio: Rational,
    },
    /// Given values, continued by the last one.
    Explicit {
        #[serde(with = "serde_rational_vec")]
        values: Vec<Rational>,
    },
}

impl DecreasingSequence {
    pub fn validate(&self) -> Result<()> {
        match self {
            DecreasingSequence::InvSqrt { scale } if !scale.is_positive() => {
                Err(Error::InvalidSpec("inv_sqrt scale must be positive".into()))
            }
            DecreasingSequence::InvSqrtLog { shift } if *shift < 2 => Err(Error::InvalidSpec(
                "inv_sqrt_log needs shift >= 2 so that ln(n + shift) > 0".into(),
            )),
            DecreasingSequence::Geometric { first, ratio }
                if !first.is_positive() || !ratio.is_positive() || *ratio >= Rational::one() =>
            {
                Err(Error::InvalidSpec("geometric sequence needs first > 0 and 0 < ratio < 1".into()))
            }
            DecreasingSequence::Explicit { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_positive()) {
                    return Err(Error::InvalidSpec("explicit sequence needs positive values".into()));
                }
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::InvalidSpec("explicit sequence must be nonincreasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn term(&self, n: u64) -> f64 {
        match self {
            DecreasingSequence::InvSqrt { scale } => to_f64(scale) / ((n + 1) as f64).sqrt(),
            DecreasingSequence::InvSqrtLog { shift } => {
                let y = (n + shift) as f64;
                1.0 / (y * y.ln()).sqrt()
            }
            DecreasingSequence::Geometric { first, ratio } => to_f64(first) * to_f64(ratio).powf(n as f64),
            DecreasingSequence::Explicit { values } => to_f64(&values[(n as usize).min(values.len() - 1)]),
        }
    }

    /// Index past which the sequence is constant, if any.
    pub fn constant_from(&self) -> Option<u64> {
        match self {
            DecreasingSequence::Explicit { values } => Some(values.len() as u64 - 1),
            _ => None,
        }
    }

    /// Upper bound for `sum_{j > n} (a_{j-k} - a_j)^2`, valid for `n >= k >= 1`.
    pub fn tail_sq_diff_bound(&self, k: u64, n: u64) -> f64 {
        debug_assert!(n >= k && k >= 1);
        if let Some(c) = self.constant_from() {
            if n >= c + k {
                return 0.0;
            }
        }
        let kk = (k as f64).powi(2);
        let derivative = match self {
            DecreasingSequence::InvSqrt { scale } => {
                let s = to_f64(scale);
                kk * s * s / (8.0 * ((n - k + 1) as f64).powi(2))
            }
            DecreasingSequence::InvSqrtLog { shift } => {
                let y0 = (n - k + 1 + shift) as f64;
                if y0 >= 4.0 {
                    kk / (2.0 * (y0 - 1.0).powi(2))
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        };
        // Telescoping: (x - y)^2 <= x^2 - y^2 for x >= y >= 0. That sum is at
        // least k a_n^2, so it only helps when the derivative bound is larger.
        if derivative <= k as f64 * self.term(n).powi(2) {
            return derivative * (1.0 + 1e-12);
        }
        let telescoping: f64 = (n - k + 1..=n).map(|j| self.term(j).powi(2)).sum();
        telescoping.min(derivative) * (1.0 + 1e-12)
    }
}

/// Growth function prescribed for a Følner-built cocycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthBound {
    /// `phi(g_k)^2 = alpha * ln(1 + k)` along `0, 1, -1, 2, -2, ...`.
    SqrtLog {
        #[serde(with = "serde_rational")]
        alpha: Rational,
    },
    /// `phi(g_k) = alpha * ln(1 + k)`.
    Log {
        #[serde(with = "serde_rational")]
        alpha: Rational,
    },
}

impl GrowthBound {
    /// `phi(g_k)` for the k-th element of the enumeration.
    pub fn phi(&self, k: u64) -> f64 {
        let l = (1.0 + k as f64).ln();
        match self {
            GrowthBound::SqrtLog { alpha } => (to_f64(alpha) * l).sqrt(),
            GrowthBound::Log { alpha } => to_f64(alpha) * l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MarginalFamily {
    /// `mu_i = mu1` when `i` ends with a positive power of the distinguished
    /// generator and `mu0` otherwise.
    FreeProductW {
        mu0: BaseMeasure,
        mu1: BaseMeasure,
        #[serde(default)]
        distinguished: u8,
    },
    /// `F = p_a` on words ending with a positive power of `a`, `p_b` likewise
    /// for `b`, and `p_w` elsewhere.
    WSplit {
        #[serde(with = "serde_rational")]
        p_a: Rational,
        #[serde(with = "serde_rational")]
        p_b: Rational,
        #[serde(with = "serde_rational")]
        p_w: Rational,
    },
    /// On the integers: `F(n) = lambda + a_{n - n0}` for `n >= n0`, `lambda` below.
    ZSequence {
        #[serde(with = "serde_rational")]
        lambda: Rational,
        n0: i64,
        seq: DecreasingSequence,
    },
    /// Bump cocycle with growth constant `d`. On the free group of rank 2:
    /// `F = base + scale * H(final a-exponent)` on words ending in a power of
    /// `a`, `base - scale * H(final b-exponent)` on words ending in a power of
    /// `b`, `base` at the identity. On the integers `F(n) = base + scale * H(n)`.
    SpecialCocycle {
        #[serde(with = "serde_rational")]
        d: Rational,
        #[serde(with = "serde_rational")]
        base: Rational,
        #[serde(with = "serde_rational")]
        scale: Rational,
        /// Keep only the first `bumps` bumps of `H`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bumps: Option<u64>,
    },
    /// On the integers: `F(n) = offset + f(n)` with `f` constant on finitely
    /// many disjoint blocks and zero elsewhere.
    FolnerInduced {
        #[serde(with = "serde_rational")]
        offset: Rational,
        blocks: Vec<Block>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        growth: Option<GrowthBound>,
    },
}

/// Exact or certified-approximate real number.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Real {
    Exact(#[serde(with = "serde_rational")] Rational),
    Approx(BoundedValue),
}

/// `value` with `|true - value| <= err`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedValue {
    pub value: f64,
    pub err: f64,
}

impl BoundedValue {
    pub fn new(value: f64, err: f64) -> Self {
        BoundedValue { value, err }
    }

    pub fn from_bounds(lo: f64, hi: f64) -> Self {
        BoundedValue { value: 0.5 * (lo + hi), err: 0.5 * (hi - lo).max(0.0) * (1.0 + 1e-12) }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.err
    }

    pub fn upper(&self) -> f64 {
        self.value + self.err
    }

    pub fn scale(&self, c: f64) -> Self {
        BoundedValue { value: self.value * c, err: self.err * c.abs() }
    }
}

impl Real {
    pub fn value(&self) -> f64 {
        match self {
            Real::Exact(r) => to_f64(r),
            Real::Approx(b) => b.value,
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            Real::Exact(r) => to_f64(r).abs() * f64::EPSILON,
            Real::Approx(b) => b.err,
        }
    }

    pub fn lower(&self) -> f64 {
        self.value() - self.err()
    }

    pub fn upper(&self) -> f64 {
        self.value() + self.err()
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Approx(_) => None,
        }
    }

    pub fn approx(value: f64) -> Real {
        Real::Approx(BoundedValue::new(value, 2.0 * f64::EPSILON * value.abs()))
    }

    pub fn sub(&self, other: &Real) -> Real {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a - b),
            _ => Real::Approx(BoundedValue::new(
                self.value() - other.value(),
                self.err() + other.err() + f64::EPSILON * (self.value() - other.value()).abs(),
            )),
        }
    }
}

/// Point `(group element, copy)` of the index set `G x {1..m}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexPoint {
    pub elem: Element,
    #[serde(default = "one_u32")]
    pub copy: u32,
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    pub group: Group,
    pub family: MarginalFamily,
    #[serde(default = "one_u32")]
    pub multiplicity: u32,
    /// All marginal probabilities lie in `[delta, 1 - delta]`.
    #[serde(with = "serde_rational")]
    pub delta: Rational,
}

impl ActionSpec {
    pub fn new(group: Group, family: MarginalFamily, delta: Rational) -> Result<Self> {
        let s = ActionSpec { group, family, multiplicity: 1, delta };
        s.validate()?;
        Ok(s)
    }

    pub fn with_multiplicity(mut self, m: u32) -> Result<Self> {
        self.multiplicity = m;
        self.validate()?;
        Ok(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ActionSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Number of independent copies of each coordinate.
    pub fn m(&self) -> f64 {
        self.multiplicity as f64
    }

    pub fn delta_f64(&self) -> f64 {
        to_f64(&self.delta)
    }

    pub fn is_binary(&self) -> bool {
        match &self.family {
            MarginalFamily::FreeProductW { mu0, .. } => mu0.len() == 2,
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.group.validate()?;
        if self.multiplicity == 0 {
            return Err(Error::InvalidSpec("multiplicity must be at least 1".into()));
        }
        let half = rat(1, 2);
        if !self.delta.is_positive() || self.delta > half {
            return Err(Error::InvalidSpec("delta must lie in (0, 1/2]".into()));
        }
        let in_range = |p: &Rational, what: &str| -> Result<()> {
            if *p < self.delta || *p > Rational::one() - &self.delta {
                Err(Error::InvalidSpec(format!(
                    "{what} = {} outside [delta, 1 - delta] with delta = {}",
                    format_rational(p),
                    format_rational(&self.delta)
                )))
            } else {
                Ok(())
            }
        };
        let need_free2 = |name: &str| -> Result<()> {
            if self.group != Group::free(2) {
                Err(Error::InvalidSpec(format!("{name} needs the free group of rank 2")))
            } else {
                Ok(())
            }
        };
        match &self.family {
            MarginalFamily::FreeProductW { mu0, mu1, distinguished } => {
                mu0.validate()?;
                mu1.validate()?;
                if mu0.len() != mu1.len() {
                    return Err(Error::InvalidSpec("mu0 and mu1 have different supports".into()));
                }
                if self.group.kind != GroupKind::Free || self.group.rank < 2 {
                    return Err(Error::InvalidSpec("free_product_w needs a free group of rank >= 2".into()));
                }
                if *distinguished >= self.group.rank {
                    return Err(Error::InvalidSpec("distinguished generator outside rank".into()));
                }
                if mu0.len() == 2 {
                    in_range(&mu0.weights[0], "mu0(0)")?;
                    in_range(&mu1.weights[0], "mu1(0)")?;
                }
            }
            MarginalFamily::WSplit { p_a, p_b, p_w } => {
                need_free2("w_split")?;
                in_range(p_a, "p_a")?;
                in_range(p_b, "p_b")?;
                in_range(p_w, "p_w")?;
            }
            MarginalFamily::ZSequence { lambda, seq, .. } => {
                if !self.group.is_integers() {
                    return Err(Error::InvalidSpec("z_sequence needs the integers".into()));
                }
                seq.validate()?;
                in_range(lambda, "lambda")?;
                let top = to_f64(lambda) + seq.term(0);
                if top > 1.0 - self.delta_f64() {
                    return Err(Error::InvalidSpec(format!(
                        "lambda + a_0 = {top} exceeds 1 - delta"
                    )));
                }
            }
            MarginalFamily::SpecialCocycle { d, base, scale, .. } => {
                if self.group != Group::free(2) && !self.group.is_integers() {
                    return Err(Error::InvalidSpec(
                        "special_cocycle needs the integers or the free group of rank 2".into(),
                    ));
                }
                if !d.is_positive() || !scale.is_positive() {
                    return Err(Error::InvalidSpec("special_cocycle needs d > 0 and scale > 0".into()));
                }
                in_range(&(base + scale), "base + scale")?;
                in_range(&(base - scale), "base - scale")?;
            }
            MarginalFamily::FolnerInduced { offset, blocks, .. } => {
                if !self.group.is_integers() {
                    return Err(Error::InvalidSpec("folner_induced needs the integers".into()));
                }
                crate::cocycles::folner::validate_blocks(blocks)?;
                in_range(offset, "offset")?;
                for b in blocks {
                    in_range(&(offset + &b.value), "offset + block value")?;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn bump(&self) -> Option<std::sync::Arc<BumpCocycle>> {
        match &self.family {
            MarginalFamily::SpecialCocycle { d, bumps, .. } => Some(BumpCocycle::shared(d, *bumps)),
            _ => None,
        }
    }
}

/// `F(i) = mu_i(0)`.
pub fn f_value(spec: &ActionSpec, i: &Element) -> Result<Real> {
    spec.group.check(i)?;
    f_value_unchecked(spec, i, spec.bump().as_deref())
}

pub(crate) fn f_value_unchecked(spec: &ActionSpec, i: &Element, bump: Option<&BumpCocycle>) -> Result<Real> {
    Ok(match (&spec.family, i) {
        (MarginalFamily::FreeProductW { mu0, mu1, distinguished }, Element::Word(w)) => {
            let mu = if last_class(w) == LastClass::Positive(*distinguished) { mu1 } else { mu0 };
            Real::Exact(mu.weights[0].clone())
        }
        (MarginalFamily::WSplit { p_a, p_b, p_w }, Element::Word(w)) => Real::Exact(match last_class(w) {
            LastClass::Positive(0) => p_a.clone(),
            LastClass::Positive(1) => p_b.clone(),
            _ => p_w.clone(),
        }),
        (MarginalFamily::ZSequence { lambda, n0, seq }, Element::Int(n)) => {
            if n < n0 {
                Real::Exact(lambda.clone())
            } else {
                Real::approx(to_f64(lambda) + seq.term((n - n0) as u64))
            }
        }
        (MarginalFamily::SpecialCocycle { base, scale, .. }, e) => {
            let h = bump.expect("bump cocycle for special family");
            match e {
                Element::Int(n) => Real::Exact(base + scale * h.h_exact(*n)),
                Element::Word(w) => match (ending_generator(w), w.last_syllable()) {
                    (Some(0), Some(s)) => Real::Exact(base + scale * h.h_exact(s.exp)),
                    (Some(1), Some(s)) => Real::Exact(base - scale * h.h_exact(s.exp)),
                    _ => Real::Exact(base.clone()),
                },
            }
        }
        (MarginalFamily::FolnerInduced { offset, blocks, .. }, Element::Int(n)) => {
            Real::Exact(offset + crate::cocycles::folner::block_value(blocks, *n))
        }
        _ => return Err(Error::InvalidArgument(format!("{i} is not an element of this group"))),
    })
}

/// Marginal at an index point as float weights.
pub fn marginal_weights(spec: &ActionSpec, p: &IndexPoint) -> Result<Vec<f64>> {
    if p.copy == 0 || p.copy > spec.multiplicity {
        return Err(Error::InvalidArgument(format!("copy {} outside 1..={}", p.copy, spec.multiplicity)));
    }
    if let MarginalFamily::FreeProductW { mu0, mu1, distinguished } = &spec.family {
        spec.group.check(&p.elem)?;
        let w = p.elem.as_word().expect("free group element");
        let mu = if last_class(w) == LastClass::Positive(*distinguished) { mu1 } else { mu0 };
        return Ok(mu.weights_f64());
    }
    let f = f_value(spec, &p.elem)?.value();
    Ok(vec![f, 1.0 - f])
}

/// Draws one configuration on the given coordinates. Each coordinate uses
/// its own ChaCha stream keyed by `(seed, coordinate)`, so results do not
/// depend on window order or thread count.
pub fn sample_window(spec: &ActionSpec, window: &[IndexPoint], seed: u64) -> Result<Vec<u32>> {
    window
        .iter()
        .map(|p| {
            let w = marginal_weights(spec, p)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_id(p));
            Ok(draw(&w, rng.gen::<f64>()))
        })
        .collect()
}

pub(crate) fn draw(weights: &[f64], u: f64) -> u32 {
    let mut acc = 0.0;
    for (x, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return x as u32;
        }
    }
    weights.len() as u32 - 1
}

fn stream_id(p: &IndexPoint) -> u64 {
    // Fixed-key SipHash keeps stream ids stable across runs and platforms.
    #[allow(deprecated)]
    let mut h = std::hash::SipHasher::new_with_keys(0x6265726e, 0x6c6162);
    p.hash(&mut h);
    h.finish()
}

/// Summary of the nonsingularity hypotheses on a probe set.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub delta: String,
    pub range_ok: bool,
    /// Per probe `g`: `sum_{k in ball} (F(g k) - F(k))^2` with its tail bound.
    pub probes: Vec<ProbeSum>,
    /// `sup |F(i) - lambda|` over the outer sphere, for families with a limit value.
    pub sphere_deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSum {
    pub probe: Element,
    pub partial: f64,
    pub tail: f64,
}

/// Checks `F` stays in `[delta, 1 - delta]` on a ball and that the square
/// sums defining the cocycle converge for each probe.
pub fn check_nonsingular_hypotheses(spec: &ActionSpec, probes: &[Element], radius: u32) -> Result<HypothesisReport> {
    spec.validate()?;
    let bump = spec.bump();
    let d = spec.delta_f64();
    let ball = spec.group.ball(radius);
    let mut range_ok = true;
    for i in &ball {
        let f = f_value_unchecked(spec, i, bump.as_deref())?.value();
        if f < d - 1e-15 || f > 1.0 - d + 1e-15 {
            range_ok = false;
        }
    }
    let mut out = Vec::new();
    for g in probes {
        spec.group.check(g)?;
        // sum_k (F(gk) - F(k))^2 = ||c_{g^-1}||^2.
        let b = crate::cocycles::norm_sq_bruteforce(spec, &g.inv(), radius.max(g.len() as u32))?;
        let m = spec.m();
        out.push(ProbeSum { probe: g.clone(), partial: b.partial.value() / m, tail: b.tail / m });
    }
    let sphere_deviation = match &spec.family {
        MarginalFamily::ZSequence { lambda, .. } => {
            let l = to_f64(lambda);
            let mut sup: f64 = 0.0;
            for i in spec.group.sphere(radius) {
                sup = sup.max((f_value_unchecked(spec, &i, None)?.value() - l).abs());
            }
            Some(sup)
        }
        _ => None,
    };
    Ok(HypothesisReport { delta: format_rational(&spec.delta), range_ok, probes: out, sphere_deviation })
}

/// Two-point measures with density ratio `T = (lambda, 1/lambda)`.
pub fn measures_from_lambda(lambda: &Rational) -> Result<(BaseMeasure, BaseMeasure)> {
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Err(Error::Domain("lambda must lie in (0, 1)".into()));
    }
    let one = Rational::one();
    let p0 = &one / (&one + lambda);
    let p1 = lambda / (&one + lambda);
    Ok((BaseMeasure::bernoulli(p0)?, BaseMeasure::bernoulli(p1)?))
}

/// Measures realising the stable parameters `(a, b)`, given exactly as
/// `exp_a = e^a > 1` and `exp_b = e^b` with `1 <= e^b < e^a`.
///
/// For `b > 0` the result is two-point with `T = (e^b, e^(b - a))`. For
/// `b = 0` it is three-point with `T = (1, e^a, e^-a)`.
pub fn measures_from_ab_exp(exp_a: &Rational, exp_b: &Rational) -> Result<(BaseMeasure, BaseMeasure)> {
    let one = Rational::one();
    if *exp_a <= one {
        return Err(Error::Domain("need a > 0".into()));
    }
    if *exp_b < one || exp_b >= exp_a {
        return Err(Error::Domain("need 0 <= b < a".into()));
    }
    if exp_b.is_one() {
        let two = int(2);
        let d = &two * (&one + exp_a);
        let mu0 = vec![rat(1, 2), &one / &d, exp_a / &d];
        let mu1 = vec![rat(1, 2), exp_a / &d, &one / &d];
        return Ok((BaseMeasure::new(mu0)?, BaseMeasure::new(mu1)?));
    }
    let ea_inv = exp_a.recip();
    let eb_inv = exp_b.recip();
    let den = &one - &ea_inv;
    let p0 = (&eb_inv - &ea_inv) / &den;
    let p1 = (&one - exp_b * &ea_inv) / &den;
    Ok((BaseMeasure::bernoulli(p0)?, BaseMeasure::bernoulli(p1)?))
}

/// Float version of [`measures_from_ab_exp`] taking `a` and `b` directly.
pub fn measures_from_ab(a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a > 0.0) || !(0.0..a).contains(&b) {
        return Err(Error::Domain("need a > 0 and 0 <= b < a".into()));
    }
    if b == 0.0 {
        let ea = a.exp();
        let d = 2.0 * (1.0 + ea);
        return Ok((vec![0.5, 1.0 / d, ea / d], vec![0.5, ea / d, 1.0 / d]));
    }
    let den = 1.0 - (-a).exp();
    let p0 = ((-b).exp() - (-a).exp()) / den;
    let p1 = (1.0 - (b - a).exp()) / den;
    Ok((vec![p0, 1.0 - p0], vec![p1, 1.0 - p1]))
}

/// Measures on pairs `(t_n, 0), (t_n, 1)` built from atoms `(eta_n, t_n)`:
/// `mu0` weighs them `eta_n, eta_n t_n` and `mu1` swaps the weights, both
/// normalised by `sum eta_n (1 + t_n)`. Then `T = (t_n, 1/t_n)`.
pub fn measures_from_atomic_eta(atoms: &[(Rational, Rational)]) -> Result<(BaseMeasure, BaseMeasure)> {
    if atoms.is_empty() {
        return Err(Error::Domain("need at least one atom".into()));
    }
    if atoms.iter().any(|(e, t)| !e.is_positive() || !t.is_positive()) {
        return Err(Error::Domain("atom weights and positions must be positive".into()));
    }
    let kappa: Rational = atoms.iter().map(|(e, t)| e * (Rational::one() + t)).sum();
    let mut mu0 = Vec::new();
    let mut mu1 = Vec::new();
    for (e, t) in atoms {
        let lo = e / &kappa;
        let hi = e * t / &kappa;
        mu0.push(lo.clone());
        mu0.push(hi.clone());
        mu1.push(hi);
        mu1.push(lo);
    }
    Ok((BaseMeasure::new(mu0)?, BaseMeasure::new(mu1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Word;

    fn wsplit() -> ActionSpec {
        ActionSpec::new(
            Group::free(2),
            MarginalFamily::WSplit { p_a: rat(3, 5), p_b: rat(2, 5), p_w: rat(1, 2) },
            rat(1, 3),
        )
        .unwrap()
    }

    #[test]
    fn wsplit_values() {
        let s = wsplit();
        let f = |w: &str| f_value(&s, &Element::Word(Word::parse(w).unwrap())).unwrap();
        assert_eq!(f("b a").exact().unwrap(), &rat(3, 5));
        assert_eq!(f("a b^2").exact().unwrap(), &rat(2, 5));
        assert_eq!(f("a^-1").exact().unwrap(), &rat(1, 2));
        assert_eq!(f("e").exact().unwrap(), &rat(1, 2));
    }

    #[test]
    fn rejects_out_of_range() {
        let e = ActionSpec::new(
            Group::free(2),
            MarginalFamily::WSplit { p_a: rat(9, 10), p_b: rat(2, 5), p_w: rat(1, 2) },
            rat(1, 3),
        );
        assert!(matches!(e, Err(Error::InvalidSpec(_))));
        let z = ActionSpec::new(
            Group::free(2),
            MarginalFamily::ZSequence { lambda: rat(1, 2), n0: 1, seq: DecreasingSequence::InvSqrt { scale: rat(1, 6) } },
            rat(1, 3),
        );
        assert!(z.is_err());
    }

    #[test]
    fn lambda_measures() {
        let (m0, m1) = measures_from_lambda(&rat(1, 2)).unwrap();
        assert_eq!(m0.weights(), &[rat(2, 3), rat(1, 3)]);
        assert_eq!(density_ratio(&m0, &m1).unwrap(), vec![rat(1, 2), int(2)]);
        assert!(measures_from_lambda(&int(1)).is_err());
    }

    #[test]
    fn ab_measures() {
        let (m0, m1) = measures_from_ab_exp(&int(2), &rat(3, 2)).unwrap();
        assert_eq!(m0.weights(), &[rat(1, 3), rat(2, 3)]);
        assert_eq!(m1.weights(), &[rat(1, 2), rat(1, 2)]);
        assert_eq!(density_ratio(&m0, &m1).unwrap(), vec![rat(3, 2), rat(3, 4)]);
        let (m0, m1) = measures_from_ab_exp(&int(2), &int(1)).unwrap();
        assert_eq!(m0.weights(), &[rat(1, 2), rat(1, 6), rat(1, 3)]);
        assert_eq!(m1.weights(), &[rat(1, 2), rat(1, 3), rat(1, 6)]);
        let (f0, f1) = measures_from_ab(2f64.ln(), 1.5f64.ln()).unwrap();
        assert!((f0[0] - 1.0 / 3.0).abs() < 1e-12 && (f1[0] - 0.5).abs() < 1e-12);
        assert!(measures_from_ab_exp(&int(2), &int(3)).is_err());
    }

    #[test]
    fn eta_measures() {
        let (m0, m1) = measures_from_atomic_eta(&[(int(1), rat(1, 2)), (int(1), rat(1, 3))]).unwrap();
        let t = density_ratio(&m0, &m1).unwrap();
        assert_eq!(t, vec![rat(1, 2), int(2), rat(1, 3), int(3)]);
    }

    #[test]
    fn sampling_is_order_independent() {
        let s = wsplit();
        let pts: Vec<IndexPoint> = crate::group::ball(2, 2)
            .into_iter()
            .map(|w| IndexPoint { elem: Element::Word(w), copy: 1 })
            .collect();
        let a = sample_window(&s, &pts, 7).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        let mut b = sample_window(&s, &rev, 7).unwrap();
        b.reverse();
        assert_eq!(a, b);
        assert_ne!(a, sample_window(&s, &pts, 8).unwrap());
    }

    #[test]
    fn spec_json_roundtrip() {
        let s = wsplit();
        let back = ActionSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        assert!(s.to_json().contains("\"3/5\""));
    }
}
