//! Krieger type and stable type from the values of a density ratio.
//!
//! Everything is decided exactly: a finitely generated subgroup of the
//! positive rationals is a lattice of prime exponents, so its rank tells a
//! trivial group, a cyclic group `r^Z` and a dense subgroup apart.

pub mod lattice;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::cocycles::support_window;
use crate::error::{Error, Result};
use crate::group::Element;
use crate::marginals::{f_value_unchecked, ActionSpec, BaseMeasure, MarginalFamily, Real};
use crate::num::{format_rational, serde_rational, to_f64, Rational};

use lattice::{exponents, parallel_ratio, ExponentLattice};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatioGroup {
    Trivial,
    /// `generator^Z` with `0 < generator < 1`.
    Cyclic {
        #[serde(with = "serde_rational")]
        generator: Rational,
    },
    Dense {
        #[serde(with = "crate::num::serde_rational_vec")]
        basis: Vec<Rational>,
    },
}

impl fmt::Display for RatioGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioGroup::Trivial => write!(f, "{{1}}"),
            RatioGroup::Cyclic { generator } => write!(f, "({})^Z", format_rational(generator)),
            RatioGroup::Dense { basis } => {
                let b: Vec<String> = basis.iter().map(format_rational).collect();
                write!(f, "dense, generated by {}", b.join(", "))
            }
        }
    }
}

/// Subgroup of the positive reals generated by `values`.
pub fn ratio_group(values: &[Rational]) -> Result<RatioGroup> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("need at least one value".into()));
    }
    let l = ExponentLattice::generated_by(values)?;
    Ok(match l.rank() {
        0 => RatioGroup::Trivial,
        1 => RatioGroup::Cyclic { generator: l.basis().remove(0) },
        _ => RatioGroup::Dense { basis: l.basis() },
    })
}

/// `r^(1/root)` with `r` rational, kept with the smallest possible root.
fn rational_root(r: &Rational, root: u64) -> Result<(Rational, u64)> {
    let e = exponents(r)?;
    let g = e.values().fold(root, |g, &x| g.gcd(&x.unsigned_abs()));
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (p, x) in e {
        let pp = BigInt::from(p).pow((x.unsigned_abs() / g) as u32);
        if x > 0 {
            num *= pp;
        } else {
            den *= pp;
        }
    }
    Ok((Rational::new(num, den), root / g))
}

/// Krieger type. `III { base, root }` is `III_lambda` with
/// `lambda = base^(1/root)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KriegerType {
    II1,
    III { base: Rational, root: u64 },
    III1,
}

impl KriegerType {
    pub fn lambda(base: &Rational, root: u64) -> Result<KriegerType> {
        let (base, root) = rational_root(base, root)?;
        Ok(KriegerType::III { base, root })
    }

    pub fn lambda_value(&self) -> Option<f64> {
        match self {
            KriegerType::III { base, root } => Some(to_f64(base).powf(1.0 / *root as f64)),
            KriegerType::III1 => Some(1.0),
            KriegerType::II1 => None,
        }
    }
}

impl fmt::Display for KriegerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KriegerType::II1 => write!(f, "II_1"),
            KriegerType::III1 => write!(f, "III_1"),
            KriegerType::III { base, root: 1 } => write!(f, "III_{{{}}}", format_rational(base)),
            KriegerType::III { base, root } => write!(f, "III_{{({})^(1/{root})}}", format_rational(base)),
        }
    }
}

impl Serialize for KriegerType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn type_of_group(g: &RatioGroup) -> Result<KriegerType> {
    Ok(match g {
        RatioGroup::Trivial => KriegerType::II1,
        RatioGroup::Cyclic { generator } => KriegerType::lambda(generator, 1)?,
        RatioGroup::Dense { .. } => KriegerType::III1,
    })
}

/// Values of a density ratio: one value together with generators of the
/// ratios between values.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSet {
    pub base: Rational,
    pub ratios: Vec<Rational>,
}

impl ValueSet {
    pub fn from_values(values: &[Rational]) -> Result<Self> {
        let base = values.first().cloned().ok_or_else(|| Error::InvalidArgument("no values".into()))?;
        Ok(ValueSet { ratios: values.iter().skip(1).map(|v| v / &base).collect(), base })
    }
}

/// `T = dmu1 / dmu0` pointwise.
pub fn density_values(mu0: &BaseMeasure, mu1: &BaseMeasure) -> Result<Vec<Rational>> {
    if mu0.len() != mu1.len() {
        return Err(Error::InvalidArgument("measures live on base spaces of different sizes".into()));
    }
    crate::marginals::density_ratio(mu0, mu1)
}

/// `1 <= B < 1/r` with `B` in `t r^Z`.
fn reduce_into_period(t: &Rational, r: &Rational) -> Result<Rational> {
    let one = Rational::one();
    let top = r.recip();
    let mut b = t.clone();
    let mut steps = 0u32;
    while b < one || b >= top {
        b = if b < one { &b * &top } else { &b * r };
        steps += 1;
        if steps > 100_000 {
            return Err(Error::Unsupported("value too far from 1 to reduce".into()));
        }
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(u64),
    Infinite,
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(k) => s.serialize_u64(*k),
            Order::Infinite => s.serialize_str("infinity"),
        }
    }
}

/// `log(x)` kept exactly with its decimal value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogValue {
    pub exact: String,
    pub value: f64,
    pub err: f64,
}

impl LogValue {
    pub fn of(x: &Rational) -> LogValue {
        let exact = if x.is_one() { "0".into() } else { format!("log({})", format_rational(x)) };
        let value = to_f64(x).ln();
        LogValue { exact, value, err: 2.0 * f64::EPSILON * value.abs() }
    }
}

/// `L`, `a`, `b` and the order `k1` of `b` in `R / aZ`, with `a` and `b`
/// stored as `exp_a = e^a` and `exp_b = e^b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableParams {
    pub l: RatioGroup,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub exp_a: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub exp_b: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<Order>,
}

mod opt_rational {
    use super::*;
    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.collect_str(&format_rational(r)),
            None => s.serialize_none(),
        }
    }
}

impl StableParams {
    pub fn a(&self) -> Option<LogValue> {
        self.exp_a.as_ref().map(LogValue::of)
    }

    pub fn b(&self) -> Option<LogValue> {
        self.exp_b.as_ref().map(LogValue::of)
    }
}

pub fn stable_params_of(sets: &[ValueSet]) -> Result<StableParams> {
    let ratios: Vec<Rational> = sets.iter().flat_map(|s| s.ratios.iter().cloned()).collect();
    let l = if ratios.is_empty() { RatioGroup::Trivial } else { ratio_group(&ratios)? };
    let base = &sets.first().ok_or_else(|| Error::InvalidArgument("no values".into()))?.base;
    let RatioGroup::Cyclic { generator: r } = &l else {
        return Ok(StableParams { l, exp_a: None, exp_b: None, k1: None });
    };
    let b = reduce_into_period(base, r)?;
    let k1 = if b.is_one() {
        Order::Finite(1)
    } else {
        let lat = ExponentLattice::generated_by(&[r.clone(), b.clone()])?;
        let vb = lat.coords(&b)?.expect("same primes");
        let vr = lat.coords(r)?.expect("same primes");
        match parallel_ratio(&vb, &vr) {
            Some(t) => Order::Finite(t.denom().magnitude().to_u64_digits().first().copied().unwrap_or(1)),
            None => Order::Infinite,
        }
    };
    Ok(StableParams { exp_a: Some(r.recip()), exp_b: Some(b), k1: Some(k1), l })
}

pub fn stable_params(mu0: &BaseMeasure, mu1: &BaseMeasure) -> Result<StableParams> {
    let t = density_values(mu0, mu1)?;
    let p = stable_params_of(&[ValueSet::from_values(&t)?])?;
    if p.l == RatioGroup::Trivial && !t[0].is_one() {
        return Err(Error::Domain("constant density ratio different from 1".into()));
    }
    Ok(p)
}

pub fn plain_type_of(sets: &[ValueSet]) -> Result<KriegerType> {
    let all: Vec<Rational> = sets.iter().flat_map(|s| std::iter::once(s.base.clone()).chain(s.ratios.iter().cloned())).collect();
    type_of_group(&ratio_group(&all)?)
}

pub fn plain_type(mu0: &BaseMeasure, mu1: &BaseMeasure) -> Result<KriegerType> {
    plain_type_of(&[ValueSet::from_values(&density_values(mu0, mu1)?)?])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableTypes {
    pub rule: String,
    /// Whether `types` lists the whole set.
    pub complete: bool,
    pub types: Vec<KriegerType>,
}

pub const LISTED_INSTANCES: u64 = 10;

pub fn stable_type_set(p: &StableParams) -> Result<StableTypes> {
    match (&p.l, &p.exp_a, &p.k1) {
        (RatioGroup::Trivial, _, _) => {
            Ok(StableTypes { rule: "II_1".into(), complete: true, types: vec![KriegerType::II1] })
        }
        (RatioGroup::Dense { .. }, _, _) => {
            Ok(StableTypes { rule: "III_1".into(), complete: true, types: vec![KriegerType::III1] })
        }
        (RatioGroup::Cyclic { generator }, Some(_), Some(Order::Finite(k1))) => {
            let mut types = Vec::new();
            for k0 in (1..=*k1).filter(|d| k1 % d == 0) {
                types.push(KriegerType::lambda(generator, k0)?);
            }
            Ok(StableTypes {
                rule: format!("III_lambda with lambda = ({})^(1/k0), k0 dividing {k1}", format_rational(generator)),
                complete: true,
                types,
            })
        }
        (RatioGroup::Cyclic { generator }, Some(_), Some(Order::Infinite)) => {
            let mut types = vec![KriegerType::III1];
            for k0 in 1..=LISTED_INSTANCES {
                types.push(KriegerType::lambda(generator, k0)?);
            }
            Ok(StableTypes {
                rule: format!("III_1 and III_lambda with lambda = ({})^(1/k0), k0 >= 1", format_rational(generator)),
                complete: false,
                types,
            })
        }
        _ => Err(Error::Domain("cyclic ratio group without a period".into())),
    }
}

/// Basis of the group generated by the values of `T`, each below 1.
pub fn sd_generators(mu0: &BaseMeasure, mu1: &BaseMeasure) -> Result<Vec<Rational>> {
    let t = density_values(mu0, mu1)?;
    Ok(ExponentLattice::generated_by(&t)?.basis())
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    #[serde(rename = "type")]
    pub kind: KriegerType,
    pub source: String,
    #[serde(with = "crate::num::serde_rational_vec")]
    pub values: Vec<Rational>,
    #[serde(rename = "L")]
    pub l: RatioGroup,
    pub a: Option<LogValue>,
    pub b: Option<LogValue>,
    pub k1: Option<Order>,
    pub stable_types: StableTypes,
    #[serde(with = "crate::num::serde_rational_vec")]
    pub sd_basis: Vec<Rational>,
    pub notes: Vec<String>,
}

fn classification(sets: &[ValueSet], values: Vec<Rational>, source: String, notes: Vec<String>) -> Result<Classification> {
    let kind = plain_type_of(sets)?;
    let params = stable_params_of(sets)?;
    let stable_types = stable_type_set(&params)?;
    let gens: Vec<Rational> =
        sets.iter().flat_map(|s| std::iter::once(s.base.clone()).chain(s.ratios.iter().cloned())).collect();
    let sd_basis = ExponentLattice::generated_by(&gens)?.basis();
    Ok(Classification {
        kind,
        source,
        values,
        a: params.a(),
        b: params.b(),
        k1: params.k1,
        l: params.l,
        stable_types,
        sd_basis,
        notes,
    })
}

pub fn classify_measures(mu0: &BaseMeasure, mu1: &BaseMeasure) -> Result<Classification> {
    let t = density_values(mu0, mu1)?;
    classification(&[ValueSet::from_values(&t)?], t, "T = dmu1/dmu0".into(), Vec::new())
}

/// Values of `omega(g, .)`: for each coordinate where the marginals differ,
/// the possible factors `mu_{g i}(x) / mu_i(x)`.
pub fn omega_values(spec: &ActionSpec, g: &Element) -> Result<ValueSet> {
    spec.group.check(g)?;
    let finite = match &spec.family {
        MarginalFamily::WSplit { .. } | MarginalFamily::FolnerInduced { .. } | MarginalFamily::FreeProductW { .. } => {
            true
        }
        MarginalFamily::SpecialCocycle { bumps, .. } => bumps.is_some() && spec.group.is_integers(),
        MarginalFamily::ZSequence { .. } => false,
    };
    if !finite {
        return Err(Error::Unsupported(
            "omega has infinitely many factors for this family; exact classification needs a finitely supported cocycle".into(),
        ));
    }
    let radius = crate::criteria::products::auto_radius(spec, g, 0.0)?;
    let (window, _) = support_window(spec, g, radius)?;
    let bump = spec.bump();
    let ginv = g.inv();
    let mut base = Rational::one();
    let mut ratios = Vec::new();
    for h in &window {
        let fi = f_value_unchecked(spec, &ginv.mul(h)?, bump.as_deref())?;
        let fg = f_value_unchecked(spec, h, bump.as_deref())?;
        let (Real::Exact(a), Real::Exact(b)) = (fi, fg) else {
            return Err(Error::Unsupported("marginals are not rational".into()));
        };
        if a == b {
            continue;
        }
        let one = Rational::one();
        let f0 = &b / &a;
        let f1 = (&one - &b) / (&one - &a);
        ratios.push(&f1 / &f0);
        base *= f0;
    }
    let m = spec.multiplicity as i32;
    Ok(ValueSet { base: num_traits::Pow::pow(&base, m), ratios })
}

/// Classifies a Bernoulli action. Two-point free-product families use their
/// base measures; otherwise the values of `omega(s, .)` on the given
/// elements (default: the positive generators) play the role of `T`.
pub fn classify_action(spec: &ActionSpec, elements: Option<&[Element]>) -> Result<Classification> {
    spec.validate()?;
    if let MarginalFamily::FreeProductW { mu0, mu1, .. } = &spec.family {
        let mut c = classify_measures(mu0, mu1)?;
        if spec.multiplicity > 1 {
            c.notes.push("multiplicity ignored: the free-product type depends only on T".into());
        }
        return Ok(c);
    }
    let default: Vec<Element> = spec
        .group
        .generators()
        .into_iter()
        .filter(|g| match g {
            Element::Int(n) => *n > 0,
            Element::Word(w) => w.letters().all(|(_, e)| e > 0),
        })
        .collect();
    let elements = elements.unwrap_or(&default);
    let mut sets = Vec::new();
    let mut values = Vec::new();
    for g in elements {
        let s = omega_values(spec, g)?;
        values.push(s.base.clone());
        values.extend(s.ratios.iter().map(|r| &s.base * r));
        sets.push(s);
    }
    let names: Vec<String> = elements.iter().map(|g| g.to_string()).collect();
    let notes = vec!["values listed are omega(g, x) at x = 0 and with one coordinate flipped".into()];
    classification(&sets, values, format!("omega(g, .) for g in {{{}}}", names.join(", ")), notes)
}

pub use lattice::below_one as canonical_below_one;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::{measures_from_ab_exp, measures_from_atomic_eta, measures_from_lambda};
    use crate::num::{int, rat};

    #[test]
    fn ratio_groups() {
        assert_eq!(ratio_group(&[int(1)]).unwrap(), RatioGroup::Trivial);
        assert_eq!(ratio_group(&[rat(3, 2), rat(9, 4)]).unwrap(), RatioGroup::Cyclic { generator: rat(2, 3) });
        assert!(matches!(ratio_group(&[rat(6, 5), rat(4, 5)]).unwrap(), RatioGroup::Dense { .. }));
    }

    #[test]
    fn lambda_measures() {
        let (m0, m1) = measures_from_lambda(&rat(1, 2)).unwrap();
        assert_eq!(plain_type(&m0, &m1).unwrap(), KriegerType::III { base: rat(1, 2), root: 1 });
        let p = stable_params(&m0, &m1).unwrap();
        assert_eq!(p.l, RatioGroup::Cyclic { generator: rat(1, 4) });
        assert_eq!(p.exp_a, Some(int(4)));
        assert_eq!(p.exp_b, Some(int(2)));
        assert_eq!(p.k1, Some(Order::Finite(2)));
        let s = stable_type_set(&p).unwrap();
        assert_eq!(
            s.types,
            vec![KriegerType::III { base: rat(1, 4), root: 1 }, KriegerType::III { base: rat(1, 2), root: 1 }]
        );
        assert_eq!(sd_generators(&m0, &m1).unwrap(), vec![rat(1, 2)]);
    }

    #[test]
    fn ab_roundtrip() {
        let (m0, m1) = measures_from_ab_exp(&int(2), &rat(3, 2)).unwrap();
        let p = stable_params(&m0, &m1).unwrap();
        assert_eq!((p.exp_a, p.exp_b), (Some(int(2)), Some(rat(3, 2))));
        let (m0, m1) = measures_from_ab_exp(&int(2), &int(1)).unwrap();
        assert_eq!(plain_type(&m0, &m1).unwrap().to_string(), "III_{1/2}");
        let p = stable_params(&m0, &m1).unwrap();
        assert_eq!((p.exp_a, p.exp_b, p.k1), (Some(int(2)), Some(int(1)), Some(Order::Finite(1))));
    }

    #[test]
    fn atoms() {
        let (m0, m1) = measures_from_atomic_eta(&[(rat(1, 3), rat(1, 2)), (rat(3, 16), rat(1, 3))]).unwrap();
        assert_eq!(sd_generators(&m0, &m1).unwrap(), vec![rat(1, 2), rat(1, 3)]);
    }

    #[test]
    fn identical_measures() {
        let m = BaseMeasure::bernoulli(rat(1, 3)).unwrap();
        assert_eq!(plain_type(&m, &m).unwrap(), KriegerType::II1);
        assert_eq!(stable_params(&m, &m).unwrap().l, RatioGroup::Trivial);
        assert!(sd_generators(&m, &m).unwrap().is_empty());
    }

    #[test]
    fn roots_simplify() {
        assert_eq!(KriegerType::lambda(&rat(4, 9), 2).unwrap().to_string(), "III_{2/3}");
        assert_eq!(KriegerType::lambda(&rat(2, 3), 3).unwrap().to_string(), "III_{(2/3)^(1/3)}");
    }
}
