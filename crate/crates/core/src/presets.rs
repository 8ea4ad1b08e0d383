//! Named actions: `f2-wsplit`, `explicit-z(1/2)`, `f2-dissipative(36)`, ...

use num_traits::{One, Signed};

use crate::cocycles::folner::build_folner;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::marginals::{
    measures_from_lambda, ActionSpec, DecreasingSequence, GrowthBound, MarginalFamily,
};
use crate::num::{floor_rational, format_rational, parse_rational, rat, to_f64, Rational};

/// Preset names, with `(x)` marking a rational parameter.
pub const PRESETS: &[(&str, &str)] = &[
    ("explicit-z(lambda)", "Z, mu_n(0) = lambda + 1/sqrt(n log n) for n >= ceil((1 - lambda)^-2)"),
    ("explicit-z-sqrt6", "Z, mu_n(0) = 1/2 + 1/(6 sqrt n) for n >= 1"),
    ("f2-wsplit", "F2, 3/5 on W_a, 2/5 on W_b, 1/2 elsewhere"),
    ("f2-wsplit-512", "F2, 3/5 on W_a, 5/12 on W_b, 1/2 elsewhere"),
    ("f2-dissipative(D)", "F2, 1/2 +- H(pi_a), H(pi_b) / 4 with the bump function of growth D"),
    ("folner-z(alpha)", "Z, Folner-built marginals with |c_k| <= alpha log(1 + k)"),
    ("free-product(lambda)", "F2, mu_1 on words ending in a positive power of a, mu_0 elsewhere"),
    ("pmp-f2", "F2, all marginals 1/2"),
    ("pmp-z", "Z, all marginals 1/2"),
];

/// Intervals and enumeration horizon used by `folner-z`.
pub const FOLNER_SETS: usize = 6;
pub const FOLNER_HORIZON: u64 = 200;

fn split(name: &str) -> Result<(&str, Option<Rational>)> {
    let name = name.trim();
    match name.split_once('(') {
        None => Ok((name, None)),
        Some((head, rest)) => {
            let arg = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parenthesis in preset {name:?}")))?;
            Ok((head, Some(parse_rational(arg)?)))
        }
    }
}

pub fn preset(name: &str) -> Result<ActionSpec> {
    let (head, arg) = split(name)?;
    let need = |what: &str| -> Result<Rational> {
        arg.clone().ok_or_else(|| Error::InvalidArgument(format!("preset {head} needs a parameter {what}, e.g. {head}(1/2)")))
    };
    if arg.is_some() && matches!(head, "explicit-z-sqrt6" | "f2-wsplit" | "f2-wsplit-512" | "pmp-f2" | "pmp-z") {
        return Err(Error::InvalidArgument(format!("preset {head} takes no parameter")));
    }
    match head {
        "explicit-z" => explicit_z(&need("lambda")?),
        "explicit-z-sqrt6" => ActionSpec::new(
            Group::integers(),
            MarginalFamily::ZSequence {
                lambda: rat(1, 2),
                n0: 1,
                seq: DecreasingSequence::InvSqrt { scale: rat(1, 6) },
            },
            rat(1, 3),
        ),
        "f2-wsplit" => wsplit(rat(2, 5)),
        "f2-wsplit-512" => wsplit(rat(5, 12)),
        "f2-dissipative" => {
            let d = need("D")?;
            ActionSpec::new(
                Group::free(2),
                MarginalFamily::SpecialCocycle { d, base: rat(1, 2), scale: rat(1, 4), bumps: None },
                rat(1, 4),
            )
        }
        "folner-z" => {
            let alpha = need("alpha")?;
            if !alpha.is_positive() {
                return Err(Error::InvalidArgument("alpha must be positive".into()));
            }
            let f = build_folner(&GrowthBound::Log { alpha }, &rat(1, 4), FOLNER_SETS, FOLNER_HORIZON)?;
            f.spec(rat(1, 4), rat(1, 4))
        }
        "free-product" => {
            let (mu0, mu1) = measures_from_lambda(&need("lambda")?)?;
            let delta = mu0.weights().iter().chain(mu1.weights()).min().cloned().expect("nonempty");
            ActionSpec::new(Group::free(2), MarginalFamily::FreeProductW { mu0, mu1, distinguished: 0 }, delta)
        }
        "pmp-f2" => ActionSpec::new(
            Group::free(2),
            MarginalFamily::WSplit { p_a: rat(1, 2), p_b: rat(1, 2), p_w: rat(1, 2) },
            rat(1, 2),
        ),
        "pmp-z" => ActionSpec::new(
            Group::integers(),
            MarginalFamily::FolnerInduced { offset: rat(1, 2), blocks: Vec::new(), growth: None },
            rat(1, 2),
        ),
        _ => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            Err(Error::InvalidArgument(format!("unknown preset {name:?}; known: {}", names.join(", "))))
        }
    }
}

fn wsplit(p_b: Rational) -> Result<ActionSpec> {
    ActionSpec::new(Group::free(2), MarginalFamily::WSplit { p_a: rat(3, 5), p_b, p_w: rat(1, 2) }, rat(1, 3))
}

/// `n0 = ceil((1 - lambda)^-2)` and `a_j = 1/sqrt(y log y)` with `y = j + n0`.
fn explicit_z(lambda: &Rational) -> Result<ActionSpec> {
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Err(Error::InvalidArgument(format!("lambda = {} must lie in (0, 1)", format_rational(lambda))));
    }
    let gap = Rational::one() - lambda;
    let n0 = (gap.recip() * gap.recip()).ceil().to_integer();
    let n0: u64 = n0
        .try_into()
        .map_err(|_| Error::InvalidArgument("lambda too close to 1".into()))?;
    let y = n0 as f64;
    let top = to_f64(lambda) + 1.0 / (y * y.ln()).sqrt();
    let room = to_f64(lambda).min(1.0 - top);
    let mut delta = floor_rational(room * (1.0 - 1e-9), 1000);
    if !delta.is_positive() {
        delta = floor_rational(room * (1.0 - 1e-9), 1_000_000_000);
    }
    if !delta.is_positive() {
        return Err(Error::InvalidArgument("lambda leaves no room for the marginals".into()));
    }
    let half = rat(1, 2);
    if delta > half {
        delta = half;
    }
    ActionSpec::new(
        Group::integers(),
        MarginalFamily::ZSequence {
            lambda: lambda.clone(),
            n0: n0 as i64,
            seq: DecreasingSequence::InvSqrtLog { shift: n0 },
        },
        delta,
    )
}

/// `32 log 3`, the threshold on `D` above which the special cocycle gives a
/// dissipative action of `F2`.
pub fn dissipative_threshold() -> f64 {
    32.0 * 3f64.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Element;
    use crate::marginals::f_value;

    #[test]
    fn wsplit_values() {
        let s = preset("f2-wsplit").unwrap();
        assert_eq!(s.family, MarginalFamily::WSplit { p_a: rat(3, 5), p_b: rat(2, 5), p_w: rat(1, 2) });
        assert_eq!(s.delta, rat(1, 3));
    }

    #[test]
    fn explicit_z_start() {
        let s = preset("explicit-z(1/2)").unwrap();
        let MarginalFamily::ZSequence { n0, .. } = &s.family else { panic!() };
        assert_eq!(*n0, 4);
        let v = f_value(&s, &Element::Int(4)).unwrap().value();
        assert!((v - (0.5 + 1.0 / (4.0 * 4f64.ln()).sqrt())).abs() < 1e-15);
        assert_eq!(f_value(&s, &Element::Int(3)).unwrap().value(), 0.5);
        let s = preset("explicit-z-sqrt6").unwrap();
        assert_eq!(f_value(&s, &Element::Int(1)).unwrap().value(), 2.0 / 3.0);
    }

    #[test]
    fn parameters_checked() {
        assert!(preset("f2-dissipative").is_err());
        assert!(preset("f2-wsplit(3)").is_err());
        assert!(preset("explicit-z(3/2)").is_err());
        assert!(preset("nope").is_err());
        assert!(preset("f2-dissipative(36").is_err());
        assert!(36.0 > dissipative_threshold());
    }
}
