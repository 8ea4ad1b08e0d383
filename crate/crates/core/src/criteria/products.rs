//! Infinite products over coordinates: Hellinger affinities `int sqrt(omega)`
//! and negative second moments `int omega^-2`.

use serde::Serialize;

use crate::cocycles::{norm_sq_tol, support_window};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::marginals::{f_value_unchecked, ActionSpec, BoundedValue, MarginalFamily};
use crate::num::{format_rational, rat, to_f64};

use super::kappa0;

/// Marginal pairs `(mu_i, mu_{g i})` on the coordinates where they differ.
#[derive(Debug, Clone)]
pub struct CoordPairs {
    /// Two-point marginals given by `(F(i), F(g i))`.
    pub binary: Vec<(f64, f64)>,
    /// Marginals on larger base spaces.
    pub general: Vec<(Vec<f64>, Vec<f64>)>,
    /// Bound on `sum (F(i) - F(g i))^2` over omitted coordinates, one copy.
    pub tail_sq: f64,
}

impl CoordPairs {
    pub fn len(&self) -> usize {
        self.binary.len() + self.general.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Coordinates `i = g^-1 h` for `h` in the direct-summation window.
pub fn coordinate_pairs(spec: &ActionSpec, g: &Element, radius: u32) -> Result<CoordPairs> {
    spec.group.check(g)?;
    let (window, tail) = support_window(spec, g, radius)?;
    let ginv = g.inv();
    let mut out = CoordPairs { binary: Vec::new(), general: Vec::new(), tail_sq: tail.upper() };
    if let MarginalFamily::FreeProductW { mu0, mu1, distinguished } = &spec.family {
        if mu0.len() > 2 {
            for h in &window {
                let i = ginv.mul(h)?;
                let pick = |e: &Element| {
                    let w = e.as_word().expect("free group element");
                    if crate::group::last_class(w) == crate::group::LastClass::Positive(*distinguished) {
                        mu1
                    } else {
                        mu0
                    }
                };
                let (a, b) = (pick(&i), pick(h));
                if a != b {
                    out.general.push((a.weights_f64(), b.weights_f64()));
                }
            }
            return Ok(out);
        }
    }
    let bump = spec.bump();
    for h in &window {
        let a = f_value_unchecked(spec, &ginv.mul(h)?, bump.as_deref())?;
        let b = f_value_unchecked(spec, h, bump.as_deref())?;
        if a == b {
            continue;
        }
        out.binary.push((a.value(), b.value()));
    }
    // Largest gaps first.
    out.binary.sort_by(|x, y| (y.0 - y.1).abs().total_cmp(&(x.0 - x.1).abs()));
    Ok(out)
}

const SPECIAL_RADIUS_CAP: u32 = 1 << 14;

/// Radius whose window captures the cocycle up to `tol` in square norm.
pub fn auto_radius(spec: &ActionSpec, g: &Element, tol: f64) -> Result<u32> {
    let glen = g.len() as u32;
    Ok(match &spec.family {
        MarginalFamily::WSplit { .. } | MarginalFamily::FreeProductW { .. } => glen,
        MarginalFamily::FolnerInduced { blocks, .. } => {
            let far = blocks.iter().map(|b| b.start.abs().max((b.end() - 1).abs())).max().unwrap_or(0);
            (far as u32).saturating_add(glen)
        }
        MarginalFamily::SpecialCocycle { scale, .. } => {
            let bc = spec.bump().expect("special family");
            if let Some(end) = bc.support_end() {
                (end as u32).saturating_add(glen)
            } else {
                // Same ray tail bound as the summation window, capped so the
                // window stays small.
                let rays = match g {
                    Element::Word(_) => (glen as f64 + 1.0) * spec.group.rank as f64 * 4.0,
                    Element::Int(_) => 1.0,
                };
                let c = to_f64(scale).powi(2) * rays * (glen as f64).powi(2);
                let mut r = glen.max(1) * 64;
                while r < SPECIAL_RADIUS_CAP && c * bc.increment_tail((r - glen) as u64) > tol {
                    r *= 2;
                }
                r.min(SPECIAL_RADIUS_CAP)
            }
        }
        MarginalFamily::ZSequence { n0, seq, .. } => {
            let k = glen as u64;
            let base = glen + n0.unsigned_abs() as u32;
            if k == 0 {
                return Ok(base);
            }
            let mut n = 2 * k + 16;
            while seq.tail_sq_diff_bound(k, n) > tol && n < 1 << 28 {
                n *= 2;
            }
            (n as u32).saturating_add(base)
        }
    })
}

fn hellinger_factor(a: f64, b: f64) -> f64 {
    (a * b).sqrt() + ((1.0 - a) * (1.0 - b)).sqrt()
}

fn negsq_factor(a: f64, b: f64) -> f64 {
    a.powi(3) / (b * b) + (1.0 - a).powi(3) / ((1.0 - b) * (1.0 - b))
}

fn product_rounding(n: usize) -> f64 {
    4.0 * f64::EPSILON * (n as f64 + 2.0)
}

/// `int sqrt(omega(g, x)) dmu(x)` over all copies.
pub fn hellinger_product(spec: &ActionSpec, g: &Element) -> Result<BoundedValue> {
    let r = auto_radius(spec, g, 1e-10)?;
    hellinger_product_window(spec, g, r)
}

pub fn hellinger_product_window(spec: &ActionSpec, g: &Element, radius: u32) -> Result<BoundedValue> {
    let c = coordinate_pairs(spec, g, radius)?;
    let mut p = 1.0f64;
    for &(a, b) in &c.binary {
        p *= hellinger_factor(a, b);
    }
    for (mu, nu) in &c.general {
        p *= mu.iter().zip(nu).map(|(x, y)| (x * y).sqrt()).sum::<f64>();
    }
    // Omitted factors lie in [1 - t/(4 delta), 1] for t their squared gap.
    let tau = c.tail_sq / (4.0 * spec.delta_f64());
    let lo_factor = if tau < 1.0 { (-tau / (1.0 - tau)).exp() } else { 0.0 };
    let m = spec.multiplicity as i32;
    let round = product_rounding(c.len()) * m as f64;
    let hi = p.powi(m) * (1.0 + round);
    let lo = (p * lo_factor).powi(m) * (1.0 - round);
    Ok(BoundedValue::from_bounds(lo, hi))
}

/// `int omega(g, x)^-2 dmu(x)` over all copies.
pub fn negsq_product(spec: &ActionSpec, g: &Element) -> Result<BoundedValue> {
    let r = auto_radius(spec, g, 1e-10)?;
    negsq_product_window(spec, g, r)
}

pub fn negsq_product_window(spec: &ActionSpec, g: &Element, radius: u32) -> Result<BoundedValue> {
    let c = coordinate_pairs(spec, g, radius)?;
    let mut p = 1.0f64;
    for &(a, b) in &c.binary {
        p *= negsq_factor(a, b);
    }
    for (mu, nu) in &c.general {
        p *= mu.iter().zip(nu).map(|(x, y)| x.powi(3) / (y * y)).sum::<f64>();
    }
    // Omitted factors lie in [1, exp(kappa0 t)].
    let k0 = to_f64(&kappa0(&spec.delta)?);
    let m = spec.multiplicity as i32;
    let round = product_rounding(c.len()) * m as f64;
    let lo = p.powi(m) * (1.0 - round);
    let hi = (p * (k0 * c.tail_sq).exp()).powi(m) * (1.0 + round);
    Ok(BoundedValue::from_bounds(lo, hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct KestenRow {
    pub generator: Element,
    pub norm_sq: f64,
    pub hellinger: BoundedValue,
    /// `exp(-(3/5) ||c_s||^2)`, available when all marginals lie in `[1/3, 2/3]`.
    pub analytic_lower: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KestenReport {
    pub rank: u8,
    /// `2 sqrt(2n - 1)`.
    pub kesten_norm: f64,
    pub rows: Vec<KestenRow>,
    pub sum_lower: f64,
    pub basis: String,
    pub nonamenable: bool,
}

/// Compares `sum_s int sqrt(omega(s, .))` over `s = a^+-1, b^+-1, ..` with
/// the spectral radius bound of the free group.
pub fn kesten_check(spec: &ActionSpec) -> Result<KestenReport> {
    let rank = match spec.group {
        Group { kind: crate::group::GroupKind::Free, rank } => rank,
        _ => return Err(Error::Unsupported("the Kesten comparison needs a free group".into())),
    };
    let kesten_norm = 2.0 * (2.0 * rank as f64 - 1.0).sqrt();
    let analytic = spec.delta >= rat(1, 3) && spec.is_binary();
    let mut rows = Vec::new();
    for s in spec.group.generators() {
        let h = hellinger_product(spec, &s)?;
        let (norm, analytic_lower) = if spec.is_binary() {
            let n = norm_sq_tol(spec, &s, 1e-12)?;
            let lower = analytic.then(|| (-0.6 * n.upper()).exp());
            (n.value(), lower)
        } else {
            (f64::NAN, None)
        };
        rows.push(KestenRow { generator: s, norm_sq: norm, hellinger: h, analytic_lower });
    }
    let (sum_lower, basis) = if analytic {
        (rows.iter().map(|r| r.analytic_lower.unwrap()).sum::<f64>(), "exp(-(3/5)|c_s|^2)".to_string())
    } else {
        (rows.iter().map(|r| r.hellinger.lower()).sum::<f64>(), "hellinger lower bounds".to_string())
    };
    let sum_lower = sum_lower * (1.0 - 8.0 * f64::EPSILON);
    Ok(KestenReport {
        rank,
        kesten_norm,
        rows,
        sum_lower,
        basis: format!("{basis}; delta = {}", format_rational(&spec.delta)),
        nonamenable: sum_lower > kesten_norm,
    })
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
    fn generator_affinity() {
        let s = wsplit();
        let a = Element::Word(Word::generator(0));
        let h = hellinger_product(&s, &a).unwrap();
        let expect = 0.3f64.sqrt() + 0.2f64.sqrt();
        assert!((h.value - expect).abs() <= h.err + 1e-15);
        assert!((expect - 0.994937).abs() < 1e-6);
        let c = coordinate_pairs(&s, &a, 1).unwrap();
        assert_eq!(c.binary, vec![(0.5, 0.6)]);
    }

    #[test]
    fn kesten_wsplit() {
        let k = kesten_check(&wsplit()).unwrap();
        assert!(k.nonamenable);
        assert!((k.sum_lower - 4.0 * (-3.0f64 / 500.0).exp()).abs() < 1e-9);
        assert!((k.kesten_norm - 12f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pmp_products_are_one() {
        let s = ActionSpec::new(
            Group::free(2),
            MarginalFamily::WSplit { p_a: rat(1, 2), p_b: rat(1, 2), p_w: rat(1, 2) },
            rat(1, 2),
        )
        .unwrap();
        let g = Element::Word(Word::parse("a b^-2 a").unwrap());
        assert_eq!(hellinger_product(&s, &g).unwrap().value, 1.0);
        assert_eq!(negsq_product(&s, &g).unwrap().value, 1.0);
    }
}
