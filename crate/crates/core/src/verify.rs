//! Runs the inequalities relating `||c_g||^2` to the Hellinger and negative
//! moment integrals of `omega(g, .)` over a grid of elements.

use serde::Serialize;

use crate::cocycles::{norm_sq_bruteforce, norm_sq_tol};
use crate::criteria::kappa0;
use crate::criteria::products::{auto_radius, hellinger_product_window, negsq_product_window};
use crate::error::Result;
use crate::group::{Element, GroupKind};
use crate::marginals::{ActionSpec, BoundedValue, MarginalFamily, Real};
use crate::num::{format_rational, rat, to_f64};

/// Square mass left outside the product windows.
pub const PRODUCT_TOL: f64 = 1e-6;
/// Largest window used by the summation oracle.
pub const ORACLE_RADIUS_CAP: u32 = 4096;

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub holds: bool,
    /// Distance from violation; negative when the bound fails.
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementCheck {
    pub element: Element,
    pub norm_sq: BoundedValue,
    pub hellinger: BoundedValue,
    pub negsq: BoundedValue,
    pub checks: Vec<BoundCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub kappa0: String,
    pub grid_size: usize,
    pub checks_run: usize,
    pub violations: usize,
    pub notes: Vec<String>,
    pub elements: Vec<ElementCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Ball of radius 4 on free groups, `|k| <= 1000` on the integers.
pub fn default_grid(spec: &ActionSpec) -> Vec<Element> {
    match spec.group.kind {
        GroupKind::Free => spec.group.ball(4),
        GroupKind::Integers => (-1000..=1000).map(Element::Int).collect(),
    }
}

fn bounded(r: &Real) -> BoundedValue {
    BoundedValue::new(r.value(), r.err())
}

fn check(name: &'static str, margin: f64) -> BoundCheck {
    BoundCheck { name, holds: margin >= 0.0, margin }
}

pub fn verify_bounds(spec: &ActionSpec, grid: Option<&[Element]>) -> Result<VerifyReport> {
    spec.validate()?;
    let default;
    let grid = match grid {
        Some(g) => g,
        None => {
            default = default_grid(spec);
            &default
        }
    };
    let k0 = kappa0(&spec.delta)?;
    let k0f = to_f64(&k0);
    let lower_applies = spec.delta >= rat(1, 3) && spec.is_binary();
    let mut notes = Vec::new();
    if !lower_applies {
        notes.push("lower Hellinger bound exp(-(3/5)|c|^2) skipped: needs marginals in [1/3, 2/3]".into());
    }
    let sandwich = match &spec.family {
        MarginalFamily::ZSequence { seq, .. } => Some(seq.clone()),
        _ => None,
    };
    let elements: Vec<ElementCheck> = crate::pool::install(|| {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|g| -> Result<ElementCheck> {
                spec.group.check(g)?;
                let n = bounded(&norm_sq_tol(spec, g, 1e-9)?);
                let r = auto_radius(spec, g, PRODUCT_TOL)?;
                let h = hellinger_product_window(spec, g, r)?;
                let q = negsq_product_window(spec, g, r)?;
                let mut checks = vec![
                    check("sqrt_omega_upper", (-0.5 * n.lower()).exp() - h.lower()),
                    check("negsq_upper", (k0f * n.upper()).exp() - q.lower()),
                ];
                if lower_applies {
                    checks.push(check("sqrt_omega_lower", h.upper() - (-0.6 * n.upper()).exp()));
                }
                if spec.is_binary() {
                    let oracle_r = auto_radius(spec, g, 1e-9)?.min(ORACLE_RADIUS_CAP).max(g.len() as u32);
                    let o = norm_sq_bruteforce(spec, g, oracle_r)?;
                    let exact = matches!((&o.partial, o.tail == 0.0), (Real::Exact(_), true));
                    let margin = match (exact, norm_sq_tol(spec, g, 1e-9)?) {
                        (true, Real::Exact(c)) => {
                            if o.partial.exact() == Some(&c) {
                                0.0
                            } else {
                                -(to_f64(&c) - o.partial.value()).abs().max(f64::MIN_POSITIVE)
                            }
                        }
                        _ => {
                            let ob = o.bounded();
                            let slack = 1e-12 * n.value.abs().max(1.0);
                            n.err + ob.err + slack - (n.value - ob.value).abs()
                        }
                    };
                    checks.push(check("norm_matches_oracle", margin));
                }
                if let (Some(seq), Element::Int(k)) = (&sandwich, g) {
                    if *k != 0 {
                        let s: f64 = (0..k.unsigned_abs()).map(|j| seq.term(j).powi(2)).sum::<f64>() * spec.m();
                        let slack = 1e-12 * s;
                        checks.push(check("translate_lower", n.upper() - s + slack));
                        checks.push(check("translate_upper", 2.0 * s - n.lower() + slack));
                    }
                }
                Ok(ElementCheck { element: g.clone(), norm_sq: n, hellinger: h, negsq: q, checks })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let checks_run = elements.iter().map(|e| e.checks.len()).sum();
    let violations = elements.iter().flat_map(|e| &e.checks).filter(|c| !c.holds).count();
    Ok(VerifyReport {
        kappa0: format_rational(&k0),
        grid_size: elements.len(),
        checks_run,
        violations,
        notes,
        elements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;

    #[test]
    fn wsplit_ball_three() {
        let s = preset("f2-wsplit").unwrap();
        let grid = s.group.ball(3);
        let r = verify_bounds(&s, Some(&grid)).unwrap();
        assert_eq!(r.grid_size, 53);
        assert!(r.passed(), "{:?}", r.elements.iter().flat_map(|e| &e.checks).find(|c| !c.holds));
        assert_eq!(r.checks_run, 53 * 4);
    }

    #[test]
    fn pmp_is_tight() {
        for name in ["pmp-f2", "pmp-z"] {
            let s = preset(name).unwrap();
            let grid = s.group.ball(2);
            let r = verify_bounds(&s, Some(&grid)).unwrap();
            assert!(r.passed());
            for e in &r.elements {
                assert_eq!(e.norm_sq.value, 0.0);
                assert!((e.hellinger.value - 1.0).abs() <= e.hellinger.err + 1e-15);
                assert!((e.negsq.value - 1.0).abs() <= e.negsq.err + 1e-15);
            }
        }
    }
}
