//! Sampling the Radon-Nikodym cocycle `omega(g, x) = prod_i mu_{g i}(x_i) / mu_i(x_i)`
//! over a finite window of coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::products::{auto_radius, coordinate_pairs, CoordPairs};
use crate::error::{Error, Result};
use crate::group::Element;
use crate::marginals::{draw, ActionSpec, MarginalFamily};
use crate::pool;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub element: Element,
    pub samples: u64,
    pub seed: u64,
    pub window_radius: u32,
    /// Differing coordinates per copy.
    pub coordinates: usize,
    /// Bound on the squared cocycle mass outside the window, one copy.
    pub tail_sq: f64,
    pub omega: Stat,
    pub sqrt_omega: Stat,
    pub inv_sq_omega: Stat,
    /// Exact `int sqrt(omega)` and `int omega^-2` over the same window.
    pub hellinger_window: f64,
    pub negsq_window: f64,
}

impl McEstimate {
    /// Largest deviation, in standard errors, of the sample means of
    /// `omega` and `sqrt(omega)` from `1` and the exact window affinity.
    pub fn max_z(&self) -> f64 {
        let z = |s: &Stat, target: f64| {
            let d = (s.mean - target).abs();
            if s.se > 0.0 {
                d / s.se
            } else if d <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        z(&self.omega, 1.0).max(z(&self.sqrt_omega, self.hellinger_window))
    }
}

fn finitely_supported(spec: &ActionSpec) -> bool {
    match &spec.family {
        MarginalFamily::WSplit { .. } | MarginalFamily::FreeProductW { .. } | MarginalFamily::FolnerInduced { .. } => {
            true
        }
        MarginalFamily::SpecialCocycle { bumps, .. } => bumps.is_some() && spec.group.is_integers(),
        MarginalFamily::ZSequence { .. } => false,
    }
}

/// Default window: the whole support when finite, otherwise enough to make
/// the omitted square mass small, capped at 4096.
pub fn default_window(spec: &ActionSpec, g: &Element) -> Result<u32> {
    Ok(auto_radius(spec, g, 1e-4)?.min(4096.max(g.len() as u32)))
}

pub const MIN_SAMPLES: u64 = 1000;

pub fn mc_omega(spec: &ActionSpec, g: &Element, window: Option<u32>, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples")));
    }
    spec.group.check(g)?;
    let radius = match window {
        Some(r) => r,
        None => default_window(spec, g)?,
    };
    if finitely_supported(spec) {
        let need = auto_radius(spec, g, 0.0)?;
        if radius < need {
            return Err(Error::InvalidArgument(format!(
                "window radius {radius} misses part of the support of c_{g}; need {need}"
            )));
        }
    }
    let pairs = coordinate_pairs(spec, g, radius)?;
    let m = spec.multiplicity as i32;
    let hell: f64 = pairs.binary.iter().map(|&(a, b)| (a * b).sqrt() + ((1.0 - a) * (1.0 - b)).sqrt()).product::<f64>()
        * pairs
            .general
            .iter()
            .map(|(mu, nu)| mu.iter().zip(nu).map(|(x, y)| (x * y).sqrt()).sum::<f64>())
            .product::<f64>();
    let negsq: f64 = pairs
        .binary
        .iter()
        .map(|&(a, b)| a.powi(3) / (b * b) + (1.0 - a).powi(3) / ((1.0 - b) * (1.0 - b)))
        .product::<f64>()
        * pairs
            .general
            .iter()
            .map(|(mu, nu)| mu.iter().zip(nu).map(|(x, y)| x.powi(3) / (y * y)).sum::<f64>())
            .product::<f64>();
    let moments = sample_moments(&pairs, spec.multiplicity, samples, seed);
    let n = samples as f64;
    let stat = |s: f64, s2: f64| {
        let mean = s / n;
        let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
        Stat { mean, se: (var / n).sqrt() }
    };
    Ok(McEstimate {
        element: g.clone(),
        samples,
        seed,
        window_radius: radius,
        coordinates: pairs.len(),
        tail_sq: pairs.tail_sq,
        omega: stat(moments[0], moments[1]),
        sqrt_omega: stat(moments[2], moments[0]),
        inv_sq_omega: stat(moments[3], moments[4]),
        hellinger_window: hell.powi(m),
        negsq_window: negsq.powi(m),
    })
}

/// Sums of `omega, omega^2, sqrt(omega), omega^-2, omega^-4`. Sample `j`
/// uses ChaCha stream `j` of `seed`.
fn sample_moments(pairs: &CoordPairs, copies: u32, samples: u64, seed: u64) -> [f64; 5] {
    const CHUNK: u64 = 1024;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<[f64; 5]> = pool::install(|| {
        use rayon::prelude::*;
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = [0.0f64; 5];
                for j in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(j);
                    let mut omega = 1.0f64;
                    for _ in 0..copies {
                        for &(a, b) in &pairs.binary {
                            let u: f64 = rng.gen();
                            omega *= if u < a { b / a } else { (1.0 - b) / (1.0 - a) };
                        }
                        for (mu, nu) in &pairs.general {
                            let x = draw(mu, rng.gen()) as usize;
                            omega *= nu[x] / mu[x];
                        }
                    }
                    let inv2 = (omega * omega).recip();
                    acc[0] += omega;
                    acc[1] += omega * omega;
                    acc[2] += omega.sqrt();
                    acc[3] += inv2;
                    acc[4] += inv2 * inv2;
                }
                acc
            })
            .collect()
    });
    let mut total = [0.0f64; 5];
    for p in parts {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    total
}
