//! The bump cocycle on Z and the dissipative action of F2 it induces.

use bernlab::cocycles::bump::build_special;
use bernlab::cocycles::norm_sq_tol;
use bernlab::criteria::{classify_conservativity, CriterionOptions};
use bernlab::num::{int, to_f64};
use bernlab::presets::{dissipative_threshold, preset};

fn main() -> bernlab::Result<()> {
    let d = int(36);
    let bc = build_special(&d)?;
    println!("D = 36, delta = {}, threshold 32 log 3 = {:.3}", bc.delta(), dissipative_threshold());
    for k in [1i64, 8, 32, 128] {
        let v = bc.gamma_norm_sq(k, 1e-6 * (k as f64).powf(1.5))?;
        println!("  |gamma_{k}|^2 = {:>12.3}  >= D k^1.5 = {:>10.1}", v.value, to_f64(&d) * (k as f64).powf(1.5));
    }
    let spec = preset("f2-dissipative(36)")?;
    for w in ["a", "a b", "a b^-1 a^2", "b^3 a^-2"] {
        let g = spec.group.parse(w)?;
        let n = norm_sq_tol(&spec, &g, 1e-6)?;
        println!("  {w:>10}: |c_g|^2 = {:.3} >= {:.3}", n.value(), 36.0 / 16.0 * g.len() as f64);
    }
    let v = classify_conservativity(&spec, &CriterionOptions::default())?;
    println!("verdict: {:?}", v.verdict);
    Ok(())
}
