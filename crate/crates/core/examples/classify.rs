//! Krieger types and stable types of free-product Bernoulli actions.

use bernlab::marginals::{measures_from_ab_exp, measures_from_lambda};
use bernlab::num::{int, rat};
use bernlab::presets::preset;
use bernlab::typeclass::{classify_action, classify_measures, stable_params, stable_type_set};

fn main() -> bernlab::Result<()> {
    for l in [rat(1, 2), rat(1, 3), rat(4, 9)] {
        let (m0, m1) = measures_from_lambda(&l)?;
        let c = classify_measures(&m0, &m1)?;
        let s = stable_type_set(&stable_params(&m0, &m1)?)?;
        let types: Vec<String> = s.types.iter().map(|t| t.to_string()).collect();
        println!("lambda = {l}: {}, stable types {{{}}}", c.kind, types.join(", "));
    }
    let (m0, m1) = measures_from_ab_exp(&int(2), &rat(3, 2))?;
    let p = stable_params(&m0, &m1)?;
    println!("e^a = 2, e^b = 3/2: mu0 = {:?}, recovered a = {}, b = {}", m0.weights_f64(), p.a().unwrap().value, p.b().unwrap().value);
    for name in ["f2-wsplit", "f2-wsplit-512"] {
        let c = classify_action(&preset(name)?, None)?;
        println!("{name}: {} with L = {}, rule: {}", c.kind, c.l, c.stable_types.rule);
    }
    Ok(())
}
