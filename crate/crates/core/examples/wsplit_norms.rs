//! Exact cocycle norms of the W-split action on F2, checked against direct
//! summation, and the growth of the worst case per sphere.

use bernlab::cocycles::{norm_sq, norm_sq_bruteforce};
use bernlab::group::Element;
use bernlab::num::format_rational;
use bernlab::presets::preset;

fn main() -> bernlab::Result<()> {
    let spec = preset("f2-wsplit")?;
    for w in ["a", "b", "a b^-1", "a^-1 b", "a b^-1 a", "a^3 b^-2 a b^-1"] {
        let g = spec.group.parse(w)?;
        let closed = norm_sq(&spec, &g)?;
        let summed = norm_sq_bruteforce(&spec, &g, g.len() as u32)?;
        println!(
            "{w:>18}  |c_g|^2 = {:>6}  summed = {:>6}  descending changes = {}",
            format_rational(closed.exact().unwrap()),
            format_rational(summed.partial.exact().unwrap()),
            g.as_word().unwrap().descending_sign_changes(),
        );
    }
    println!("\nradius  min |c_g|^2  max |c_g|^2");
    for n in 1..=8 {
        let vals: Vec<f64> =
            spec.group.sphere(n).iter().map(|g: &Element| norm_sq(&spec, g).unwrap().value()).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        println!("{n:>6}  {lo:>11.4}  {hi:>11.4}");
    }
    Ok(())
}
