//! Nonamenability seen through the Hellinger integrals of the generators.

use bernlab::criteria::products::kesten_check;
use bernlab::presets::preset;

fn main() -> bernlab::Result<()> {
    for name in ["f2-wsplit", "f2-wsplit-512", "pmp-f2"] {
        let k = kesten_check(&preset(name)?)?;
        println!("{name}: sum >= {:.6} vs {:.6}, nonamenable: {}", k.sum_lower, k.kesten_norm, k.nonamenable);
        for r in &k.rows {
            println!("  {:>5}  |c_s|^2 = {:.6}  H = {:.6}", r.generator, r.norm_sq, r.hellinger.value);
        }
    }
    Ok(())
}
