//! Monte Carlo estimates of the Radon-Nikodym moments against the exact
//! product formulas.

use bernlab::criteria::montecarlo::mc_omega;
use bernlab::presets::preset;

fn main() -> bernlab::Result<()> {
    for (name, g) in [("f2-wsplit", "a b^-1 a"), ("free-product(1/2)", "a^2 b"), ("explicit-z-sqrt6", "3"), ("folner-z(1)", "-5")] {
        let spec = preset(name)?;
        let g = spec.group.parse(g)?;
        let e = mc_omega(&spec, &g, None, 100_000, 42)?;
        println!(
            "{name:>18} g = {g:<10} E[w] = {:.4} +- {:.4}  E[sqrt w] = {:.4} (exact {:.4})  max z = {:.2}",
            e.omega.mean, e.omega.se, e.sqrt_omega.mean, e.hellinger_window, e.max_z()
        );
    }
    Ok(())
}
