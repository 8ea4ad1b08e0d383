//! Runs the Hellinger and negative-moment sandwich on a grid.

use bernlab::group::Element;
use bernlab::presets::preset;
use bernlab::verify::verify_bounds;

fn main() -> bernlab::Result<()> {
    for name in ["f2-wsplit", "f2-wsplit-512", "explicit-z-sqrt6"] {
        let spec = preset(name)?;
        let grid: Vec<Element> = if spec.group.is_integers() { (1..=94).map(Element::Int).collect() } else { spec.group.ball(3) };
        let r = verify_bounds(&spec, Some(&grid))?;
        let tightest = r.elements.iter().flat_map(|e| e.checks.iter().map(move |c| (c.margin, c.name, &e.element))).filter(|c| c.1 != "norm_matches_oracle").min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
        println!(
            "{name:>18}: {} points, {} checks, {} violations; tightest {} at {} (margin {:.3e})",
            r.grid_size, r.checks_run, r.violations, tightest.1, tightest.2, tightest.0
        );
    }
    Ok(())
}
