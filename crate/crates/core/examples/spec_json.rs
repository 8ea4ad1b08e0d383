//! Writing an action as JSON, reading it back and fingerprinting it.

use bernlab::marginals::ActionSpec;
use bernlab::presets::{preset, PRESETS};
use bernlab::report::spec_digest;

fn main() -> bernlab::Result<()> {
    for (name, about) in PRESETS {
        println!("{name:>22}  {about}");
    }
    let spec = preset("explicit-z(1/2)")?;
    let json = spec.to_json();
    println!("\n{json}");
    let back = ActionSpec::from_json(&json)?;
    assert_eq!(back, spec);
    println!("{}", spec_digest(&back));
    Ok(())
}
