//! Conservativity verdicts across diagonal powers.

use bernlab::criteria::{classify_conservativity, recheck, CriterionOptions};
use bernlab::presets::preset;

fn main() -> bernlab::Result<()> {
    let opts = CriterionOptions::default();
    for (name, powers) in [("explicit-z-sqrt6", &[1u32, 10, 72, 73][..]), ("f2-wsplit", &[1, 220][..]), ("f2-dissipative(36)", &[1][..])] {
        for &m in powers {
            let spec = preset(name)?.with_multiplicity(m)?;
            let v = classify_conservativity(&spec, &opts)?;
            recheck(&v)?;
            let kind = v.evidence.as_ref().map(|e| serde_json::to_value(e).unwrap()["kind"].clone());
            println!("{name:>20} m = {m:>3}: {:?} ({})", v.verdict, kind.map_or("no evidence".into(), |k| k.to_string()));
            for n in &v.notes {
                println!("{:>27} {n}", "");
            }
        }
    }
    Ok(())
}
