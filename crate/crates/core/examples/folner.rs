//! A cocycle on Z with prescribed logarithmic growth, built from Folner
//! intervals.

use bernlab::cocycles::folner::build_folner;
use bernlab::cocycles::norm_sq;
use bernlab::group::{integer_enumeration, Element};
use bernlab::marginals::GrowthBound;
use bernlab::num::{int, rat};

fn main() -> bernlab::Result<()> {
    let growth = GrowthBound::Log { alpha: int(1) };
    let f = build_folner(&growth, &rat(1, 4), 6, 200)?;
    println!("{}", f.describe());
    let spec = f.spec(rat(1, 4), rat(1, 4))?;
    for k in [1u64, 2, 5, 10, 50, 100, 200] {
        let g = integer_enumeration(k);
        let n = norm_sq(&spec, &Element::Int(g))?.value().sqrt();
        println!("k = {k:>3}  g_k = {g:>4}  |c| = {n:.4}  phi = {:.4}", growth.phi(k));
    }
    Ok(())
}
