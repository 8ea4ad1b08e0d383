use std::sync::OnceLock;

/// Runs `f` on a pool sized by `BERNLAB_THREADS`, or on rayon's global pool.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    let pool = POOL.get_or_init(|| {
        let n: usize = std::env::var("BERNLAB_THREADS").ok()?.trim().parse().ok()?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
    });
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

/// Sums `f(i)` for `i < n` in fixed chunks, so the float result does not
/// depend on the number of threads.
pub fn ordered_sum(n: u64, chunk: u64, f: impl Fn(u64) -> f64 + Sync) -> f64 {
    use rayon::prelude::*;
    let chunks = n.div_ceil(chunk.max(1));
    let parts: Vec<f64> = install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = c * chunk;
                let hi = (lo + chunk).min(n);
                (lo..hi).map(&f).sum::<f64>()
            })
            .collect()
    });
    parts.iter().sum()
}
