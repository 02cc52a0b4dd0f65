//! Deterministic replication scheduling.
//!
//! Replications are grouped in fixed-size chunks; each chunk is reduced
//! sequentially and chunk results are merged in chunk order. The output is
//! therefore a function of `(reps, seed)` only, whatever the worker count.

use rayon::prelude::*;

use crate::stats::Moments;

/// Environment variable selecting the worker count.
pub const THREADS_ENV: &str = "PICKANDS_THREADS";

const CHUNK: usize = 512;

/// Worker count requested through `PICKANDS_THREADS`, if any.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Run `f` inside a pool of `threads` workers (rayon's default when `None`).
pub fn install<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Run `reps` replications, each writing `n_stats` values, and return the
/// moments of every statistic. `init` builds per-worker scratch space.
pub fn replicate<S, I, F>(reps: usize, n_stats: usize, init: I, f: F) -> Vec<Moments>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64, &mut [f64]) + Sync + Send,
{
    let n_chunks = reps.div_ceil(CHUNK);
    let partials: Vec<Vec<Moments>> = (0..n_chunks)
        .into_par_iter()
        .map_init(&init, |scratch, c| {
            let mut acc = vec![Moments::default(); n_stats];
            let mut out = vec![0.0; n_stats];
            for r in c * CHUNK..reps.min((c + 1) * CHUNK) {
                f(scratch, r as u64, &mut out);
                for (a, &v) in acc.iter_mut().zip(&out) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Moments::default(); n_stats];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}

/// Run `reps` replications and collect their outputs in replication order.
pub fn replicate_collect<T, S, I, F>(reps: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .with_min_len(CHUNK)
        .map_init(&init, |s, r| f(s, r as u64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run() -> Vec<Moments> {
        replicate(5_000, 2, || (), |_, r, out| {
            let x = ((r * 2_654_435_761) % 1_000) as f64 / 1_000.0;
            out[0] = x;
            out[1] = x * x;
        })
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let a = install(Some(1), run);
        let b = install(Some(3), run);
        assert_eq!(a, b);
        let ca = install(Some(1), || replicate_collect(1_000, || (), |_, r| r * 3));
        let cb = install(Some(4), || replicate_collect(1_000, || (), |_, r| r * 3));
        assert_eq!(ca, cb);
        assert_eq!(ca[999], 2_997);
    }
}
