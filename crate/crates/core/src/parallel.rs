//! Order-preserving parallel map over index ranges.
//!
//! Work is split into contiguous chunks, one per worker; the per-index
//! results are concatenated in index order, so the output (and anything
//! folded from it sequentially) is bitwise independent of the thread count.

use std::sync::atomic::{AtomicUsize, Ordering};

static THREAD_CAP: AtomicUsize = AtomicUsize::new(usize::MAX);

/// Number of worker threads: `NITSCHE_FEM_THREADS` caps the available
/// parallelism; `0` (or `1`) means serial.
pub fn worker_threads() -> usize {
    let cap = {
        let cached = THREAD_CAP.load(Ordering::Relaxed);
        if cached != usize::MAX {
            cached
        } else {
            let parsed = std::env::var("NITSCHE_FEM_THREADS")
                .ok()
                .and_then(|v| v.parse::<usize>().ok());
            let cap = match parsed {
                Some(0) => 1,
                Some(n) => n,
                None => usize::MAX - 1,
            };
            THREAD_CAP.store(cap, Ordering::Relaxed);
            cap
        }
    };
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    hw.min(cap).max(1)
}

/// Maps `f` over `0..n`, in parallel when worthwhile, preserving index order.
pub fn par_map<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let threads = worker_threads().min(n.max(1));
    if threads <= 1 || n < 64 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    let mut out = Vec::with_capacity(n);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(threads);
        for t in 0..threads {
            let lo = t * chunk;
            let hi = ((t + 1) * chunk).min(n);
            if lo >= hi {
                break;
            }
            let f = &f;
            handles.push(scope.spawn(move || (lo..hi).map(f).collect::<Vec<R>>()));
        }
        for handle in handles {
            out.extend(handle.join().expect("worker thread panicked"));
        }
    });
    out
}
