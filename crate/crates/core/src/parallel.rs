//! Minimal deterministic worker pool.
//!
//! Independent work items (Granger pair tests, search trials) are mapped in
//! parallel, but results are always assembled in item order, so output never
//! depends on scheduling. The worker count honors the `TSF_THREADS`
//! environment variable; `0` or unset means one worker per available core.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Effective worker count for `n_items` work items.
pub fn worker_count(n_items: usize) -> usize {
    let configured = std::env::var("TSF_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    let auto = std::thread::available_parallelism().map_or(1, |n| n.get());
    let threads = if configured == 0 { auto } else { configured };
    threads.max(1).min(n_items.max(1))
}

/// Maps `f` over `0..n`, in parallel, returning results in index order.
pub fn par_map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let workers = worker_count(n);
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let out = f(i);
                *slots[i].lock().unwrap() = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled slot"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let out = par_map_indexed(100, |i| i * i);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(*v, i * i);
        }
    }

    #[test]
    fn empty_input() {
        let out: Vec<usize> = par_map_indexed(0, |i| i);
        assert!(out.is_empty());
    }
}
