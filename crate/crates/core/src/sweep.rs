//! Order-preserving parallel map over independent grid points.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates `f` at every index on a pool of `workers` threads.
///
/// Results come back in index order. After the first failure remaining points
/// are skipped; the reported error is the failing point with the lowest index,
/// tagged with that index.
pub fn parallel_map<T, F>(len: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if workers == 0 {
        return Err(Error::config("workers", "must be at least 1"));
    }
    let stop = AtomicBool::new(false);
    let run = || {
        (0..len)
            .into_par_iter()
            .map(|i| {
                if stop.load(Ordering::Relaxed) {
                    return None;
                }
                let r = f(i);
                if r.is_err() {
                    stop.store(true, Ordering::Relaxed);
                }
                Some(r)
            })
            .collect::<Vec<_>>()
    };
    if workers == 1 {
        return (0..len).map(|i| f(i).map_err(|e| e.at_point(i))).collect();
    }
    let outcomes = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
        .install(run);

    let mut out = Vec::with_capacity(len);
    let mut first_err = None;
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Some(Ok(v)) if first_err.is_none() => out.push(v),
            Some(Err(e)) if first_err.is_none() => first_err = Some(e.at_point(i)),
            _ => {}
        }
    }
    match first_err {
        Some(e) => Err(e),
        None if out.len() == len => Ok(out),
        None => Err(Error::Numerical("sweep stopped without an error".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for workers in [1, 3] {
            let v = parallel_map(50, workers, |i| Ok(i * i)).unwrap();
            assert_eq!(v, (0..50).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn error_carries_index() {
        for workers in [1, 2] {
            let err = parallel_map(20, workers, |i| {
                if i == 7 {
                    Err(Error::Numerical("boom".into()))
                } else {
                    Ok(i)
                }
            })
            .unwrap_err();
            assert!(matches!(err, Error::GridPoint { index: 7, .. }), "{err}");
        }
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(parallel_map(3, 0, Ok).unwrap_err().is_config());
    }
}
