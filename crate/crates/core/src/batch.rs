//! Checking many histories at once. With the `parallel` feature the work is
//! spread over the rayon pool; the `_sequential` variants always run on the
//! calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::history::History;
use crate::membership::{check_mvc_opacity, check_mvc_opacity_bruteforce, CheckOptions, Verdict};

/// Applies `f` to every item, in parallel when available. Output order
/// matches input order.
pub fn map_all<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_all_sequential(items, f)
    }
}

pub fn map_all_sequential<T, U, F: Fn(&T) -> U>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(f).collect()
}

pub fn classify_all(histories: &[History]) -> Vec<Verdict> {
    map_all(histories, check_mvc_opacity)
}

pub fn classify_all_sequential(histories: &[History]) -> Vec<Verdict> {
    map_all_sequential(histories, check_mvc_opacity)
}

/// Graph checker and brute-force search disagree on this history.
#[derive(Clone, Debug)]
pub struct Disagreement {
    pub index: usize,
    pub graph: bool,
    pub oracle: bool,
}

fn compare(i: usize, h: &History, opts: &CheckOptions) -> Option<Disagreement> {
    let graph = check_mvc_opacity(h).member;
    // Oversized or cancelled searches are not disagreements.
    let oracle = check_mvc_opacity_bruteforce(h, opts).ok()?.member;
    (graph != oracle).then_some(Disagreement { index: i, graph, oracle })
}

/// Runs both membership procedures on every history and lists the
/// disagreements.
pub fn cross_check(histories: &[History], opts: &CheckOptions) -> Vec<Disagreement> {
    let indexed: Vec<(usize, &History)> = histories.iter().enumerate().collect();
    map_all(&indexed, |(i, h)| compare(*i, h, opts)).into_iter().flatten().collect()
}

pub fn cross_check_sequential(histories: &[History], opts: &CheckOptions) -> Vec<Disagreement> {
    histories.iter().enumerate().filter_map(|(i, h)| compare(i, h, opts)).collect()
}
