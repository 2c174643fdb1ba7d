//! Types of long avalanches on an interval and traces read off a simulation.

use serde::{Deserialize, Serialize};

use super::{Letter, TraceWord};
use crate::avalanche::History;
use crate::error::{KspmError, Result};

/// Types on `I_i` are defined once `i(D-1) >= 𝓛 + TYPE_ZONE_INTERVALS·(D-1)`.
pub const TYPE_ZONE_INTERVALS: usize = 2;

/// Transduction from `I_i` to `I_{i+1}` is checked once the columns of
/// `I_{i+1}` exceed `𝓛 + TRANSDUCTION_ZONE_INTERVALS·(D-1)`.
pub const TRANSDUCTION_ZONE_INTERVALS: usize = 3;

/// First column of `I_i`.
pub fn interval_start(i: usize, d: usize) -> usize {
    i * (d - 1)
}

/// Smallest `i` whose types are defined for density column `l`.
pub fn type_zone_start(l: usize, d: usize) -> usize {
    (l + TYPE_ZONE_INTERVALS * (d - 1)).div_ceil(d - 1)
}

/// Smallest `i` such that `I_{i+1}` lies strictly beyond
/// `l + TRANSDUCTION_ZONE_INTERVALS·(D-1)`.
pub fn transduction_zone_start(l: usize, d: usize) -> usize {
    let bound = l + TRANSDUCTION_ZONE_INTERVALS * (d - 1);
    // (i + 1)(D - 1) > bound
    let i1 = bound / (d - 1) + 1;
    (i1 - 1).max(type_zone_start(l, d))
}

/// `α(i, k)` from the peaks of a long avalanche: the position modulo `D-1`
/// of the largest peak below `(i+1)(D-1)`, or `None` (the empty type) when
/// that peak is left of `I_i`.
pub fn avalanche_type(peaks: &[usize], i: usize, d: usize) -> Option<Letter> {
    let end = interval_start(i + 1, d);
    let below = peaks.partition_point(|&p| p < end);
    let p = *peaks[..below].last()?;
    if p >= interval_start(i, d) {
        Some((p % (d - 1)) as Letter)
    } else {
        None
    }
}

/// A maximal run of long avalanches sharing one non-empty type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfluentRun {
    pub letter: Letter,
    /// Position of the first avalanche of the run inside `Φ(D, N)`.
    pub start: usize,
    pub len: usize,
}

/// The trace up to `N` on `I_i` with the data used to build it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub d: usize,
    pub n: u64,
    pub i: usize,
    /// `𝓛(D, N)`.
    pub l: usize,
    pub word: TraceWord,
    /// Type of every long avalanche, in order.
    pub types: Vec<Option<Letter>>,
    pub runs: Vec<InfluentRun>,
    /// Length of the last influent subsequence, 0 when the trace is empty.
    pub y: usize,
    /// Whether the last influent subsequence reaches the last long
    /// avalanche, so that later avalanches could still extend it.
    pub open: bool,
}

impl Trace {
    /// Builds the trace on `I_i` up to `n` from a simulated history.
    /// With `enforce_zone`, intervals left of the type zone are rejected.
    pub fn from_history(h: &History, n: u64, i: usize, enforce_zone: bool) -> Result<Trace> {
        let d = h.d();
        let phi = h.long_avalanches(n);
        let start = interval_start(i, d);
        let bound = phi.l + TYPE_ZONE_INTERVALS * (d - 1);
        if enforce_zone && start < bound {
            return Err(KspmError::IntervalTooFarLeft { i, start, bound });
        }
        let types: Vec<Option<Letter>> =
            phi.indices.iter().map(|&k| avalanche_type(&h.record(k).peaks, i, d)).collect();
        Ok(Trace::from_types(d, n, i, phi.l, types))
    }

    pub fn from_types(d: usize, n: u64, i: usize, l: usize, types: Vec<Option<Letter>>) -> Trace {
        let mut runs: Vec<InfluentRun> = Vec::new();
        let mut pos = 0;
        while pos < types.len() {
            let mut end = pos + 1;
            while end < types.len() && types[end] == types[pos] {
                end += 1;
            }
            if let Some(letter) = types[pos] {
                runs.push(InfluentRun { letter, start: pos, len: end - pos });
            }
            pos = end;
        }
        let word = TraceWord { letters: runs.iter().map(|r| r.letter).collect() };
        let (y, open) = match runs.last() {
            Some(r) => (r.len, r.start + r.len == types.len()),
            None => (0, false),
        };
        Trace { d, n, i, l, word, types, runs, y, open }
    }
}

/// Trace up to `n` on `I_i`, simulating the `n` avalanches.
pub fn trace_from_simulation(d: usize, n: u64, i: usize) -> Result<Trace> {
    let h = History::run(d, n)?;
    Trace::from_history(&h, n, i, true)
}

/// Outcome of comparing `t(trace on I_i)` with the trace on `I_{i+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Agreement {
    Exact,
    /// The traces differ only through the still-open last subsequence on
    /// `I_i`: the simulated word lies between `t(u')` and `t(u)`, where `u'`
    /// drops the open letter.
    OpenSuffix,
    Mismatch,
}

/// Compares a transduced trace with the simulated trace one interval right.
pub fn compare_transduced(
    transduced: &TraceWord,
    without_last: &TraceWord,
    simulated: &TraceWord,
    open: bool,
) -> Agreement {
    if transduced == simulated {
        Agreement::Exact
    } else if open && without_last.is_prefix_of(simulated) && simulated.is_prefix_of(transduced) {
        Agreement::OpenSuffix
    } else {
        Agreement::Mismatch
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn types_from_peaks() {
        // D = 4, I_4 = [12, 14].
        assert_eq!(avalanche_type(&[0, 3, 13, 16], 4, 4), Some(1));
        assert_eq!(avalanche_type(&[0, 3, 11], 4, 4), None);
        assert_eq!(avalanche_type(&[0, 3, 11, 15], 4, 4), None);
        assert_eq!(avalanche_type(&[12], 4, 4), Some(0));
        assert_eq!(avalanche_type(&[], 4, 4), None);
    }

    #[test]
    fn runs_and_open_flag() {
        let t = Trace::from_types(4, 0, 4, 6, vec![None, Some(0), Some(0), None, Some(1), Some(1)]);
        assert_eq!(t.word.letters, vec![0, 1]);
        assert_eq!(t.y, 2);
        assert!(t.open);
        let t = Trace::from_types(4, 0, 4, 6, vec![Some(2), None]);
        assert_eq!((t.y, t.open), (1, false));
        let t = Trace::from_types(4, 0, 4, 6, vec![Some(0), None, Some(0)]);
        assert_eq!(t.word.letters, vec![0, 0]);
    }

    #[test]
    fn zones() {
        assert_eq!(type_zone_start(6, 4), 4);
        assert_eq!(type_zone_start(7, 4), 5);
        assert_eq!(transduction_zone_start(6, 4), 5);
        assert_eq!(transduction_zone_start(0, 3), 3);
    }

    #[test]
    fn d4_trace_on_i4() {
        let t = trace_from_simulation(4, 500, 4).unwrap();
        assert_eq!(t.l, 6);
        assert_eq!(t.types.len(), 23);
        assert_eq!(t.word.render(4), "0120120");
        let types: String = t.types.iter().map(|x| x.map_or('ε', |l| char::from(b'0' + l))).collect();
        assert_eq!(types, "εεε0ε1ε2ε00εε1122ε000εε");
    }

    #[test]
    fn too_far_left_is_rejected() {
        let err = trace_from_simulation(4, 500, 3).unwrap_err();
        assert_eq!(err, KspmError::IntervalTooFarLeft { i: 3, start: 9, bound: 12 });
    }

    #[test]
    fn comparison_rules() {
        let w = |v: &[u8]| TraceWord::from(v.to_vec());
        assert_eq!(compare_transduced(&w(&[0, 1]), &w(&[0]), &w(&[0, 1]), false), Agreement::Exact);
        assert_eq!(compare_transduced(&w(&[0, 1]), &w(&[0]), &w(&[0]), true), Agreement::OpenSuffix);
        assert_eq!(compare_transduced(&w(&[0, 1]), &w(&[0]), &w(&[0]), false), Agreement::Mismatch);
        assert_eq!(compare_transduced(&w(&[0, 1]), &w(&[0]), &w(&[1]), true), Agreement::Mismatch);
    }
}
