//! Avalanches of the `(N, 0^ω)` lineage, peaks, density columns, long
//! avalanches and the peak-chain fast path.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::config::{check_d, Config};
use crate::error::{KspmError, Result};

/// The `k`-th avalanche: the leftmost strategy from `π(k-1)` plus one grain
/// on column 0 to `π(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvalancheRecord {
    pub k: u64,
    pub fired: Vec<usize>,
    pub peaks: Vec<usize>,
    pub density_col: usize,
    pub max_fired: Option<usize>,
}

impl AvalancheRecord {
    pub fn from_fired(k: u64, fired: Vec<usize>) -> Self {
        AvalancheRecord {
            k,
            peaks: peaks(&fired),
            density_col: density_column(&fired),
            max_fired: fired.iter().copied().max(),
            fired,
        }
    }

    pub fn fires(&self, column: usize) -> bool {
        match self.max_fired {
            Some(m) if column <= m && column >= self.density_col => true,
            _ => self.fired.contains(&column),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.fired.is_empty()
    }

    /// Peaks at or beyond `from`.
    pub fn peaks_from(&self, from: usize) -> Vec<usize> {
        self.peaks.iter().copied().filter(|&p| p >= from).collect()
    }

    /// Whether every column of `[lo, hi]` is fired.
    pub fn fires_all(&self, lo: usize, hi: usize) -> bool {
        match self.max_fired {
            Some(m) => (lo >= self.density_col && hi <= m) || (lo..=hi).all(|c| self.fires(c)),
            None => lo > hi,
        }
    }

    /// No column is fired twice.
    pub fn columns_distinct(&self) -> bool {
        let mut seen = self.fired.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// Checks the local-density contract at every step: a firing left of
    /// the running maximum `r` is the largest unfired column below `r` and
    /// lies within `D-2` of it; a firing right of `r` lies within `D-1`.
    pub fn local_density_holds(&self, d: usize) -> bool {
        let Some(&first) = self.fired.first() else {
            return true;
        };
        let mut fired = vec![false; self.max_fired.unwrap_or(0) + 1];
        fired[first] = true;
        let mut r = first;
        for &s in &self.fired[1..] {
            if s < r {
                let hole = (0..r).rev().find(|&i| !fired[i]);
                if hole != Some(s) || r - s >= d - 1 {
                    return false;
                }
            } else if s > r {
                if s > r + d - 1 {
                    return false;
                }
                r = s;
            } else {
                return false;
            }
            fired[s] = true;
        }
        true
    }
}

/// Columns exceeding every earlier fired column, in firing order.
pub fn peaks(fired: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for &c in fired {
        if out.last().is_none_or(|&m| c > m) {
            out.push(c);
        }
    }
    out
}

/// Smallest `l` such that every column of `[l, max]` is fired; 0 for the
/// empty avalanche.
pub fn density_column(fired: &[usize]) -> usize {
    let Some(&max) = fired.iter().max() else {
        return 0;
    };
    let mut hit = vec![false; max + 1];
    for &c in fired {
        hit[c] = true;
    }
    let mut l = max;
    while l > 0 && hit[l - 1] {
        l -= 1;
    }
    l
}

/// Runs the `k`-th avalanche from `prev_fp = π(k-1)`.
pub fn nth_avalanche(k: u64, prev_fp: &Config) -> Result<(AvalancheRecord, Config)> {
    if let Some(c) = prev_fp.leftmost_fireable() {
        return Err(KspmError::NotAFixedPoint(c));
    }
    let mut cfg = prev_fp.with_grain();
    let strategy = cfg.stabilize();
    Ok((AvalancheRecord::from_fired(k, strategy.0), cfg))
}

/// All avalanches `s^1, …, s^N` of one `(D, N)` run, computed by exact
/// leftmost simulation.
#[derive(Clone, Debug)]
pub struct History {
    d: usize,
    records: Vec<AvalancheRecord>,
    snapshots: Option<Vec<Config>>,
    current: Config,
}

impl History {
    pub fn new(d: usize) -> Result<Self> {
        Ok(History { d, records: Vec::new(), snapshots: None, current: Config::zero(d)? })
    }

    pub fn run(d: usize, n: u64) -> Result<Self> {
        let mut h = History::new(d)?;
        h.extend_to(n);
        Ok(h)
    }

    /// Like [`History::run`], also keeping every `π(k)` for `k = 0..=n`.
    pub fn run_with_snapshots(d: usize, n: u64) -> Result<Self> {
        let mut h = History::new(d)?;
        h.snapshots = Some(vec![h.current.clone()]);
        h.extend_to(n);
        Ok(h)
    }

    pub fn extend_to(&mut self, n: u64) {
        while (self.records.len() as u64) < n {
            let k = self.records.len() as u64 + 1;
            self.current.add_grain();
            let strategy = self.current.stabilize();
            self.records.push(AvalancheRecord::from_fired(k, strategy.0));
            if let Some(s) = self.snapshots.as_mut() {
                s.push(self.current.clone());
            }
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u64 {
        self.records.len() as u64
    }

    /// `s^k` for `1 <= k <= n`.
    pub fn record(&self, k: u64) -> &AvalancheRecord {
        &self.records[(k - 1) as usize]
    }

    pub fn records(&self) -> &[AvalancheRecord] {
        &self.records
    }

    /// `π(n)` for the current horizon.
    pub fn fixed_point(&self) -> &Config {
        &self.current
    }

    /// `π(k)` when snapshots were kept.
    pub fn snapshot(&self, k: u64) -> Option<&Config> {
        self.snapshots.as_ref().and_then(|s| s.get(k as usize))
    }

    /// `𝓛(D, n)` for `n` up to the current horizon.
    pub fn global_density_column(&self, n: u64) -> usize {
        self.records[..n as usize].iter().map(|r| r.density_col).max().unwrap_or(0)
    }

    /// `𝓛(D, k)` for every `k = 0..=n`.
    pub fn global_density_profile(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.records.len() + 1);
        let mut l = 0;
        out.push(0);
        for r in &self.records {
            l = l.max(r.density_col);
            out.push(l);
        }
        out
    }

    /// `Φ(D, n)` for `n` up to the current horizon.
    pub fn long_avalanches(&self, n: u64) -> LongAvalancheSeq {
        let l = self.global_density_column(n);
        let target = l + self.d - 1;
        let indices = self.records[..n as usize].iter().filter(|r| r.fires(target)).map(|r| r.k).collect();
        LongAvalancheSeq { n, l, indices }
    }
}

/// `𝓛(D, N)`.
pub fn global_density_column(d: usize, n: u64) -> Result<usize> {
    let mut engine = FastEngine::new(d)?;
    engine.advance(n);
    Ok(engine.global_density_column())
}

/// `Φ(D, N)`: the avalanches up to `N` firing column `𝓛(D,N) + D - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongAvalancheSeq {
    pub n: u64,
    pub l: usize,
    pub indices: Vec<u64>,
}

impl LongAvalancheSeq {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn long_avalanches(d: usize, n: u64) -> Result<LongAvalancheSeq> {
    Ok(History::run(d, n)?.long_avalanches(n))
}

/// Lowest `j` with `σ_j = D-1` and `from < j <= from + D - 1`.
fn next_peak(fp: &Config, from: usize) -> Option<usize> {
    let top = fp.d() as i64 - 1;
    (from + 1..from + fp.d()).find(|&j| fp.get(j) == top)
}

fn peak_chain(fp: &Config, start: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut at = start;
    while let Some(j) = next_peak(fp, at) {
        out.push(j);
        at = j;
    }
    out
}

/// Peaks at or beyond `l + D - 1` of the avalanche leaving `prev_fp`, read
/// off the fixed point as a chain of columns holding `D - 1`.
///
/// The chain starts next to the virtual peak `l + D - 2`. With `verify`, the
/// avalanche is simulated to confirm that it fires all of `[l, l + D - 2]`.
pub fn fast_avalanche_peaks(prev_fp: &Config, l: usize, verify: bool) -> Result<Vec<usize>> {
    let d = prev_fp.d();
    if verify {
        let (record, _) = nth_avalanche(0, prev_fp)?;
        if !record.fires_all(l, l + d - 2) {
            return Err(KspmError::PreconditionUnverifiable { l, hi: l + d - 2 });
        }
    }
    Ok(peak_chain(prev_fp, l + d - 2))
}

/// Firing order of the avalanche restricted to columns `>= l + D - 1`:
/// each peak followed by the descending run down to the previous peak.
pub fn fast_suffix_order(peaks: &[usize], l: usize, d: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = l + d - 2;
    for &p in peaks {
        out.extend((prev + 1..=p).rev());
        prev = p;
    }
    out
}

/// Suffix update of the fixed point after an avalanche with the given
/// peaks: zero at the maximal peak `M`, one more grain on `(M, M + D - 1]`,
/// unchanged elsewhere from `l + D - 1` on. Columns below `l + D - 1` are
/// copied from `fp` and are not meaningful.
pub fn apply_fast_avalanche(fp: &Config, peaks: &[usize], l: usize) -> Result<Config> {
    if peaks.is_empty() {
        return Err(KspmError::EmptyPeakList);
    }
    Ok(fast_successor(fp, peaks, l))
}

/// Like [`apply_fast_avalanche`], treating an empty peak list as an
/// avalanche that stops at `l + D - 2`.
pub fn fast_successor(fp: &Config, peaks: &[usize], l: usize) -> Config {
    let d = fp.d();
    let mut out = fp.clone();
    let top = match peaks.iter().max() {
        Some(&m) => {
            out.set(m, 0);
            m
        }
        None => l + d - 2,
    };
    for j in top + 1..top + d {
        out.set(j, out.get(j) + 1);
    }
    out
}

/// Similarity of two consecutive long avalanches, with peak lists
/// restricted to columns `>= L + 2(D - 1)`.
pub fn check_similarity(pk: &[usize], pk1: &[usize], l: usize, d: usize) -> bool {
    let lo = l + 2 * (d - 1);
    let mut left: Vec<usize> = pk.iter().copied().filter(|&p| p >= lo).collect();
    let Some(max) = left.iter().copied().max() else {
        return true;
    };
    left.retain(|&p| p != max);
    left.sort_unstable();
    let mut right: Vec<usize> = pk1.iter().copied().filter(|&p| p >= lo && p < max).collect();
    right.sort_unstable();
    right.dedup();
    left == right
}

/// Summary of one avalanche computed by [`FastEngine`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastStep {
    pub k: u64,
    pub peaks: Vec<usize>,
    pub density_col: usize,
    pub max_fired: Option<usize>,
    /// Firings simulated one by one before the peak chain took over.
    pub simulated: usize,
    /// Whether the peak chain was used.
    pub chained: bool,
}

/// Incremental `π(k)` computation.
///
/// Each avalanche is simulated leftmost until its running maximum `r` has
/// `[r - D + 2, r]` fired and no column `<= r` is fireable. From there the
/// remaining firings are the peak chain of the previous fixed point, and the
/// result is written in `O(D)`.
#[derive(Clone, Debug)]
pub struct FastEngine {
    d: usize,
    cfg: Config,
    k: u64,
    stamp: Vec<u64>,
    global_l: usize,
}

impl FastEngine {
    pub fn new(d: usize) -> Result<Self> {
        check_d(d)?;
        Ok(FastEngine { d, cfg: Config::zero(d)?, k: 0, stamp: Vec::new(), global_l: 0 })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `π(k)`.
    pub fn config(&self) -> &Config {
        &self.cfg
    }

    /// `𝓛(D, k)`.
    pub fn global_density_column(&self) -> usize {
        self.global_l
    }

    pub fn advance(&mut self, n: u64) {
        while self.k < n {
            self.step();
        }
    }

    fn mark(&mut self, c: usize) {
        if c >= self.stamp.len() {
            self.stamp.resize(c + 1 + self.stamp.len() / 2, 0);
        }
        self.stamp[c] = self.k;
    }

    fn is_marked(&self, c: usize) -> bool {
        self.stamp.get(c) == Some(&self.k)
    }

    pub fn step(&mut self) -> FastStep {
        self.k += 1;
        let d = self.d;
        let di = d as i64;
        self.cfg.add_grain();

        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        if self.cfg.get(0) >= di {
            heap.push(Reverse(0));
        }
        let mut peaks = Vec::new();
        let mut r: Option<usize> = None;
        let mut simulated = 0usize;
        let mut chained = false;

        loop {
            while let Some(&Reverse(c)) = heap.peek() {
                if self.cfg.get(c) >= di {
                    break;
                }
                heap.pop();
            }
            if let Some(rr) = r {
                let quiet_left = heap.peek().is_none_or(|&Reverse(c)| c > rr);
                if quiet_left && rr + 2 >= d && (rr + 2 - d..=rr).all(|c| self.is_marked(c)) {
                    // The rest of the avalanche is the peak chain of π(k-1).
                    // Columns (r, r + D - 1] carry exactly one extra grain.
                    for j in rr + 1..rr + d {
                        self.cfg.set(j, self.cfg.get(j) - 1);
                    }
                    let chain = peak_chain(&self.cfg, rr);
                    let top = match chain.last() {
                        Some(&m) => {
                            self.cfg.set(m, 0);
                            self.cfg.set(rr, self.cfg.get(rr) + di - 1);
                            m
                        }
                        None => rr,
                    };
                    for j in top + 1..top + d {
                        self.cfg.set(j, self.cfg.get(j) + 1);
                    }
                    chained = true;
                    peaks.extend(chain);
                    break;
                }
            }
            let Some(Reverse(c)) = heap.pop() else {
                break;
            };
            self.cfg.apply_rule(c);
            self.mark(c);
            simulated += 1;
            if r.is_none_or(|m| c > m) {
                r = Some(c);
                peaks.push(c);
            }
            if self.cfg.get(c) >= di {
                heap.push(Reverse(c));
            }
            if c > 0 && self.cfg.get(c - 1) >= di {
                heap.push(Reverse(c - 1));
            }
            if self.cfg.get(c + d - 1) >= di {
                heap.push(Reverse(c + d - 1));
            }
        }

        let (density_col, max_fired) = match r {
            None => (0, None),
            Some(rr) => {
                let mut l = rr;
                while l > 0 && self.is_marked(l - 1) {
                    l -= 1;
                }
                (l, Some(peaks.last().copied().unwrap_or(rr)))
            }
        };
        self.global_l = self.global_l.max(density_col);
        FastStep { k: self.k, peaks, density_col, max_fired, simulated, chained }
    }
}
