//! Fixed-point shape prediction: wave suffixes from regular traces, the
//! wave-onset matcher, the `D = 3` x-sequence and the density bound.

use serde::{Deserialize, Serialize};

use crate::avalanche::FastEngine;
use crate::config::{check_d, pi_of_n, shot_vector, Config};
use crate::error::{KspmError, Result};
use crate::transducer::trace::TRANSDUCTION_ZONE_INTERVALS;
use crate::transducer::TraceWord;

/// The shape `(0, …, D-2)^x (0, …, p)` of a regular trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularForm {
    pub x: usize,
    pub p: usize,
}

impl RegularForm {
    pub fn with_y(self, d: usize, y: usize) -> Result<RegularTraceSpec> {
        let spec = RegularTraceSpec { d, x: self.x, p: self.p, y };
        spec.validate()?;
        Ok(spec)
    }
}

/// A regular trace together with the length `y` of its last influent
/// subsequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularTraceSpec {
    pub d: usize,
    pub x: usize,
    pub p: usize,
    pub y: usize,
}

impl RegularTraceSpec {
    pub fn validate(&self) -> Result<()> {
        check_d(self.d)?;
        if self.p > self.d - 2 {
            return Err(KspmError::InvalidSpec(format!("p = {} exceeds D - 2 = {}", self.p, self.d - 2)));
        }
        if self.y == 0 || self.y > self.x + 1 {
            return Err(KspmError::InvalidSpec(format!("y = {} outside [1, x + 1 = {}]", self.y, self.x + 1)));
        }
        Ok(())
    }
}

/// Matches `u` against `(0, …, D-2)^x (0, …, p)`; the empty word does not
/// match.
pub fn parse_regular_trace(u: &TraceWord, d: usize) -> Option<RegularForm> {
    let n = u.len();
    if n == 0 || d < 2 {
        return None;
    }
    let regular = u.letters.iter().enumerate().all(|(i, &l)| l as usize == i % (d - 1));
    regular.then(|| RegularForm { x: (n - 1) / (d - 1), p: (n - 1) % (d - 1) })
}

fn descending(from: usize) -> impl Iterator<Item = i64> {
    (1..=from as i64).rev()
}

/// The fixed point from column `(i+1)(D-1)` on, for a regular trace on
/// `I_i`, without its zero tail.
pub fn wave_suffix(spec: &RegularTraceSpec) -> Result<Vec<i64>> {
    spec.validate()?;
    let d = spec.d;
    let RegularTraceSpec { x, p, y, .. } = *spec;
    let mut out: Vec<i64> = Vec::new();
    if y < x + 1 {
        out.extend(descending(p));
        for _ in 0..x - y {
            out.extend(descending(d - 1));
        }
        out.push(0);
        for _ in 0..y {
            out.extend(descending(d - 1));
        }
    } else {
        out.extend(descending(p + 1));
        for _ in 0..x {
            out.extend(descending(d - 1));
        }
    }
    while out.last() == Some(&0) {
        out.pop();
    }
    Ok(out)
}

/// Smallest `i` such that the columns of `I_i` all exceed
/// `l + TRANSDUCTION_ZONE_INTERVALS·(D-1)`.
pub fn wave_zone_start(l: usize, d: usize) -> usize {
    (l + TRANSDUCTION_ZONE_INTERVALS * (d - 1)) / (d - 1) + 1
}

/// `fp` from column `from` on, without its zero tail.
pub fn suffix_from(fp: &Config, from: usize) -> &[i64] {
    let diffs = fp.diffs();
    &diffs[from.min(diffs.len())..]
}

/// Smallest `n` such that `fp` from `n` on reads
/// `(D-1, …, 1)^* [0] (D-1, …, 1)^* 0^ω`.
pub fn wave_onset_column(fp: &Config) -> usize {
    let d = fp.d();
    let s = fp.diffs();
    let block: Vec<i64> = descending(d - 1).collect();
    let eat_blocks = |mut pos: usize| {
        while pos >= d - 1 && s[pos - (d - 1)..pos] == block[..] {
            pos -= d - 1;
        }
        pos
    };
    let mut pos = eat_blocks(s.len());
    if pos > 0 && s[pos - 1] == 0 {
        pos = eat_blocks(pos - 1);
    }
    pos
}

/// Brute-force version of [`wave_onset_column`] trying every suffix.
pub fn wave_onset_column_naive(fp: &Config) -> usize {
    let d = fp.d();
    let s = fp.diffs();
    let block: Vec<i64> = descending(d - 1).collect();
    let matches = |from: usize| {
        let rest = &s[from..];
        // Try every split point for the single optional zero.
        let is_blocks = |w: &[i64]| w.len().is_multiple_of(d - 1) && w.chunks(d - 1).all(|c| c == &block[..]);
        if is_blocks(rest) {
            return true;
        }
        (0..rest.len()).any(|z| rest[z] == 0 && is_blocks(&rest[..z]) && is_blocks(&rest[z + 1..]))
    };
    (0..=s.len()).find(|&n| matches(n)).unwrap_or(s.len())
}

/// `x_0, x_1, …` for `D = 3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XSequence {
    pub values: Vec<i64>,
}

impl XSequence {
    pub fn get(&self, i: usize) -> i64 {
        self.values.get(i).copied().unwrap_or(0)
    }

    /// `x_{i+1-k} = (-2)^k x_{i+1} + Σ_{r<k} (-2)^{k-1-r} σ_{i-r}` for all
    /// `0 <= k <= i + 1` with `i` below `limit`.
    pub fn telescoping_holds(&self, sigma: &Config, limit: usize) -> bool {
        for i in 0..limit {
            let mut pow = 1i128;
            let mut acc = 0i128;
            for k in 0..=i + 1 {
                let lhs = self.get(i + 1 - k) as i128;
                if lhs != pow * self.get(i + 1) as i128 + acc {
                    return false;
                }
                if k == i + 1 {
                    break;
                }
                // Extend the sum from k to k + 1 terms.
                acc = -2 * acc + sigma.get(i - k) as i128;
                pow *= -2;
            }
        }
        true
    }
}

/// x-sequence from `σ = π(n-1)` and its shot vector: `x_0 = n - 1 + a_0`
/// and `x_{i+1} = (σ_i - x_i) / 2`.
pub fn x_sequence_from(sigma: &Config, shots: &[i64], n: u64) -> Result<XSequence> {
    let len = sigma.effective_len().max(shots.len()) + 3;
    let mut values = Vec::with_capacity(len);
    let mut x = n as i64 - 1 + shots.first().copied().unwrap_or(0);
    values.push(x);
    for i in 0..len {
        let numerator = sigma.get(i) - x;
        if numerator % 2 != 0 {
            return Err(KspmError::NonIntegralStep { index: i + 1, numerator });
        }
        x = numerator / 2;
        values.push(x);
    }
    while values.last() == Some(&0) {
        values.pop();
    }
    Ok(XSequence { values })
}

/// `x_i = a_{i-2} - 2a_{i-1} + a_i` with `a_{-2} = n - 1` and `a_{-1} = 0`.
pub fn x_from_shots(shots: &[i64], n: u64) -> Vec<i64> {
    let a = |i: i64| -> i64 {
        match i {
            -2 => n as i64 - 1,
            -1 => 0,
            i => shots.get(i as usize).copied().unwrap_or(0),
        }
    };
    let mut out: Vec<i64> = (0..shots.len() as i64 + 2).map(|i| a(i - 2) - 2 * a(i - 1) + a(i)).collect();
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

/// x-sequence for `D = 3` and `n >= 1` grains.
pub fn x_sequence(n: u64) -> Result<XSequence> {
    if n == 0 {
        return Err(KspmError::InvalidSpec("the x-sequence needs N >= 1".into()));
    }
    let sigma = pi_of_n(3, n - 1)?;
    let shots = shot_vector(3, n - 1)?;
    x_sequence_from(&sigma, shots.counts(), n)
}

/// `x_0 = -2·4^j·x_{2j+1} + 2(4^{j+1} - 1)/3`, applicable when `σ` starts
/// with `2(02)^j` and `𝓛'(3, n) = 2j`. Returns `None` when not applicable.
pub fn eq3_holds(x: &XSequence, sigma: &Config, density_col: usize) -> Option<bool> {
    if !density_col.is_multiple_of(2) {
        return None;
    }
    let j = density_col / 2;
    let prefix_ok = (0..=2 * j).all(|m| sigma.get(m) == if m % 2 == 0 { 2 } else { 0 });
    if !prefix_ok || j > 30 {
        return None;
    }
    let four_j = 4i128.pow(j as u32);
    let rhs = -2 * four_j * x.get(2 * j + 1) as i128 + 2 * (4 * four_j - 1) / 3;
    Some(x.get(0) as i128 == rhs)
}

/// Outcome of the density bound `𝓛(3,N) <= 2 log₄(9N/4 - 5/4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Meta2 {
    Holds,
    Violated,
    /// `𝓛(3, N)` is odd, which the bound's derivation excludes.
    OddDensity,
}

/// Exact form `4^{j+1} <= 9N - 5` of the bound, with `𝓛 = 2j`.
pub fn meta2_bound_holds(l: usize, n: u64) -> Meta2 {
    if !l.is_multiple_of(2) {
        return Meta2::OddDensity;
    }
    let j = (l / 2) as u32;
    let lhs = 4u128.checked_pow(j + 1).unwrap_or(u128::MAX);
    if lhs <= 9 * n as u128 - 5 {
        Meta2::Holds
    } else {
        Meta2::Violated
    }
}

/// Density bound for `D = 3` at `n >= 9` grains.
pub fn meta2_bound_check(n: u64) -> Result<bool> {
    if n < 9 {
        return Err(KspmError::InvalidSpec("the density bound is stated for N >= 9".into()));
    }
    let mut engine = FastEngine::new(3)?;
    engine.advance(n);
    Ok(meta2_bound_holds(engine.global_density_column(), n) == Meta2::Holds)
}

/// One line of the wave-onset scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: u64,
    pub onset: usize,
    pub effective_length: usize,
    /// `onset / effective_length`, 0 for the empty configuration.
    pub ratio: f64,
    /// `onset / log₂ N`, 0 for `N < 2`.
    pub log_bound: f64,
}

/// Wave onsets of `π(1), …, π(N_max)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub d: usize,
    pub rows: Vec<ScanRow>,
    pub max_log_bound: f64,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,onset,effective_length,ratio,log_bound\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{:.6},{:.6}\n", r.n, r.onset, r.effective_length, r.ratio, r.log_bound));
        }
        out
    }
}

pub fn scan_row(n: u64, fp: &Config) -> ScanRow {
    let onset = wave_onset_column(fp);
    let effective_length = fp.effective_len();
    let ratio = if effective_length == 0 { 0.0 } else { onset as f64 / effective_length as f64 };
    let log_bound = if n < 2 { 0.0 } else { onset as f64 / (n as f64).log2() };
    ScanRow { n, onset, effective_length, ratio, log_bound }
}

/// Report-only scan of wave onsets, one row per `N` in `1..=n_max`.
pub fn conjecture_scan(d: usize, n_max: u64) -> Result<ScanReport> {
    let mut engine = FastEngine::new(d)?;
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut max_log_bound = 0f64;
    for n in 1..=n_max {
        engine.step();
        let row = scan_row(n, engine.config());
        max_log_bound = max_log_bound.max(row.log_bound);
        rows.push(row);
    }
    Ok(ScanReport { d, rows, max_log_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(d: usize, v: &[i64]) -> Config {
        Config::new(d, v.to_vec()).unwrap()
    }

    #[test]
    fn wave_suffix_examples() {
        let s = RegularTraceSpec { d: 3, x: 0, p: 0, y: 1 };
        assert_eq!(wave_suffix(&s).unwrap(), vec![1]);
        let s = RegularTraceSpec { d: 3, x: 2, p: 1, y: 1 };
        assert_eq!(wave_suffix(&s).unwrap(), vec![1, 2, 1, 0, 2, 1]);
        let s = RegularTraceSpec { d: 4, x: 1, p: 2, y: 2 };
        assert_eq!(wave_suffix(&s).unwrap(), vec![3, 2, 1, 3, 2, 1]);
        assert!(wave_suffix(&RegularTraceSpec { d: 3, x: 1, p: 0, y: 3 }).is_err());
        assert!(wave_suffix(&RegularTraceSpec { d: 3, x: 1, p: 2, y: 1 }).is_err());
    }

    #[test]
    fn parse_examples() {
        let w = |d, s| TraceWord::parse(d, s).unwrap();
        assert_eq!(parse_regular_trace(&w(3, "ababa"), 3), Some(RegularForm { x: 2, p: 0 }));
        assert_eq!(parse_regular_trace(&w(4, "0120120"), 4), Some(RegularForm { x: 2, p: 0 }));
        assert_eq!(parse_regular_trace(&w(3, "aab"), 3), None);
        assert_eq!(parse_regular_trace(&w(3, ""), 3), None);
    }

    #[test]
    fn onset_examples() {
        assert_eq!(wave_onset_column(&cfg(3, &[2, 1, 2, 1, 2])), 5);
        assert_eq!(wave_onset_column(&Config::zero(3).unwrap()), 0);
        assert_eq!(wave_onset_column(&cfg(3, &[2, 1, 2, 1, 0, 2, 1])), 0);
        assert_eq!(wave_onset_column(&cfg(3, &[1, 0, 0, 2, 1])), 2);
        let fp = pi_of_n(6, 1069).unwrap();
        assert_eq!(&fp.diffs()[12..], &[3, 5, 5, 4, 5, 4, 3, 2, 1, 0, 5, 4, 3, 2, 1]);
        assert_eq!(wave_onset_column(&fp), wave_onset_column_naive(&fp));
        assert_eq!(wave_onset_column(&fp), 16);
    }

    #[test]
    fn x_sequence_examples() {
        let x = x_sequence(98).unwrap();
        assert_eq!(x.values, vec![138, -68, 34, -16, 8, -3, 2, 0, 1, 0, 0, 1]);
        assert!(x_sequence(1).unwrap().values.is_empty());
        let shots = shot_vector(3, 97).unwrap();
        assert_eq!(x_from_shots(shots.counts(), 98), x.values);
        assert!(x.telescoping_holds(&pi_of_n(3, 97).unwrap(), 12));
    }

    #[test]
    fn meta2_examples() {
        assert!(meta2_bound_check(9).unwrap());
        assert!(meta2_bound_check(98).unwrap());
        assert_eq!(meta2_bound_holds(3, 100), Meta2::OddDensity);
        assert_eq!(meta2_bound_holds(2, 9), Meta2::Holds);
        assert_eq!(meta2_bound_holds(4, 9), Meta2::Holds);
        assert_eq!(meta2_bound_holds(6, 9), Meta2::Violated);
        assert!(meta2_bound_check(8).is_err());
    }

    #[test]
    fn scan_csv() {
        let r = conjecture_scan(3, 3).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().next(), Some("N,onset,effective_length,ratio,log_bound"));
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(r.rows[0].log_bound, 0.0);
    }

    proptest! {
        #[test]
        fn matcher_agrees_with_brute_force(d in 2usize..6, v in proptest::collection::vec(0i64..6, 0..30)) {
            let v: Vec<i64> = v.into_iter().map(|x| x % d as i64).collect();
            let fp = Config::new(d, v).unwrap();
            prop_assert_eq!(wave_onset_column(&fp), wave_onset_column_naive(&fp));
        }

        #[test]
        fn wave_suffix_has_expected_length(d in 2usize..7, x in 0usize..6, p in 0usize..5, y in 1usize..8) {
            prop_assume!(p <= d - 2 && y <= x + 1);
            let s = wave_suffix(&RegularTraceSpec { d, x, p, y }).unwrap();
            let expected = if y <= x { p + (d - 1) * x + 1 } else { p + 1 + (d - 1) * x };
            prop_assert_eq!(s.len(), expected);
            prop_assert_eq!(wave_onset_column(&Config::new(d, s.clone()).unwrap()) <= p + 1, true);
        }
    }
}
