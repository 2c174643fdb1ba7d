//! Named invariant checks shared by `kspm verify` and the test suites.
//!
//! Each check returns a [`CheckReport`] instead of panicking, so callers can
//! print one line per check and decide how to react.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::avalanche::{
    check_similarity, fast_avalanche_peaks, fast_successor, fast_suffix_order, nth_avalanche, FastEngine, History,
};
use crate::config::{explore_all_strategies, pi_of_n, shot_vector, Config, ShotVector};
use crate::error::KspmError;
use crate::predict::{
    eq3_holds, meta2_bound_holds, parse_regular_trace, suffix_from, wave_onset_column, wave_suffix, wave_zone_start,
    x_from_shots, x_sequence_from, Meta2,
};
use crate::transducer::trace::{compare_transduced, transduction_zone_start, Agreement, Trace};
use crate::transducer::words::{basic_words, convergence_bound, convergence_index, height, in_language_l, max_height};
use crate::transducer::{IntervalState, TraceWord, Transducer};

/// Default seed for random word generation.
pub const DEFAULT_SEED: u64 = 0x5eed_4b53_504d;

/// Wave-onset constant for `D = 3`: `onset <= C · log₂ N` for
/// `2 <= N <= 10^5`, measured once and frozen.
pub const WAVE_ONSET_C: f64 = 2.0;

const MAX_RECORDED: usize = 12;

/// Reference values the model does not reproduce: the simulated dynamics
/// and the transition algorithm give these instead. Reported as failures,
/// never silently accepted.
pub const KNOWN_DISCREPANCIES: [&str; 3] =
    ["20 -a|ε-> 11 expected, computed 20 -a|a-> 11", "20 -b|ε-> 12 expected, computed 20 -b|a-> 12", "|Φ(4,500)| = 23"];

/// Outcome of one named check.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub checked: u64,
    pub failed: u64,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport { name: name.into(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn ok(&mut self) {
        self.checked += 1;
    }

    pub fn check(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !cond {
            self.fail(msg());
        }
    }

    pub fn fail(&mut self, msg: String) {
        self.failed += 1;
        if self.failures.len() < MAX_RECORDED {
            self.failures.push(msg);
        }
    }

    pub fn warn(&mut self, msg: String) {
        if self.warnings.len() < MAX_RECORDED {
            self.warnings.push(msg);
        }
    }

    pub fn note(&mut self, msg: String) {
        self.notes.push(msg);
    }

    /// `PASS name (checked)` or `FAIL name (failed/checked): first failure`.
    pub fn summary_line(&self) -> String {
        if self.passed() {
            format!("PASS {} ({} checks)", self.name, self.checked)
        } else {
            format!(
                "FAIL {} ({}/{} failed): {}",
                self.name,
                self.failed,
                self.checked,
                self.failures.first().cloned().unwrap_or_default()
            )
        }
    }

    /// Whether the report fails, and only through [`KNOWN_DISCREPANCIES`].
    pub fn only_known_discrepancies(&self) -> bool {
        !self.passed()
            && self.failed as usize == self.failures.len()
            && self.failures.iter().all(|f| KNOWN_DISCREPANCIES.contains(&f.as_str()))
    }

    /// Merges another report's counts and messages into this one.
    pub fn absorb(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.failed += other.failed;
        for f in other.failures {
            if self.failures.len() < MAX_RECORDED {
                self.failures.push(format!("[{}] {f}", other.name));
            }
        }
        for w in other.warnings {
            self.warn(format!("[{}] {w}", other.name));
        }
        self.notes.extend(other.notes.into_iter().map(|n| format!("[{}] {n}", other.name)));
    }
}

/// Reference values the toolkit is expected to reproduce.
pub mod reference {
    pub const PI_3_24: [i64; 5] = [2, 1, 2, 1, 2];
    pub const PI_3_97: [i64; 12] = [2, 0, 2, 0, 2, 1, 2, 2, 1, 0, 2, 1];
    pub const PI_6_1068: [i64; 26] = [5, 0, 0, 4, 1, 5, 5, 4, 0, 5, 2, 0, 3, 5, 5, 4, 5, 4, 3, 2, 1, 5, 4, 3, 2, 1];
    pub const PI_6_1069: [i64; 27] = [0, 0, 5, 3, 0, 5, 4, 3, 0, 5, 2, 0, 3, 5, 5, 4, 5, 4, 3, 2, 1, 0, 5, 4, 3, 2, 1];
    pub const AVALANCHE_3_25: [usize; 5] = [0, 2, 1, 4, 3];
    pub const SHOTS_3_97: [i64; 10] = [41, 14, 21, 12, 11, 7, 5, 3, 2, 1];
    pub const X_3_98: [i64; 12] = [138, -68, 34, -16, 8, -3, 2, 0, 1, 0, 0, 1];
    pub const TRACE_4_500_I4: &str = "0120120";
    pub const TRACE_4_500_I3: &str = "0120120210";
    pub const TYPES_4_500_I4: &str = "εεε01ε2ε00εε1122ε000εε";

    /// `(from, input, to, output)` for `D = 3`, letters as `a`/`b`.
    pub const TRANSDUCER_3: [(&str, char, &str, &str); 14] = [
        ("00", 'a', "10", ""),
        ("00", 'b', "11", ""),
        ("10", 'a', "20", ""),
        ("10", 'b', "21", ""),
        ("20", 'a', "11", ""),
        ("20", 'b', "12", ""),
        ("11", 'a', "21", ""),
        ("11", 'b', "22", ""),
        ("21", 'a', "12", "a"),
        ("21", 'b', "11", "ab"),
        ("12", 'a', "22", ""),
        ("12", 'b', "21", "b"),
        ("22", 'a', "11", "ba"),
        ("22", 'b', "12", "ba"),
    ];

    /// Basic words and their images per recurrent state for `D = 3`.
    pub const BASIC_WORDS_3: [(&str, &[(&str, &str)]); 4] = [
        ("11", &[("aaaa", "aba"), ("aaab", "aba"), ("aab", "ab"), ("ab", "ab"), ("ba", "ba"), ("bb", "ba")]),
        ("21", &[("aaa", "aba"), ("aab", "aba"), ("ab", "ab"), ("b", "ab")]),
        ("12", &[("aa", "ba"), ("ab", "ba"), ("ba", "ba"), ("bb", "bab")]),
        ("22", &[("a", "ba"), ("b", "ba")]),
    ];
}

fn same_diffs(cfg: &Config, expected: &[i64]) -> bool {
    cfg.diffs() == expected
}

/// Fixed points `π(24)`, `π(97)` for `D = 3` and `π(1068)`, `π(1069)` for
/// `D = 6`.
pub fn fixed_points() -> CheckReport {
    let mut r = CheckReport::new("fixed points");
    let cases: [(usize, u64, &[i64]); 4] = [
        (3, 24, &reference::PI_3_24),
        (3, 97, &reference::PI_3_97),
        (6, 1068, &reference::PI_6_1068),
        (6, 1069, &reference::PI_6_1069),
    ];
    for (d, n, expected) in cases {
        let fp = pi_of_n(d, n).expect("valid D");
        r.check(same_diffs(&fp, expected), || format!("D={d} N={n}: got {fp}"));
        let mut engine = FastEngine::new(d).expect("valid D");
        engine.advance(n);
        r.check(engine.config() == &fp, || format!("D={d} N={n}: fast engine disagrees"));
    }
    r
}

/// The 25th avalanche for `D = 3`.
pub fn avalanche_25() -> CheckReport {
    let mut r = CheckReport::new("avalanche 25");
    let prev = pi_of_n(3, 24).expect("valid D");
    let (rec, _) = nth_avalanche(25, &prev).expect("fixed point");
    r.check(rec.fired == reference::AVALANCHE_3_25, || format!("fired {:?}", rec.fired));
    r.check(rec.peaks == [0, 2, 4], || format!("peaks {:?}", rec.peaks));
    r
}

/// Shot vector of 97 grains and the x-sequence for `N = 98`, `D = 3`.
pub fn shots_and_x() -> CheckReport {
    let mut r = CheckReport::new("shot and x vectors");
    let shots = shot_vector(3, 97).expect("valid D");
    r.check(shots.counts() == reference::SHOTS_3_97, || format!("shots {:?}", shots.counts()));
    let sigma = pi_of_n(3, 97).expect("valid D");
    match x_sequence_from(&sigma, shots.counts(), 98) {
        Ok(x) => {
            r.check(x.values == reference::X_3_98, || format!("x {:?}", x.values));
            let cross = x_from_shots(shots.counts(), 98);
            r.check(cross == x.values, || format!("shot cross-check {cross:?}"));
        }
        Err(e) => r.fail(e.to_string()),
    }
    r
}

/// Reachable states and labelled edges of the `D = 3` transducer against
/// the reference diagram.
pub fn transducer_diagram() -> CheckReport {
    let mut r = CheckReport::new("transducer diagram D=3");
    let t = Transducer::build(3).expect("valid D");
    r.check(t.states().len() == 7, || format!("{} reachable states", t.states().len()));
    let rec: Vec<String> = t.recurrent_states().iter().map(|s| s.to_string()).collect();
    r.check(rec == ["11", "12", "21", "22"], || format!("recurrent states {rec:?}"));
    r.check(t.edges().len() == 14, || format!("{} edges", t.edges().len()));
    for (from, input, to, output) in reference::TRANSDUCER_3 {
        let Ok(state) = IntervalState::parse(3, from) else {
            r.fail(format!("bad state {from}"));
            continue;
        };
        let letter = if input == 'a' { 0 } else { 1 };
        match t.step(&state, letter) {
            Ok((next, out)) => {
                let got = (next.to_string(), out.render(3));
                r.check(got.0 == to && got.1 == output, || {
                    format!(
                        "{from} -{input}|{}-> {to} expected, computed {from} -{input}|{}-> {}",
                        if output.is_empty() { "ε" } else { output },
                        if got.1.is_empty() { "ε" } else { &got.1 },
                        got.0
                    )
                });
            }
            Err(e) => r.fail(format!("{from}: {e}")),
        }
    }
    r
}

/// Reference transductions and basic-word tables for `D = 3`.
pub fn transductions() -> CheckReport {
    let mut r = CheckReport::new("transductions D=3");
    let t = Transducer::build(3).expect("valid D");
    let w = |s: &str| TraceWord::parse(3, s).expect("valid word");
    let out = t.transduce(&w("abaaaaab")).expect("valid word");
    r.check(out == w("abaab"), || format!("t(abaaaaab) = {}", out.render(3)));
    for n in 1..=100 {
        let out = t.transduce(&TraceWord::regular_cycles(3, n)).expect("valid word");
        r.check(out == TraceWord::regular_cycles(3, n - 1), || format!("t((ab)^{n}) = {}", out.render(3)));
    }
    let a21 = IntervalState::parse(3, "21").expect("valid state");
    for (u, v) in [("aaaa", "aba"), ("bbbb", "abbab")] {
        let out = t.transduce_from(&a21, &w(u)).expect("valid word");
        r.check(out == w(v), || format!("t'({u}) = {}", out.render(3)));
    }
    for (state, table) in reference::BASIC_WORDS_3 {
        let s = IntervalState::parse(3, state).expect("valid state");
        match basic_words(&t, &s) {
            Ok(got) => {
                let got: Vec<(String, String)> = got.iter().map(|(u, v)| (u.render(3), v.render(3))).collect();
                let want: Vec<(String, String)> = table.iter().map(|(u, v)| (u.to_string(), v.to_string())).collect();
                r.check(got == want, || format!("basic words of {state}: {got:?}"));
            }
            Err(e) => r.fail(format!("basic words of {state}: {e}")),
        }
    }
    r
}

/// `𝓛(4,500)`, `|Φ(4,500)|`, the types and the trace on `I_4`, plus the
/// out-of-zone trace on `I_3` as a note.
pub fn trace_d4() -> CheckReport {
    let mut r = CheckReport::new("trace D=4 N=500");
    let h = History::run(4, 500).expect("valid D");
    let phi = h.long_avalanches(500);
    r.check(phi.l == 6, || format!("L(4,500) = {}", phi.l));
    r.check(phi.len() == 22, || format!("|Φ(4,500)| = {}", phi.len()));
    match Trace::from_history(&h, 500, 4, true) {
        Ok(trace) => {
            r.check(trace.word.render(4) == reference::TRACE_4_500_I4, || {
                format!("trace on I_4 = {}", trace.word.render(4))
            });
            let types: String = trace.types.iter().map(|t| t.map_or('ε', |l| char::from(b'0' + l))).collect();
            let long: Vec<u64> = phi.indices.clone();
            let extra: Vec<String> =
                long.iter().zip(trace.types.iter()).filter(|(_, t)| t.is_none()).map(|(k, _)| k.to_string()).collect();
            let agree = if types == reference::TYPES_4_500_I4 { "agrees with" } else { "differs from" };
            r.note(format!(
                "types on I_4 = {types}, {agree} published {}; empty-type avalanches k = {}",
                reference::TYPES_4_500_I4,
                extra.join(",")
            ));
        }
        Err(e) => r.fail(e.to_string()),
    }
    if let Ok(t3) = Trace::from_history(&h, 500, 3, false) {
        let got = t3.word.render(4);
        let agree = if got == reference::TRACE_4_500_I3 { "agrees with" } else { "differs from" };
        r.note(format!("trace on I_3 (outside the type zone) = {got}, {agree} {}", reference::TRACE_4_500_I3));
    }
    let h195 = h.long_avalanches(195);
    r.check(h195.len() == 8, || format!("|Φ(4,195)| = {}", h195.len()));
    r
}

/// Peak chain and suffix update against simulation, for every avalanche
/// `k <= k_max` whose density column `l` has `[l, l + D - 2]` fired.
pub fn fast_path_equivalence(d: usize, k_max: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("fast path D={d} k<={k_max}"));
    let mut prev = Config::zero(d).expect("valid D");
    let mut applicable = 0u64;
    for k in 1..=k_max {
        let (rec, next) = nth_avalanche(k, &prev).expect("fixed point");
        let l = rec.density_col;
        if rec.max_fired.is_some_and(|m| m >= l + d - 2) {
            applicable += 1;
            let lo = l + d - 1;
            let peaks = fast_avalanche_peaks(&prev, l, false).expect("no verification requested");
            r.check(peaks == rec.peaks_from(lo), || {
                format!("k={k}: fast peaks {peaks:?}, simulated {:?}", rec.peaks_from(lo))
            });
            let order = fast_suffix_order(&peaks, l, d);
            let sim_order: Vec<usize> = rec.fired.iter().copied().filter(|&c| c >= lo).collect();
            r.check(order == sim_order, || format!("k={k}: suffix order {order:?} vs {sim_order:?}"));
            let predicted = fast_successor(&prev, &peaks, l);
            r.check(suffix_from(&predicted, lo) == suffix_from(&next, lo), || {
                format!("k={k}: suffix {:?} vs {:?}", suffix_from(&predicted, lo), suffix_from(&next, lo))
            });
            if let Some(&m) = peaks.last() {
                let stationary = (lo..m).all(|j| next.get(j) == prev.get(j));
                r.check(stationary, || format!("k={k}: fixed point moved inside [{lo}, {m})"));
            }
        }
        prev = next;
    }
    r.note(format!("{applicable} of {k_max} avalanches satisfy the density precondition"));
    r
}

/// [`FastEngine`] against exact simulation, avalanche by avalanche.
pub fn fast_engine_equivalence(d: usize, k_max: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("fast engine D={d} k<={k_max}"));
    let mut engine = FastEngine::new(d).expect("valid D");
    let mut prev = Config::zero(d).expect("valid D");
    let mut chained = 0u64;
    for k in 1..=k_max {
        let step = engine.step();
        let (rec, next) = nth_avalanche(k, &prev).expect("fixed point");
        chained += step.chained as u64;
        r.check(
            engine.config() == &next
                && step.peaks == rec.peaks
                && step.density_col == rec.density_col
                && step.max_fired == rec.max_fired,
            || format!("k={k}: engine state differs from simulation"),
        );
        prev = next;
    }
    r.note(format!("peak chain used on {chained} of {k_max} avalanches"));
    r
}

/// Grain conservation on every firing of every avalanche up to `n`.
pub fn grain_conservation(d: usize, n: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("grain conservation D={d} N<={n}"));
    let mut cfg = Config::zero(d).expect("valid D");
    for k in 1..=n {
        cfg.add_grain();
        let total = k as i64;
        while let Some(i) = cfg.leftmost_fireable() {
            cfg.fire(i).expect("fireable column");
            r.check(cfg.total_grains() == total, || format!("k={k}: grains {} after firing {i}", cfg.total_grains()));
        }
    }
    r
}

/// Every strategy from `(N, 0^ω)` ends in `π(N)` after the same number of
/// firings, equal to the total shot count.
pub fn confluence(d: usize, n_max: u64, node_budget: usize) -> CheckReport {
    let mut r = CheckReport::new(format!("confluence D={d} N<={n_max}"));
    for n in 0..=n_max {
        let start = Config::stacked(d, n as i64).expect("valid D");
        match explore_all_strategies(&start, node_budget) {
            Ok(ex) => {
                let fp = pi_of_n(d, n).expect("valid D");
                let total = shot_vector(d, n).expect("valid D").total() as usize;
                r.check(ex.terminals.len() == 1 && ex.terminals[0] == fp, || {
                    format!("N={n}: {} terminal configurations", ex.terminals.len())
                });
                r.check(ex.min_len == ex.max_len && ex.max_len == total, || {
                    format!("N={n}: strategy lengths {}..{} vs {total} shots", ex.min_len, ex.max_len)
                });
            }
            Err(KspmError::BudgetExceeded(b)) => r.fail(format!("N={n}: more than {b} configurations")),
            Err(e) => r.fail(format!("N={n}: {e}")),
        }
    }
    r
}

/// The shot-vector balance identity for every `N <= n_max`.
pub fn shot_balance(d: usize, n_max: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("shot balance D={d} N<={n_max}"));
    let mut cfg = Config::zero(d).expect("valid D");
    let mut shots = ShotVector::default();
    r.check(shots.balance_holds(0, &cfg), || "N=0".into());
    for n in 1..=n_max {
        cfg.add_grain();
        let s = cfg.stabilize();
        for &c in s.columns() {
            if c >= shots.0.len() {
                shots.0.resize(c + 1, 0);
            }
            shots.0[c] += 1;
        }
        r.check(shots.balance_holds(n as i64, &cfg), || format!("N={n}"));
    }
    r
}

/// Fixed point of the classical sand pile model computed on heights:
/// a grain falls from `i` to `i+1` while `h_i - h_{i+1} >= 2`.
pub fn spm_heights(n: u64) -> Vec<i64> {
    let mut h: Vec<i64> = vec![n as i64];
    loop {
        let mut moved = false;
        let mut i = 0;
        while i < h.len() {
            let next = h.get(i + 1).copied().unwrap_or(0);
            if h[i] - next >= 2 {
                h[i] -= 1;
                if i + 1 == h.len() {
                    h.push(0);
                }
                h[i + 1] += 1;
                moved = true;
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
        if !moved {
            break;
        }
    }
    while h.last() == Some(&0) {
        h.pop();
    }
    h
}

/// `D = 2` against [`spm_heights`].
pub fn d2_regression(n_max: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("D=2 regression N<={n_max}"));
    let mut engine = FastEngine::new(2).expect("valid D");
    for n in 1..=n_max {
        engine.step();
        let got = engine.config().heights();
        let want = spm_heights(n);
        r.check(got == want, || format!("N={n}: {got:?} vs {want:?}"));
    }
    r
}

/// Distinct fired columns, local density and descending runs after each
/// peak beyond `l + D - 2`, for every avalanche up to `n`.
pub fn avalanche_contracts(h: &History) -> CheckReport {
    let d = h.d();
    let mut r = CheckReport::new(format!("avalanche contracts D={d} N<={}", h.n()));
    for rec in h.records() {
        let k = rec.k;
        r.check(rec.columns_distinct(), || format!("k={k}: a column fires twice"));
        r.check(rec.local_density_holds(d), || format!("k={k}: local density broken"));
        let l = rec.density_col;
        if rec.max_fired.is_some_and(|m| m >= l + d - 2) {
            // After a peak p beyond l + D - 2, the next firings run down to
            // the previous peak.
            let fired = &rec.fired;
            let mut prev_peak: Option<usize> = None;
            for (t, &c) in fired.iter().enumerate() {
                if prev_peak.is_none_or(|p| c > p) {
                    if c >= l + d - 1 {
                        let stop = prev_peak.map_or(0, |p| p + 1);
                        let run: Vec<usize> = (stop..c).rev().collect();
                        let got = &fired[t + 1..(t + 1 + run.len()).min(fired.len())];
                        r.check(got == run.as_slice(), || format!("k={k}: run after peak {c} is {got:?}"));
                    }
                    prev_peak = Some(c);
                }
            }
        }
    }
    r
}

/// Values of `n` at which `𝓛(D, n)` is about to change, plus `n_max`:
/// checking `Φ(D, n)` there covers every horizon.
fn horizon_breakpoints(h: &History) -> Vec<u64> {
    let profile = h.global_density_profile();
    let n_max = h.n();
    (1..=n_max).filter(|&n| n == n_max || profile[n as usize + 1] != profile[n as usize]).collect()
}

/// Consecutive long avalanches share all peaks `>= L + 2(D-1)` except the
/// largest one of the first.
pub fn similarity(h: &History) -> CheckReport {
    let d = h.d();
    let mut r = CheckReport::new(format!("similar peaks D={d} N<={}", h.n()));
    for n in horizon_breakpoints(h) {
        let phi = h.long_avalanches(n);
        let lo = phi.l + 2 * (d - 1);
        for pair in phi.indices.windows(2) {
            let pk = h.record(pair[0]).peaks_from(lo);
            let pk1 = h.record(pair[1]).peaks_from(lo);
            r.check(check_similarity(&pk, &pk1, phi.l, d), || {
                format!("N={n} k={}->{}: {pk:?} vs {pk1:?}", pair[0], pair[1])
            });
        }
    }
    r
}

/// `t(trace on I_i) = trace on I_{i+1}` on every interval pair of the
/// transduction zone, for every horizon `N <= h.n()`.
pub fn transducer_consistency(h: &History) -> CheckReport {
    let d = h.d();
    let mut r = CheckReport::new(format!("transducer consistency D={d} N<={}", h.n()));
    let t = Transducer::build(d).expect("valid D");
    let mut open_passes = 0u64;
    let mut exact = 0u64;
    for n in 1..=h.n() {
        let phi = h.long_avalanches(n);
        let mut i = transduction_zone_start(phi.l, d);
        let mut left = Trace::from_history(h, n, i, true).expect("inside the zone");
        loop {
            let right = Trace::from_history(h, n, i + 1, true).expect("inside the zone");
            let image = t.transduce(&left.word).expect("valid word");
            let mut shorter = left.word.clone();
            shorter.letters.pop();
            let shorter_image = t.transduce(&shorter).expect("valid word");
            match compare_transduced(&image, &shorter_image, &right.word, left.open) {
                Agreement::Exact => {
                    exact += 1;
                    r.ok();
                }
                Agreement::OpenSuffix => {
                    open_passes += 1;
                    r.ok();
                    r.warn(format!(
                        "N={n} i={i}: open last subsequence, t({}) = {} vs {}",
                        left.word.render(d),
                        image.render(d),
                        right.word.render(d)
                    ));
                }
                Agreement::Mismatch => r.fail(format!(
                    "N={n} i={i}: t({}) = {} but trace on I_{} is {}",
                    left.word.render(d),
                    image.render(d),
                    i + 1,
                    right.word.render(d)
                )),
            }
            if left.word.is_empty() && right.word.is_empty() {
                break;
            }
            left = right;
            i += 1;
        }
    }
    r.note(format!("{exact} exact, {open_passes} accepted through an open last subsequence"));
    r
}

/// Wave suffix against the simulated fixed point: for every horizon and
/// every interval of the wave zone with a regular trace, and at every long
/// avalanche of the final horizon.
pub fn wave_agreement(h: &History) -> CheckReport {
    let d = h.d();
    let n_max = h.n();
    let mut r = CheckReport::new(format!("wave suffix D={d} N<={n_max}"));
    let mut regular = 0u64;
    for n in 1..=n_max {
        let fp = h.snapshot(n).expect("snapshots kept");
        let l = h.global_density_column(n);
        let mut i = wave_zone_start(l, d);
        loop {
            let trace = Trace::from_history(h, n, i, true).expect("inside the zone");
            if trace.word.is_empty() {
                break;
            }
            if let Some(form) = parse_regular_trace(&trace.word, d) {
                regular += 1;
                check_wave(&mut r, form.with_y(d, trace.y), fp, i, d, || format!("N={n} i={i}"));
            }
            i += 1;
        }
    }
    // Cycle invariant: after every long avalanche of the final horizon.
    let phi = h.long_avalanches(n_max);
    let i0 = wave_zone_start(phi.l, d);
    for i in i0..i0 + 4 {
        let full = Trace::from_history(h, n_max, i, true).expect("inside the zone");
        for m in 1..=phi.len() {
            let k = phi.indices[m - 1];
            let partial = Trace::from_types(d, k, i, phi.l, full.types[..m].to_vec());
            if let Some(form) = parse_regular_trace(&partial.word, d) {
                let fp = h.snapshot(k).expect("snapshots kept");
                check_wave(&mut r, form.with_y(d, partial.y), fp, i, d, || format!("k={k} i={i}"));
            }
        }
    }
    r.note(format!("{regular} regular traces compared"));
    r
}

fn check_wave(
    r: &mut CheckReport,
    spec: crate::error::Result<crate::predict::RegularTraceSpec>,
    fp: &Config,
    i: usize,
    d: usize,
    at: impl Fn() -> String,
) {
    match spec.and_then(|s| wave_suffix(&s)) {
        Ok(predicted) => {
            let actual = suffix_from(fp, (i + 1) * (d - 1));
            r.check(predicted == actual, || format!("{}: predicted {predicted:?}, simulated {actual:?}", at()));
        }
        Err(e) => r.fail(format!("{}: {e}", at())),
    }
}

/// Density bound and parity for `D = 3`, every `N` in `[9, n_max]`.
pub fn meta2(n_max: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("density bound D=3 9<=N<={n_max}"));
    let mut engine = FastEngine::new(3).expect("valid D");
    for n in 1..=n_max {
        engine.step();
        if n >= 9 {
            let l = engine.global_density_column();
            let outcome = meta2_bound_holds(l, n);
            r.check(outcome == Meta2::Holds, || format!("N={n}: L={l} gives {outcome:?}"));
        }
    }
    r.note(format!("L(3,{n_max}) = {}", engine.global_density_column()));
    r
}

/// Telescoping identity, the prefix identity and the shot-vector form of
/// the x-sequence, for `D = 3` and `N <= n_max`.
pub fn x_sequences(n_max: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("x-sequence identities N<={n_max}"));
    let mut cfg = Config::zero(3).expect("valid D");
    let mut shots = ShotVector::default();
    let mut eq3_cases = 0u64;
    for n in 1..=n_max {
        // cfg = π(n-1), shots accumulated over n-1 grains.
        match x_sequence_from(&cfg, shots.counts(), n) {
            Ok(x) => {
                let cross = x_from_shots(shots.counts(), n);
                r.check(cross == x.values, || format!("N={n}: {:?} vs {cross:?}", x.values));
                let limit = x.values.len().min(24);
                r.check(x.telescoping_holds(&cfg, limit), || format!("N={n}: telescoping fails"));
                let (rec, next) = nth_avalanche(n, &cfg).expect("fixed point");
                if let Some(ok) = eq3_holds(&x, &cfg, rec.density_col) {
                    eq3_cases += 1;
                    r.check(ok, || format!("N={n}: prefix identity fails"));
                }
                for &c in &rec.fired {
                    if c >= shots.0.len() {
                        shots.0.resize(c + 1, 0);
                    }
                    shots.0[c] += 1;
                }
                cfg = next;
            }
            Err(e) => {
                r.fail(format!("N={n}: {e}"));
                break;
            }
        }
    }
    r.note(format!("prefix identity applicable {eq3_cases} times"));
    r
}

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> TraceWord {
    let len = rng.gen_range(0..=max_len);
    TraceWord::from((0..len).map(|_| rng.gen_range(0..2u8)).collect::<Vec<u8>>())
}

/// Convergence bound, language closure and height decrease on random
/// `D = 3` words.
pub fn word_properties(count: usize, max_len: usize, seed: u64) -> CheckReport {
    let mut r = CheckReport::new(format!("word properties {count} words |u|<={max_len}"));
    let t = Transducer::build(3).expect("valid D");
    let a21 = IntervalState::parse(3, "21").expect("valid state");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0usize;
    for _ in 0..count {
        let u = random_word(&mut rng, max_len);
        let bound = convergence_bound(u.len());
        match convergence_index(&t, &u, bound + 8) {
            Ok(n) => {
                worst = worst.max(n);
                r.check(n <= bound, || format!("|u|={}: index {n} > {bound}", u.len()));
            }
            Err(e) => r.fail(format!("|u|={}: {e}", u.len())),
        }
        let half = TraceWord::from(u.letters[..u.len().min(512)].to_vec());
        let tp = t.transduce_from(&a21, &half).expect("valid word");
        r.check(in_language_l(&tp), || format!("t'(u) = {} outside L", tp.render(3)));
        let t2 = t.iterate(&half, 2).expect("valid word");
        r.check(in_language_l(&t2), || format!("t²(u) = {} outside L", t2.render(3)));

        let mut v = vec![0u8, 1];
        v.extend_from_slice(&u.letters);
        for v in [TraceWord::from(v), TraceWord::empty(), TraceWord::from(vec![0])] {
            let tv = t.transduce(&v).expect("valid word");
            r.check(4 * height(&tv) <= height(&v) + 4, || {
                format!("h(t(v)) = {} for h(v) = {}", height(&tv), height(&v))
            });
            r.check(4 * max_height(&tv) <= max_height(&v) + 4, || {
                format!("g(t(v)) = {} for g(v) = {}", max_height(&tv), max_height(&v))
            });
        }
    }
    r.note(format!("largest convergence index {worst}"));
    r
}

/// Wave onsets of `π(N)` for `2 <= N <= n_max`. For `D = 3` the onset must
/// stay below `c · log₂ N`; other `D` only report.
pub fn wave_onsets(d: usize, n_max: u64, c: f64) -> CheckReport {
    let mut r = CheckReport::new(format!("wave onset D={d} N<={n_max}"));
    let mut engine = FastEngine::new(d).expect("valid D");
    let mut worst = 0f64;
    let mut worst_n = 0;
    for n in 1..=n_max {
        engine.step();
        if n < 2 {
            continue;
        }
        let onset = wave_onset_column(engine.config());
        let ratio = onset as f64 / (n as f64).log2();
        if ratio > worst {
            worst = ratio;
            worst_n = n;
        }
        if d == 3 {
            r.check(ratio <= c, || format!("N={n}: onset {onset} > {c}·log₂N"));
        } else {
            r.ok();
        }
    }
    r.note(format!("max onset/log₂N = {worst:.4} at N={worst_n}"));
    r
}

/// Timing of the peak-chain engine and of exact simulation.
pub fn performance(fast_n: u64, fast_limit: Duration, naive_n: u64, naive_limit: Duration) -> CheckReport {
    let mut r = CheckReport::new(format!("performance fast {fast_n} / naive {naive_n}"));
    let start = Instant::now();
    let mut engine = FastEngine::new(3).expect("valid D");
    engine.advance(fast_n);
    let fast = start.elapsed();
    r.check(fast <= fast_limit, || format!("fast path took {fast:?}"));
    let start = Instant::now();
    let fp = pi_of_n(3, naive_n).expect("valid D");
    let naive = start.elapsed();
    r.check(naive <= naive_limit, || format!("naive path took {naive:?}"));
    r.note(format!(
        "fast {fast:?} (effective length {}), naive {naive:?} (effective length {})",
        engine.config().effective_len(),
        fp.effective_len()
    ));
    r
}

/// Scale of a full verification run.
#[derive(Clone, Copy, Debug)]
pub struct Scale {
    pub avalanche_n: u64,
    pub fast_k: u64,
    pub confluence_n: u64,
    pub meta2_n: u64,
    pub onset_n: u64,
    pub words: usize,
    pub word_len: usize,
    pub perf_fast_n: u64,
    pub perf_naive_n: u64,
}

impl Scale {
    /// Scale of the acceptance criteria.
    pub const FULL: Scale = Scale {
        avalanche_n: 2000,
        fast_k: 5000,
        confluence_n: 30,
        meta2_n: 100_000,
        onset_n: 100_000,
        words: 10_000,
        word_len: 1024,
        perf_fast_n: 1_000_000,
        perf_naive_n: 10_000,
    };

    /// A reduced run finishing in seconds.
    pub const QUICK: Scale = Scale {
        avalanche_n: 400,
        fast_k: 800,
        confluence_n: 14,
        meta2_n: 5_000,
        onset_n: 5_000,
        words: 500,
        word_len: 256,
        perf_fast_n: 50_000,
        perf_naive_n: 2_000,
    };
}

/// Every check at the given scale, in a fixed order.
pub fn run_all(scale: Scale, seed: u64) -> Vec<CheckReport> {
    let mut out =
        vec![fixed_points(), avalanche_25(), shots_and_x(), transducer_diagram(), transductions(), trace_d4()];

    let mut fast = CheckReport::new("fast path equivalence");
    for d in 3..=6 {
        fast.absorb(fast_path_equivalence(d, scale.fast_k));
        fast.absorb(fast_engine_equivalence(d, scale.fast_k));
    }
    out.push(fast);

    let mut histories: HashMap<usize, History> = HashMap::new();
    for d in 2..=6 {
        histories.insert(d, History::run_with_snapshots(d, scale.avalanche_n).expect("valid D"));
    }

    let mut consistency = CheckReport::new("transducer consistency");
    for d in 3..=5 {
        consistency.absorb(transducer_consistency(&histories[&d]));
    }
    out.push(consistency);

    out.push(meta2(scale.meta2_n));
    out.push(word_properties(scale.words, scale.word_len, seed));

    let mut onsets = CheckReport::new("wave onsets");
    onsets.absorb(wave_onsets(3, scale.onset_n, WAVE_ONSET_C));
    for d in 4..=6 {
        onsets.absorb(wave_onsets(d, scale.onset_n / 10, WAVE_ONSET_C));
    }
    out.push(onsets);

    let mut props = CheckReport::new("property suites");
    for d in 2..=5 {
        props.absorb(grain_conservation(d, scale.avalanche_n / 4));
        props.absorb(confluence(d, scale.confluence_n, 2_000_000));
        props.absorb(similarity(&histories[&d]));
    }
    for d in 2..=6 {
        props.absorb(avalanche_contracts(&histories[&d]));
        props.absorb(shot_balance(d, scale.avalanche_n));
    }
    props.absorb(d2_regression(500));
    props.absorb(x_sequences(scale.avalanche_n));
    for d in 3..=5 {
        props.absorb(wave_agreement(&histories[&d]));
    }
    out.push(props);

    out.push(performance(scale.perf_fast_n, Duration::from_secs(60), scale.perf_naive_n, Duration::from_secs(10)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spm_oracle_small() {
        assert_eq!(spm_heights(0), Vec::<i64>::new());
        assert_eq!(spm_heights(1), vec![1]);
        assert_eq!(spm_heights(2), vec![1, 1]);
        assert_eq!(spm_heights(3), vec![2, 1]);
        assert_eq!(spm_heights(4), vec![2, 1, 1]);
    }

    #[test]
    fn report_lines() {
        let mut r = CheckReport::new("demo");
        r.check(true, || unreachable!());
        assert_eq!(r.summary_line(), "PASS demo (1 checks)");
        r.check(false, || "boom".into());
        assert_eq!(r.summary_line(), "FAIL demo (1/2 failed): boom");
    }

    #[test]
    fn quick_checks_pass() {
        for r in [fixed_points(), avalanche_25(), shots_and_x(), transductions()] {
            assert!(r.passed(), "{}", r.summary_line());
        }
        let r = trace_d4();
        assert_eq!(r.failures, vec!["|Φ(4,500)| = 23".to_string()]);
    }
}
