//! Configurations of KSPM(D) and the sequential leftmost dynamics.
//!
//! Values are stored as `i64`. Fixed points from `N` grains have
//! `O(sqrt(D N))` non-empty columns and shot counts below `N^{3/2}`, so every
//! quantity stays exact for `N <= 2^40`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{KspmError, Result};

/// Largest grain count the 64-bit representation is documented for.
pub const MAX_GRAINS: i64 = 1 << 40;

pub(crate) fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(KspmError::InvalidParameter(d));
    }
    Ok(())
}

/// A configuration as height differences with an implicit zero tail.
///
/// Equality and hashing ignore trailing zeros, so `(2,1,0)` and `(2,1)` are
/// the same configuration.
#[derive(Clone, Serialize, Deserialize)]
pub struct Config {
    d: usize,
    diffs: Vec<i64>,
}

/// Time-ordered list of fired columns.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiringStrategy(pub Vec<usize>);

impl FiringStrategy {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn columns(&self) -> &[usize] {
        &self.0
    }
}

/// Number of firings of each column during a full stabilization.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ShotVector(pub Vec<i64>);

impl PartialEq for ShotVector {
    fn eq(&self, other: &Self) -> bool {
        trim(&self.0) == trim(&other.0)
    }
}

impl Eq for ShotVector {}

impl ShotVector {
    pub fn get(&self, i: usize) -> i64 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Shot counts without the zero tail.
    pub fn counts(&self) -> &[i64] {
        trim(&self.0)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub(crate) fn add_strategy(&mut self, fired: &[usize]) {
        for &c in fired {
            if c >= self.0.len() {
                self.0.resize(c + 1, 0);
            }
            self.0[c] += 1;
        }
    }

    /// Checks `σ_i = N·[i=0] + a_{i-(D-1)} - D·a_i + (D-1)·a_{i+1}` for every
    /// column, where `σ` is the fixed point reached from `(n, 0^ω)`.
    pub fn balance_holds(&self, n: i64, fp: &Config) -> bool {
        let d = fp.d();
        let len = fp.effective_len().max(self.counts().len()) + d + 1;
        (0..len).all(|i| {
            let back = if i >= d - 1 { self.get(i - (d - 1)) } else { 0 };
            let source = if i == 0 { n } else { 0 };
            let rhs = source + back - d as i64 * self.get(i) + (d as i64 - 1) * self.get(i + 1);
            fp.get(i) == rhs
        })
    }
}

fn trim(v: &[i64]) -> &[i64] {
    let end = v.iter().rposition(|&x| x != 0).map_or(0, |p| p + 1);
    &v[..end]
}

impl Config {
    /// The empty configuration `0^ω`.
    pub fn zero(d: usize) -> Result<Self> {
        check_d(d)?;
        Ok(Config { d, diffs: Vec::new() })
    }

    pub fn new(d: usize, diffs: Vec<i64>) -> Result<Self> {
        check_d(d)?;
        if let Some((column, &value)) = diffs.iter().enumerate().find(|(_, &v)| v < 0) {
            return Err(KspmError::NegativeEntry { column, value });
        }
        Ok(Config { d, diffs })
    }

    /// `(n, 0^ω)`: `n` grains stacked on column 0.
    pub fn stacked(d: usize, n: i64) -> Result<Self> {
        Config::new(d, vec![n])
    }

    /// Builds a configuration from a non-increasing, ultimately null height
    /// profile.
    pub fn from_heights(d: usize, heights: &[i64]) -> Result<Self> {
        let diffs = heights.iter().enumerate().map(|(i, &h)| h - heights.get(i + 1).copied().unwrap_or(0)).collect();
        Config::new(d, diffs)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `σ_i`, zero beyond the stored prefix.
    #[inline]
    pub fn get(&self, i: usize) -> i64 {
        self.diffs.get(i).copied().unwrap_or(0)
    }

    /// Height differences up to the last non-zero entry.
    pub fn diffs(&self) -> &[i64] {
        trim(&self.diffs)
    }

    /// One past the index of the last non-zero entry.
    pub fn effective_len(&self) -> usize {
        self.diffs().len()
    }

    /// Heights `h_i = Σ_{j >= i} σ_j` over the effective length.
    pub fn heights(&self) -> Vec<i64> {
        let diffs = self.diffs();
        let mut h = vec![0; diffs.len()];
        let mut acc = 0;
        for i in (0..diffs.len()).rev() {
            acc += diffs[i];
            h[i] = acc;
        }
        h
    }

    /// Total number of grains, `Σ_i h_i`.
    pub fn total_grains(&self) -> i64 {
        self.diffs.iter().enumerate().map(|(i, &s)| (i as i64 + 1) * s).sum()
    }

    pub fn is_stable(&self) -> bool {
        self.leftmost_fireable().is_none()
    }

    pub fn is_fireable(&self, i: usize) -> bool {
        self.get(i) >= self.d as i64
    }

    pub fn leftmost_fireable(&self) -> Option<usize> {
        let d = self.d as i64;
        self.diffs.iter().position(|&s| s >= d)
    }

    /// Columns that can currently fire, in increasing order.
    pub fn fireable_columns(&self) -> Vec<usize> {
        let d = self.d as i64;
        self.diffs.iter().enumerate().filter(|(_, &s)| s >= d).map(|(i, _)| i).collect()
    }

    pub(crate) fn reserve_column(&mut self, i: usize) {
        if i >= self.diffs.len() {
            self.diffs.resize(i + 1, 0);
        }
    }

    /// Applies the rule without checking `σ_i >= D`.
    #[inline]
    pub(crate) fn apply_rule(&mut self, i: usize) {
        let d = self.d;
        self.reserve_column(i + d - 1);
        self.diffs[i] -= d as i64;
        if i > 0 {
            self.diffs[i - 1] += d as i64 - 1;
        }
        self.diffs[i + d - 1] += 1;
    }

    pub(crate) fn set(&mut self, i: usize, value: i64) {
        self.reserve_column(i);
        self.diffs[i] = value;
    }

    /// Fires column `i` in place.
    pub fn fire(&mut self, i: usize) -> Result<()> {
        let value = self.get(i);
        if value < self.d as i64 {
            return Err(KspmError::FireOnStableColumn { column: i, value, d: self.d });
        }
        self.apply_rule(i);
        Ok(())
    }

    /// Returns the configuration reached by firing column `i`.
    pub fn fired(&self, i: usize) -> Result<Config> {
        let mut next = self.clone();
        next.fire(i)?;
        Ok(next)
    }

    /// `σ^{↓0}`: one more grain on column 0.
    pub fn add_grain(&mut self) {
        self.reserve_column(0);
        self.diffs[0] += 1;
    }

    pub fn with_grain(&self) -> Config {
        let mut next = self.clone();
        next.add_grain();
        next
    }

    /// Replays a strategy, failing on the first illegal firing.
    pub fn replay(&self, strategy: &[usize]) -> Result<Config> {
        let mut cfg = self.clone();
        for &c in strategy {
            cfg.fire(c)?;
        }
        Ok(cfg)
    }

    /// Stabilizes in place with the leftmost strategy and returns it.
    pub fn stabilize(&mut self) -> FiringStrategy {
        let d = self.d as i64;
        let mut fired = Vec::new();
        let mut pending: BinaryHeap<Reverse<usize>> =
            self.diffs.iter().enumerate().filter(|(_, &s)| s >= d).map(|(i, _)| Reverse(i)).collect();
        while let Some(Reverse(c)) = pending.pop() {
            if self.get(c) < d {
                continue;
            }
            self.apply_rule(c);
            fired.push(c);
            if self.get(c) >= d {
                pending.push(Reverse(c));
            }
            if c > 0 && self.get(c - 1) >= d {
                pending.push(Reverse(c - 1));
            }
            let right = c + self.d - 1;
            if self.get(right) >= d {
                pending.push(Reverse(right));
            }
        }
        FiringStrategy(fired)
    }

    /// `π(σ)` together with the leftmost strategy reaching it.
    pub fn stabilized(&self) -> (Config, FiringStrategy) {
        let mut cfg = self.clone();
        let strategy = cfg.stabilize();
        (cfg, strategy)
    }

    /// Checks that every pair of distinct fireable columns commutes.
    pub fn check_diamond(&self) -> bool {
        let fireable = self.fireable_columns();
        for (a, &i) in fireable.iter().enumerate() {
            for &j in &fireable[a + 1..] {
                let ij = self.fired(i).and_then(|c| c.fired(j));
                let ji = self.fired(j).and_then(|c| c.fired(i));
                match (ij, ji) {
                    (Ok(x), Ok(y)) if x == y => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

impl PartialEq for Config {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.diffs() == other.diffs()
    }
}

impl Eq for Config {}

impl Hash for Config {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.d.hash(state);
        self.diffs().hash(state);
    }
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Config(D={}, {})", self.d, self)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for v in self.diffs() {
            write!(f, "{v},")?;
        }
        f.write_str("0^ω)")
    }
}

/// `π(n)` by `n` rounds of grain addition and leftmost stabilization.
pub fn pi_of_n(d: usize, n: u64) -> Result<Config> {
    let mut cfg = Config::zero(d)?;
    for _ in 0..n {
        cfg.add_grain();
        cfg.stabilize();
    }
    Ok(cfg)
}

/// Shot vector of the stabilization of `(n, 0^ω)`, accumulated over the
/// `n` successive avalanches.
pub fn shot_vector(d: usize, n: u64) -> Result<ShotVector> {
    let mut cfg = Config::zero(d)?;
    let mut shots = ShotVector::default();
    for _ in 0..n {
        cfg.add_grain();
        let s = cfg.stabilize();
        shots.add_strategy(&s.0);
    }
    Ok(shots)
}

/// Shot vector of a direct leftmost stabilization of `cfg`.
pub fn direct_shot_vector(cfg: &Config) -> ShotVector {
    let (_, strategy) = cfg.stabilized();
    let mut shots = ShotVector::default();
    shots.add_strategy(&strategy.0);
    shots
}

/// Outcome of exploring every strategy from a configuration.
#[derive(Debug, Clone)]
pub struct Exploration {
    /// Distinct stable configurations reached.
    pub terminals: Vec<Config>,
    /// Number of distinct reachable configurations.
    pub nodes: usize,
    /// Shortest and longest maximal strategy lengths.
    pub min_len: usize,
    pub max_len: usize,
}

/// Explores the whole reachability graph from `start`, memoised on
/// configurations. Gives up with [`KspmError::BudgetExceeded`] after
/// `node_budget` distinct configurations.
pub fn explore_all_strategies(start: &Config, node_budget: usize) -> Result<Exploration> {
    // node -> (min remaining, max remaining)
    let mut memo: HashMap<Config, (usize, usize)> = HashMap::new();
    let mut terminals: Vec<Config> = Vec::new();

    enum Frame {
        Enter(Config),
        Exit(Config),
    }
    let mut stack = vec![Frame::Enter(start.clone())];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(cfg) => {
                if memo.contains_key(&cfg) {
                    continue;
                }
                let fireable = cfg.fireable_columns();
                if fireable.is_empty() {
                    if !terminals.contains(&cfg) {
                        terminals.push(cfg.clone());
                    }
                    memo.insert(cfg, (0, 0));
                    if memo.len() > node_budget {
                        return Err(KspmError::BudgetExceeded(node_budget));
                    }
                    continue;
                }
                let children: Vec<Config> = fireable.iter().map(|&i| cfg.fired(i).expect("fireable")).collect();
                stack.push(Frame::Exit(cfg));
                for child in children {
                    if !memo.contains_key(&child) {
                        stack.push(Frame::Enter(child));
                    }
                }
            }
            Frame::Exit(cfg) => {
                if memo.contains_key(&cfg) {
                    continue;
                }
                let (mut lo, mut hi) = (usize::MAX, 0);
                for i in cfg.fireable_columns() {
                    let child = cfg.fired(i).expect("fireable");
                    let (clo, chi) = memo[&child];
                    lo = lo.min(clo + 1);
                    hi = hi.max(chi + 1);
                }
                memo.insert(cfg, (lo, hi));
                if memo.len() > node_budget {
                    return Err(KspmError::BudgetExceeded(node_budget));
                }
            }
        }
    }
    let (min_len, max_len) = memo[start];
    Ok(Exploration { terminals, nodes: memo.len(), min_len, max_len })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(d: usize, v: &[i64]) -> Config {
        Config::new(d, v.to_vec()).unwrap()
    }

    #[test]
    fn fire_examples() {
        assert_eq!(cfg(3, &[3, 1, 2, 1, 2]).fired(0).unwrap(), cfg(3, &[0, 1, 3, 1, 2]));
        assert_eq!(cfg(3, &[24]).fired(0).unwrap(), cfg(3, &[21, 0, 1]));
        assert_eq!(cfg(2, &[2, 0]).fired(0).unwrap(), cfg(2, &[0, 1]));
    }

    #[test]
    fn fire_touches_only_three_columns() {
        let before = cfg(4, &[1, 2, 5, 1]);
        let after = before.fired(2).unwrap();
        assert_eq!(after, cfg(4, &[1, 5, 1, 1, 0, 1]));
    }

    #[test]
    fn fire_on_stable_column_is_rejected() {
        let err = cfg(3, &[2, 1]).fired(0).unwrap_err();
        assert_eq!(err, KspmError::FireOnStableColumn { column: 0, value: 2, d: 3 });
        assert!(cfg(3, &[]).fired(7).is_err());
    }

    #[test]
    fn stability_and_leftmost() {
        assert!(cfg(3, &[2, 1, 2, 1, 2]).is_stable());
        assert!(Config::zero(3).unwrap().is_stable());
        assert!(!cfg(3, &[3]).is_stable());
        assert_eq!(cfg(3, &[0, 3, 0, 1, 3]).leftmost_fireable(), Some(1));
        assert_eq!(cfg(3, &[2, 1, 2, 1, 2]).leftmost_fireable(), None);
        assert_eq!(cfg(4, &[1, 5, 4]).leftmost_fireable(), Some(1));
    }

    #[test]
    fn stabilize_examples() {
        let (fp, s) = cfg(3, &[24]).stabilized();
        assert_eq!(fp, cfg(3, &[2, 1, 2, 1, 2]));
        assert_eq!(cfg(3, &[24]).replay(&s.0).unwrap(), fp);

        let (fp, s) = Config::zero(3).unwrap().stabilized();
        assert_eq!(fp, Config::zero(3).unwrap());
        assert!(s.is_empty());

        let (fp, s) = cfg(3, &[3]).stabilized();
        assert_eq!(fp, cfg(3, &[0, 0, 1]));
        assert_eq!(s.0, vec![0]);
    }

    #[test]
    fn add_grain_examples() {
        assert_eq!(cfg(3, &[2, 1, 2, 1, 2]).with_grain(), cfg(3, &[3, 1, 2, 1, 2]));
        assert_eq!(Config::zero(3).unwrap().with_grain(), cfg(3, &[1]));
        assert_eq!(cfg(3, &[0, 2, 5, 0, 1]).with_grain(), cfg(3, &[1, 2, 5, 0, 1]));
    }

    #[test]
    fn pi_examples() {
        assert_eq!(pi_of_n(3, 24).unwrap(), cfg(3, &[2, 1, 2, 1, 2]));
        assert_eq!(pi_of_n(3, 0).unwrap(), Config::zero(3).unwrap());
        assert_eq!(pi_of_n(3, 97).unwrap(), cfg(3, &[2, 0, 2, 0, 2, 1, 2, 2, 1, 0, 2, 1]));
    }

    #[test]
    fn shot_vector_examples() {
        assert_eq!(shot_vector(3, 97).unwrap().counts(), &[41, 14, 21, 12, 11, 7, 5, 3, 2, 1]);
        assert!(shot_vector(4, 0).unwrap().counts().is_empty());
        assert_eq!(shot_vector(3, 3).unwrap().counts(), &[1]);
    }

    #[test]
    fn shot_vector_matches_direct_stabilization() {
        for d in 2..=5 {
            for n in [0, 1, 7, 40, 123] {
                let direct = direct_shot_vector(&Config::stacked(d, n).unwrap());
                assert_eq!(direct, shot_vector(d, n as u64).unwrap(), "D={d} N={n}");
            }
        }
    }

    #[test]
    fn diamond_examples() {
        assert!(cfg(3, &[3, 3, 0, 0, 0]).check_diamond());
        assert!(cfg(3, &[6, 0, 3, 0, 0]).check_diamond());
        assert!(cfg(3, &[2, 1, 2, 1, 2]).check_diamond());
    }

    #[test]
    fn trailing_zeros_do_not_matter() {
        assert_eq!(cfg(3, &[2, 1, 0, 0]), cfg(3, &[2, 1]));
        assert_eq!(cfg(3, &[2, 1, 0]).effective_len(), 2);
        assert_eq!(Config::zero(3).unwrap().effective_len(), 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(Config::zero(1).unwrap_err(), KspmError::InvalidParameter(1));
        assert!(matches!(Config::new(3, vec![1, -1]), Err(KspmError::NegativeEntry { column: 1, value: -1 })));
    }

    #[test]
    fn heights_of_pi_24() {
        let fp = pi_of_n(3, 24).unwrap();
        assert_eq!(fp.heights(), vec![8, 6, 5, 3, 2]);
        assert_eq!(fp.total_grains(), 24);
    }

    proptest! {
        #[test]
        fn heights_round_trip(d in 2usize..7, v in proptest::collection::vec(0i64..9, 0..20)) {
            let c = Config::new(d, v).unwrap();
            let back = Config::from_heights(d, &c.heights()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn firing_conserves_grains(d in 2usize..7, v in proptest::collection::vec(0i64..20, 1..12)) {
            let mut c = Config::new(d, v).unwrap();
            let total = c.total_grains();
            while let Some(i) = c.leftmost_fireable() {
                c.fire(i).unwrap();
                prop_assert_eq!(c.total_grains(), total);
            }
        }

        #[test]
        fn diamond_on_random_configs(d in 2usize..6, v in proptest::collection::vec(0i64..12, 1..10)) {
            prop_assert!(Config::new(d, v).unwrap().check_diamond());
        }
    }
}
