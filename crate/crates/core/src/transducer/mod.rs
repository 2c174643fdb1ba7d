//! Interval states, traces and the finite-state word transducer relating the
//! trace on `I_i` to the trace on `I_{i+1}`.

pub mod trace;
pub mod words;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::check_d;
use crate::error::{KspmError, Result};

pub use trace::{trace_from_simulation, Trace};

/// A letter of the trace alphabet `{0, …, D-2}`.
pub type Letter = u8;

/// Height differences of a fixed point on one interval `I_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntervalState {
    pub values: Vec<u8>,
}

impl IntervalState {
    pub fn zero(d: usize) -> Self {
        IntervalState { values: vec![0; d - 1] }
    }

    pub fn new(d: usize, values: Vec<u8>) -> Result<Self> {
        check_d(d)?;
        if values.len() != d - 1 || values.iter().any(|&v| v as usize >= d) {
            return Err(KspmError::UnknownState(render_digits(&values)));
        }
        Ok(IntervalState { values })
    }

    /// Parses the digit form used in diagrams, e.g. `"21"`.
    pub fn parse(d: usize, text: &str) -> Result<Self> {
        let values = text
            .chars()
            .map(|c| c.to_digit(10).map(|v| v as u8))
            .collect::<Option<Vec<u8>>>()
            .ok_or_else(|| KspmError::UnknownState(text.to_string()))?;
        IntervalState::new(d, values)
    }

    pub fn d(&self) -> usize {
        self.values.len() + 1
    }
}

fn render_digits(values: &[u8]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(if values.iter().any(|&v| v > 9) { "," } else { "" })
}

impl fmt::Display for IntervalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_digits(&self.values))
    }
}

/// A word over `{0, …, D-2}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceWord {
    pub letters: Vec<Letter>,
}

impl TraceWord {
    pub fn new(d: usize, letters: Vec<Letter>) -> Result<Self> {
        check_d(d)?;
        let max = (d - 2) as u8;
        if let Some(&letter) = letters.iter().find(|&&l| l > max) {
            return Err(KspmError::InvalidLetter { letter, max });
        }
        Ok(TraceWord { letters })
    }

    pub fn empty() -> Self {
        TraceWord::default()
    }

    /// Parses `a`/`b` for `D = 3` and decimal digits otherwise. Digits are
    /// accepted for `D = 3` too; whitespace and commas are ignored.
    pub fn parse(d: usize, text: &str) -> Result<Self> {
        check_d(d)?;
        let mut letters = Vec::new();
        for c in text.chars() {
            let letter = match c {
                c if c.is_whitespace() || c == ',' => continue,
                'a' if d == 3 => 0,
                'b' if d == 3 => 1,
                c => c.to_digit(10).ok_or_else(|| KspmError::ParseWord(text.to_string()))? as u8,
            };
            letters.push(letter);
        }
        TraceWord::new(d, letters)
    }

    /// Text form: `a`/`b` for `D = 3`, digits otherwise.
    pub fn render(&self, d: usize) -> String {
        self.letters
            .iter()
            .map(|&l| if d == 3 { (b'a' + l) as char } else { char::from_digit(l as u32, 36).unwrap_or('?') })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_prefix_of(&self, other: &TraceWord) -> bool {
        other.letters.starts_with(&self.letters)
    }

    /// The regular word `(0, …, D-2)^n`.
    pub fn regular_cycles(d: usize, n: usize) -> Self {
        TraceWord { letters: (0..n).flat_map(|_| 0..(d - 1) as u8).collect() }
    }
}

impl From<Vec<Letter>> for TraceWord {
    fn from(letters: Vec<Letter>) -> Self {
        TraceWord { letters }
    }
}

/// `f(A, α)`: the largest `m` with `a_m = D-1`, provided some `m <= α`
/// has `a_m = D-1`.
pub fn f(state: &IntervalState, alpha: Letter) -> Option<Letter> {
    let top = state.values.len() as u8;
    let alpha = alpha as usize;
    if state.values.iter().take(alpha + 1).any(|&v| v == top) {
        state.values.iter().rposition(|&v| v == top).map(|m| m as u8)
    } else {
        None
    }
}

/// Result of one transition: next state, emitted word and the number of
/// recursive calls of `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub state: IntervalState,
    pub output: Vec<Letter>,
    pub depth: usize,
}

/// `δ(A, α)` computed by iterating `g` until `f` yields `ε`.
pub fn delta(state: &IntervalState, alpha: Letter) -> Step {
    let mut a = state.values.clone();
    let mut output = Vec::new();
    let mut depth = 0;
    loop {
        depth += 1;
        let current = IntervalState { values: a.clone() };
        match f(&current, alpha) {
            None => {
                for v in a.iter_mut().take(alpha as usize + 1) {
                    *v += 1;
                }
                return Step { state: IntervalState { values: a }, output, depth };
            }
            Some(p) => {
                let p = p as usize;
                a[p] = 0;
                for v in a.iter_mut().skip(p + 1) {
                    *v += 1;
                }
                output.push(p as u8);
            }
        }
    }
}

/// One labelled transition of a [`Transducer`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: IntervalState,
    pub input: Letter,
    pub to: IntervalState,
    pub output: TraceWord,
}

/// The transducer restricted to states reachable from `(0, …, 0)`.
#[derive(Clone, Debug)]
pub struct Transducer {
    d: usize,
    states: Vec<IntervalState>,
    index: HashMap<IntervalState, usize>,
    /// `table[s][α] = (next state, output)`.
    table: Vec<Vec<(usize, Vec<Letter>)>>,
    max_depth: usize,
}

impl Transducer {
    /// Breadth-first closure of `δ` from the initial state.
    pub fn build(d: usize) -> Result<Self> {
        check_d(d)?;
        let init = IntervalState::zero(d);
        let mut states = vec![init.clone()];
        let mut index = HashMap::from([(init, 0usize)]);
        let mut table: Vec<Vec<(usize, Vec<Letter>)>> = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        let mut max_depth = 0;
        let mut rows: HashMap<usize, Vec<(usize, Vec<Letter>)>> = HashMap::new();
        while let Some(s) = queue.pop_front() {
            let mut row = Vec::with_capacity(d - 1);
            for alpha in 0..(d - 1) as u8 {
                let step = delta(&states[s], alpha);
                max_depth = max_depth.max(step.depth);
                let next = match index.get(&step.state) {
                    Some(&i) => i,
                    None => {
                        let i = states.len();
                        states.push(step.state.clone());
                        index.insert(step.state, i);
                        queue.push_back(i);
                        i
                    }
                };
                row.push((next, step.output));
            }
            rows.insert(s, row);
        }
        for s in 0..states.len() {
            table.push(rows.remove(&s).expect("every state expanded"));
        }
        Ok(Transducer { d, states, index, table, max_depth })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn states(&self) -> &[IntervalState] {
        &self.states
    }

    pub fn initial(&self) -> &IntervalState {
        &self.states[0]
    }

    /// Largest number of `g` calls over all reachable transitions.
    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    fn state_index(&self, state: &IntervalState) -> Result<usize> {
        self.index.get(state).copied().ok_or_else(|| KspmError::UnknownState(state.to_string()))
    }

    fn check_word(&self, u: &TraceWord) -> Result<()> {
        let max = (self.d - 2) as u8;
        match u.letters.iter().find(|&&l| l > max) {
            Some(&letter) => Err(KspmError::InvalidLetter { letter, max }),
            None => Ok(()),
        }
    }

    pub fn step(&self, state: &IntervalState, alpha: Letter) -> Result<(IntervalState, TraceWord)> {
        let s = self.state_index(state)?;
        self.check_word(&TraceWord { letters: vec![alpha] })?;
        let (next, out) = &self.table[s][alpha as usize];
        Ok((self.states[*next].clone(), TraceWord { letters: out.clone() }))
    }

    /// Every transition, ordered by source state then input letter.
    pub fn edges(&self) -> Vec<Edge> {
        let mut order: Vec<usize> = (0..self.states.len()).collect();
        order.sort_by(|&a, &b| self.states[a].cmp(&self.states[b]));
        order
            .into_iter()
            .flat_map(|s| {
                self.table[s].iter().enumerate().map(move |(alpha, (next, out))| Edge {
                    from: self.states[s].clone(),
                    input: alpha as u8,
                    to: self.states[*next].clone(),
                    output: TraceWord { letters: out.clone() },
                })
            })
            .collect()
    }

    /// Edge list as `state,input,next_state,output` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,input,next_state,output\n");
        for e in self.edges() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.from,
                TraceWord { letters: vec![e.input] }.render(self.d),
                e.to,
                e.output.render(self.d)
            ));
        }
        out
    }

    /// `t_A(u)` and the state reached.
    pub fn run_from(&self, state: &IntervalState, u: &TraceWord) -> Result<(IntervalState, TraceWord)> {
        self.check_word(u)?;
        let mut s = self.state_index(state)?;
        let mut out = Vec::new();
        for &alpha in &u.letters {
            let (next, w) = &self.table[s][alpha as usize];
            out.extend_from_slice(w);
            s = *next;
        }
        Ok((self.states[s].clone(), TraceWord { letters: out }))
    }

    /// `t(u)`, starting from `(0, …, 0)`.
    pub fn transduce(&self, u: &TraceWord) -> Result<TraceWord> {
        Ok(self.run_from(self.initial(), u)?.1)
    }

    /// `t_A(u)`.
    pub fn transduce_from(&self, state: &IntervalState, u: &TraceWord) -> Result<TraceWord> {
        Ok(self.run_from(state, u)?.1)
    }

    /// `t^n(u)`.
    pub fn iterate(&self, u: &TraceWord, n: usize) -> Result<TraceWord> {
        let mut w = u.clone();
        for _ in 0..n {
            if w.is_empty() {
                break;
            }
            w = self.transduce(&w)?;
        }
        Ok(w)
    }

    /// States reachable from themselves.
    pub fn recurrent_states(&self) -> Vec<IntervalState> {
        let n = self.states.len();
        let mut reach = vec![vec![false; n]; n];
        for (s, row) in self.table.iter().enumerate() {
            for (next, _) in row {
                reach[s][*next] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    let via = reach[k].clone();
                    for (r, v) in reach[i].iter_mut().zip(via) {
                        *r |= v;
                    }
                }
            }
        }
        let mut out: Vec<IntervalState> = (0..n).filter(|&s| reach[s][s]).map(|s| self.states[s].clone()).collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(text: &str) -> IntervalState {
        IntervalState::parse(3, text).unwrap()
    }

    fn w(text: &str) -> TraceWord {
        TraceWord::parse(3, text).unwrap()
    }

    #[test]
    fn f_examples() {
        assert_eq!(f(&st("21"), 1), Some(0));
        assert_eq!(f(&st("00"), 0), None);
        assert_eq!(f(&st("00"), 1), None);
        let s = IntervalState::new(4, vec![3, 0, 3]).unwrap();
        assert_eq!(f(&s, 2), Some(2));
        assert_eq!(f(&IntervalState::new(4, vec![0, 0, 3]).unwrap(), 1), None);
    }

    #[test]
    fn delta_examples() {
        let s = delta(&st("00"), 0);
        assert_eq!((s.state, s.output), (st("10"), vec![]));
        let s = delta(&st("21"), 1);
        assert_eq!((s.state, s.output), (st("11"), vec![0, 1]));
        let s = delta(&st("22"), 0);
        assert_eq!((s.state, s.output), (st("11"), vec![1, 0]));
    }

    #[test]
    fn d3_closure() {
        let t = Transducer::build(3).unwrap();
        let mut names: Vec<String> = t.states().iter().map(|s| s.to_string()).collect();
        names.sort();
        assert_eq!(names, vec!["00", "10", "11", "12", "20", "21", "22"]);
        let rec: Vec<String> = t.recurrent_states().iter().map(|s| s.to_string()).collect();
        assert_eq!(rec, vec!["11", "12", "21", "22"]);
        assert_eq!(t.edges().len(), 14);
    }

    #[test]
    fn d2_closure() {
        let t = Transducer::build(2).unwrap();
        let names: Vec<String> = t.states().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, vec!["0", "1"]);
        let (next, out) = t.step(&IntervalState::zero(2), 0).unwrap();
        assert_eq!((next.to_string(), out.letters), ("1".to_string(), vec![]));
        let (next, out) = t.step(&IntervalState::parse(2, "1").unwrap(), 0).unwrap();
        assert_eq!((next.to_string(), out.letters), ("1".to_string(), vec![0]));
    }

    #[test]
    fn published_transductions() {
        let t = Transducer::build(3).unwrap();
        assert_eq!(t.transduce(&w("abaaaaab")).unwrap(), w("abaab"));
        assert_eq!(t.transduce(&w("")).unwrap(), w(""));
        for n in 1..=20 {
            let u = TraceWord::regular_cycles(3, n);
            assert_eq!(t.transduce(&u).unwrap(), TraceWord::regular_cycles(3, n - 1));
        }
        let a21 = st("21");
        assert_eq!(t.transduce_from(&a21, &w("aaaa")).unwrap(), w("aba"));
        assert_eq!(t.transduce_from(&a21, &w("bbbb")).unwrap(), w("abbab"));
        assert_eq!(t.transduce_from(&a21, &w("")).unwrap(), w(""));
        assert!(matches!(t.transduce_from(&st("01"), &w("a")), Err(KspmError::UnknownState(_))));
    }

    #[test]
    fn iterate_examples() {
        let t = Transducer::build(3).unwrap();
        let u = TraceWord::regular_cycles(3, 5);
        assert!(t.iterate(&u, 5).unwrap().is_empty());
        assert_eq!(t.iterate(&u, 0).unwrap(), u);
        let once = t.transduce(&w("abaaaaab")).unwrap();
        assert_eq!(t.iterate(&w("abaaaaab"), 2).unwrap(), t.transduce(&once).unwrap());
    }

    #[test]
    fn word_text_forms() {
        assert_eq!(w("abba").letters, vec![0, 1, 1, 0]);
        assert_eq!(w("0110"), w("abba"));
        assert_eq!(w("abba").render(3), "abba");
        let u = TraceWord::parse(4, "0120120").unwrap();
        assert_eq!(u.render(4), "0120120");
        assert!(matches!(TraceWord::parse(4, "013"), Err(KspmError::InvalidLetter { letter: 3, max: 2 })));
        assert!(TraceWord::parse(3, "abc").is_err());
    }

    #[test]
    fn fixed_word_for_several_d() {
        for d in 3..=5 {
            let t = Transducer::build(d).unwrap();
            for n in 1..=50 {
                let u = TraceWord::regular_cycles(d, n);
                assert_eq!(t.transduce(&u).unwrap(), TraceWord::regular_cycles(d, n - 1), "D={d} n={n}");
            }
        }
    }

    #[test]
    fn recursion_depth_is_bounded() {
        for d in 2..=6 {
            let t = Transducer::build(d).unwrap();
            assert!(t.max_depth() <= d * (d - 1), "D={d}");
        }
    }

    #[test]
    fn csv_export_is_sorted() {
        let csv = Transducer::build(3).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "state,input,next_state,output");
        assert_eq!(lines[1], "00,a,10,");
        assert_eq!(lines.len(), 15);
    }
}
