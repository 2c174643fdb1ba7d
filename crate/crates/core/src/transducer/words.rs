//! Word analysis for `D = 3`: heights, the language `𝓛 = ab·{a,b}* ∪ {ε, a}`,
//! basic words and convergence to a prefix of `(ab)^ω`.

use std::collections::VecDeque;

use super::{IntervalState, TraceWord, Transducer};
use crate::error::{KspmError, Result};

const A: u8 = 0;
const B: u8 = 1;

/// Longest basic word explored before giving up.
pub const BASIC_WORD_CAP: usize = 8;

fn signed_height(u: &[u8]) -> i64 {
    u.iter().map(|&l| if l == A { 1 } else { -1 }).sum()
}

/// `h(u) = ||u|_a - |u|_b|`.
pub fn height(u: &TraceWord) -> usize {
    signed_height(&u.letters).unsigned_abs() as usize
}

/// Largest height over all prefixes of `v`.
pub fn max_height(v: &TraceWord) -> usize {
    let mut acc = 0i64;
    let mut best = 0;
    for &l in &v.letters {
        acc += if l == A { 1 } else { -1 };
        best = best.max(acc.unsigned_abs() as usize);
    }
    best
}

/// Membership in `𝓛 = {ab·u} ∪ {ε, a}`.
pub fn in_language_l(v: &TraceWord) -> bool {
    matches!(v.letters.as_slice(), [] | [A] | [A, B, ..])
}

/// Whether `u` is a prefix of `(ab)^ω`.
pub fn is_ab_prefix(u: &TraceWord) -> bool {
    u.letters.iter().enumerate().all(|(i, &l)| l == (i % 2) as u8)
}

/// `⌈log₄(4|u| + 4/3) − log₄(2/3) + 3⌉ + 1`.
pub fn convergence_bound(len: usize) -> usize {
    let log4 = |x: f64| x.ln() / 4f64.ln();
    let x = log4(4.0 * len as f64 + 4.0 / 3.0) - log4(2.0 / 3.0) + 3.0;
    x.ceil() as usize + 1
}

/// Smallest `n` such that `t^n(u)` is a prefix of `(ab)^ω`.
pub fn convergence_index(t: &Transducer, u: &TraceWord, cap: usize) -> Result<usize> {
    let mut w = u.clone();
    for n in 0..=cap {
        if is_ab_prefix(&w) {
            return Ok(n);
        }
        w = t.transduce(&w)?;
    }
    Err(KspmError::BudgetExceeded(cap))
}

/// Basic words for `state` with their images under `t_A`, in
/// lexicographic order.
///
/// A word is basic when its image has length at least 2 while every proper
/// prefix has an image of length below 2.
pub fn basic_words(t: &Transducer, state: &IntervalState) -> Result<Vec<(TraceWord, TraceWord)>> {
    let alphabet = (t.d() - 1) as u8;
    let mut out = Vec::new();
    let mut frontier = VecDeque::from([TraceWord::empty()]);
    while let Some(w) = frontier.pop_front() {
        for letter in 0..alphabet {
            let mut next = w.clone();
            next.letters.push(letter);
            let image = t.transduce_from(state, &next)?;
            if image.len() >= 2 {
                out.push((next, image));
            } else if next.len() < BASIC_WORD_CAP {
                frontier.push_back(next);
            } else {
                return Err(KspmError::BudgetExceeded(BASIC_WORD_CAP));
            }
        }
    }
    out.sort();
    Ok(out)
}
