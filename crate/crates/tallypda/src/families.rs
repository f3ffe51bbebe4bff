//! Benchmark families and generators.
//!
//! `gen_ls` builds the four-state machine that counts to `2^s` by recursive
//! doubling on the stack; the de Bruijn constructions build the cyclic
//! languages whose pushdown machines cannot be small, together with the
//! pipeline that squeezes a de Bruijn word out of a grammar; `gen_random`
//! produces a reproducible corpus of valid machines for property tests.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dpda::{Action, Dpda, InputTag, Rule, StateId};
use crate::grammar::{relabel_reads, to_grammar, Cfg};
use crate::immediate::immediate_accept;
use crate::udfa::UnaryDfa;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamiliesError {
    #[error("word-grammar order {m} outside the supported range 1..={max}")]
    OrderOutOfRange { m: usize, max: usize },
}

/// The machine accepting the multiples of `2^s`, of size `8s + 4`.
///
/// Consuming `2^i` symbols is a recursive procedure: symbol `A_i` tracks the
/// first half, `B_i` the second. State `q1` descends pushing `A`s, `q3`
/// returns from a completed half, `q2` switches a completed first half to
/// its second, and `q0` (the only final state) marks a completed block of
/// `2^s` symbols over the bare bottom symbol.
pub fn gen_ls(s: usize) -> Dpda {
    assert!(s >= 1, "order must be at least 1");
    let states = vec!["q0".into(), "q1".into(), "q2".into(), "q3".into()];
    let (q0, q1, q2, q3) = (0, 1, 2, 3);
    let mut symbols = vec!["Z0".to_string()];
    symbols.extend((0..s).map(|i| format!("A{i}")));
    symbols.extend((0..s).map(|i| format!("B{i}")));
    let z0 = 0;
    let a = |i: usize| 1 + i;
    let b = |i: usize| 1 + s + i;

    let mut rules = Vec::new();
    let mut rule = |state: usize, tag: InputTag, symbol: usize, action: Action| {
        rules.push(Rule {
            state,
            tag,
            symbol,
            action,
        });
    };
    rule(q0, InputTag::Eps, z0, Action::Push { target: q1, symbol: a(s - 1) });
    rule(q1, InputTag::A, a(0), Action::Read { target: q3 });
    rule(q1, InputTag::A, b(0), Action::Read { target: q3 });
    for i in 1..s {
        rule(q1, InputTag::Eps, a(i), Action::Push { target: q1, symbol: a(i - 1) });
        rule(q1, InputTag::Eps, b(i), Action::Push { target: q1, symbol: a(i - 1) });
    }
    for i in 1..s {
        rule(q2, InputTag::Eps, a(i), Action::Push { target: q1, symbol: b(i - 1) });
        rule(q2, InputTag::Eps, b(i), Action::Push { target: q1, symbol: b(i - 1) });
    }
    for i in 0..s {
        rule(q3, InputTag::Eps, a(i), Action::Pop { target: q2 });
    }
    for i in 0..s {
        rule(q3, InputTag::Eps, b(i), Action::Pop { target: q3 });
    }
    rule(q2, InputTag::Eps, z0, Action::Push { target: q1, symbol: b(s - 1) });
    // The return to the final state consumes nothing and leaves the bare
    // bottom symbol in place, closing the 2^s block.
    rule(q3, InputTag::Eps, z0, Action::Read { target: q0 });

    Dpda::new(states, symbols, q0, z0, vec![q0], rules)
}

/// The lexicographically least binary de Bruijn word of order `m`, extended
/// by its own length-`m-1` prefix: every binary word of length `m` occurs
/// exactly once as a factor, and the length is `2^m + m - 1`.
pub fn de_bruijn_word(m: usize) -> String {
    assert!(m >= 1, "order must be at least 1");
    assert!(m <= 24, "order {m} would not fit in memory");
    // Concatenation of the binary Lyndon words of length dividing m, in
    // lexicographic order, yields the least de Bruijn cycle.
    fn lyndon(t: usize, p: usize, m: usize, a: &mut [u8], seq: &mut Vec<u8>) {
        if t > m {
            if m % p == 0 {
                seq.extend_from_slice(&a[1..=p]);
            }
        } else {
            a[t] = a[t - p];
            lyndon(t + 1, p, m, a, seq);
            if a[t - p] == 0 {
                a[t] = 1;
                lyndon(t + 1, t, m, a, seq);
            }
        }
    }
    let mut seq = Vec::with_capacity((1 << m) + m - 1);
    let mut scratch = vec![0u8; m + 1];
    lyndon(1, 1, m, &mut scratch, &mut seq);
    debug_assert_eq!(seq.len(), 1 << m);
    let wrap: Vec<u8> = seq[..m - 1].to_vec();
    seq.extend(wrap);
    seq.into_iter().map(|bit| if bit == 1 { '1' } else { '0' }).collect()
}

/// Remainder mapped into `1..=y`: the representative of `x` modulo `y` with
/// `y` standing in for zero.
pub fn mod_prime(x: usize, y: usize) -> usize {
    assert!(y >= 1);
    let r = x % y;
    if r > 0 {
        r
    } else {
        y
    }
}

/// The purely `2^m`-cyclic language whose length-`k` membership is letter
/// `mod'(k, 2^m)` of the order-`m` de Bruijn word, letters counted from 1.
pub fn bm_udfa(m: usize) -> UnaryDfa {
    assert!((1..=20).contains(&m), "order {m} out of range");
    let word: Vec<bool> = de_bruijn_word(m).chars().map(|c| c == '1').collect();
    let cycle = 1usize << m;
    let period = (0..cycle).map(|i| word[mod_prime(i, cycle) - 1]).collect();
    UnaryDfa::new(Vec::new(), period)
}

/// A stack-oblivious machine for an arbitrary unary automaton: one state per
/// bit of the tail and cycle, chained by input reads, finals at the 1-bits.
pub fn dpda_from_udfa(d: &UnaryDfa) -> Dpda {
    let p = d.preperiod().len();
    let total = d.state_count();
    let state_names: Vec<String> = (0..total).map(|i| format!("s{i}")).collect();
    let finals: Vec<StateId> = (0..total).filter(|&i| d.member(i)).collect();
    let rules: Vec<Rule> = (0..total)
        .map(|i| Rule {
            state: i,
            tag: InputTag::A,
            symbol: 0,
            action: Action::Read {
                target: if i + 1 < total { i + 1 } else { p },
            },
        })
        .collect();
    Dpda::new(state_names, vec!["Z0".into()], 0, 0, finals, rules)
}

/// First-occurrence matcher for a binary pattern: state `k` means the last
/// `k` input bits are the longest prefix of the pattern ending here, and
/// state `|w|` is entered exactly when the pattern first completes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternDfa {
    pattern: Vec<bool>,
    // transitions[state][bit], for the non-accepting states 0..|w|.
    transitions: Vec<[usize; 2]>,
}

impl PatternDfa {
    pub fn pattern_len(&self) -> usize {
        self.pattern.len()
    }

    /// Total state count, accepting state included.
    pub fn state_count(&self) -> usize {
        self.pattern.len() + 1
    }

    pub fn accept_state(&self) -> usize {
        self.pattern.len()
    }

    pub fn delta(&self, state: usize, bit: bool) -> usize {
        self.transitions[state][bit as usize]
    }

    /// Whether the word ends with the pattern and contains no earlier
    /// occurrence of it. The accepting state halts, so a match before the
    /// final bit strands the remaining input.
    pub fn accepts(&self, word: &str) -> bool {
        let mut state = 0;
        for (i, c) in word.chars().enumerate() {
            if state == self.accept_state() {
                return false;
            }
            debug_assert!(c == '0' || c == '1');
            let _ = i;
            state = self.delta(state, c == '1');
        }
        state == self.accept_state()
    }
}

/// The failure-function automaton of `pattern` (a word over `{0, 1}`).
pub fn suffix_dfa(pattern: &str) -> PatternDfa {
    assert!(!pattern.is_empty());
    let bits: Vec<bool> = pattern
        .chars()
        .map(|c| {
            assert!(c == '0' || c == '1', "pattern must be binary");
            c == '1'
        })
        .collect();
    let len = bits.len();
    // Longest proper prefix of the pattern that is a suffix of pattern[..=i].
    let mut lps = vec![0usize; len];
    for i in 1..len {
        let mut k = lps[i - 1];
        while k > 0 && bits[i] != bits[k] {
            k = lps[k - 1];
        }
        if bits[i] == bits[k] {
            k += 1;
        }
        lps[i] = k;
    }
    let mut transitions = vec![[0usize; 2]; len];
    for state in 0..len {
        for bit in 0..2 {
            let wanted = bit == 1;
            let mut k = state;
            transitions[state][bit] = loop {
                if bits[k] == wanted {
                    break k + 1;
                }
                if k == 0 {
                    break 0;
                }
                k = lps[k - 1];
            };
        }
    }
    PatternDfa {
        pattern: bits,
        transitions,
    }
}

fn product_with_finality(mi: &Dpda, pattern: &PatternDfa) -> (Dpda, BTreeMap<String, bool>) {
    let mp = pattern.pattern_len();
    let width = mp + 1;
    let id = |q: StateId, i: usize| q * width + i;
    let mut state_names = Vec::with_capacity(mi.n_states() * width);
    let mut finality = BTreeMap::new();
    for q in 0..mi.n_states() {
        for i in 0..width {
            let name = format!("{}@{}", mi.state_name(q), i);
            finality.insert(name.clone(), mi.is_final(q));
            state_names.push(name);
        }
    }
    let finals: Vec<StateId> = (0..mi.n_states()).map(|q| id(q, mp)).collect();
    let mut rules = Vec::new();
    for r in mi.rules() {
        for i in 0..mp {
            let action = match r.action {
                Action::Read { target } => {
                    let j = if r.tag == InputTag::A {
                        pattern.delta(i, mi.is_final(target))
                    } else {
                        i
                    };
                    Action::Read {
                        target: id(target, j),
                    }
                }
                Action::Pop { target } => Action::Pop {
                    target: id(target, i),
                },
                Action::Push { target, symbol } => Action::Push {
                    target: id(target, i),
                    symbol,
                },
            };
            rules.push(Rule {
                state: id(r.state, i),
                tag: r.tag,
                symbol: r.symbol,
                action,
            });
        }
    }
    let product = Dpda::new(
        state_names,
        mi.symbol_names().to_vec(),
        id(mi.initial(), 0),
        mi.bottom(),
        finals,
        rules,
    );
    (product, finality)
}

/// Product of an immediate-acceptance machine with a pattern matcher fed the
/// acceptance bit of every read. States pairing the matcher's accepting
/// state are final and have no moves, so the machine stops at the first
/// pattern completion.
pub fn product_halt(mi: &Dpda, pattern: &PatternDfa) -> Dpda {
    product_with_finality(mi, pattern).0
}

pub const MAX_WORD_GRAMMAR_ORDER: usize = 6;

/// Builds a grammar generating exactly the order-`m` de Bruijn word: the
/// cyclic-language machine is made immediate, crossed with the matcher for
/// the word's length-`m` suffix, converted to a grammar, and its reads are
/// relabeled with the acceptance bits they announce.
pub fn word_grammar_pipeline(m: usize) -> Result<Cfg, FamiliesError> {
    if !(1..=MAX_WORD_GRAMMAR_ORDER).contains(&m) {
        return Err(FamiliesError::OrderOutOfRange {
            m,
            max: MAX_WORD_GRAMMAR_ORDER,
        });
    }
    let word = de_bruijn_word(m);
    let mi = immediate_accept(&dpda_from_udfa(&bm_udfa(m)));
    let pattern = suffix_dfa(&word[word.len() - m..]);
    let (product, finality) = product_with_finality(&mi, &pattern);
    let g = to_grammar(&product);
    Ok(relabel_reads(&g, &finality).expect("the finality map covers every product state"))
}

/// A reproducible valid machine: every (state, symbol) pair independently
/// gets no move, an input read, an ε-read, a push of a non-bottom symbol, or
/// (off the bottom) a pop; finals are drawn per state.
pub fn gen_random(n: usize, m: usize, seed: u64) -> Dpda {
    assert!(n >= 1 && m >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state_names: Vec<String> = (0..n).map(|q| format!("q{q}")).collect();
    let mut symbol_names = vec!["Z0".to_string()];
    symbol_names.extend((1..m).map(|z| format!("A{z}")));

    #[derive(Clone, Copy)]
    enum Choice {
        Nothing,
        InputRead,
        EpsRead,
        Push,
        Pop,
    }

    let mut rules = Vec::new();
    for q in 0..n {
        for z in 0..m {
            let mut options = vec![Choice::Nothing, Choice::InputRead, Choice::EpsRead];
            if m >= 2 {
                options.push(Choice::Push);
            }
            if z != 0 {
                options.push(Choice::Pop);
            }
            let choice = options[rng.gen_range(0..options.len())];
            let action = match choice {
                Choice::Nothing => continue,
                Choice::InputRead | Choice::EpsRead => Action::Read {
                    target: rng.gen_range(0..n),
                },
                Choice::Push => Action::Push {
                    target: rng.gen_range(0..n),
                    symbol: rng.gen_range(1..m),
                },
                Choice::Pop => Action::Pop {
                    target: rng.gen_range(0..n),
                },
            };
            let tag = match choice {
                Choice::InputRead => InputTag::A,
                _ => InputTag::Eps,
            };
            rules.push(Rule {
                state: q,
                tag,
                symbol: z,
                action,
            });
        }
    }
    let finals: Vec<StateId> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    Dpda::new(state_names, symbol_names, 0, 0, finals, rules)
}
