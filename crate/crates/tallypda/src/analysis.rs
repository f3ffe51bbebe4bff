//! Per-mode static analysis of ε-evolution.
//!
//! The ε-run from a mode `[qA]` either pops `A` (exiting in a unique state),
//! stops at a mode demanding input, dies at a mode with no move, or runs
//! forever. The classification is a memoized recursion over modes: a push
//! descends into the segment of the pushed symbol and, when that segment
//! exits, continues at the exit state on the original symbol. Re-entering a
//! mode whose evaluation is still pending means the run revisits that mode at
//! no lower height with no dip in between, which pumps forever, so every
//! pending evaluation resolves to `Loops`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dpda::{Action, Dpda, InputTag, Mode, Rule, StateId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("mode [{state} {symbol}] is not classified as looping")]
    UndefinedForMode { state: String, symbol: String },
}

/// Result of running only ε-moves from a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsBehavior {
    /// The run removes the mode's symbol, ending in `exit`.
    Pops { exit: StateId },
    /// The run stops at `blocker`, whose move reads an input symbol.
    NeedsInput { blocker: Mode },
    /// The run stops at `blocker`, which has no move at all.
    Dead { blocker: Mode },
    /// The run never terminates.
    Loops,
}

/// `exit[qA]`: the unique state in which the computation segment from
/// `(q, A)` finishes popping `A`, when it ever does. Input-consuming reads
/// are traversed, so the segment may consume symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExitTable {
    n_symbols: usize,
    exits: Vec<Option<StateId>>,
}

impl ExitTable {
    pub fn get(&self, mode: Mode) -> Option<StateId> {
        self.exits[mode.state * self.n_symbols + mode.top]
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Traversal {
    EpsOnly,
    WithReads,
}

struct Classifier<'a> {
    m: &'a Dpda,
    traversal: Traversal,
    memo: Vec<Option<EpsBehavior>>,
    pending: Vec<bool>,
}

impl<'a> Classifier<'a> {
    fn new(m: &'a Dpda, traversal: Traversal) -> Self {
        let modes = m.n_states() * m.n_symbols();
        Classifier {
            m,
            traversal,
            memo: vec![None; modes],
            pending: vec![false; modes],
        }
    }

    fn idx(&self, mode: Mode) -> usize {
        mode.state * self.m.n_symbols() + mode.top
    }

    fn eval(&mut self, mode: Mode) -> EpsBehavior {
        let idx = self.idx(mode);
        if let Some(done) = self.memo[idx] {
            return done;
        }
        if self.pending[idx] {
            return EpsBehavior::Loops;
        }
        self.pending[idx] = true;
        let result = self.eval_fresh(mode);
        self.pending[idx] = false;
        self.memo[idx] = Some(result);
        result
    }

    fn eval_fresh(&mut self, mode: Mode) -> EpsBehavior {
        let eps_action = self.m.action(mode.state, InputTag::Eps, mode.top);
        let action = match (eps_action, self.traversal) {
            (Some(act), _) => act,
            (None, Traversal::EpsOnly) => {
                return if self.m.action(mode.state, InputTag::A, mode.top).is_some() {
                    EpsBehavior::NeedsInput { blocker: mode }
                } else {
                    EpsBehavior::Dead { blocker: mode }
                };
            }
            (None, Traversal::WithReads) => {
                match self.m.action(mode.state, InputTag::A, mode.top) {
                    Some(act) => act,
                    None => return EpsBehavior::Dead { blocker: mode },
                }
            }
        };
        match action {
            Action::Read { target } => self.eval(Mode {
                state: target,
                top: mode.top,
            }),
            Action::Pop { target } => EpsBehavior::Pops { exit: target },
            Action::Push { target, symbol } => {
                let inner = self.eval(Mode {
                    state: target,
                    top: symbol,
                });
                match inner {
                    EpsBehavior::Pops { exit } => self.eval(Mode {
                        state: exit,
                        top: mode.top,
                    }),
                    other => other,
                }
            }
        }
    }

    fn run(mut self) -> Vec<EpsBehavior> {
        let mut out = Vec::with_capacity(self.memo.len());
        for state in 0..self.m.n_states() {
            for top in 0..self.m.n_symbols() {
                out.push(self.eval(Mode { state, top }));
            }
        }
        out
    }
}

fn all_modes(m: &Dpda) -> impl Iterator<Item = Mode> + '_ {
    (0..m.n_states()).flat_map(move |state| {
        (0..m.n_symbols()).map(move |top| Mode { state, top })
    })
}

/// Classifies the ε-evolution of every mode.
pub fn eps_behavior(m: &Dpda) -> BTreeMap<Mode, EpsBehavior> {
    let table = Classifier::new(m, Traversal::EpsOnly).run();
    all_modes(m)
        .map(|mode| (mode, table[mode.state * m.n_symbols() + mode.top]))
        .collect()
}

/// Computes `exit[qA]` for every mode; reads are traversed.
pub fn exit_table(m: &Dpda) -> ExitTable {
    let table = Classifier::new(m, Traversal::WithReads).run();
    ExitTable {
        n_symbols: m.n_symbols(),
        exits: table
            .into_iter()
            .map(|b| match b {
                EpsBehavior::Pops { exit } => Some(exit),
                _ => None,
            })
            .collect(),
    }
}

/// For every looping mode, whether its infinite ε-run passes through a final
/// state. Segments traversed on the way down count: a loop that descends
/// through a popping segment containing a final state is accepting.
pub fn loop_visits_final(m: &Dpda) -> BTreeMap<Mode, bool> {
    let table = Classifier::new(m, Traversal::EpsOnly).run();
    let n_symbols = m.n_symbols();
    let idx = |mode: Mode| mode.state * n_symbols + mode.top;

    // Final-state occurrence within the segment of a popping mode, exit
    // state excluded (the continuation counts it as its own start).
    let mut seg_memo: Vec<Option<bool>> = vec![None; table.len()];
    fn seg_final(
        m: &Dpda,
        table: &[EpsBehavior],
        seg_memo: &mut [Option<bool>],
        mode: Mode,
    ) -> bool {
        let idx = mode.state * m.n_symbols() + mode.top;
        if let Some(done) = seg_memo[idx] {
            return done;
        }
        debug_assert!(matches!(table[idx], EpsBehavior::Pops { .. }));
        // No cycles among popping modes: a revisit would pump, contradicting
        // the classification. Mark eagerly so a bug shows up as `false`
        // rather than an infinite recursion.
        seg_memo[idx] = Some(false);
        let own = m.is_final(mode.state);
        let action = m
            .action(mode.state, InputTag::Eps, mode.top)
            .expect("popping modes act on eps");
        let rest = match action {
            Action::Pop { .. } => false,
            Action::Read { target } => seg_final(
                m,
                table,
                seg_memo,
                Mode {
                    state: target,
                    top: mode.top,
                },
            ),
            Action::Push { target, symbol } => {
                let inner = Mode {
                    state: target,
                    top: symbol,
                };
                let EpsBehavior::Pops { exit } = table[target * m.n_symbols() + symbol] else {
                    unreachable!("push inside a popping segment must pop");
                };
                seg_final(m, table, seg_memo, inner)
                    || seg_final(
                        m,
                        table,
                        seg_memo,
                        Mode {
                            state: exit,
                            top: mode.top,
                        },
                    )
            }
        };
        let result = own || rest;
        seg_memo[idx] = Some(result);
        result
    }

    let loop_modes: Vec<Mode> = all_modes(m)
        .filter(|&mode| table[idx(mode)] == EpsBehavior::Loops)
        .collect();

    // Own flag plus successors inside the loop graph.
    let mut own = BTreeMap::new();
    let mut succs: BTreeMap<Mode, Vec<Mode>> = BTreeMap::new();
    for &mode in &loop_modes {
        let mut flag = m.is_final(mode.state);
        let mut next = Vec::new();
        let action = m
            .action(mode.state, InputTag::Eps, mode.top)
            .expect("looping modes act on eps");
        match action {
            Action::Read { target } => next.push(Mode {
                state: target,
                top: mode.top,
            }),
            Action::Push { target, symbol } => {
                let inner = Mode {
                    state: target,
                    top: symbol,
                };
                match table[idx(inner)] {
                    EpsBehavior::Loops => next.push(inner),
                    EpsBehavior::Pops { exit } => {
                        flag |= seg_final(m, &table, &mut seg_memo, inner);
                        next.push(Mode {
                            state: exit,
                            top: mode.top,
                        });
                    }
                    _ => unreachable!("a loop cannot pass through a stuck segment"),
                }
            }
            Action::Pop { .. } => unreachable!("a popping mode is not looping"),
        }
        own.insert(mode, flag);
        succs.insert(mode, next);
    }

    // Reachability fixpoint over the (cyclic) loop graph.
    let mut reach = own.clone();
    loop {
        let mut changed = false;
        for &mode in &loop_modes {
            if reach[&mode] {
                continue;
            }
            if succs[&mode].iter().any(|s| reach.get(s).copied().unwrap_or(false)) {
                reach.insert(mode, true);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    reach
}

/// `loop_visits_final` for one mode; an error if the mode does not loop.
pub fn loop_visits_final_for(m: &Dpda, mode: Mode) -> Result<bool, AnalysisError> {
    loop_visits_final(m)
        .get(&mode)
        .copied()
        .ok_or_else(|| AnalysisError::UndefinedForMode {
            state: m.state_name(mode.state).to_string(),
            symbol: m.symbol_name(mode.top).to_string(),
        })
}

fn fresh_state_name(m: &Dpda, base: &str) -> String {
    let mut name = base.to_string();
    while m.state_index(&name).is_some() {
        name.push('_');
    }
    name
}

/// Replaces every looping mode's move with an ε-read into one of two fresh
/// halting states, accepting when the loop passes through a final state.
/// Loop-free machines are returned unchanged. The language is preserved: an
/// input driven into an accepting loop is accepted at the halt state instead,
/// and longer inputs are rejected either way because reading stops.
pub fn make_loop_free(m: &Dpda) -> Dpda {
    let table = Classifier::new(m, Traversal::EpsOnly).run();
    let n_symbols = m.n_symbols();
    let looping: Vec<Mode> = all_modes(m)
        .filter(|&mode| table[mode.state * n_symbols + mode.top] == EpsBehavior::Loops)
        .collect();
    if looping.is_empty() {
        return m.clone();
    }
    let lvf = loop_visits_final(m);
    let need_acc = looping.iter().any(|mode| lvf[mode]);
    let need_rej = looping.iter().any(|mode| !lvf[mode]);

    let mut state_names: Vec<String> = m.state_names().to_vec();
    let mut finals: Vec<StateId> = m.final_states().collect();
    let acc_halt = need_acc.then(|| {
        let id = state_names.len();
        state_names.push(fresh_state_name(m, "accHalt"));
        finals.push(id);
        id
    });
    let rej_halt = need_rej.then(|| {
        let id = state_names.len();
        state_names.push(fresh_state_name(m, "rejHalt"));
        id
    });

    let rules = m
        .rules()
        .iter()
        .map(|r| {
            let mode = Mode {
                state: r.state,
                top: r.symbol,
            };
            if r.tag == InputTag::Eps
                && table[r.state * n_symbols + r.symbol] == EpsBehavior::Loops
            {
                let target = if lvf[&mode] {
                    acc_halt.expect("accepting halt state exists")
                } else {
                    rej_halt.expect("rejecting halt state exists")
                };
                Rule {
                    action: Action::Read { target },
                    ..r.clone()
                }
            } else {
                r.clone()
            }
        })
        .collect();

    Dpda::new(
        state_names,
        m.symbol_names().to_vec(),
        m.initial(),
        m.bottom(),
        finals,
        rules,
    )
}
