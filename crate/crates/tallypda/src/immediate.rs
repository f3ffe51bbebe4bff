//! The immediate-acceptance transform.
//!
//! Every input-consuming read of the source machine is postponed: the
//! machine moves into a debt-carrying copy of the target state by an ε-move,
//! and the actual symbol is consumed only when a final state is reached (the
//! debt is paid, landing in the original final state) or when the source
//! machine would read again (a real read, debt kept). As a result a word is
//! accepted exactly when the state reached immediately after its last symbol
//! is final, which lets acceptance bits be read directly off post-read
//! states.

use crate::dpda::{Action, Dpda, InputTag, Rule, StateId};
use crate::sim::{exec_step, Budget, Configuration, Exec, PumpDetector, SimError};

/// Whether the empty word is accepted: ε-evolution from the initial
/// configuration, stopping at the first read demand, halt, or pump trigger.
pub fn accepts_epsilon(m: &Dpda, b: &Budget) -> Result<bool, SimError> {
    let mut c = Configuration::initial(m);
    let mut det = PumpDetector::new(m.n_states() * m.n_symbols());
    let mut seen_final = m.is_final(c.state);
    let mut step = 0usize;
    loop {
        let mode = c.state * m.n_symbols() + c.top().expect("bottom stays on the stack");
        if det.observe(mode, c.height(), step, 0).is_some() {
            return Ok(seen_final);
        }
        if step >= b.max_steps() {
            return Err(SimError::BudgetExceeded {
                max_steps: b.max_steps(),
            });
        }
        let height_before = c.height();
        match exec_step(m, &mut c, false)? {
            Exec::Halt | Exec::NeedsInput => return Ok(seen_final),
            Exec::Advanced { .. } => {
                if c.height() < height_before {
                    det.clear_height(height_before);
                }
                seen_final |= m.is_final(c.state);
                step += 1;
            }
        }
    }
}

fn tilde_marker(m: &Dpda) -> String {
    let mut marker = String::from("~");
    loop {
        let collides = m
            .state_names()
            .iter()
            .any(|q| m.state_index(&format!("{q}{marker}")).is_some());
        if !collides {
            return marker;
        }
        marker.push('~');
    }
}

/// Builds the equivalent machine with `2n + 1` states in which acceptance of
/// a word is decided by the state reached immediately after its last read.
///
/// States `0..n` are the originals, `n..2n` their debt-carrying copies, and
/// `2n` the fresh initial state. Debt copies are named by suffixing a marker
/// chosen so no name collides with an existing state.
///
/// Panics if deciding ε-acceptance of the source machine exceeds the default
/// step budget, which cannot happen within the provable bound for machines of
/// tractable size.
pub fn immediate_accept(m: &Dpda) -> Dpda {
    debug_assert!(m.validate().is_empty(), "input machine must be valid");
    let n = m.n_states();
    let marker = tilde_marker(m);
    let tilde = |q: StateId| n + q;

    let mut state_names: Vec<String> = m.state_names().to_vec();
    state_names.extend(m.state_names().iter().map(|q| format!("{q}{marker}")));
    let mut new_initial_name = format!("{}'", m.state_name(m.initial()));
    while state_names.contains(&new_initial_name) {
        new_initial_name.push('\'');
    }
    state_names.push(new_initial_name);
    let new_initial = 2 * n;

    let mut rules: Vec<Rule> = Vec::new();
    // Original states keep their ε-moves; their reads are postponed into
    // ε-reads targeting the debt copy.
    for r in m.rules() {
        match (r.tag, r.action) {
            (InputTag::Eps, action) => rules.push(Rule {
                state: r.state,
                tag: InputTag::Eps,
                symbol: r.symbol,
                action,
            }),
            (InputTag::A, Action::Read { target }) => rules.push(Rule {
                state: r.state,
                tag: InputTag::Eps,
                symbol: r.symbol,
                action: Action::Read {
                    target: tilde(target),
                },
            }),
            (InputTag::A, _) => unreachable!("normal form forbids stack ops on reads"),
        }
    }
    // Debt copies of non-final states mirror the source moves with debt
    // kept; reads stay input-consuming.
    for r in m.rules() {
        if m.is_final(r.state) {
            continue;
        }
        let action = match r.action {
            Action::Read { target } => Action::Read {
                target: tilde(target),
            },
            Action::Pop { target } => Action::Pop {
                target: tilde(target),
            },
            Action::Push { target, symbol } => Action::Push {
                target: tilde(target),
                symbol,
            },
        };
        rules.push(Rule {
            state: tilde(r.state),
            tag: r.tag,
            symbol: r.symbol,
            action,
        });
    }
    // Debt copies of final states pay the debt: one real read back into the
    // original state, for every stack symbol.
    for q in m.final_states() {
        for symbol in 0..m.n_symbols() {
            rules.push(Rule {
                state: tilde(q),
                tag: InputTag::A,
                symbol,
                action: Action::Read { target: q },
            });
        }
    }
    rules.push(Rule {
        state: new_initial,
        tag: InputTag::Eps,
        symbol: m.bottom(),
        action: Action::Read { target: m.initial() },
    });

    let eps_accepted = accepts_epsilon(m, &Budget::for_machine(m))
        .expect("epsilon acceptance undecided within the default budget");
    let mut finals: Vec<StateId> = m.final_states().collect();
    if eps_accepted {
        finals.push(new_initial);
    }

    let out = Dpda::new(
        state_names,
        m.symbol_names().to_vec(),
        new_initial,
        m.bottom(),
        finals,
        rules,
    );
    debug_assert!(out.validate().is_empty());
    out
}
