//! Property suites: each invariant is checked against an independent oracle,
//! usually a test-local interpreter that walks the machine directly rather
//! than reusing the library's simulation loops.

use std::collections::BTreeSet;

use proptest::prelude::*;

use tallypda::analysis::{eps_behavior, exit_table, make_loop_free, EpsBehavior};
use tallypda::convert::to_dfa;
use tallypda::dpda::{Action, Dpda, InputTag, Mode};
use tallypda::families::{bm_udfa, dpda_from_udfa, gen_ls, gen_random, mod_prime};
use tallypda::grammar::{to_grammar, trim, unary_lengths, Cfg};
use tallypda::immediate::{accepts_epsilon, immediate_accept};
use tallypda::sim::{accepts, detect_pump, history_at, Budget, RunShape, SimError};
use tallypda::udfa::{udfa_equal, UnaryDfa};

mod common;
use common::corpus;

// ---------------------------------------------------------------------------
// test-local interpreter
// ---------------------------------------------------------------------------

/// How a run from a bare one-symbol stack ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SegOutcome {
    /// The stack emptied; `consumed` symbols were read on the way.
    Emptied { state: usize, consumed: usize },
    /// The current mode demands input that is not granted.
    NeedsInput { state: usize, top: usize },
    /// The current mode has no move.
    Dead { state: usize, top: usize },
    /// Still running when the step cap was reached.
    Running,
}

/// Runs the machine from state `q` with the single symbol `z` on the stack,
/// with its own stack discipline. `allow_reads` grants unlimited input; when
/// it is false, input moves stop the run. Also reports every state in which
/// the stack returned to exactly `[z]`.
fn run_segment(
    m: &Dpda,
    q: usize,
    z: usize,
    allow_reads: bool,
    max_steps: usize,
) -> (SegOutcome, Vec<usize>) {
    let mut stack = vec![z];
    let mut state = q;
    let mut consumed = 0usize;
    let mut returns = Vec::new();
    for _ in 0..max_steps {
        let Some(&top) = stack.last() else {
            return (SegOutcome::Emptied { state, consumed }, returns);
        };
        let Some((tag, action)) = m.mode_action(Mode { state, top }) else {
            return (SegOutcome::Dead { state, top }, returns);
        };
        if tag == InputTag::A && !allow_reads {
            return (SegOutcome::NeedsInput { state, top }, returns);
        }
        match action {
            Action::Read { target } => {
                if tag == InputTag::A {
                    consumed += 1;
                }
                state = target;
            }
            Action::Pop { target } => {
                stack.pop();
                state = target;
            }
            Action::Push { target, symbol } => {
                stack.push(symbol);
                state = target;
            }
        }
        if stack.len() == 1 && stack[0] == z {
            returns.push(state);
        }
    }
    if stack.is_empty() {
        (SegOutcome::Emptied { state, consumed }, returns)
    } else {
        (SegOutcome::Running, returns)
    }
}

/// The move sequence of the canonical unlimited-input run, one entry per
/// step, ending early if the machine halts.
fn action_trace(m: &Dpda, steps: usize) -> Vec<(InputTag, Action)> {
    let mut stack = vec![m.bottom()];
    let mut state = m.initial();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let Some(&top) = stack.last() else { break };
        let Some((tag, action)) = m.mode_action(Mode { state, top }) else {
            break;
        };
        out.push((tag, action));
        match action {
            Action::Read { target } => state = target,
            Action::Pop { target } => {
                stack.pop();
                state = target;
            }
            Action::Push { target, symbol } => {
                stack.push(symbol);
                state = target;
            }
        }
    }
    out
}

fn all_modes(m: &Dpda) -> Vec<Mode> {
    (0..m.n_states())
        .flat_map(|state| (0..m.n_symbols()).map(move |top| Mode { state, top }))
        .collect()
}

// ---------------------------------------------------------------------------
// machine structure
// ---------------------------------------------------------------------------

#[test]
fn every_generated_and_transformed_machine_validates_clean() {
    for s in 1..=8 {
        assert!(gen_ls(s).validate().is_empty());
    }
    for m in 1..=6 {
        assert!(dpda_from_udfa(&bm_udfa(m)).validate().is_empty());
    }
    for machine in corpus() {
        assert!(machine.validate().is_empty());
        assert!(immediate_accept(&machine).validate().is_empty());
        assert!(make_loop_free(&machine).validate().is_empty());
    }
}

#[test]
fn transformed_machines_render_and_reparse_identically() {
    for machine in corpus().iter().step_by(25) {
        let mi = immediate_accept(machine);
        assert_eq!(Dpda::parse(&mi.render()).unwrap(), mi);
        let lf = make_loop_free(machine);
        assert_eq!(Dpda::parse(&lf.render()).unwrap(), lf);
    }
}

// ---------------------------------------------------------------------------
// run shapes
// ---------------------------------------------------------------------------

#[test]
fn pump_detection_completes_within_the_theoretical_budget() {
    for (i, m) in corpus().iter().enumerate() {
        let nm = m.n_states() * m.n_symbols();
        let budget = Budget::new((1usize << nm) + 1);
        assert!(
            detect_pump(m, &budget).is_ok(),
            "machine {i} exceeded the 2^(n*m)+1 budget"
        );
    }
}

#[test]
fn pumped_runs_repeat_their_action_trace() {
    for (i, m) in corpus().iter().enumerate() {
        let shape = detect_pump(m, &Budget::for_machine(m)).unwrap();
        let RunShape::Pumps { mu, lambda, .. } = shape else {
            continue;
        };
        if mu + 3 * lambda > 30_000 {
            continue;
        }
        let trace = action_trace(m, mu + 3 * lambda);
        assert_eq!(trace.len(), mu + 3 * lambda, "machine {i}: pumped runs never halt");
        for u in 0..2 * lambda {
            assert_eq!(
                trace[mu + u],
                trace[mu + lambda + u],
                "machine {i}: action at step {} repeats at step {}",
                mu + u,
                mu + lambda + u
            );
        }
    }
}

#[test]
fn acceptance_bits_extend_consistently_with_membership() {
    for (i, m) in corpus().iter().enumerate() {
        let budget = Budget::for_machine(m);
        let shape = detect_pump(m, &budget).unwrap();
        let horizon = match &shape {
            RunShape::Pumps {
                reads_pre,
                reads_period,
                ..
            } => reads_pre + 3 * reads_period,
            RunShape::Halts { bits, .. } => bits.len() + 2,
        };
        for k in 0..=horizon {
            assert_eq!(
                shape.bit_at(k),
                accepts(m, k, &budget).unwrap(),
                "machine {i}, length {k}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// histories
// ---------------------------------------------------------------------------

#[test]
fn history_laws_hold_on_pumping_corpus_machines() {
    for m in corpus().iter().step_by(10) {
        let budget = Budget::for_machine(m);
        let RunShape::Pumps { mu, lambda, .. } = detect_pump(m, &budget).unwrap() else {
            continue;
        };
        let horizon = (mu + 4 * lambda).min(300);
        let Ok(snapshots) = (0..=horizon)
            .map(|t| history_at(m, t, &budget))
            .collect::<Result<Vec<_>, SimError>>()
        else {
            continue;
        };

        // Establishment times name the step whose history is the current
        // bottom part, and that part persists through every later snapshot.
        for (t, hist) in snapshots.iter().enumerate() {
            let entries = hist.entries_bottom_up();
            for height in 1..=hist.height() {
                let established = entries[height - 1].established_at;
                assert!(established <= t);
                let base = &snapshots[established];
                assert_eq!(base.height(), height, "step {established} set height {height}");
                for j in established..=t {
                    assert!(
                        snapshots[j].has_suffix(base),
                        "history of step {established} persists through step {j}"
                    );
                }
            }
            let times: Vec<usize> = entries.iter().map(|e| e.established_at).collect();
            assert!(times.windows(2).all(|w| w[0] < w[1]), "establishment times increase");
        }

        // Equal histories one period apart force equal continuations.
        if mu + 4 * lambda <= horizon {
            let modes = |t: usize| snapshots[t].modes_top_down();
            if modes(mu) == modes(mu + lambda) {
                for i in 0..=3 * lambda {
                    assert_eq!(
                        modes(mu + i),
                        modes(mu + lambda + i),
                        "histories repeat at offset {i}"
                    );
                }
            }
        }

        // The mode sequence itself is periodic from mu onward.
        for t in mu..=(mu + 2 * lambda).min(horizon.saturating_sub(lambda)) {
            assert_eq!(
                snapshots[t].current_mode(),
                snapshots[t + lambda].current_mode(),
                "mode at step {t}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// per-mode analysis against direct simulation
// ---------------------------------------------------------------------------

#[test]
fn eps_classification_agrees_with_direct_simulation() {
    for (i, m) in corpus().iter().enumerate() {
        let cap = (1usize << (m.n_states() * m.n_symbols())) + 1;
        let behavior = eps_behavior(m);
        for mode in all_modes(m) {
            let (outcome, _) = run_segment(m, mode.state, mode.top, false, cap);
            match behavior[&mode] {
                EpsBehavior::Pops { exit } => assert_eq!(
                    outcome,
                    SegOutcome::Emptied { state: exit, consumed: 0 },
                    "machine {i}, mode {mode:?}"
                ),
                EpsBehavior::NeedsInput { blocker } => assert_eq!(
                    outcome,
                    SegOutcome::NeedsInput { state: blocker.state, top: blocker.top },
                    "machine {i}, mode {mode:?}"
                ),
                EpsBehavior::Dead { blocker } => assert_eq!(
                    outcome,
                    SegOutcome::Dead { state: blocker.state, top: blocker.top },
                    "machine {i}, mode {mode:?}"
                ),
                EpsBehavior::Loops => assert_eq!(
                    outcome,
                    SegOutcome::Running,
                    "machine {i}, mode {mode:?}: loops never settle"
                ),
            }
        }
    }
}

#[test]
fn exit_table_matches_segment_simulation() {
    for (i, m) in corpus().iter().enumerate() {
        let cap = (1usize << (m.n_states() * m.n_symbols())) + 1;
        let exits = exit_table(m);
        for mode in all_modes(m) {
            let (outcome, returns) = run_segment(m, mode.state, mode.top, true, cap);
            match exits.get(mode) {
                Some(exit) => {
                    let SegOutcome::Emptied { state, .. } = outcome else {
                        panic!("machine {i}, mode {mode:?}: defined exit must empty the stack");
                    };
                    assert_eq!(state, exit, "machine {i}, mode {mode:?}");
                    // Returning to the bare symbol preserves the exit state.
                    for q2 in returns {
                        assert_eq!(
                            exits.get(Mode { state: q2, top: mode.top }),
                            Some(exit),
                            "machine {i}: exit stable across a returning segment"
                        );
                    }
                }
                None => assert!(
                    !matches!(outcome, SegOutcome::Emptied { .. }),
                    "machine {i}, mode {mode:?}: undefined exit must never empty"
                ),
            }
        }
    }
}

#[test]
fn loop_free_machines_preserve_language_and_stay_small() {
    for (i, m) in corpus().iter().enumerate().step_by(3) {
        let fixed = make_loop_free(m);
        assert!(fixed.n_states() <= m.n_states() + 2, "machine {i}");
        assert!(
            eps_behavior(&fixed).values().all(|b| *b != EpsBehavior::Loops),
            "machine {i}: output must be loop-free"
        );
        let b = Budget::for_machine(m);
        let fb = Budget::for_machine(&fixed);
        for k in 0..=200 {
            assert_eq!(
                accepts(m, k, &b).unwrap(),
                accepts(&fixed, k, &fb).unwrap(),
                "machine {i}, length {k}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// the immediate-acceptance transform
// ---------------------------------------------------------------------------

#[test]
fn epsilon_acceptance_agrees_with_the_membership_oracle() {
    for (i, m) in corpus().iter().enumerate() {
        let b = Budget::for_machine(m);
        assert_eq!(
            accepts_epsilon(m, &b).unwrap(),
            accepts(m, 0, &b).unwrap(),
            "machine {i}"
        );
    }
}

#[test]
fn transform_finals_consume_input_exactly_at_debt_pays() {
    // Final states of the transform are entered with consumed input only by
    // the debt-paying reads out of marked copies; ε-entries into finals can
    // only be the source machine's own ε-rules, replayed from original
    // states after an acceptance already registered on a post-read state.
    for (i, m) in corpus().iter().enumerate().step_by(2) {
        let mi = immediate_accept(m);
        let q0_prime = mi.initial();
        let is_copy = |q: usize| mi.state_name(q).ends_with('~');
        for r in mi.rules() {
            let target = r.action.target();
            if !(mi.is_final(target) && target != q0_prime) {
                continue;
            }
            if r.tag == InputTag::A {
                assert!(
                    matches!(r.action, Action::Read { .. }) && is_copy(r.state),
                    "machine {i}: a consuming entry into final `{}` must be a \
                     debt-paying read",
                    mi.state_name(target)
                );
            } else {
                assert!(
                    !is_copy(r.state),
                    "machine {i}: debt-carrying copies never step into finals silently"
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// grammar semantics
// ---------------------------------------------------------------------------

/// The length set of the sub-grammar rooted at `[qA]_0` is exactly the input
/// consumed by the emptying segment from `(q, A)`, when one exists.
#[test]
fn zero_variables_derive_exactly_the_segment_lengths() {
    for (i, m) in corpus().iter().enumerate().step_by(5) {
        let cap = (1usize << (m.n_states() * m.n_symbols())) + 1;
        let g = to_grammar(m);
        let exits = exit_table(m);
        for mode in all_modes(m) {
            let name = format!(
                "[{}.{}]_0",
                m.state_name(mode.state),
                m.symbol_name(mode.top)
            );
            let var = g
                .var_names()
                .iter()
                .position(|v| *v == name)
                .expect("every mode has its variables");
            let rooted = Cfg::new(
                g.var_names().to_vec(),
                g.terminals().clone(),
                var,
                g.productions().to_vec(),
            );
            let bits = unary_lengths(&rooted, 200);
            let emptied = match run_segment(m, mode.state, mode.top, true, cap).0 {
                SegOutcome::Emptied { consumed, .. } => Some(consumed),
                _ => None,
            };
            assert!(exits.get(mode).is_some() == emptied.is_some(), "machine {i}");
            for (k, &bit) in bits.iter().enumerate() {
                assert_eq!(
                    bit,
                    emptied == Some(k),
                    "machine {i}, mode {mode:?}, length {k}"
                );
            }
        }
    }
}

#[test]
fn trim_is_idempotent_and_preserves_lengths_on_corpus_grammars() {
    for (i, m) in corpus().iter().enumerate().step_by(5) {
        let g = to_grammar(m);
        let trimmed = trim(&g);
        assert_eq!(trim(&trimmed), trimmed, "machine {i}: trim is idempotent");
        assert_eq!(
            unary_lengths(&trimmed, 100),
            unary_lengths(&g, 100),
            "machine {i}: trim preserves the language"
        );
    }
}

// ---------------------------------------------------------------------------
// unary automata
// ---------------------------------------------------------------------------

#[test]
fn conversion_decides_equivalence_exactly() {
    let machines = corpus();
    for pair in machines.chunks_exact(2).step_by(10) {
        let (m1, m2) = (&pair[0], &pair[1]);
        let d1 = to_dfa(m1, &Budget::for_machine(m1)).unwrap();
        let d2 = to_dfa(m2, &Budget::for_machine(m2)).unwrap();
        let horizon = d1.preperiod().len()
            + d2.preperiod().len()
            + 2 * lcm(d1.period().len(), d2.period().len());
        if horizon > 2_000 {
            continue;
        }
        let b1 = Budget::for_machine(m1);
        let b2 = Budget::for_machine(m2);
        let pointwise = (0..=horizon)
            .all(|k| accepts(m1, k, &b1).unwrap() == accepts(m2, k, &b2).unwrap());
        assert_eq!(udfa_equal(&d1, &d2), pointwise);
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

#[test]
fn bm_membership_matches_the_letter_formula() {
    for m in 1..=8usize {
        let d = bm_udfa(m);
        let word: Vec<bool> = tallypda::families::de_bruijn_word(m)
            .chars()
            .map(|c| c == '1')
            .collect();
        let cycle = 1 << m;
        for k in 0..=3 * cycle {
            assert_eq!(d.member(k), word[mod_prime(k, cycle) - 1], "m={m}, k={k}");
        }
    }
}

proptest! {
    #[test]
    fn random_machines_roundtrip_through_text(
        n in 1usize..=6,
        m in 1usize..=5,
        seed in any::<u64>(),
    ) {
        let machine = gen_random(n, m, seed);
        prop_assert_eq!(Dpda::parse(&machine.render()).unwrap(), machine);
    }

    #[test]
    fn minimize_preserves_membership_and_is_idempotent(
        pre in proptest::collection::vec(any::<bool>(), 0..8),
        per in proptest::collection::vec(any::<bool>(), 1..8),
    ) {
        let d = UnaryDfa::new(pre, per);
        let min = d.minimize();
        prop_assert_eq!(min.minimize(), min.clone());
        let horizon = d.preperiod().len() + 2 * d.period().len();
        for k in 0..=horizon {
            prop_assert_eq!(d.member(k), min.member(k));
        }
    }

    #[test]
    fn minimized_representations_are_smallest(
        pre in proptest::collection::vec(any::<bool>(), 0..6),
        per in proptest::collection::vec(any::<bool>(), 1..6),
    ) {
        let min = UnaryDfa::new(pre, per).minimize();
        let (p, c) = (min.preperiod().len(), min.period().len());
        for p2 in 0..(p + c) {
            for c2 in 1..(p + c - p2) {
                // The only candidate representation of this shape reads its
                // bits off the language itself; comparing up to the exact
                // equality horizon of the two shapes decides language
                // equality.
                let candidate = UnaryDfa::new(
                    (0..p2).map(|k| min.member(k)).collect(),
                    (p2..p2 + c2).map(|k| min.member(k)).collect(),
                );
                let horizon = p + p2 + 2 * lcm(c, c2);
                prop_assert!(
                    (0..=horizon).any(|k| candidate.member(k) != min.member(k)),
                    "a smaller representation ({p2}, {c2}) matches ({p}, {c})"
                );
            }
        }
    }

    #[test]
    fn udfa_equality_matches_the_pointwise_horizon(
        pre1 in proptest::collection::vec(any::<bool>(), 0..5),
        per1 in proptest::collection::vec(any::<bool>(), 1..6),
        pre2 in proptest::collection::vec(any::<bool>(), 0..5),
        per2 in proptest::collection::vec(any::<bool>(), 1..6),
    ) {
        let d1 = UnaryDfa::new(pre1, per1);
        let d2 = UnaryDfa::new(pre2, per2);
        let horizon = d1.preperiod().len()
            + d2.preperiod().len()
            + 2 * lcm(d1.period().len(), d2.period().len());
        let pointwise = (0..=horizon).all(|k| d1.member(k) == d2.member(k));
        prop_assert_eq!(udfa_equal(&d1, &d2), pointwise);
        prop_assert!(udfa_equal(&d1, &d1));
    }

    #[test]
    fn machines_from_automata_roundtrip(
        pre in proptest::collection::vec(any::<bool>(), 0..4),
        per in proptest::collection::vec(any::<bool>(), 1..5),
    ) {
        let d = UnaryDfa::new(pre, per);
        let m = dpda_from_udfa(&d);
        prop_assert!(m.validate().is_empty());
        let back = to_dfa(&m, &Budget::for_machine(&m)).unwrap();
        prop_assert!(udfa_equal(&back, &d));
    }
}

// ---------------------------------------------------------------------------
// cross-checking the membership oracle itself
// ---------------------------------------------------------------------------

/// A from-scratch membership decision: run with exactly `k` symbols granted,
/// collecting finality while all input is consumed, stopping only via the
/// step cap. Quadratic and dumb on purpose.
fn accepts_by_exhaustion(m: &Dpda, k: usize, cap: usize) -> bool {
    let mut stack = vec![m.bottom()];
    let mut state = m.initial();
    let mut consumed = 0usize;
    let mut accept = k == 0 && m.is_final(state);
    for _ in 0..cap {
        let Some(&top) = stack.last() else { break };
        let Some((tag, action)) = m.mode_action(Mode { state, top }) else {
            break;
        };
        if tag == InputTag::A && consumed == k {
            break;
        }
        match action {
            Action::Read { target } => {
                if tag == InputTag::A {
                    consumed += 1;
                }
                state = target;
            }
            Action::Pop { target } => {
                stack.pop();
                state = target;
            }
            Action::Push { target, symbol } => {
                stack.push(symbol);
                state = target;
            }
        }
        if consumed == k && m.is_final(state) {
            accept = true;
        }
    }
    accept
}

#[test]
fn accepts_matches_exhaustive_simulation() {
    for (i, m) in corpus().iter().enumerate().step_by(7) {
        let budget = Budget::for_machine(m);
        for k in 0..=60 {
            assert_eq!(
                accepts(m, k, &budget).unwrap(),
                accepts_by_exhaustion(m, k, 50_000),
                "machine {i}, length {k}"
            );
        }
    }
}

#[test]
fn distinct_ls_machines_are_inequivalent() {
    let dfas: Vec<UnaryDfa> = (1..=6)
        .map(|s| {
            let m = gen_ls(s);
            to_dfa(&m, &Budget::for_machine(&m)).unwrap()
        })
        .collect();
    let mut seen = BTreeSet::new();
    for d in &dfas {
        let min = d.minimize();
        assert!(seen.insert(format!("{min:?}")), "all cycle lengths differ");
    }
    for w in dfas.windows(2) {
        assert!(!udfa_equal(&w[0], &w[1]));
    }
}
