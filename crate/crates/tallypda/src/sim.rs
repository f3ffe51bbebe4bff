//! Step semantics, brute-force membership, histories, and run-shape analysis.
//!
//! The central device is a pumping detector that watches the canonical run
//! (the unique run fed with unlimited input). It keeps, for every live stack
//! height, the first step at which each mode occurred since the run last went
//! below that height; a record is discarded whenever the run pops below its
//! height. The moment the current mode hits a live record we have two steps
//! `i < j` with equal modes, non-decreasing height and no intermediate dip
//! below the earlier height, so the run repeats the segment `[i, j)` forever.
//! A record surviving at height `h` can only exist for `h ≤` current height,
//! which keeps the check O(1) per step.

use thiserror::Error;

use crate::dpda::{Action, Dpda, InputTag, Mode, StateId, SymbolId};

/// Step allowance for a simulation. The default is `2^(n·m) + 1`, the bound
/// within which the pumping criterion provably fires, capped at a ceiling so
/// oversized machines fail loudly instead of running for hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    max_steps: usize,
}

impl Budget {
    pub const DEFAULT_CEILING: usize = 1 << 24;

    pub fn new(max_steps: usize) -> Budget {
        assert!(max_steps > 0, "budget must be positive");
        Budget { max_steps }
    }

    pub fn for_machine(m: &Dpda) -> Budget {
        Budget::for_machine_capped(m, Budget::DEFAULT_CEILING)
    }

    pub fn for_machine_capped(m: &Dpda, ceiling: usize) -> Budget {
        assert!(ceiling > 0);
        let nm = m.n_states() * m.n_symbols();
        let raw = if nm >= usize::BITS as usize - 1 {
            ceiling
        } else {
            (1usize << nm).saturating_add(1)
        };
        Budget {
            max_steps: raw.min(ceiling),
        }
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("step budget of {max_steps} exhausted before a stopping condition")]
    BudgetExceeded { max_steps: usize },
    #[error("pop on the bottom symbol in state `{state}`")]
    PopOnBottom { state: String },
    #[error("run halted after {halted_at} steps, before step {requested}")]
    RunHalted { halted_at: usize, requested: usize },
}

/// A machine configuration: current state, how much input has been consumed,
/// and the stack contents. The unread input of a unary machine is determined
/// by its length, so only the consumed count is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub state: StateId,
    pub consumed: usize,
    // Bottom symbol first; the top of the stack is the last element.
    stack: Vec<SymbolId>,
}

impl Configuration {
    pub fn initial(m: &Dpda) -> Configuration {
        Configuration {
            state: m.initial(),
            consumed: 0,
            stack: vec![m.bottom()],
        }
    }

    /// Builds a configuration with an explicit stack, given topmost first.
    pub fn with_stack(state: StateId, consumed: usize, symbols_top_down: &[SymbolId]) -> Configuration {
        Configuration {
            state,
            consumed,
            stack: symbols_top_down.iter().rev().copied().collect(),
        }
    }

    pub fn top(&self) -> Option<SymbolId> {
        self.stack.last().copied()
    }

    pub fn height(&self) -> usize {
        self.stack.len()
    }

    pub fn mode(&self) -> Option<Mode> {
        self.top().map(|top| Mode {
            state: self.state,
            top,
        })
    }

    pub fn symbols_top_down(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.stack.iter().rev().copied()
    }
}

/// Outcome of one step attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Next(Configuration),
    /// The unique move reads an input symbol but none is available.
    NeedsInput,
    /// No move is defined for the current mode (or the stack is empty).
    Halt,
}

/// Applies the unique move for the current mode, preferring the ε-tagged
/// action. An input-consuming read yields `NeedsInput` when `input_available`
/// is false.
pub fn step(m: &Dpda, c: &Configuration, input_available: bool) -> Result<StepResult, SimError> {
    let mut next = c.clone();
    match exec_step(m, &mut next, input_available)? {
        Exec::Advanced { .. } => Ok(StepResult::Next(next)),
        Exec::NeedsInput => Ok(StepResult::NeedsInput),
        Exec::Halt => Ok(StepResult::Halt),
    }
}

pub(crate) enum Exec {
    Advanced { read: bool },
    NeedsInput,
    Halt,
}

pub(crate) fn exec_step(
    m: &Dpda,
    c: &mut Configuration,
    input_available: bool,
) -> Result<Exec, SimError> {
    let Some(top) = c.top() else {
        return Ok(Exec::Halt);
    };
    let Some((tag, action)) = m.mode_action(Mode { state: c.state, top }) else {
        return Ok(Exec::Halt);
    };
    if tag == InputTag::A && !input_available {
        return Ok(Exec::NeedsInput);
    }
    match action {
        Action::Read { target } => {
            c.state = target;
            if tag == InputTag::A {
                c.consumed += 1;
                return Ok(Exec::Advanced { read: true });
            }
        }
        Action::Pop { target } => {
            if top == m.bottom() {
                return Err(SimError::PopOnBottom {
                    state: m.state_name(c.state).to_string(),
                });
            }
            c.stack.pop();
            c.state = target;
        }
        Action::Push { target, symbol } => {
            c.stack.push(symbol);
            c.state = target;
        }
    }
    Ok(Exec::Advanced { read: false })
}

/// Live-record pump detector. `observe` must be called once per step with the
/// configuration's mode index and height, before the move is executed; it
/// returns the recording step of the matched earlier occurrence when the
/// pumping criterion triggers. `clear_height(h)` must be called whenever the
/// run pops from height `h` to `h - 1`.
pub(crate) struct PumpDetector {
    // mode -> (recording step, reads seen at recording time)
    records: Vec<Option<(usize, usize)>>,
    // height (1-based) -> modes currently recorded there
    by_height: Vec<Vec<usize>>,
}

pub(crate) struct Trigger {
    pub at_step: usize,
    pub reads_at_record: usize,
}

impl PumpDetector {
    pub fn new(n_modes: usize) -> PumpDetector {
        PumpDetector {
            records: vec![None; n_modes],
            by_height: Vec::new(),
        }
    }

    pub fn observe(
        &mut self,
        mode: usize,
        height: usize,
        step: usize,
        reads: usize,
    ) -> Option<Trigger> {
        if let Some((at_step, reads_at_record)) = self.records[mode] {
            return Some(Trigger {
                at_step,
                reads_at_record,
            });
        }
        self.records[mode] = Some((step, reads));
        if self.by_height.len() < height {
            self.by_height.resize_with(height, Vec::new);
        }
        self.by_height[height - 1].push(mode);
        None
    }

    pub fn clear_height(&mut self, height: usize) {
        if height == 0 || self.by_height.len() < height {
            return;
        }
        for mode in self.by_height[height - 1].drain(..) {
            self.records[mode] = None;
        }
    }

    pub fn clear_all(&mut self) {
        for level in &mut self.by_height {
            for mode in level.drain(..) {
                self.records[mode] = None;
            }
        }
    }
}

fn mode_index(m: &Dpda, c: &Configuration) -> usize {
    c.state * m.n_symbols() + c.top().expect("nonempty stack")
}

/// Shape of the canonical unlimited-input run.
///
/// `bits[k]` records whether a final state occurs among the configurations
/// that have consumed exactly `k` symbols, up to the analysis horizon; this
/// is the acceptance bit of `a^k`. In the pumping case the collected bits
/// cover lengths `0..=reads_pre + reads_period`, i.e. everything before the
/// periodic zone plus one full clean period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunShape {
    Pumps {
        /// Step at which the repeating segment starts.
        mu: usize,
        /// Length of the repeating segment, in steps.
        lambda: usize,
        /// Input symbols consumed by steps before `mu`.
        reads_pre: usize,
        /// Input symbols consumed within one period.
        reads_period: usize,
        bits: Vec<bool>,
    },
    Halts {
        total_steps: usize,
        bits: Vec<bool>,
    },
}

impl RunShape {
    pub fn bits(&self) -> &[bool] {
        match self {
            RunShape::Pumps { bits, .. } | RunShape::Halts { bits, .. } => bits,
        }
    }

    /// The acceptance bit for length `k`, extending the collected bits
    /// periodically in the pumping case and with rejection otherwise.
    pub fn bit_at(&self, k: usize) -> bool {
        match self {
            RunShape::Halts { bits, .. } => bits.get(k).copied().unwrap_or(false),
            RunShape::Pumps {
                reads_pre,
                reads_period,
                bits,
                ..
            } => {
                if k < bits.len() {
                    bits[k]
                } else if *reads_period == 0 {
                    false
                } else {
                    bits[reads_pre + 1 + (k - reads_pre - 1) % reads_period]
                }
            }
        }
    }
}

/// Runs the machine with unlimited input until it halts or the pumping
/// criterion fires, collecting acceptance bits along the way.
///
/// When a pump with at least one read per period is found, the run is
/// extended a few steps (at most one extra period) so the last collected
/// length bit is closed by its following read; the period bits are then taken
/// from the first fully periodic window.
pub fn detect_pump(m: &Dpda, b: &Budget) -> Result<RunShape, SimError> {
    let mut c = Configuration::initial(m);
    let mut det = PumpDetector::new(m.n_states() * m.n_symbols());
    let mut bits = vec![m.is_final(c.state)];
    let mut read_steps: Vec<usize> = Vec::new();
    let mut step = 0usize;
    loop {
        if let Some(trigger) = det.observe(mode_index(m, &c), c.height(), step, read_steps.len()) {
            let mu = trigger.at_step;
            let lambda = step - mu;
            let reads_pre = read_steps.partition_point(|&s| s < mu);
            let reads_period = read_steps.len() - reads_pre;
            if reads_period > 0 {
                close_trailing_segment(m, &mut c, &mut bits, reads_pre + reads_period + 1, lambda)?;
                bits.truncate(reads_pre + reads_period + 1);
            }
            return Ok(RunShape::Pumps {
                mu,
                lambda,
                reads_pre,
                reads_period,
                bits,
            });
        }
        if step >= b.max_steps() {
            return Err(SimError::BudgetExceeded {
                max_steps: b.max_steps(),
            });
        }
        let height_before = c.height();
        match exec_step(m, &mut c, true)? {
            Exec::Halt => {
                return Ok(RunShape::Halts {
                    total_steps: step,
                    bits,
                })
            }
            Exec::NeedsInput => unreachable!("input is unlimited"),
            Exec::Advanced { read } => {
                if read {
                    read_steps.push(step);
                    bits.push(false);
                }
                if c.height() < height_before {
                    det.clear_height(height_before);
                }
                if m.is_final(c.state) {
                    *bits.last_mut().unwrap() = true;
                }
                step += 1;
            }
        }
    }
}

/// Continues the run until `target` symbols have been consumed, so the bit of
/// length `target - 1` is closed by its following read. With at least one
/// read per period the next read always arrives within one period.
fn close_trailing_segment(
    m: &Dpda,
    c: &mut Configuration,
    bits: &mut Vec<bool>,
    target: usize,
    lambda: usize,
) -> Result<(), SimError> {
    let mut guard = 0usize;
    while c.consumed < target {
        guard += 1;
        assert!(
            guard <= 2 * lambda + 2,
            "periodic run failed to produce the next read"
        );
        match exec_step(m, c, true)? {
            Exec::Advanced { read } => {
                if read {
                    bits.push(false);
                }
                if m.is_final(c.state) {
                    *bits.last_mut().unwrap() = true;
                }
            }
            Exec::Halt | Exec::NeedsInput => {
                unreachable!("a reading period cannot halt or starve")
            }
        }
    }
    Ok(())
}

/// Brute-force membership of `a^k`, by direct simulation.
///
/// The run is fed `k` input symbols; afterwards only ε-evolution is explored.
/// Acceptance is any final state seen while exactly `k` symbols have been
/// consumed. The pump detector runs throughout: a read-free trigger means the
/// run can never read or halt again, so exploration stops; a trigger whose
/// window contains reads is no loop verdict (the run keeps consuming), so the
/// detector is re-armed and the run continues. The budget bounds the steps
/// between successive reads rather than the whole run, so large `k` does not
/// require an oversized budget.
pub fn accepts(m: &Dpda, k: usize, b: &Budget) -> Result<bool, SimError> {
    let mut c = Configuration::initial(m);
    let mut det = PumpDetector::new(m.n_states() * m.n_symbols());
    let mut accept = k == 0 && m.is_final(c.state);
    let mut reads = 0usize;
    let mut step = 0usize;
    let mut segment_steps = 0usize;
    loop {
        match det.observe(mode_index(m, &c), c.height(), step, reads) {
            Some(trigger) if trigger.reads_at_record == reads => {
                // Read-free cycle: the run repeats without consuming input.
                return Ok(accept);
            }
            Some(_) => {
                det.clear_all();
                det.observe(mode_index(m, &c), c.height(), step, reads);
            }
            None => {}
        }
        if segment_steps >= b.max_steps() {
            return Err(SimError::BudgetExceeded {
                max_steps: b.max_steps(),
            });
        }
        let height_before = c.height();
        let input_available = c.consumed < k;
        match exec_step(m, &mut c, input_available)? {
            Exec::Halt | Exec::NeedsInput => return Ok(accept),
            Exec::Advanced { read } => {
                if read {
                    reads += 1;
                    segment_steps = 0;
                } else {
                    segment_steps += 1;
                }
                if c.height() < height_before {
                    det.clear_height(height_before);
                }
                if c.consumed == k && m.is_final(c.state) {
                    accept = true;
                }
                step += 1;
            }
        }
    }
}

/// One history entry: the mode of the last configuration at this height,
/// and the step index at which that entry was created or last rewritten.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryEntry {
    pub mode: Mode,
    pub established_at: usize,
}

/// Per-height modes of the last configurations of the canonical run, bottom
/// entry last when viewed top-down. The top entry always equals the current
/// mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    // Bottom of the stack first.
    entries: Vec<HistoryEntry>,
}

impl History {
    pub fn height(&self) -> usize {
        self.entries.len()
    }

    pub fn entries_top_down(&self) -> impl Iterator<Item = &HistoryEntry> {
        self.entries.iter().rev()
    }

    pub fn entries_bottom_up(&self) -> &[HistoryEntry] {
        &self.entries
    }

    /// The mode of the run at this instant (the topmost entry).
    pub fn current_mode(&self) -> Mode {
        self.entries.last().expect("history is never empty").mode
    }

    /// True when `other` equals the bottom `other.height()` entries, modes
    /// compared without establishment times.
    pub fn has_suffix(&self, other: &History) -> bool {
        other.height() <= self.height()
            && self.entries[..other.height()]
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.mode == b.mode)
    }

    pub fn modes_top_down(&self) -> Vec<Mode> {
        self.entries.iter().rev().map(|e| e.mode).collect()
    }
}

/// The history after `t` steps of the canonical run, maintained
/// incrementally: a read rewrites the top entry, a push appends one, a pop
/// removes the top entry and rewrites the newly exposed one.
pub fn history_at(m: &Dpda, t: usize, b: &Budget) -> Result<History, SimError> {
    if t > b.max_steps() {
        return Err(SimError::BudgetExceeded {
            max_steps: b.max_steps(),
        });
    }
    let mut c = Configuration::initial(m);
    let mut entries = vec![HistoryEntry {
        mode: c.mode().expect("initial stack is nonempty"),
        established_at: 0,
    }];
    for executed in 0..t {
        let height_before = c.height();
        match exec_step(m, &mut c, true)? {
            Exec::Halt => {
                return Err(SimError::RunHalted {
                    halted_at: executed,
                    requested: t,
                });
            }
            Exec::NeedsInput => unreachable!("input is unlimited"),
            Exec::Advanced { .. } => {
                let now = executed + 1;
                let mode = c.mode().expect("bottom symbol is never popped");
                if c.height() > height_before {
                    entries.push(HistoryEntry {
                        mode,
                        established_at: now,
                    });
                } else {
                    if c.height() < height_before {
                        entries.pop();
                    }
                    let top = entries.last_mut().expect("stack keeps its bottom");
                    *top = HistoryEntry {
                        mode,
                        established_at: now,
                    };
                }
            }
        }
    }
    Ok(History { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpda::Rule;
    use crate::families::gen_ls;

    fn machine(
        states: &[&str],
        symbols: &[&str],
        finals: &[usize],
        rules: Vec<Rule>,
    ) -> Dpda {
        Dpda::new(
            states.iter().map(|s| s.to_string()).collect(),
            symbols.iter().map(|s| s.to_string()).collect(),
            0,
            0,
            finals.to_vec(),
            rules,
        )
    }

    #[test]
    fn first_step_of_ls2_pushes_a1() {
        let m = gen_ls(2);
        let c = Configuration::initial(&m);
        match step(&m, &c, true).unwrap() {
            StepResult::Next(next) => {
                assert_eq!(next.state, m.state_index("q1").unwrap());
                let stack: Vec<_> = next
                    .symbols_top_down()
                    .map(|z| m.symbol_name(z).to_string())
                    .collect();
                assert_eq!(stack, vec!["A1", "Z0"]);
            }
            other => panic!("expected Next, got {other:?}"),
        }
    }

    #[test]
    fn read_demand_without_input_reports_needs_input() {
        let m = gen_ls(2);
        let q1 = m.state_index("q1").unwrap();
        let a0 = m.symbol_index("A0").unwrap();
        let z0 = m.symbol_index("Z0").unwrap();
        let c = Configuration::with_stack(q1, 0, &[a0, z0]);
        assert_eq!(step(&m, &c, false).unwrap(), StepResult::NeedsInput);
    }

    #[test]
    fn missing_transition_halts() {
        let m = machine(&["q"], &["Z"], &[], vec![]);
        let c = Configuration::initial(&m);
        assert_eq!(step(&m, &c, true).unwrap(), StepResult::Halt);
    }

    #[test]
    fn ls2_accepts_exactly_multiples_of_four() {
        let m = gen_ls(2);
        let b = Budget::for_machine(&m);
        assert!(accepts(&m, 4, &b).unwrap());
        assert!(!accepts(&m, 5, &b).unwrap());
        assert!(accepts(&m, 0, &b).unwrap());
        for k in 0..=24 {
            assert_eq!(accepts(&m, k, &b).unwrap(), k % 4 == 0, "k={k}");
        }
    }

    #[test]
    fn self_push_loop_is_rejected_via_loop_detection() {
        let m = machine(
            &["p"],
            &["Z", "A"],
            &[],
            vec![
                Rule {
                    state: 0,
                    tag: InputTag::Eps,
                    symbol: 0,
                    action: Action::Push { target: 0, symbol: 1 },
                },
                Rule {
                    state: 0,
                    tag: InputTag::Eps,
                    symbol: 1,
                    action: Action::Push { target: 0, symbol: 1 },
                },
            ],
        );
        let b = Budget::for_machine(&m);
        assert!(!accepts(&m, 0, &b).unwrap());
        assert!(!accepts(&m, 3, &b).unwrap());
    }

    #[test]
    fn histories_of_ls1_track_the_stack() {
        let m = gen_ls(1);
        let b = Budget::for_machine(&m);
        let name = |mode: Mode| {
            format!(
                "[{} {}]",
                m.state_name(mode.state),
                m.symbol_name(mode.top)
            )
        };
        let h0 = history_at(&m, 0, &b).unwrap();
        assert_eq!(
            h0.modes_top_down().into_iter().map(name).collect::<Vec<_>>(),
            vec!["[q0 Z0]"]
        );
        let h1 = history_at(&m, 1, &b).unwrap();
        assert_eq!(
            h1.modes_top_down().into_iter().map(name).collect::<Vec<_>>(),
            vec!["[q1 A0]", "[q0 Z0]"]
        );
        let h2 = history_at(&m, 2, &b).unwrap();
        assert_eq!(
            h2.modes_top_down().into_iter().map(name).collect::<Vec<_>>(),
            vec!["[q3 A0]", "[q0 Z0]"]
        );
    }

    #[test]
    fn history_errors_when_run_halts_early() {
        let m = machine(&["q"], &["Z"], &[], vec![]);
        let b = Budget::for_machine(&m);
        assert_eq!(
            history_at(&m, 3, &b).unwrap_err(),
            SimError::RunHalted {
                halted_at: 0,
                requested: 3
            }
        );
    }

    #[test]
    fn ls1_pumps_with_the_seven_step_cycle() {
        let m = gen_ls(1);
        let b = Budget::for_machine(&m);
        match detect_pump(&m, &b).unwrap() {
            RunShape::Pumps {
                mu,
                lambda,
                reads_pre,
                reads_period,
                bits,
            } => {
                assert_eq!((mu, lambda), (0, 7));
                assert_eq!((reads_pre, reads_period), (0, 2));
                // lengths 0..=2 of {a^2}^*
                assert_eq!(bits, vec![true, false, true]);
            }
            other => panic!("expected Pumps, got {other:?}"),
        }
    }

    #[test]
    fn single_rejecting_read_loop_pumps_immediately() {
        let m = machine(
            &["q"],
            &["Z"],
            &[],
            vec![Rule {
                state: 0,
                tag: InputTag::A,
                symbol: 0,
                action: Action::Read { target: 0 },
            }],
        );
        let b = Budget::for_machine(&m);
        match detect_pump(&m, &b).unwrap() {
            RunShape::Pumps {
                mu,
                lambda,
                reads_period,
                bits,
                ..
            } => {
                assert_eq!((mu, lambda), (0, 1));
                assert_eq!(reads_period, 1);
                assert!(bits.iter().all(|&bit| !bit));
            }
            other => panic!("expected Pumps, got {other:?}"),
        }
    }

    #[test]
    fn transitionless_machine_halts_at_step_zero() {
        let m = machine(&["q"], &["Z"], &[0], vec![]);
        let b = Budget::for_machine(&m);
        assert_eq!(
            detect_pump(&m, &b).unwrap(),
            RunShape::Halts {
                total_steps: 0,
                bits: vec![true]
            }
        );
    }

    #[test]
    fn run_shape_bits_agree_with_accepts_on_ls_machines() {
        for s in 1..=3 {
            let m = gen_ls(s);
            let b = Budget::for_machine(&m);
            let shape = detect_pump(&m, &b).unwrap();
            let horizon = match &shape {
                RunShape::Pumps {
                    reads_pre,
                    reads_period,
                    ..
                } => reads_pre + 3 * reads_period,
                RunShape::Halts { bits, .. } => bits.len() + 3,
            };
            for k in 0..=horizon {
                assert_eq!(
                    shape.bit_at(k),
                    accepts(&m, k, &b).unwrap(),
                    "s={s}, k={k}"
                );
            }
        }
    }
}
