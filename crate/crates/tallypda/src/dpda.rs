//! Unary deterministic pushdown machines in normal form.
//!
//! A machine reads the one-letter alphabet `{a}`. Transitions are keyed by
//! `(state, input tag, top-of-stack symbol)`. Reads may or may not consume an
//! input symbol and leave the stack alone; pushes and pops never consume
//! input; every push adds exactly one symbol; the bottom symbol is never
//! pushed or popped. `validate` reports every broken invariant instead of
//! refusing to represent the machine, so ill-formed inputs can be diagnosed.

use std::fmt;

use thiserror::Error;

pub type StateId = usize;
pub type SymbolId = usize;

/// Input tag of a transition: `Eps` consumes nothing, `A` consumes one `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InputTag {
    Eps,
    A,
}

impl fmt::Display for InputTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputTag::Eps => write!(f, "eps"),
            InputTag::A => write!(f, "a"),
        }
    }
}

/// What a transition does once its key matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    /// Move to `target` leaving the stack unchanged.
    Read { target: StateId },
    /// Remove the top symbol and move to `target`.
    Pop { target: StateId },
    /// Push `symbol` on top and move to `target`.
    Push { target: StateId, symbol: SymbolId },
}

impl Action {
    pub fn target(&self) -> StateId {
        match *self {
            Action::Read { target } | Action::Pop { target } | Action::Push { target, .. } => {
                target
            }
        }
    }
}

/// A (state, top-of-stack) pair. In a unary deterministic machine the mode
/// of a configuration determines the unique next move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub state: StateId,
    pub top: SymbolId,
}

/// One transition rule, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub state: StateId,
    pub tag: InputTag,
    pub symbol: SymbolId,
    pub action: Action,
}

/// Which machine invariant a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// An ε-rule and an input rule share the same (state, symbol).
    EpsInputConflict,
    /// Two rules share the same (state, tag, symbol) key.
    DuplicateAction,
    /// A push or pop appears under the input-consuming tag.
    StackOpOnInput,
    /// The bottom symbol is pushed, or a pop is defined on it.
    BottomDiscipline,
}

/// A broken invariant, pinpointing the offending transition key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub state: StateId,
    pub tag: InputTag,
    pub symbol: SymbolId,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared identifier `{name}`")]
    Undeclared { line: usize, name: String },
    #[error("line {line}: duplicate transition key ({state}, {tag}, {symbol})")]
    DuplicateKey {
        line: usize,
        state: String,
        tag: InputTag,
        symbol: String,
    },
    #[error("missing {what} declaration")]
    MissingDecl { what: &'static str },
}

/// A unary deterministic pushdown machine in normal form.
///
/// States and stack symbols are free-form tokens; their declaration order is
/// the iteration order everywhere, so all derived outputs are deterministic.
#[derive(Debug, Clone)]
pub struct Dpda {
    state_names: Vec<String>,
    symbol_names: Vec<String>,
    initial: StateId,
    bottom: SymbolId,
    finals: Vec<bool>,
    rules: Vec<Rule>,
    // (state, tag, symbol) -> action; first declaration wins on duplicates.
    lookup: Vec<Option<Action>>,
}

impl PartialEq for Dpda {
    fn eq(&self, other: &Self) -> bool {
        self.state_names == other.state_names
            && self.symbol_names == other.symbol_names
            && self.initial == other.initial
            && self.bottom == other.bottom
            && self.finals == other.finals
            && self.rules == other.rules
    }
}

impl Eq for Dpda {}

fn check_identifier(name: &str, what: &str) {
    assert!(!name.is_empty(), "{what} name must be nonempty");
    assert!(
        !name.contains(char::is_whitespace) && !name.contains('#'),
        "{what} name `{name}` contains whitespace or `#`"
    );
}

impl Dpda {
    pub fn new(
        state_names: Vec<String>,
        symbol_names: Vec<String>,
        initial: StateId,
        bottom: SymbolId,
        finals: Vec<StateId>,
        rules: Vec<Rule>,
    ) -> Self {
        let n = state_names.len();
        let m = symbol_names.len();
        assert!(n > 0 && m > 0, "a machine needs at least one state and one stack symbol");
        for s in &state_names {
            check_identifier(s, "state");
        }
        for s in &symbol_names {
            check_identifier(s, "stack symbol");
        }
        assert!(initial < n && bottom < m);
        let mut final_flags = vec![false; n];
        for q in finals {
            assert!(q < n);
            final_flags[q] = true;
        }
        let mut lookup = vec![None; n * m * 2];
        for r in &rules {
            assert!(r.state < n && r.symbol < m);
            match r.action {
                Action::Read { target } | Action::Pop { target } => assert!(target < n),
                Action::Push { target, symbol } => assert!(target < n && symbol < m),
            }
            let slot = &mut lookup[Self::key(m, r.state, r.tag, r.symbol)];
            if slot.is_none() {
                *slot = Some(r.action);
            }
        }
        Dpda {
            state_names,
            symbol_names,
            initial,
            bottom,
            finals: final_flags,
            rules,
            lookup,
        }
    }

    fn key(m: usize, q: StateId, tag: InputTag, z: SymbolId) -> usize {
        (q * m + z) * 2 + (tag == InputTag::A) as usize
    }

    pub fn n_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.symbol_names.len()
    }

    /// The size measure: number of states times number of stack symbols.
    pub fn size(&self) -> usize {
        self.n_states() * self.n_symbols()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn bottom(&self) -> SymbolId {
        self.bottom
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q]
    }

    pub fn final_states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.n_states()).filter(|&q| self.finals[q])
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q]
    }

    pub fn symbol_name(&self, z: SymbolId) -> &str {
        &self.symbol_names[z]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn symbol_names(&self) -> &[String] {
        &self.symbol_names
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|s| s == name)
    }

    pub fn symbol_index(&self, name: &str) -> Option<SymbolId> {
        self.symbol_names.iter().position(|s| s == name)
    }

    /// The action registered for `(q, tag, z)`, if any. When duplicate rules
    /// exist (an invalid machine), the first declared one wins.
    pub fn action(&self, q: StateId, tag: InputTag, z: SymbolId) -> Option<Action> {
        self.lookup[Self::key(self.n_symbols(), q, tag, z)]
    }

    /// The unique move for a mode, preferring the ε-tagged action.
    /// Returns the action together with the tag it was found under.
    pub fn mode_action(&self, mode: Mode) -> Option<(InputTag, Action)> {
        if let Some(act) = self.action(mode.state, InputTag::Eps, mode.top) {
            return Some((InputTag::Eps, act));
        }
        self.action(mode.state, InputTag::A, mode.top)
            .map(|act| (InputTag::A, act))
    }

    /// Checks every structural invariant and reports each breakage.
    /// An empty result means the machine is a well-formed deterministic
    /// pushdown machine in normal form.
    pub fn validate(&self) -> Vec<Violation> {
        let m = self.n_symbols();
        let mut out = Vec::new();
        let mut seen = vec![0usize; self.n_states() * m * 2];
        for r in &self.rules {
            seen[Self::key(m, r.state, r.tag, r.symbol)] += 1;
        }
        let mut dup_reported = vec![false; seen.len()];
        let mut conflict_reported = vec![false; self.n_states() * m];
        for r in &self.rules {
            let key = Self::key(m, r.state, r.tag, r.symbol);
            let qz = r.state * m + r.symbol;
            let loc = (r.state, r.tag, r.symbol);
            if seen[key] > 1 && !dup_reported[key] {
                dup_reported[key] = true;
                out.push(self.violation(
                    ViolationKind::DuplicateAction,
                    loc,
                    format!(
                        "({}, {}, {}) has more than one action",
                        self.state_name(r.state),
                        r.tag,
                        self.symbol_name(r.symbol)
                    ),
                ));
            }
            if r.tag == InputTag::A
                && self.action(r.state, InputTag::Eps, r.symbol).is_some()
                && !conflict_reported[qz]
            {
                conflict_reported[qz] = true;
                out.push(self.violation(
                    ViolationKind::EpsInputConflict,
                    loc,
                    format!(
                        "({}, {}) has both an eps-rule and an input rule",
                        self.state_name(r.state),
                        self.symbol_name(r.symbol)
                    ),
                ));
            }
            if r.tag == InputTag::A && !matches!(r.action, Action::Read { .. }) {
                out.push(self.violation(
                    ViolationKind::StackOpOnInput,
                    loc,
                    format!(
                        "({}, a, {}) performs a stack operation while consuming input",
                        self.state_name(r.state),
                        self.symbol_name(r.symbol)
                    ),
                ));
            }
            match r.action {
                Action::Push { symbol, .. } if symbol == self.bottom => {
                    out.push(self.violation(
                        ViolationKind::BottomDiscipline,
                        loc,
                        format!(
                            "({}, {}, {}) pushes the bottom symbol",
                            self.state_name(r.state),
                            r.tag,
                            self.symbol_name(r.symbol)
                        ),
                    ));
                }
                Action::Pop { .. } if r.symbol == self.bottom => {
                    out.push(self.violation(
                        ViolationKind::BottomDiscipline,
                        loc,
                        format!(
                            "({}, {}, {}) pops the bottom symbol",
                            self.state_name(r.state),
                            r.tag,
                            self.symbol_name(r.symbol)
                        ),
                    ));
                }
                _ => {}
            }
        }
        out
    }

    fn violation(
        &self,
        kind: ViolationKind,
        loc: (StateId, InputTag, SymbolId),
        message: String,
    ) -> Violation {
        Violation {
            kind,
            state: loc.0,
            tag: loc.1,
            symbol: loc.2,
            message,
        }
    }

    /// Renders the machine in the `@dpda` text format. The output reparses
    /// to a machine structurally equal to this one.
    pub fn render(&self) -> String {
        let mut out = String::from("@dpda\n");
        out.push_str("states");
        for s in &self.state_names {
            out.push(' ');
            out.push_str(s);
        }
        out.push_str("\nstack");
        for s in &self.symbol_names {
            out.push(' ');
            out.push_str(s);
        }
        out.push_str(&format!("\ninitial {}", self.state_name(self.initial)));
        out.push_str(&format!("\nbottom {}", self.symbol_name(self.bottom)));
        out.push_str("\nfinal");
        for q in self.final_states() {
            out.push(' ');
            out.push_str(self.state_name(q));
        }
        out.push('\n');
        for r in &self.rules {
            let q = self.state_name(r.state);
            let z = self.symbol_name(r.symbol);
            match r.action {
                Action::Read { target } => {
                    out.push_str(&format!("t {q} {} {z} read {}\n", r.tag, self.state_name(target)));
                }
                Action::Pop { target } => {
                    out.push_str(&format!("t {q} {} {z} pop {}\n", r.tag, self.state_name(target)));
                }
                Action::Push { target, symbol } => {
                    out.push_str(&format!(
                        "t {q} {} {z} push {} {}\n",
                        r.tag,
                        self.state_name(target),
                        self.symbol_name(symbol)
                    ));
                }
            }
        }
        out
    }

    /// Parses the `@dpda` text format. `#` starts a comment that runs to the
    /// end of the line; tokens are whitespace-separated.
    pub fn parse(text: &str) -> Result<Dpda, ParseError> {
        let mut states: Option<(usize, Vec<String>)> = None;
        let mut stack: Option<(usize, Vec<String>)> = None;
        let mut initial: Option<(usize, String)> = None;
        let mut bottom: Option<(usize, String)> = None;
        let mut finals: Option<(usize, Vec<String>)> = None;
        let mut raw_rules: Vec<(usize, Vec<String>)> = Vec::new();
        let mut saw_header = false;

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("");
            let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if tokens.is_empty() {
                continue;
            }
            if !saw_header {
                if tokens.len() == 1 && tokens[0] == "@dpda" {
                    saw_header = true;
                    continue;
                }
                return Err(ParseError::Syntax {
                    line: line_no,
                    msg: "expected `@dpda` header".into(),
                });
            }
            let dup = |what: &str| ParseError::Syntax {
                line: line_no,
                msg: format!("duplicate `{what}` line"),
            };
            match tokens[0].as_str() {
                "states" => {
                    if states.is_some() {
                        return Err(dup("states"));
                    }
                    states = Some((line_no, tokens[1..].to_vec()));
                }
                "stack" => {
                    if stack.is_some() {
                        return Err(dup("stack"));
                    }
                    stack = Some((line_no, tokens[1..].to_vec()));
                }
                "initial" => {
                    if initial.is_some() {
                        return Err(dup("initial"));
                    }
                    if tokens.len() != 2 {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: "expected `initial <state>`".into(),
                        });
                    }
                    initial = Some((line_no, tokens[1].clone()));
                }
                "bottom" => {
                    if bottom.is_some() {
                        return Err(dup("bottom"));
                    }
                    if tokens.len() != 2 {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: "expected `bottom <symbol>`".into(),
                        });
                    }
                    bottom = Some((line_no, tokens[1].clone()));
                }
                "final" => {
                    if finals.is_some() {
                        return Err(dup("final"));
                    }
                    finals = Some((line_no, tokens[1..].to_vec()));
                }
                "t" => raw_rules.push((line_no, tokens)),
                other => {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: format!("unknown directive `{other}`"),
                    });
                }
            }
        }

        if !saw_header {
            return Err(ParseError::MissingDecl { what: "@dpda header" });
        }
        let (states_line, state_names) =
            states.ok_or(ParseError::MissingDecl { what: "states" })?;
        let (stack_line, symbol_names) = stack.ok_or(ParseError::MissingDecl { what: "stack" })?;
        let (initial_line, initial_name) =
            initial.ok_or(ParseError::MissingDecl { what: "initial" })?;
        let (bottom_line, bottom_name) =
            bottom.ok_or(ParseError::MissingDecl { what: "bottom" })?;
        let (finals_line, final_names) = finals.ok_or(ParseError::MissingDecl { what: "final" })?;

        if state_names.is_empty() {
            return Err(ParseError::Syntax {
                line: states_line,
                msg: "at least one state is required".into(),
            });
        }
        if symbol_names.is_empty() {
            return Err(ParseError::Syntax {
                line: stack_line,
                msg: "at least one stack symbol is required".into(),
            });
        }
        let find = |names: &[String], name: &str, line: usize| {
            names
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ParseError::Undeclared {
                    line,
                    name: name.to_string(),
                })
        };
        for (i, s) in state_names.iter().enumerate() {
            if state_names[..i].contains(s) {
                return Err(ParseError::Syntax {
                    line: states_line,
                    msg: format!("state `{s}` declared twice"),
                });
            }
        }
        for (i, s) in symbol_names.iter().enumerate() {
            if symbol_names[..i].contains(s) {
                return Err(ParseError::Syntax {
                    line: stack_line,
                    msg: format!("stack symbol `{s}` declared twice"),
                });
            }
        }

        let initial_id = find(&state_names, &initial_name, initial_line)?;
        let bottom_id = find(&symbol_names, &bottom_name, bottom_line)?;
        let mut final_ids = Vec::new();
        for name in &final_names {
            final_ids.push(find(&state_names, name, finals_line)?);
        }

        let mut rules = Vec::new();
        let mut keys_seen = std::collections::HashSet::new();
        for (line_no, tokens) in raw_rules {
            // t <state> <eps|a> <sym> read <state>
            // t <state> eps <sym> push <state> <sym>
            // t <state> eps <sym> pop <state>
            if tokens.len() < 6 {
                return Err(ParseError::Syntax {
                    line: line_no,
                    msg: "incomplete transition".into(),
                });
            }
            let state = find(&state_names, &tokens[1], line_no)?;
            let tag = match tokens[2].as_str() {
                "eps" => InputTag::Eps,
                "a" => InputTag::A,
                other => {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: format!("expected input tag `eps` or `a`, found `{other}`"),
                    });
                }
            };
            let symbol = find(&symbol_names, &tokens[3], line_no)?;
            let action = match (tokens[4].as_str(), tokens.len()) {
                ("read", 6) => Action::Read {
                    target: find(&state_names, &tokens[5], line_no)?,
                },
                ("pop", 6) => {
                    if tag != InputTag::Eps {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: "pop transitions must be eps-tagged".into(),
                        });
                    }
                    Action::Pop {
                        target: find(&state_names, &tokens[5], line_no)?,
                    }
                }
                ("push", 7) => {
                    if tag != InputTag::Eps {
                        return Err(ParseError::Syntax {
                            line: line_no,
                            msg: "push transitions must be eps-tagged".into(),
                        });
                    }
                    Action::Push {
                        target: find(&state_names, &tokens[5], line_no)?,
                        symbol: find(&symbol_names, &tokens[6], line_no)?,
                    }
                }
                (op, _) => {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        msg: format!("malformed `{op}` transition"),
                    });
                }
            };
            if !keys_seen.insert((state, tag, symbol)) {
                return Err(ParseError::DuplicateKey {
                    line: line_no,
                    state: tokens[1].clone(),
                    tag,
                    symbol: tokens[3].clone(),
                });
            }
            rules.push(Rule {
                state,
                tag,
                symbol,
                action,
            });
        }

        Ok(Dpda::new(
            state_names,
            symbol_names,
            initial_id,
            bottom_id,
            final_ids,
            rules,
        ))
    }
}
