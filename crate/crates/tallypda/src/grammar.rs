//! Context-free grammars extracted from unary pushdown machines.
//!
//! The conversion assigns every mode two variables: `[qA]_0` derives the
//! input consumed by the computation segment that removes `A`, and `[qA]_1`
//! derives every input that reaches a final state before that segment
//! completes. Push moves split on whether acceptance happens inside the
//! pushed segment or after its unique exit; pop moves close a `_0`
//! derivation; reads prepend their consumed symbol; final states close a
//! `_1` derivation. All right-hand sides have at most two symbols and the
//! variable count is at most `2·n·m`.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::analysis::exit_table;
use crate::dpda::{Action, Dpda, InputTag};

pub type VarId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("the grammar generates no nonempty word")]
    EmptyLanguage,
    #[error("cell ({variable}, {length}) exceeds the {cap}-word cap")]
    CapExceeded {
        variable: String,
        length: usize,
        cap: usize,
    },
    #[error("no finality known for state `{state}`")]
    MissingFinality { state: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfgParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared symbol `{name}`")]
    Undeclared { line: usize, name: String },
    #[error("missing {what} line")]
    MissingDecl { what: &'static str },
}

/// Grammar terminals. Machine-derived grammars use `a`; relabeled ones `0`/`1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Terminal {
    A,
    Zero,
    One,
}

impl Terminal {
    pub fn token(self) -> &'static str {
        match self {
            Terminal::A => "a",
            Terminal::Zero => "0",
            Terminal::One => "1",
        }
    }

    fn from_token(tok: &str) -> Option<Terminal> {
        match tok {
            "a" => Some(Terminal::A),
            "0" => Some(Terminal::Zero),
            "1" => Some(Terminal::One),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sym {
    Var(VarId),
    Term(Terminal),
}

/// One production. `read_target` carries the machine state entered by the
/// read that produced an input-consuming production; it travels with the
/// production so relabeling needs no re-derivation, and it does not take
/// part in structural equality.
#[derive(Debug, Clone)]
pub struct Production {
    pub lhs: VarId,
    pub rhs: Vec<Sym>,
    pub read_target: Option<String>,
}

impl PartialEq for Production {
    fn eq(&self, other: &Self) -> bool {
        self.lhs == other.lhs && self.rhs == other.rhs
    }
}

impl Eq for Production {}

#[derive(Debug, Clone)]
pub struct Cfg {
    var_names: Vec<String>,
    terminals: BTreeSet<Terminal>,
    start: VarId,
    productions: Vec<Production>,
}

impl PartialEq for Cfg {
    fn eq(&self, other: &Self) -> bool {
        self.var_names == other.var_names
            && self.terminals == other.terminals
            && self.start == other.start
            && self.productions == other.productions
    }
}

impl Eq for Cfg {}

impl Cfg {
    pub fn new(
        var_names: Vec<String>,
        terminals: BTreeSet<Terminal>,
        start: VarId,
        productions: Vec<Production>,
    ) -> Cfg {
        assert!(start < var_names.len());
        for p in &productions {
            assert!(p.lhs < var_names.len());
            for s in &p.rhs {
                if let Sym::Var(v) = s {
                    assert!(*v < var_names.len());
                }
            }
        }
        Cfg {
            var_names,
            terminals,
            start,
            productions,
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v]
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn start(&self) -> VarId {
        self.start
    }

    pub fn terminals(&self) -> &BTreeSet<Terminal> {
        &self.terminals
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    fn nullable_set(&self) -> Vec<bool> {
        let mut nullable = vec![false; self.var_count()];
        loop {
            let mut changed = false;
            for p in &self.productions {
                if nullable[p.lhs] {
                    continue;
                }
                let all = p.rhs.iter().all(|s| match s {
                    Sym::Var(v) => nullable[*v],
                    Sym::Term(_) => false,
                });
                if all {
                    nullable[p.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        nullable
    }

    pub fn render(&self) -> String {
        let mut out = String::from("@cfg\nterminals");
        for t in &self.terminals {
            out.push(' ');
            out.push_str(t.token());
        }
        out.push_str(&format!("\nstart {}\n", self.var_name(self.start)));
        for chunk in self.var_names.chunks(10) {
            out.push('v');
            for name in chunk {
                out.push(' ');
                out.push_str(name);
            }
            out.push('\n');
        }
        for p in &self.productions {
            out.push_str(&format!("p {} ->", self.var_name(p.lhs)));
            if p.rhs.is_empty() {
                out.push_str(" eps");
            } else {
                for s in &p.rhs {
                    out.push(' ');
                    match s {
                        Sym::Var(v) => out.push_str(self.var_name(*v)),
                        Sym::Term(t) => out.push_str(t.token()),
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Cfg, CfgParseError> {
        let mut terminals: Option<BTreeSet<Terminal>> = None;
        let mut start_name: Option<(usize, String)> = None;
        let mut var_names: Vec<String> = Vec::new();
        let mut raw_prods: Vec<(usize, Vec<String>)> = Vec::new();
        let mut saw_header = false;
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("");
            let tokens: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if tokens.is_empty() {
                continue;
            }
            if !saw_header {
                if tokens.len() == 1 && tokens[0] == "@cfg" {
                    saw_header = true;
                    continue;
                }
                return Err(CfgParseError::Syntax {
                    line: line_no,
                    msg: "expected `@cfg` header".into(),
                });
            }
            match tokens[0].as_str() {
                "terminals" => {
                    if terminals.is_some() {
                        return Err(CfgParseError::Syntax {
                            line: line_no,
                            msg: "duplicate `terminals` line".into(),
                        });
                    }
                    let mut set = BTreeSet::new();
                    for tok in &tokens[1..] {
                        match Terminal::from_token(tok) {
                            Some(t) => {
                                set.insert(t);
                            }
                            None => {
                                return Err(CfgParseError::Syntax {
                                    line: line_no,
                                    msg: format!("terminal must be a, 0 or 1, found `{tok}`"),
                                });
                            }
                        }
                    }
                    terminals = Some(set);
                }
                "start" => {
                    if start_name.is_some() || tokens.len() != 2 {
                        return Err(CfgParseError::Syntax {
                            line: line_no,
                            msg: "expected a single `start <variable>` line".into(),
                        });
                    }
                    start_name = Some((line_no, tokens[1].clone()));
                }
                "v" => {
                    for tok in &tokens[1..] {
                        if Terminal::from_token(tok).is_some() || tok == "eps" || tok == "->" {
                            return Err(CfgParseError::Syntax {
                                line: line_no,
                                msg: format!("variable name `{tok}` collides with a reserved token"),
                            });
                        }
                        if var_names.contains(tok) {
                            return Err(CfgParseError::Syntax {
                                line: line_no,
                                msg: format!("variable `{tok}` declared twice"),
                            });
                        }
                        var_names.push(tok.clone());
                    }
                }
                "p" => raw_prods.push((line_no, tokens)),
                other => {
                    return Err(CfgParseError::Syntax {
                        line: line_no,
                        msg: format!("unknown directive `{other}`"),
                    });
                }
            }
        }
        if !saw_header {
            return Err(CfgParseError::MissingDecl { what: "@cfg header" });
        }
        let terminals = terminals.ok_or(CfgParseError::MissingDecl { what: "terminals" })?;
        let (start_line, start_name) =
            start_name.ok_or(CfgParseError::MissingDecl { what: "start" })?;
        let var_id = |name: &str, line: usize| {
            var_names
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| CfgParseError::Undeclared {
                    line,
                    name: name.to_string(),
                })
        };
        let start = var_id(&start_name, start_line)?;
        let mut productions = Vec::new();
        for (line_no, tokens) in raw_prods {
            // p V -> X Y | p V -> X | p V -> eps
            if tokens.len() < 4 || tokens[2] != "->" || tokens.len() > 5 {
                return Err(CfgParseError::Syntax {
                    line: line_no,
                    msg: "expected `p <variable> -> <up to two symbols | eps>`".into(),
                });
            }
            let lhs = var_id(&tokens[1], line_no)?;
            let rhs_tokens = &tokens[3..];
            let rhs = if rhs_tokens == ["eps"] {
                Vec::new()
            } else {
                let mut rhs = Vec::new();
                for tok in rhs_tokens {
                    if let Some(t) = Terminal::from_token(tok) {
                        if !terminals.contains(&t) {
                            return Err(CfgParseError::Syntax {
                                line: line_no,
                                msg: format!("terminal `{tok}` is not declared"),
                            });
                        }
                        rhs.push(Sym::Term(t));
                    } else if tok == "eps" {
                        return Err(CfgParseError::Syntax {
                            line: line_no,
                            msg: "`eps` must stand alone".into(),
                        });
                    } else {
                        rhs.push(Sym::Var(var_id(tok, line_no)?));
                    }
                }
                rhs
            };
            productions.push(Production {
                lhs,
                rhs,
                read_target: None,
            });
        }
        Ok(Cfg::new(var_names, terminals, start, productions))
    }
}

/// Builds the grammar equivalent to a validated machine. The start variable
/// is `[q0 Z0]_1`; every mode contributes its two variables whether used or
/// not, so the variable count is exactly `2·n·m`.
pub fn to_grammar(m: &Dpda) -> Cfg {
    let exits = exit_table(m);
    let n_symbols = m.n_symbols();
    let var = |q: usize, z: usize, b: usize| (q * n_symbols + z) * 2 + b;
    let mut var_names: Vec<String> = Vec::with_capacity(m.n_states() * n_symbols * 2);
    for q in 0..m.n_states() {
        for z in 0..n_symbols {
            for b in 0..2 {
                // Pathological machine names could make two modes render the
                // same token; disambiguate so the grammar reparses.
                let mut name = format!("[{}.{}]_{}", m.state_name(q), m.symbol_name(z), b);
                while var_names.contains(&name) {
                    name.push('\'');
                }
                var_names.push(name);
            }
        }
    }
    let mut productions = Vec::new();
    let mut push = |lhs: VarId, rhs: Vec<Sym>, read_target: Option<String>| {
        productions.push(Production {
            lhs,
            rhs,
            read_target,
        });
    };
    for r in m.rules() {
        let (q, z) = (r.state, r.symbol);
        match r.action {
            Action::Push { target: p, symbol: bsym } => {
                push(var(q, z, 1), vec![Sym::Var(var(p, bsym, 1))], None);
                if let Some(exit) = exits.get(crate::dpda::Mode {
                    state: p,
                    top: bsym,
                }) {
                    push(
                        var(q, z, 0),
                        vec![Sym::Var(var(p, bsym, 0)), Sym::Var(var(exit, z, 0))],
                        None,
                    );
                    push(
                        var(q, z, 1),
                        vec![Sym::Var(var(p, bsym, 0)), Sym::Var(var(exit, z, 1))],
                        None,
                    );
                }
            }
            Action::Pop { .. } => {
                push(var(q, z, 0), vec![], None);
            }
            Action::Read { target: p } => {
                for b in 0..2 {
                    let rhs = match r.tag {
                        InputTag::Eps => vec![Sym::Var(var(p, z, b))],
                        InputTag::A => vec![Sym::Term(Terminal::A), Sym::Var(var(p, z, b))],
                    };
                    let origin = (r.tag == InputTag::A).then(|| m.state_name(p).to_string());
                    push(var(q, z, b), rhs, origin);
                }
            }
        }
    }
    for q in m.final_states() {
        for z in 0..n_symbols {
            push(var(q, z, 1), vec![], None);
        }
    }
    Cfg::new(
        var_names,
        BTreeSet::from([Terminal::A]),
        var(m.initial(), m.bottom(), 1),
        productions,
    )
}

fn productive_set(prods: &[Production], var_count: usize) -> Vec<bool> {
    let mut productive = vec![false; var_count];
    loop {
        let mut changed = false;
        for p in prods {
            if productive[p.lhs] {
                continue;
            }
            let all = p.rhs.iter().all(|s| match s {
                Sym::Var(v) => productive[*v],
                Sym::Term(_) => true,
            });
            if all {
                productive[p.lhs] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    productive
}

/// Removes unproductive and then unreachable variables. The start variable
/// is always kept, so the empty language is representable.
pub fn trim(g: &Cfg) -> Cfg {
    let productive = productive_set(g.productions(), g.var_count());
    let kept_prods: Vec<&Production> = g
        .productions()
        .iter()
        .filter(|p| {
            productive[p.lhs]
                && p.rhs.iter().all(|s| match s {
                    Sym::Var(v) => productive[*v],
                    Sym::Term(_) => true,
                })
        })
        .collect();

    let mut reachable = vec![false; g.var_count()];
    reachable[g.start()] = true;
    let mut queue = VecDeque::from([g.start()]);
    while let Some(v) = queue.pop_front() {
        for p in &kept_prods {
            if p.lhs != v {
                continue;
            }
            for s in &p.rhs {
                if let Sym::Var(w) = s {
                    if !reachable[*w] {
                        reachable[*w] = true;
                        queue.push_back(*w);
                    }
                }
            }
        }
    }

    let keep: Vec<bool> = (0..g.var_count())
        .map(|v| v == g.start() || (productive[v] && reachable[v]))
        .collect();
    let mut remap = vec![usize::MAX; g.var_count()];
    let mut var_names = Vec::new();
    for v in 0..g.var_count() {
        if keep[v] {
            remap[v] = var_names.len();
            var_names.push(g.var_name(v).to_string());
        }
    }
    let productions = kept_prods
        .into_iter()
        .filter(|p| reachable[p.lhs])
        .map(|p| Production {
            lhs: remap[p.lhs],
            rhs: p
                .rhs
                .iter()
                .map(|s| match s {
                    Sym::Var(v) => Sym::Var(remap[*v]),
                    Sym::Term(t) => Sym::Term(*t),
                })
                .collect(),
            read_target: p.read_target.clone(),
        })
        .collect();
    Cfg::new(
        var_names,
        g.terminals().clone(),
        remap[g.start()],
        productions,
    )
}

/// Chomsky normal form for the language minus the empty word. Expects right
/// sides of length at most two, so no binarization is needed; nullable and
/// unit productions are eliminated and terminals in two-symbol right sides
/// are lifted through one fresh variable per terminal.
pub fn to_cnf(g: &Cfg) -> Result<Cfg, GrammarError> {
    let nullable = g.nullable_set();
    let mut seen: HashSet<(VarId, Vec<Sym>)> = HashSet::new();
    let mut stripped: Vec<(VarId, Vec<Sym>)> = Vec::new();
    for p in g.productions() {
        assert!(p.rhs.len() <= 2, "right sides must have at most two symbols");
        let nullable_positions: Vec<usize> = p
            .rhs
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Sym::Var(v) if nullable[*v] => Some(i),
                _ => None,
            })
            .collect();
        for mask in 0..(1usize << nullable_positions.len()) {
            let dropped: Vec<usize> = nullable_positions
                .iter()
                .enumerate()
                .filter_map(|(bit, &pos)| ((mask >> bit) & 1 == 1).then_some(pos))
                .collect();
            let rhs: Vec<Sym> = p
                .rhs
                .iter()
                .enumerate()
                .filter(|(i, _)| !dropped.contains(i))
                .map(|(_, s)| *s)
                .collect();
            if rhs.is_empty() {
                continue;
            }
            if seen.insert((p.lhs, rhs.clone())) {
                stripped.push((p.lhs, rhs));
            }
        }
    }

    // Unit closure: variables reachable from each variable through chains of
    // single-variable productions.
    let mut unit_reach: Vec<BTreeSet<VarId>> = (0..g.var_count())
        .map(|v| BTreeSet::from([v]))
        .collect();
    loop {
        let mut changed = false;
        for (lhs, rhs) in &stripped {
            if let [Sym::Var(target)] = rhs[..] {
                let additions: Vec<VarId> = unit_reach[target]
                    .iter()
                    .copied()
                    .filter(|t| !unit_reach[*lhs].contains(t))
                    .collect();
                if !additions.is_empty() {
                    unit_reach[*lhs].extend(additions);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut var_names: Vec<String> = g.var_names().to_vec();
    let mut lifters: BTreeMap<Terminal, VarId> = BTreeMap::new();
    let mut lift = |t: Terminal, var_names: &mut Vec<String>| -> VarId {
        *lifters.entry(t).or_insert_with(|| {
            let mut name = format!("T_{}", t.token());
            while var_names.contains(&name) {
                name.push('\'');
            }
            var_names.push(name);
            var_names.len() - 1
        })
    };

    let by_lhs: BTreeMap<VarId, Vec<&Vec<Sym>>> = {
        let mut map: BTreeMap<VarId, Vec<&Vec<Sym>>> = BTreeMap::new();
        for (lhs, rhs) in &stripped {
            map.entry(*lhs).or_default().push(rhs);
        }
        map
    };
    let mut out_seen: HashSet<(VarId, Vec<Sym>)> = HashSet::new();
    let mut productions: Vec<Production> = Vec::new();
    for x in 0..g.var_count() {
        for &y in &unit_reach[x] {
            let Some(rhss) = by_lhs.get(&y) else { continue };
            for rhs in rhss {
                if matches!(rhs[..], [Sym::Var(_)]) {
                    continue;
                }
                let rhs: Vec<Sym> = if rhs.len() == 2 {
                    rhs.iter()
                        .map(|s| match s {
                            Sym::Term(t) => Sym::Var(lift(*t, &mut var_names)),
                            v => *v,
                        })
                        .collect()
                } else {
                    (*rhs).clone()
                };
                if out_seen.insert((x, rhs.clone())) {
                    productions.push(Production {
                        lhs: x,
                        rhs,
                        read_target: None,
                    });
                }
            }
        }
    }
    for (t, v) in &lifters {
        productions.push(Production {
            lhs: *v,
            rhs: vec![Sym::Term(*t)],
            read_target: None,
        });
    }

    let productive = productive_set(&productions, var_names.len());
    if !productive[g.start()] {
        return Err(GrammarError::EmptyLanguage);
    }
    Ok(Cfg::new(
        var_names,
        g.terminals().clone(),
        g.start(),
        productions,
    ))
}

/// Membership bits of `a^0 .. a^N`. The empty word is settled from the
/// original grammar's nullable set; positive lengths run a length-indexed
/// dynamic program over the trimmed Chomsky normal form.
pub fn unary_lengths(g: &Cfg, max_len: usize) -> Vec<bool> {
    assert!(
        g.terminals().iter().all(|t| *t == Terminal::A),
        "unary_lengths expects a grammar over {{a}}"
    );
    let mut bits = vec![false; max_len + 1];
    bits[0] = g.nullable_set()[g.start()];
    let cnf = match to_cnf(g) {
        Ok(cnf) => trim(&cnf),
        Err(GrammarError::EmptyLanguage) => return bits,
        Err(other) => unreachable!("to_cnf only reports empty languages: {other}"),
    };
    let nv = cnf.var_count();
    let mut table = vec![vec![false; max_len + 1]; nv];
    let mut binary: Vec<(VarId, VarId, VarId)> = Vec::new();
    for p in cnf.productions() {
        match p.rhs[..] {
            [Sym::Term(_)] => {
                if max_len >= 1 {
                    table[p.lhs][1] = true;
                }
            }
            [Sym::Var(y), Sym::Var(z)] => binary.push((p.lhs, y, z)),
            _ => unreachable!("normal form right sides are a terminal or two variables"),
        }
    }
    for len in 2..=max_len {
        for &(x, y, z) in &binary {
            if table[x][len] {
                continue;
            }
            if (1..len).any(|i| table[y][i] && table[z][len - i]) {
                table[x][len] = true;
            }
        }
    }
    for (k, bit) in bits.iter_mut().enumerate().skip(1) {
        *bit = table[cnf.start()][k];
    }
    bits
}

/// Exhaustively enumerates the words of each length up to `max_len`,
/// erroring out when any (variable, length) cell would hold more than `cap`
/// distinct words. Works on grammars over `{0, 1}`.
pub fn enumerate_words(
    g: &Cfg,
    max_len: usize,
    cap: usize,
) -> Result<BTreeMap<usize, BTreeSet<String>>, GrammarError> {
    assert!(
        g.terminals().iter().all(|t| *t != Terminal::A),
        "enumerate_words expects a grammar over {{0, 1}}"
    );
    assert!(cap > 0);
    let nv = g.var_count();
    let mut cells: Vec<BTreeMap<usize, BTreeSet<String>>> = vec![BTreeMap::new(); nv];
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (i, p) in g.productions().iter().enumerate() {
        for s in &p.rhs {
            if let Sym::Var(v) = s {
                if deps[*v].last() != Some(&i) {
                    deps[*v].push(i);
                }
            }
        }
    }

    // (length, word) pairs a single grammar symbol currently yields.
    fn words_of<'a>(
        cells: &'a [BTreeMap<usize, BTreeSet<String>>],
        sym: &'a Sym,
    ) -> Box<dyn Iterator<Item = (usize, String)> + 'a> {
        match sym {
            Sym::Term(t) => Box::new(std::iter::once((1, t.token().to_string()))),
            Sym::Var(v) => Box::new(
                cells[*v]
                    .iter()
                    .flat_map(|(len, set)| set.iter().map(move |w| (*len, w.clone()))),
            ),
        }
    }

    let mut queue: VecDeque<usize> = (0..g.productions().len()).collect();
    let mut queued = vec![true; g.productions().len()];
    while let Some(pi) = queue.pop_front() {
        queued[pi] = false;
        let p = &g.productions()[pi];
        let mut additions: Vec<(usize, String)> = Vec::new();
        match p.rhs[..] {
            [] => additions.push((0, String::new())),
            [ref x] => {
                for (len, w) in words_of(&cells, x) {
                    if len <= max_len {
                        additions.push((len, w));
                    }
                }
            }
            [ref x, ref y] => {
                for (lx, wx) in words_of(&cells, x) {
                    if lx > max_len {
                        continue;
                    }
                    for (ly, wy) in words_of(&cells, y) {
                        if lx + ly <= max_len {
                            additions.push((lx + ly, format!("{wx}{wy}")));
                        }
                    }
                }
            }
            _ => unreachable!("right sides have at most two symbols"),
        }
        let mut changed = false;
        for (len, w) in additions {
            let set = cells[p.lhs].entry(len).or_default();
            if set.insert(w) {
                changed = true;
                if set.len() > cap {
                    return Err(GrammarError::CapExceeded {
                        variable: g.var_name(p.lhs).to_string(),
                        length: len,
                        cap,
                    });
                }
            }
        }
        if changed {
            for &dep in &deps[p.lhs] {
                if !queued[dep] {
                    queued[dep] = true;
                    queue.push_back(dep);
                }
            }
        }
    }
    Ok(cells[g.start()]
        .iter()
        .filter(|(_, set)| !set.is_empty())
        .map(|(len, set)| (*len, set.clone()))
        .collect())
}

/// Rewrites every input-consuming production's terminal into the acceptance
/// bit of the state the read enters: `1` for final targets, `0` otherwise.
/// Productions that consume nothing are untouched.
pub fn relabel_reads(
    g: &Cfg,
    finality: &BTreeMap<String, bool>,
) -> Result<Cfg, GrammarError> {
    if !g
        .productions()
        .iter()
        .any(|p| matches!(p.rhs.first(), Some(Sym::Term(Terminal::A))))
    {
        return Ok(g.clone());
    }
    let mut productions = Vec::with_capacity(g.productions().len());
    for p in g.productions() {
        let mut p = p.clone();
        if let Some(Sym::Term(Terminal::A)) = p.rhs.first() {
            let target = p
                .read_target
                .as_ref()
                .expect("machine-derived productions carry their read target");
            let accepting = *finality
                .get(target)
                .ok_or_else(|| GrammarError::MissingFinality {
                    state: target.clone(),
                })?;
            p.rhs[0] = Sym::Term(if accepting { Terminal::One } else { Terminal::Zero });
        }
        productions.push(p);
    }
    Ok(Cfg::new(
        g.var_names().to_vec(),
        BTreeSet::from([Terminal::Zero, Terminal::One]),
        g.start(),
        productions,
    ))
}
