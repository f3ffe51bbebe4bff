//! Subcommand wiring: line-based text formats in, deterministic text out.
//!
//! Exit codes: 0 on success, 1 on domain errors (validation violations,
//! inequivalence, budget or cap overruns), 2 on usage and parse errors.

use std::fs;
use std::io::Read;

use clap::{Parser, Subcommand};

use tallypda::analysis::make_loop_free;
use tallypda::convert::to_dfa;
use tallypda::families::{
    bm_udfa, de_bruijn_word, gen_ls, gen_random, word_grammar_pipeline, MAX_WORD_GRAMMAR_ORDER,
};
use tallypda::grammar::{enumerate_words, to_cnf, to_grammar, trim, unary_lengths, Cfg, Terminal};
use tallypda::immediate::immediate_accept;
use tallypda::sim::{accepts, Budget};
use tallypda::udfa::{udfa_equal, UnaryDfa};
use tallypda::Dpda;

#[derive(Parser)]
#[command(
    name = "tallypda",
    version,
    about = "Unary deterministic pushdown automata: simulate, convert, generate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Check a machine against the normal-form and determinism invariants.
    Validate {
        #[arg(default_value = "-")]
        file: String,
    },
    /// Decide membership of a^K by direct simulation.
    Simulate {
        #[arg(default_value = "-")]
        file: String,
        #[arg(long)]
        len: usize,
    },
    /// Convert a machine to the minimal equivalent unary finite automaton.
    ToDfa {
        #[arg(default_value = "-")]
        file: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Convert a machine to an equivalent context-free grammar.
    ToGrammar {
        #[arg(default_value = "-")]
        file: String,
        /// Convert the result to Chomsky normal form (drops the empty word).
        #[arg(long)]
        cnf: bool,
        /// Remove unproductive and unreachable variables first.
        #[arg(long)]
        trim: bool,
        #[arg(long)]
        out: Option<String>,
    },
    /// Apply the immediate-acceptance transform.
    Immediate {
        #[arg(default_value = "-")]
        file: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Redirect every ε-loop into a fresh halting state.
    Loopfree {
        #[arg(default_value = "-")]
        file: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Print the machine of size 8s+4 accepting the multiples of 2^s.
    GenLs {
        #[arg(value_parser = clap::value_parser!(u64).range(1..=60))]
        s: u64,
    },
    /// Print the purely 2^m-cyclic de Bruijn language as a unary automaton.
    GenBm {
        #[arg(value_parser = clap::value_parser!(u64).range(1..=20))]
        m: u64,
    },
    /// Print the lexicographically least de Bruijn word of order m.
    GenDebruijn {
        #[arg(value_parser = clap::value_parser!(u64).range(1..=20))]
        m: u64,
    },
    /// Print a reproducible pseudo-random valid machine.
    GenRandom {
        #[arg(value_parser = clap::value_parser!(u64).range(1..=10_000))]
        n: u64,
        #[arg(value_parser = clap::value_parser!(u64).range(1..=10_000))]
        m: u64,
        seed: u64,
    },
    /// Print the grammar generating exactly the order-m de Bruijn word.
    WordGrammar {
        #[arg(value_parser = clap::value_parser!(u64).range(1..=MAX_WORD_GRAMMAR_ORDER as u64))]
        m: u64,
    },
    /// Decide language equality of two machines, automata or grammars.
    Equiv {
        file1: String,
        file2: String,
        /// Horizon for the pointwise comparison used when a grammar is involved.
        #[arg(long, default_value_t = 500)]
        max_len: usize,
    },
    /// Enumerate the words a binary grammar generates, per length.
    EnumGrammar {
        #[arg(default_value = "-")]
        file: String,
        #[arg(long)]
        max_len: usize,
        #[arg(long, default_value_t = 8)]
        cap: usize,
    },
    /// Report size figures for a machine, automaton or grammar.
    Stats {
        #[arg(default_value = "-")]
        file: String,
    },
}

pub enum CliError {
    /// Well-formed inputs, unsatisfiable request: exit 1.
    Domain(String),
    /// Unreadable or unparseable input: exit 2.
    Input(String),
}

impl CliError {
    pub fn message(&self) -> &str {
        match self {
            CliError::Domain(msg) | CliError::Input(msg) => msg,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Input(format!("reading stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("reading {path}: {e}")))
    }
}

fn write_output(out: &Option<String>, text: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::Input(format!("writing {path}: {e}")))
        }
    }
}

fn load_dpda(path: &str) -> Result<Dpda, CliError> {
    let text = read_input(path)?;
    Dpda::parse(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

fn load_valid_dpda(path: &str) -> Result<Dpda, CliError> {
    let m = load_dpda(path)?;
    let violations = m.validate();
    if violations.is_empty() {
        Ok(m)
    } else {
        Err(CliError::Domain(format!(
            "{path}: machine is invalid: {}",
            violations[0]
        )))
    }
}

fn first_token(text: &str) -> Option<&str> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .next()
}

enum Language {
    Exact(UnaryDfa),
    Grammar(Cfg),
}

fn load_language(path: &str) -> Result<Language, CliError> {
    let text = read_input(path)?;
    match first_token(&text) {
        Some("@dpda") => {
            let m = Dpda::parse(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            let violations = m.validate();
            if !violations.is_empty() {
                return Err(CliError::Domain(format!(
                    "{path}: machine is invalid: {}",
                    violations[0]
                )));
            }
            let dfa = to_dfa(&m, &Budget::for_machine(&m))
                .map_err(|e| CliError::Domain(format!("{path}: {e}")))?;
            Ok(Language::Exact(dfa))
        }
        Some("@udfa") => Ok(Language::Exact(
            UnaryDfa::parse(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?,
        )),
        Some("@cfg") => {
            let g = Cfg::parse(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            if !g.terminals().iter().all(|t| *t == Terminal::A) {
                return Err(CliError::Domain(format!(
                    "{path}: grammar is not unary, cannot compare languages"
                )));
            }
            Ok(Language::Grammar(g))
        }
        _ => Err(CliError::Input(format!(
            "{path}: expected a @dpda, @udfa or @cfg header"
        ))),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Validate { file } => {
            let m = load_dpda(&file)?;
            let violations = m.validate();
            if violations.is_empty() {
                println!("ok");
                Ok(())
            } else {
                for v in &violations {
                    println!("{v}");
                }
                Err(CliError::Domain(format!(
                    "{} violation(s) found",
                    violations.len()
                )))
            }
        }
        Cmd::Simulate { file, len } => {
            let m = load_valid_dpda(&file)?;
            let verdict = accepts(&m, len, &Budget::for_machine(&m))
                .map_err(|e| CliError::Domain(e.to_string()))?;
            println!("{}", if verdict { "accept" } else { "reject" });
            Ok(())
        }
        Cmd::ToDfa { file, out } => {
            let m = load_valid_dpda(&file)?;
            let dfa = to_dfa(&m, &Budget::for_machine(&m))
                .map_err(|e| CliError::Domain(e.to_string()))?;
            write_output(&out, &dfa.render())
        }
        Cmd::ToGrammar {
            file,
            cnf,
            trim: do_trim,
            out,
        } => {
            let m = load_valid_dpda(&file)?;
            let mut g = to_grammar(&m);
            if do_trim {
                g = trim(&g);
            }
            if cnf {
                g = to_cnf(&g).map_err(|e| CliError::Domain(e.to_string()))?;
            }
            write_output(&out, &g.render())
        }
        Cmd::Immediate { file, out } => {
            let m = load_valid_dpda(&file)?;
            write_output(&out, &immediate_accept(&m).render())
        }
        Cmd::Loopfree { file, out } => {
            let m = load_valid_dpda(&file)?;
            write_output(&out, &make_loop_free(&m).render())
        }
        Cmd::GenLs { s } => {
            print!("{}", gen_ls(s as usize).render());
            Ok(())
        }
        Cmd::GenBm { m } => {
            print!("{}", bm_udfa(m as usize).render());
            Ok(())
        }
        Cmd::GenDebruijn { m } => {
            println!("{}", de_bruijn_word(m as usize));
            Ok(())
        }
        Cmd::GenRandom { n, m, seed } => {
            print!("{}", gen_random(n as usize, m as usize, seed).render());
            Ok(())
        }
        Cmd::WordGrammar { m } => {
            let g = word_grammar_pipeline(m as usize)
                .map_err(|e| CliError::Domain(e.to_string()))?;
            print!("{}", g.render());
            Ok(())
        }
        Cmd::Equiv {
            file1,
            file2,
            max_len,
        } => {
            let lhs = load_language(&file1)?;
            let rhs = load_language(&file2)?;
            match (&lhs, &rhs) {
                (Language::Exact(a), Language::Exact(b)) => {
                    if udfa_equal(a, b) {
                        println!("equivalent");
                        Ok(())
                    } else {
                        let horizon = a.preperiod().len()
                            + b.preperiod().len()
                            + 2 * (a.period().len() / gcd(a.period().len(), b.period().len()))
                                * b.period().len();
                        let diff = (0..=horizon)
                            .find(|&k| a.member(k) != b.member(k))
                            .expect("inequivalent languages differ within the horizon");
                        println!("inequivalent: lengths differ at {diff}");
                        Err(CliError::Domain("languages differ".into()))
                    }
                }
                _ => {
                    let bits = |lang: &Language| -> Vec<bool> {
                        match lang {
                            Language::Exact(d) => (0..=max_len).map(|k| d.member(k)).collect(),
                            Language::Grammar(g) => unary_lengths(g, max_len),
                        }
                    };
                    let (ba, bb) = (bits(&lhs), bits(&rhs));
                    match (0..=max_len).find(|&k| ba[k] != bb[k]) {
                        None => {
                            println!("equivalent up to length {max_len}");
                            Ok(())
                        }
                        Some(diff) => {
                            println!("inequivalent: lengths differ at {diff}");
                            Err(CliError::Domain("languages differ".into()))
                        }
                    }
                }
            }
        }
        Cmd::EnumGrammar { file, max_len, cap } => {
            let text = read_input(&file)?;
            let g = Cfg::parse(&text).map_err(|e| CliError::Input(format!("{file}: {e}")))?;
            if g.terminals().iter().any(|t| *t == Terminal::A) {
                return Err(CliError::Domain(
                    "enum-grammar expects a grammar over 0/1".into(),
                ));
            }
            let words = enumerate_words(&g, max_len, cap)
                .map_err(|e| CliError::Domain(e.to_string()))?;
            for (len, set) in &words {
                for w in set {
                    if w.is_empty() {
                        println!("{len} eps");
                    } else {
                        println!("{len} {w}");
                    }
                }
            }
            Ok(())
        }
        Cmd::Stats { file } => {
            let text = read_input(&file)?;
            match first_token(&text) {
                Some("@dpda") => {
                    let m =
                        Dpda::parse(&text).map_err(|e| CliError::Input(format!("{file}: {e}")))?;
                    println!("states {}", m.n_states());
                    println!("stack-symbols {}", m.n_symbols());
                    println!("size {}", m.size());
                    Ok(())
                }
                Some("@udfa") => {
                    let d = UnaryDfa::parse(&text)
                        .map_err(|e| CliError::Input(format!("{file}: {e}")))?;
                    println!("preperiod {}", d.preperiod().len());
                    println!("period {}", d.period().len());
                    println!("states {}", d.state_count());
                    Ok(())
                }
                Some("@cfg") => {
                    let g =
                        Cfg::parse(&text).map_err(|e| CliError::Input(format!("{file}: {e}")))?;
                    println!("variables {}", g.var_count());
                    println!("productions {}", g.productions().len());
                    Ok(())
                }
                _ => Err(CliError::Input(format!(
                    "{file}: expected a @dpda, @udfa or @cfg header"
                ))),
            }
        }
    }
}
