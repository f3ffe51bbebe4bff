//! Canonical unary finite automata as preperiod and period bit vectors.
//!
//! A unary regular language is an eventually periodic set of lengths, so a
//! tail of `p` bits plus a cycle of `c` bits represents it losslessly; the
//! corresponding minimal one-way automaton has `p + c` states once the
//! representation is minimized.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UdfaParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing {what} line")]
    MissingDecl { what: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnaryDfa {
    preperiod: Vec<bool>,
    period: Vec<bool>,
}

impl UnaryDfa {
    pub fn new(preperiod: Vec<bool>, period: Vec<bool>) -> UnaryDfa {
        assert!(!period.is_empty(), "period must be nonempty");
        UnaryDfa { preperiod, period }
    }

    pub fn preperiod(&self) -> &[bool] {
        &self.preperiod
    }

    pub fn period(&self) -> &[bool] {
        &self.period
    }

    /// Number of states of the represented automaton: tail plus cycle.
    pub fn state_count(&self) -> usize {
        self.preperiod.len() + self.period.len()
    }

    /// Membership of `a^k`.
    pub fn member(&self, k: usize) -> bool {
        let p = self.preperiod.len();
        if k < p {
            self.preperiod[k]
        } else {
            self.period[(k - p) % self.period.len()]
        }
    }

    /// The unique minimal representation: the period is reduced to its
    /// primitive length, then trailing preperiod bits that agree with the
    /// (rotated) period are folded into it.
    pub fn minimize(&self) -> UnaryDfa {
        let c = self.period.len();
        let primitive = (1..=c)
            .filter(|d| c % d == 0)
            .find(|&d| (0..c).all(|i| self.period[i] == self.period[i % d]))
            .expect("c divides c");
        let mut period: Vec<bool> = self.period[..primitive].to_vec();
        let mut preperiod = self.preperiod.clone();
        while let Some(&last) = preperiod.last() {
            if last == *period.last().expect("period is nonempty") {
                preperiod.pop();
                period.rotate_right(1);
            } else {
                break;
            }
        }
        UnaryDfa { preperiod, period }
    }

    pub fn render(&self) -> String {
        let bit = |&b: &bool| if b { " 1" } else { " 0" };
        let mut out = String::from("@udfa\npreperiod");
        out.extend(self.preperiod.iter().map(bit));
        out.push_str("\nperiod");
        out.extend(self.period.iter().map(bit));
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<UnaryDfa, UdfaParseError> {
        let mut preperiod: Option<Vec<bool>> = None;
        let mut period: Option<(usize, Vec<bool>)> = None;
        let mut saw_header = false;
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            if !saw_header {
                if tokens == ["@udfa"] {
                    saw_header = true;
                    continue;
                }
                return Err(UdfaParseError::Syntax {
                    line: line_no,
                    msg: "expected `@udfa` header".into(),
                });
            }
            let parse_bits = |tokens: &[&str]| -> Result<Vec<bool>, UdfaParseError> {
                tokens
                    .iter()
                    .map(|t| match *t {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        other => Err(UdfaParseError::Syntax {
                            line: line_no,
                            msg: format!("expected bit 0 or 1, found `{other}`"),
                        }),
                    })
                    .collect()
            };
            match tokens[0] {
                "preperiod" if preperiod.is_none() => {
                    preperiod = Some(parse_bits(&tokens[1..])?);
                }
                "period" if period.is_none() => {
                    period = Some((line_no, parse_bits(&tokens[1..])?));
                }
                other => {
                    return Err(UdfaParseError::Syntax {
                        line: line_no,
                        msg: format!("unexpected `{other}` line"),
                    });
                }
            }
        }
        if !saw_header {
            return Err(UdfaParseError::MissingDecl { what: "@udfa header" });
        }
        let preperiod = preperiod.ok_or(UdfaParseError::MissingDecl { what: "preperiod" })?;
        let (period_line, period) = period.ok_or(UdfaParseError::MissingDecl { what: "period" })?;
        if period.is_empty() {
            return Err(UdfaParseError::Syntax {
                line: period_line,
                msg: "period must be nonempty".into(),
            });
        }
        Ok(UnaryDfa::new(preperiod, period))
    }
}

/// Exact language equality, via the canonical minimal representations.
pub fn udfa_equal(a: &UnaryDfa, b: &UnaryDfa) -> bool {
    a.minimize() == b.minimize()
}
