//! Conversion of a unary pushdown machine to its minimal finite automaton.

use thiserror::Error;

use crate::dpda::Dpda;
use crate::immediate::immediate_accept;
use crate::sim::{detect_pump, Budget, RunShape, SimError};
use crate::udfa::UnaryDfa;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConvertError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("minimized automaton has {states} states, above the 2^(n*m) = {bound} bound")]
    InternalBoundViolation { states: usize, bound: usize },
}

/// Converts the machine to the minimal unary finite automaton accepting the
/// same language.
///
/// The immediate-acceptance transform is applied first, so the acceptance bit
/// of `a^k` is exactly the bit collected for length `k` by the run-shape
/// analysis; the preperiod and period of the acceptance bit sequence then
/// fall straight out of the pump. A pump that reads nothing per period means
/// the run never consumes again, so all longer inputs are rejected — this
/// also covers machines that are not loop-free. The minimized result is
/// checked against the `2^(n*m)` state bound of the source machine; exceeding
/// it is a bug, not an input property.
pub fn to_dfa(m: &Dpda, b: &Budget) -> Result<UnaryDfa, ConvertError> {
    let mi = immediate_accept(m);
    let shape = detect_pump(&mi, b)?;
    let dfa = match shape {
        RunShape::Pumps {
            reads_pre,
            reads_period,
            bits,
            ..
        } if reads_period > 0 => {
            debug_assert_eq!(bits.len(), reads_pre + reads_period + 1);
            UnaryDfa::new(
                bits[..=reads_pre].to_vec(),
                bits[reads_pre + 1..].to_vec(),
            )
        }
        RunShape::Pumps { bits, .. } | RunShape::Halts { bits, .. } => {
            UnaryDfa::new(bits, vec![false])
        }
    }
    .minimize();

    let nm = m.n_states() * m.n_symbols();
    if nm < usize::BITS as usize - 1 {
        let bound = 1usize << nm;
        if dfa.state_count() > bound {
            return Err(ConvertError::InternalBoundViolation {
                states: dfa.state_count(),
                bound,
            });
        }
    }
    Ok(dfa)
}
