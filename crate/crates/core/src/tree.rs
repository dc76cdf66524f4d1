//! Exhaustive enumeration of the play tree of a strategy pair.

use crate::error::{Error, Result};
use crate::forecast::Alphabet;
use crate::history::PlayHistory;
use crate::strategy::ForecastingStrategy;

/// Largest number of leaves any enumeration will visit.
pub const ENUMERATION_BUDGET: u64 = 1 << 24;

/// Number of depth-`depth` prefixes, or an error past the budget.
pub fn leaf_count(alphabet: Alphabet, depth: usize) -> Result<u64> {
    let too_large = || Error::EnumerationTooLarge {
        size: alphabet.size(),
        depth,
        budget: ENUMERATION_BUDGET,
    };
    let mut n: u64 = 1;
    for _ in 0..depth {
        n = n.checked_mul(alphabet.size() as u64).ok_or_else(too_large)?;
        if n > ENUMERATION_BUDGET {
            return Err(too_large());
        }
    }
    Ok(n)
}

/// Calls `visit` on every node of the tree down to `depth` in depth-first
/// pre-order (root first, children in outcome order).
pub fn for_each_node(
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    depth: usize,
    mut visit: impl FnMut(&PlayHistory),
) -> Result<()> {
    let alphabet = f.alphabet();
    leaf_count(alphabet, depth)?;
    let mut h = PlayHistory::with_capacity(alphabet, depth);
    walk(&mut h, f, g, depth, &mut visit);
    Ok(())
}

/// Calls `visit` on every depth-`depth` leaf in lexicographic order.
pub fn for_each_leaf(
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    depth: usize,
    mut visit: impl FnMut(&PlayHistory),
) -> Result<()> {
    for_each_node(f, g, depth, |h| {
        if h.len() == depth {
            visit(h)
        }
    })
}

fn walk(
    h: &mut PlayHistory,
    f: &dyn ForecastingStrategy,
    g: &dyn ForecastingStrategy,
    depth: usize,
    visit: &mut impl FnMut(&PlayHistory),
) {
    visit(h);
    if h.len() == depth {
        return;
    }
    for x in h.alphabet().outcomes() {
        h.push_step(f, g, x).expect("outcome from the alphabet");
        walk(h, f, g, depth, visit);
        h.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::Seat;
    use crate::strategy::{Fair, SeededRandom};

    #[test]
    fn visits_every_leaf_once_in_order() {
        let f = Fair::new(Alphabet::BINARY);
        let mut seen = Vec::new();
        for_each_leaf(&f, &f, 3, |h| seen.push(h.outcomes().to_string())).unwrap();
        assert_eq!(seen, ["000", "001", "010", "011", "100", "101", "110", "111"]);
    }

    #[test]
    fn budget_is_enforced() {
        let f = Fair::new(Alphabet::BINARY);
        assert!(matches!(
            for_each_leaf(&f, &f, 25, |_| {}),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert_eq!(leaf_count(Alphabet::new(3).unwrap(), 4).unwrap(), 81);
    }

    #[test]
    fn leaf_probabilities_sum_to_one() {
        let a = Alphabet::new(3).unwrap();
        let f = SeededRandom::new(a, 1);
        let g = SeededRandom::new(a, 2);
        let mut total = [0.0; 2];
        for_each_leaf(&f, &g, 6, |h| {
            total[0] += h.log_prefix_prob(Seat::First).prob();
            total[1] += h.log_prefix_prob(Seat::Second).prob();
        })
        .unwrap();
        assert!((total[0] - 1.0).abs() < 1e-9);
        assert!((total[1] - 1.0).abs() < 1e-9);
    }
}
