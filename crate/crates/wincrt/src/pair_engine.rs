//! Win/loss/tie counting between the outcome vectors of one treated and one
//! control cluster. `brute_force_counts` is the O(N_i·N_j) reference kept as
//! a test oracle; `fast_counts` produces identical output in
//! O(N_i + N_j + D) via category histograms, with a sort-merge path for
//! scales too wide for a histogram.

use crate::data_model::{Rank, WinTriple};
use crate::numeric::WinScalar;

/// Raw pair comparison counts for one treated-control cluster pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
}

impl PairCounts {
    pub fn n_pairs(&self) -> u64 {
        self.wins + self.losses + self.ties
    }
}

/// Reference double-sum implementation: wins = #{(k,l) : treated_k > control_l}.
pub fn brute_force_counts(treated: &[Rank], control: &[Rank]) -> PairCounts {
    debug_assert!(!treated.is_empty() && !control.is_empty());
    let mut wins = 0u64;
    let mut losses = 0u64;
    let mut ties = 0u64;
    for &t in treated {
        for &c in control {
            match t.cmp(&c) {
                std::cmp::Ordering::Greater => wins += 1,
                std::cmp::Ordering::Less => losses += 1,
                std::cmp::Ordering::Equal => ties += 1,
            }
        }
    }
    PairCounts { wins, losses, ties }
}

/// Scales wider than this fall back to the sort-merge path.
const HISTOGRAM_MAX_LEVELS: usize = 4096;

/// Same counts as `brute_force_counts`, computed without the double loop.
pub fn fast_counts(treated: &[Rank], control: &[Rank], num_levels: usize) -> PairCounts {
    if num_levels <= HISTOGRAM_MAX_LEVELS {
        histogram_counts(treated, control, num_levels)
    } else {
        merge_counts(treated, control)
    }
}

/// Histogram path: bucket both vectors by rank, then pair buckets through a
/// running cumulative count of control outcomes strictly below each rank.
pub fn histogram_counts(treated: &[Rank], control: &[Rank], num_levels: usize) -> PairCounts {
    let mut ht = vec![0u64; num_levels];
    let mut hc = vec![0u64; num_levels];
    for &t in treated {
        ht[t as usize] += 1;
    }
    for &c in control {
        hc[c as usize] += 1;
    }
    let mut wins = 0u64;
    let mut losses = 0u64;
    let mut ties = 0u64;
    let mut control_below = 0u64; // # control outcomes with rank < current
    let control_total = control.len() as u64;
    for rank in 0..num_levels {
        let nt = ht[rank];
        let nc = hc[rank];
        wins += nt * control_below;
        ties += nt * nc;
        losses += nt * (control_total - control_below - nc);
        control_below += nc;
    }
    PairCounts { wins, losses, ties }
}

/// Sort-merge path for generic ordered values: O((N_i+N_j) log(N_i+N_j)).
pub fn merge_counts(treated: &[Rank], control: &[Rank]) -> PairCounts {
    let mut t_sorted = treated.to_vec();
    let mut c_sorted = control.to_vec();
    t_sorted.sort_unstable();
    c_sorted.sort_unstable();

    let mut wins = 0u64;
    let mut ties = 0u64;
    let mut below = 0usize; // control entries < t_sorted[ti]
    let mut at_or_below = 0usize; // control entries <= t_sorted[ti]
    for &t in &t_sorted {
        while below < c_sorted.len() && c_sorted[below] < t {
            below += 1;
        }
        if at_or_below < below {
            at_or_below = below;
        }
        while at_or_below < c_sorted.len() && c_sorted[at_or_below] == t {
            at_or_below += 1;
        }
        wins += below as u64;
        ties += (at_or_below - below) as u64;
    }
    let total = treated.len() as u64 * control.len() as u64;
    PairCounts {
        wins,
        losses: total - wins - ties,
        ties,
    }
}

/// Divide each count by N_i·N_j, yielding per-pair win/loss/tie fractions.
pub fn pair_fractions<S: WinScalar>(counts: &PairCounts) -> WinTriple<S> {
    let n = counts.n_pairs();
    debug_assert!(n > 0);
    WinTriple::new(
        S::ratio(counts.wins, n),
        S::ratio(counts.losses, n),
        S::ratio(counts.ties, n),
    )
}
