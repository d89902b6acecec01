//! Selection of additional residuals that improve fault isolability.
//!
//! Candidates are scored by how many off-diagonal FIM ones they would
//! clear; the greedy loop keeps picking the best strictly improving
//! candidate until none is left. An exact branch-and-bound search over
//! small pools is available to audit how close the greedy answer is to a
//! true minimum.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::fsm::{fsm_to_fim, Fim, Fsm, FsmError};

/// Upper bound on pool size accepted by [`select_exact`].
pub const EXACT_POOL_LIMIT: usize = 20;

/// Number of re-routing candidates for a system with `n` sensors:
/// `n * 2^(n-1) - n` ordered (target, input-subset) pairs.
pub fn candidate_count(n: u32) -> Result<u64, FsmError> {
    if n == 0 {
        return Err(FsmError::ZeroSensors);
    }
    let pow = 1u64
        .checked_shl(n - 1)
        .ok_or(FsmError::CountOverflow(n))?;
    u64::from(n)
        .checked_mul(pow)
        .and_then(|t| t.checked_sub(u64::from(n)))
        .ok_or(FsmError::CountOverflow(n))
}

/// Number of FIM cells a candidate row would clear.
///
/// With `ones` the faults the candidate is sensitive to and `zeros` the
/// rest, this counts the ones in the FIM block `ones x zeros`. Each counted
/// cell is an ordered fault pair that is currently confusable and that this
/// candidate would separate.
pub fn improvement_score(fim: &Fim, candidate_row: &[bool]) -> Result<u64, FsmError> {
    let n = fim.n_faults();
    if candidate_row.len() != n {
        return Err(FsmError::RowWidthMismatch {
            got: candidate_row.len(),
            expected: n,
        });
    }
    let mut score = 0u64;
    for (i, row) in fim.cells().iter().enumerate() {
        if !candidate_row[i] {
            continue;
        }
        for (j, &cell) in row.iter().enumerate() {
            if cell && !candidate_row[j] {
                score += 1;
            }
        }
    }
    Ok(score)
}

/// Scores every candidate row against one FIM, in order.
///
/// Runs on the rayon pool when the `parallel` feature is enabled;
/// otherwise identical to [`improvement_scores_seq`].
pub fn improvement_scores(fim: &Fim, rows: &[Vec<bool>]) -> Result<Vec<u64>, FsmError> {
    #[cfg(feature = "parallel")]
    {
        rows.par_iter()
            .map(|row| improvement_score(fim, row))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        improvement_scores_seq(fim, rows)
    }
}

/// Sequential reference path for [`improvement_scores`].
pub fn improvement_scores_seq(fim: &Fim, rows: &[Vec<bool>]) -> Result<Vec<u64>, FsmError> {
    rows.iter().map(|row| improvement_score(fim, row)).collect()
}

/// Outcome of a selection run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionResult {
    /// Chosen pool residuals, in selection order.
    pub chosen: Vec<String>,
    /// Improvement score each chosen row had when it was picked.
    pub scores: Vec<u64>,
    /// FIM of the original rows plus every chosen row.
    pub final_fim: Fim,
    /// Scoring rounds executed, including a final round that found no
    /// improving candidate.
    pub iterations: usize,
}

/// Greedy minimal-addition selection.
///
/// Each round scores every unchosen pool row against the current FIM,
/// picks the highest strictly positive score (ties resolved toward the
/// lowest pool index), appends that row, and recomputes the FIM. Stops
/// when no row improves anything. The returned FIM is cellwise below every
/// intermediate one.
pub fn select_minimal(original: &Fsm, pool: &Fsm) -> Result<SelectionResult, FsmError> {
    select_with(original, pool, improvement_scores)
}

/// Sequential reference path for [`select_minimal`].
pub fn select_minimal_seq(original: &Fsm, pool: &Fsm) -> Result<SelectionResult, FsmError> {
    select_with(original, pool, improvement_scores_seq)
}

fn select_with(
    original: &Fsm,
    pool: &Fsm,
    score_rows: fn(&Fim, &[Vec<bool>]) -> Result<Vec<u64>, FsmError>,
) -> Result<SelectionResult, FsmError> {
    check_pool(original, pool)?;

    let mut remaining: Vec<usize> = (0..pool.n_residuals()).collect();
    let mut stacked = original.clone();
    let mut fim = fsm_to_fim(&stacked);
    let mut chosen = Vec::new();
    let mut scores = Vec::new();
    let mut iterations = 0;

    while !remaining.is_empty() {
        let rows: Vec<Vec<bool>> = remaining
            .iter()
            .map(|&idx| pool.cells()[idx].clone())
            .collect();
        let round = score_rows(&fim, &rows)?;
        iterations += 1;

        let (best_pos, best_score) = round
            .iter()
            .copied()
            .enumerate()
            .max_by_key(|&(idx, score)| (score, std::cmp::Reverse(idx)))
            .expect("remaining is non-empty");
        if best_score == 0 {
            break;
        }

        let pool_idx = remaining.remove(best_pos);
        let id = &pool.residual_ids()[pool_idx];
        stacked = stacked.with_row_appended(id, pool.cells()[pool_idx].clone())?;
        fim = fsm_to_fim(&stacked);
        chosen.push(id.clone());
        scores.push(best_score);
    }

    Ok(SelectionResult {
        chosen,
        scores,
        final_fim: fim,
        iterations,
    })
}

/// Exact minimum-cardinality selection by branch and bound.
///
/// Finds a smallest pool subset whose FIM equals the FIM of the full pool,
/// i.e. nothing smaller reaches the same isolability end state. Gated to
/// pools of at most [`EXACT_POOL_LIMIT`] rows. The result lists chosen rows
/// in pool order.
pub fn select_exact(original: &Fsm, pool: &Fsm) -> Result<SelectionResult, FsmError> {
    check_pool(original, pool)?;
    if pool.n_residuals() > EXACT_POOL_LIMIT {
        return Err(FsmError::PoolTooLarge {
            limit: EXACT_POOL_LIMIT,
            got: pool.n_residuals(),
        });
    }

    let base_fim = fsm_to_fim(original);
    let full_fim = fsm_to_fim(&original.stacked(pool)?);
    let n = base_fim.n_faults();

    // Ordered fault pairs that the pool as a whole can separate.
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if base_fim.cell(i, j) && !full_fim.cell(i, j) {
                pairs.push((i, j));
            }
        }
    }

    // kill[k] = set of target pairs separated by pool row k.
    let kills: Vec<Vec<bool>> = pool
        .cells()
        .iter()
        .map(|row| {
            pairs
                .iter()
                .map(|&(i, j)| row[i] && !row[j])
                .collect()
        })
        .collect();

    let greedy = select_minimal(original, pool)?;
    let mut best: Vec<usize> = greedy
        .chosen
        .iter()
        .map(|id| pool.residual_index(id).expect("chosen row comes from pool"))
        .collect();
    best.sort_unstable();

    let mut stack = Vec::new();
    let covered = vec![false; pairs.len()];
    branch(&kills, &covered, &mut stack, &mut best);
    best.sort_unstable();

    let mut stacked = original.clone();
    let mut chosen = Vec::new();
    let mut scores = Vec::new();
    for &idx in &best {
        let id = &pool.residual_ids()[idx];
        let fim = fsm_to_fim(&stacked);
        scores.push(improvement_score(&fim, &pool.cells()[idx])?);
        stacked = stacked.with_row_appended(id, pool.cells()[idx].clone())?;
        chosen.push(id.clone());
    }

    Ok(SelectionResult {
        chosen,
        scores,
        final_fim: fsm_to_fim(&stacked),
        iterations: best.len(),
    })
}

fn branch(
    kills: &[Vec<bool>],
    covered: &[bool],
    stack: &mut Vec<usize>,
    best: &mut Vec<usize>,
) {
    let first_uncovered = match covered.iter().position(|&c| !c) {
        Some(p) => p,
        None => {
            if stack.len() < best.len() {
                *best = stack.clone();
            }
            return;
        }
    };
    if stack.len() + 1 >= best.len() {
        return;
    }
    // Any cover must contain a row separating the first uncovered pair.
    // Rows already on the stack cannot qualify: their pairs are covered.
    for (k, kill) in kills.iter().enumerate() {
        if !kill[first_uncovered] {
            continue;
        }
        let next: Vec<bool> = covered
            .iter()
            .zip(kill)
            .map(|(&c, &k)| c || k)
            .collect();
        stack.push(k);
        branch(kills, &next, stack, best);
        stack.pop();
    }
}

fn check_pool(original: &Fsm, pool: &Fsm) -> Result<(), FsmError> {
    if original.fault_ids() != pool.fault_ids() {
        return Err(FsmError::FaultAxisMismatch);
    }
    for id in pool.residual_ids() {
        if original.residual_index(id).is_some() {
            return Err(FsmError::PoolReusesResidual(id.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsm::isolated_faults;

    fn fsm(residuals: &[&str], faults: &[&str], rows: &[&[u8]]) -> Fsm {
        Fsm::new(
            residuals.iter().map(|s| s.to_string()).collect(),
            faults.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|row| row.iter().map(|&c| c != 0).collect())
                .collect(),
        )
        .unwrap()
    }

    fn originals() -> Fsm {
        fsm(&["r1", "r2"], &["f1", "f2", "fu"], &[&[1, 0, 1], &[0, 1, 1]])
    }

    fn pool() -> Fsm {
        fsm(&["r3", "r4"], &["f1", "f2", "fu"], &[&[1, 1, 0], &[1, 1, 0]])
    }

    #[test]
    fn counts_match_reroute_formula() {
        assert_eq!(candidate_count(7).unwrap(), 441);
        assert_eq!(candidate_count(2).unwrap(), 2);
        assert_eq!(candidate_count(1).unwrap(), 0);
        assert_eq!(candidate_count(0), Err(FsmError::ZeroSensors));
        assert_eq!(candidate_count(63), Err(FsmError::CountOverflow(63)));
    }

    #[test]
    fn score_counts_confusable_pairs_cleared() {
        let fim = fsm_to_fim(&originals());
        // r3 separates (f1, fu) and (f2, fu).
        assert_eq!(improvement_score(&fim, &[true, true, false]).unwrap(), 2);
        assert_eq!(improvement_score(&fim, &[false, false, false]).unwrap(), 0);
    }

    #[test]
    fn score_is_zero_on_identity_fim() {
        let ids: Vec<String> = (0..4).map(|i| format!("f{i}")).collect();
        let cells = (0..4).map(|i| (0..4).map(|j| i == j).collect()).collect();
        let fim = Fim::new(ids, cells).unwrap();
        assert_eq!(improvement_score(&fim, &[true, false, true, false]).unwrap(), 0);
    }

    #[test]
    fn score_validates_row_width() {
        let fim = fsm_to_fim(&originals());
        assert_eq!(
            improvement_score(&fim, &[true]),
            Err(FsmError::RowWidthMismatch {
                got: 1,
                expected: 3
            })
        );
    }

    #[test]
    fn greedy_picks_only_the_first_sufficient_candidate() {
        let result = select_minimal(&originals(), &pool()).unwrap();
        assert_eq!(result.chosen, vec!["r3"]);
        assert_eq!(result.scores, vec![2]);
        assert_eq!(result.iterations, 2);
        assert_eq!(
            isolated_faults(&result.final_fim),
            vec!["f1", "f2", "fu"]
        );
    }

    #[test]
    fn empty_pool_returns_original_fim() {
        let empty = fsm(&[], &["f1", "f2", "fu"], &[]);
        let result = select_minimal(&originals(), &empty).unwrap();
        assert!(result.chosen.is_empty());
        assert_eq!(result.iterations, 0);
        assert_eq!(result.final_fim, fsm_to_fim(&originals()));
    }

    #[test]
    fn axis_mismatch_is_rejected() {
        let other = fsm(&["r3"], &["f1", "fu", "f2"], &[&[1, 1, 0]]);
        assert_eq!(
            select_minimal(&originals(), &other),
            Err(FsmError::FaultAxisMismatch)
        );
    }

    #[test]
    fn pool_reusing_original_id_is_rejected() {
        let clash = fsm(&["r1"], &["f1", "f2", "fu"], &[&[1, 1, 0]]);
        assert_eq!(
            select_minimal(&originals(), &clash),
            Err(FsmError::PoolReusesResidual("r1".into()))
        );
    }

    #[test]
    fn exact_matches_greedy_on_the_small_example() {
        let exact = select_exact(&originals(), &pool()).unwrap();
        assert_eq!(exact.chosen, vec!["r3"]);
        assert_eq!(exact.final_fim, select_minimal(&originals(), &pool()).unwrap().final_fim);
    }

    #[test]
    fn exact_beats_greedy_when_greedy_overshoots() {
        // `wide` clears the most pairs up front but the two `half` rows
        // jointly clear everything `wide` does and more, so the optimum
        // skips it. Greedy grabs `wide` first and needs all three.
        let original = fsm(&["a"], &["f1", "f2", "f3", "f4", "f5", "f6"], &[&[1, 1, 1, 1, 1, 1]]);
        let pool = fsm(
            &["wide", "half_a", "half_b"],
            &["f1", "f2", "f3", "f4", "f5", "f6"],
            &[
                &[1, 1, 1, 0, 0, 0],
                &[1, 1, 1, 1, 0, 0],
                &[1, 1, 1, 0, 1, 0],
            ],
        );
        let greedy = select_minimal(&original, &pool).unwrap();
        let exact = select_exact(&original, &pool).unwrap();
        assert_eq!(greedy.chosen, vec!["wide", "half_a", "half_b"]);
        assert_eq!(exact.chosen, vec!["half_a", "half_b"]);
        assert_eq!(exact.final_fim, greedy.final_fim);
    }

    #[test]
    fn exact_rejects_oversized_pools() {
        let n = EXACT_POOL_LIMIT + 1;
        let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let rows = vec![vec![true, false]; n];
        let big = Fsm::new(ids, vec!["f1".into(), "f2".into()], rows).unwrap();
        let original = fsm(&["a"], &["f1", "f2"], &[&[1, 1]]);
        assert_eq!(
            select_exact(&original, &big),
            Err(FsmError::PoolTooLarge { limit: EXACT_POOL_LIMIT, got: n })
        );
    }
}
