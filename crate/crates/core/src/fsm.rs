//! Fault signature matrices (FSM), fault isolation matrices (FIM), and
//! diagnosis from triggered residuals.
//!
//! An FSM records which residuals respond to which faults. The FIM derived
//! from it captures the candidate-diagnosis relation between faults: cell
//! `(i, j)` is 1 when the residuals sensitive to fault `i` are a subset of
//! those sensitive to fault `j`, so an occurrence of `i` can never rule
//! fault `j` out. A fault whose FIM column holds only the diagonal entry is
//! isolated: it never shows up as a spurious candidate while some other
//! single fault is active.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors raised while building or querying signature/isolation matrices.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FsmError {
    #[error("duplicate residual id `{0}`")]
    DuplicateResidual(String),
    #[error("duplicate fault id `{0}`")]
    DuplicateFault(String),
    #[error("matrix has {rows} rows but {expected} residual ids")]
    RowCountMismatch { rows: usize, expected: usize },
    #[error("row `{residual}` has {cols} cells but {expected} fault ids")]
    RowLengthMismatch {
        residual: String,
        cols: usize,
        expected: usize,
    },
    #[error("unknown residual id `{0}`")]
    UnknownResidual(String),
    #[error("unknown fault id `{0}`")]
    UnknownFault(String),
    #[error("candidate row has {got} entries but the FIM has {expected} faults")]
    RowWidthMismatch { got: usize, expected: usize },
    #[error("original and pool FSMs disagree on the fault axis")]
    FaultAxisMismatch,
    #[error("pool reuses residual id `{0}` from the original set")]
    PoolReusesResidual(String),
    #[error("candidate counting requires at least one sensor")]
    ZeroSensors,
    #[error("candidate count overflows u64 for n = {0}")]
    CountOverflow(u32),
    #[error("exact selection is gated to pools of at most {limit} rows, got {got}")]
    PoolTooLarge { limit: usize, got: usize },
    #[error("FIM is not square: {rows} rows, {cols} columns")]
    FimNotSquare { rows: usize, cols: usize },
    #[error("FIM diagonal entry for `{0}` is 0")]
    FimDiagonalZero(String),
}

/// Fixed-width bit row used for residual-support sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Bits {
    blocks: Vec<u64>,
    len: usize,
}

impl Bits {
    pub(crate) fn with_len(len: usize) -> Self {
        Self {
            blocks: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub(crate) fn set(&mut self, idx: usize) {
        debug_assert!(idx < self.len);
        self.blocks[idx / 64] |= 1u64 << (idx % 64);
    }

    pub(crate) fn is_subset_of(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & !b == 0)
    }
}

/// Boolean fault signature matrix: residuals on rows, faults on columns.
///
/// Construction validates the shape invariants (unique ids, rectangular
/// cells), so a live `Fsm` is always well formed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsm {
    residual_ids: Vec<String>,
    fault_ids: Vec<String>,
    cells: Vec<Vec<bool>>,
}

impl Fsm {
    pub fn new(
        residual_ids: Vec<String>,
        fault_ids: Vec<String>,
        cells: Vec<Vec<bool>>,
    ) -> Result<Self, FsmError> {
        check_unique(&residual_ids, |id| FsmError::DuplicateResidual(id))?;
        check_unique(&fault_ids, |id| FsmError::DuplicateFault(id))?;
        if cells.len() != residual_ids.len() {
            return Err(FsmError::RowCountMismatch {
                rows: cells.len(),
                expected: residual_ids.len(),
            });
        }
        for (row, id) in cells.iter().zip(&residual_ids) {
            if row.len() != fault_ids.len() {
                return Err(FsmError::RowLengthMismatch {
                    residual: id.clone(),
                    cols: row.len(),
                    expected: fault_ids.len(),
                });
            }
        }
        Ok(Self {
            residual_ids,
            fault_ids,
            cells,
        })
    }

    pub fn residual_ids(&self) -> &[String] {
        &self.residual_ids
    }

    pub fn fault_ids(&self) -> &[String] {
        &self.fault_ids
    }

    pub fn cells(&self) -> &[Vec<bool>] {
        &self.cells
    }

    pub fn n_residuals(&self) -> usize {
        self.residual_ids.len()
    }

    pub fn n_faults(&self) -> usize {
        self.fault_ids.len()
    }

    pub fn cell(&self, residual: usize, fault: usize) -> bool {
        self.cells[residual][fault]
    }

    pub fn residual_index(&self, id: &str) -> Option<usize> {
        self.residual_ids.iter().position(|r| r == id)
    }

    pub fn fault_index(&self, id: &str) -> Option<usize> {
        self.fault_ids.iter().position(|f| f == id)
    }

    /// Column support of one fault: the residuals sensitive to it.
    pub fn fault_support(&self, fault_id: &str) -> Result<FaultSupport, FsmError> {
        let j = self
            .fault_index(fault_id)
            .ok_or_else(|| FsmError::UnknownFault(fault_id.to_string()))?;
        let residuals = self
            .cells
            .iter()
            .zip(&self.residual_ids)
            .filter(|(row, _)| row[j])
            .map(|(_, id)| id.clone())
            .collect();
        Ok(FaultSupport {
            fault_id: fault_id.to_string(),
            residuals,
        })
    }

    /// New FSM with the rows of `extra` appended below the rows of `self`.
    /// Both matrices must agree on the fault axis and the residual ids must
    /// stay unique.
    pub fn stacked(&self, extra: &Fsm) -> Result<Fsm, FsmError> {
        if self.fault_ids != extra.fault_ids {
            return Err(FsmError::FaultAxisMismatch);
        }
        let mut residual_ids = self.residual_ids.clone();
        residual_ids.extend(extra.residual_ids.iter().cloned());
        let mut cells = self.cells.clone();
        cells.extend(extra.cells.iter().cloned());
        Fsm::new(residual_ids, self.fault_ids.clone(), cells)
    }

    /// New FSM with one extra row at the bottom.
    pub fn with_row_appended(&self, id: &str, row: Vec<bool>) -> Result<Fsm, FsmError> {
        let mut residual_ids = self.residual_ids.clone();
        residual_ids.push(id.to_string());
        let mut cells = self.cells.clone();
        cells.push(row);
        Fsm::new(residual_ids, self.fault_ids.clone(), cells)
    }

    /// New FSM keeping only the named rows, in the order given.
    pub fn rows_subset(&self, ids: &[&str]) -> Result<Fsm, FsmError> {
        let mut residual_ids = Vec::with_capacity(ids.len());
        let mut cells = Vec::with_capacity(ids.len());
        for id in ids {
            let i = self
                .residual_index(id)
                .ok_or_else(|| FsmError::UnknownResidual(id.to_string()))?;
            residual_ids.push(self.residual_ids[i].clone());
            cells.push(self.cells[i].clone());
        }
        Fsm::new(residual_ids, self.fault_ids.clone(), cells)
    }

    /// One support bit row per fault, bit `r` set when residual `r` is
    /// sensitive to the fault.
    pub(crate) fn column_supports(&self) -> Vec<Bits> {
        let mut supports = vec![Bits::with_len(self.n_residuals()); self.n_faults()];
        for (r, row) in self.cells.iter().enumerate() {
            for (j, &sensitive) in row.iter().enumerate() {
                if sensitive {
                    supports[j].set(r);
                }
            }
        }
        supports
    }
}

/// Named column support of a fault inside some FSM.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultSupport {
    pub fault_id: String,
    pub residuals: BTreeSet<String>,
}

/// Boolean fault isolation matrix over a fixed fault ordering.
///
/// Square, with an all-ones diagonal: a fault is always a candidate for
/// itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fim {
    fault_ids: Vec<String>,
    cells: Vec<Vec<bool>>,
}

impl Fim {
    pub fn new(fault_ids: Vec<String>, cells: Vec<Vec<bool>>) -> Result<Self, FsmError> {
        check_unique(&fault_ids, |id| FsmError::DuplicateFault(id))?;
        if cells.len() != fault_ids.len() {
            return Err(FsmError::FimNotSquare {
                rows: cells.len(),
                cols: fault_ids.len(),
            });
        }
        for row in &cells {
            if row.len() != fault_ids.len() {
                return Err(FsmError::FimNotSquare {
                    rows: cells.len(),
                    cols: row.len(),
                });
            }
        }
        for (i, id) in fault_ids.iter().enumerate() {
            if !cells[i][i] {
                return Err(FsmError::FimDiagonalZero(id.clone()));
            }
        }
        Ok(Self { fault_ids, cells })
    }

    pub fn fault_ids(&self) -> &[String] {
        &self.fault_ids
    }

    pub fn cells(&self) -> &[Vec<bool>] {
        &self.cells
    }

    pub fn n_faults(&self) -> usize {
        self.fault_ids.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> bool {
        self.cells[row][col]
    }

    /// Number of off-diagonal ones; lower means better isolability.
    pub fn ambiguity(&self) -> usize {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, &c)| c && i != j)
                    .count()
            })
            .sum()
    }

    /// Cellwise `self <= other`, meaning `self` isolates at least as well.
    pub fn le_cellwise(&self, other: &Fim) -> bool {
        self.fault_ids == other.fault_ids
            && self
                .cells
                .iter()
                .zip(&other.cells)
                .all(|(a, b)| a.iter().zip(b).all(|(&x, &y)| !x || y))
    }
}

/// Computes the fault isolation matrix of a signature matrix.
///
/// `fim(i, j)` is 1 exactly when every residual sensitive to fault `i` is
/// also sensitive to fault `j`: if `i` occurs and precisely its residuals
/// trigger, `j` cannot be excluded from the diagnosis.
pub fn fsm_to_fim(fsm: &Fsm) -> Fim {
    let supports = fsm.column_supports();
    let n = fsm.n_faults();
    let cells = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| supports[i].is_subset_of(&supports[j]))
                .collect()
        })
        .collect();
    Fim {
        fault_ids: fsm.fault_ids().to_vec(),
        cells,
    }
}

/// Faults whose FIM column carries only the diagonal entry, returned in
/// fault order. Such a fault never appears as a spurious candidate while
/// any other single fault is active.
pub fn isolated_faults(fim: &Fim) -> Vec<String> {
    let n = fim.n_faults();
    (0..n)
        .filter(|&j| (0..n).all(|i| i == j || !fim.cells[i][j]))
        .map(|j| fim.fault_ids[j].clone())
        .collect()
}

/// Candidate faults consistent with a set of triggered residuals, in fault
/// order.
///
/// Without exoneration a fault stays a candidate when the triggered set is
/// contained in its signature. With exoneration the sets must match
/// exactly: a sensitive residual that stayed quiet clears the fault.
pub fn diagnose<S: AsRef<str>>(
    triggered: &[S],
    fsm: &Fsm,
    exoneration: bool,
) -> Result<Vec<String>, FsmError> {
    let mut trig = Bits::with_len(fsm.n_residuals());
    for id in triggered {
        let r = fsm
            .residual_index(id.as_ref())
            .ok_or_else(|| FsmError::UnknownResidual(id.as_ref().to_string()))?;
        trig.set(r);
    }
    let supports = fsm.column_supports();
    Ok(fsm
        .fault_ids()
        .iter()
        .zip(&supports)
        .filter(|(_, supp)| {
            if exoneration {
                trig == **supp
            } else {
                trig.is_subset_of(supp)
            }
        })
        .map(|(id, _)| id.clone())
        .collect())
}

fn check_unique(
    ids: &[String],
    on_dup: impl Fn(String) -> FsmError,
) -> Result<(), FsmError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(on_dup(id.clone()));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct FsmRepr {
    residuals: Vec<String>,
    faults: Vec<String>,
    cells: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct FimRepr {
    faults: Vec<String>,
    cells: Vec<Vec<u8>>,
}

fn cells_to_u8(cells: &[Vec<bool>]) -> Vec<Vec<u8>> {
    cells
        .iter()
        .map(|row| row.iter().map(|&c| c as u8).collect())
        .collect()
}

fn cells_from_u8<E: serde::de::Error>(cells: Vec<Vec<u8>>) -> Result<Vec<Vec<bool>>, E> {
    cells
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, v)| match v {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(E::custom(format!(
                        "cell at row {i}, column {j} is `{other}`, expected 0 or 1"
                    ))),
                })
                .collect()
        })
        .collect()
}

impl Serialize for Fsm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FsmRepr {
            residuals: self.residual_ids.clone(),
            faults: self.fault_ids.clone(),
            cells: cells_to_u8(&self.cells),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Fsm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FsmRepr::deserialize(deserializer)?;
        let cells = cells_from_u8(repr.cells)?;
        Fsm::new(repr.residuals, repr.faults, cells).map_err(D::Error::custom)
    }
}

impl Serialize for Fim {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FimRepr {
            faults: self.fault_ids.clone(),
            cells: cells_to_u8(&self.cells),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Fim {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FimRepr::deserialize(deserializer)?;
        let cells = cells_from_u8(repr.cells)?;
        Fim::new(repr.faults, cells).map_err(D::Error::custom)
    }
}

impl fmt::Display for Fsm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, row) in self.residual_ids.iter().zip(&self.cells) {
            write!(f, "{id}:")?;
            for &c in row {
                write!(f, " {}", c as u8)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fsm(residuals: &[&str], faults: &[&str], rows: &[&[u8]]) -> Fsm {
        Fsm::new(
            residuals.iter().map(|s| s.to_string()).collect(),
            faults.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|row| row.iter().map(|&c| c != 0).collect())
                .collect(),
        )
        .unwrap()
    }

    fn example_two_rows() -> Fsm {
        fsm(&["r1", "r2"], &["f1", "f2", "fu"], &[&[1, 0, 1], &[0, 1, 1]])
    }

    fn example_three_rows() -> Fsm {
        fsm(
            &["r1", "r2", "r3"],
            &["f1", "f2", "fu"],
            &[&[1, 0, 1], &[0, 1, 1], &[1, 1, 0]],
        )
    }

    #[test]
    fn fim_of_two_residual_example() {
        let fim = fsm_to_fim(&example_two_rows());
        let expected = vec![
            vec![true, false, true],
            vec![false, true, true],
            vec![false, false, true],
        ];
        assert_eq!(fim.cells(), expected.as_slice());
    }

    #[test]
    fn fim_with_third_residual_is_identity() {
        let fim = fsm_to_fim(&example_three_rows());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(fim.cell(i, j), i == j);
            }
        }
        assert_eq!(isolated_faults(&fim), vec!["f1", "f2", "fu"]);
    }

    #[test]
    fn fim_of_empty_fsm_is_all_ones() {
        let empty = fsm(&[], &["f1", "f2"], &[]);
        let fim = fsm_to_fim(&empty);
        assert!(fim.cells().iter().flatten().all(|&c| c));
        assert!(isolated_faults(&fim).is_empty());
    }

    #[test]
    fn identity_fim_isolates_everything() {
        let ids: Vec<String> = (0..5).map(|i| format!("f{i}")).collect();
        let cells = (0..5).map(|i| (0..5).map(|j| i == j).collect()).collect();
        let fim = Fim::new(ids.clone(), cells).unwrap();
        assert_eq!(isolated_faults(&fim), ids);
    }

    #[test]
    fn diagnose_matches_decision_table() {
        let fsm = example_three_rows();
        let cases = [
            (vec!["r1", "r2"], "fu"),
            (vec!["r1", "r3"], "f1"),
            (vec!["r2", "r3"], "f2"),
        ];
        for (triggered, fault) in cases {
            assert_eq!(diagnose(&triggered, &fsm, false).unwrap(), vec![fault]);
        }
    }

    #[test]
    fn diagnose_empty_trigger_set() {
        let fsm = example_three_rows();
        let none: [&str; 0] = [];
        assert_eq!(
            diagnose(&none, &fsm, false).unwrap(),
            vec!["f1", "f2", "fu"]
        );
        // With exoneration only faults with an empty signature remain.
        assert!(diagnose(&none, &fsm, true).unwrap().is_empty());
    }

    #[test]
    fn diagnose_with_exoneration_requires_exact_signature() {
        let fsm = example_two_rows();
        assert_eq!(diagnose(&["r1"], &fsm, true).unwrap(), vec!["f1"]);
        // Without exoneration fu stays in: {r1} is a subset of its support.
        assert_eq!(
            diagnose(&["r1"], &fsm, false).unwrap(),
            vec!["f1", "fu"]
        );
    }

    #[test]
    fn diagnose_rejects_unknown_residual() {
        let fsm = example_two_rows();
        assert_eq!(
            diagnose(&["r9"], &fsm, false),
            Err(FsmError::UnknownResidual("r9".into()))
        );
    }

    #[test]
    fn construction_rejects_malformed_input() {
        let dup = Fsm::new(
            vec!["r1".into(), "r1".into()],
            vec!["f1".into()],
            vec![vec![true], vec![false]],
        );
        assert_eq!(dup.unwrap_err(), FsmError::DuplicateResidual("r1".into()));

        let ragged = Fsm::new(
            vec!["r1".into()],
            vec!["f1".into(), "f2".into()],
            vec![vec![true]],
        );
        assert!(matches!(
            ragged.unwrap_err(),
            FsmError::RowLengthMismatch { .. }
        ));
    }

    #[test]
    fn fim_construction_enforces_diagonal() {
        let bad = Fim::new(
            vec!["f1".into(), "f2".into()],
            vec![vec![true, false], vec![false, false]],
        );
        assert_eq!(bad.unwrap_err(), FsmError::FimDiagonalZero("f2".into()));
    }

    #[test]
    fn fault_support_collects_column() {
        let fsm = example_three_rows();
        let supp = fsm.fault_support("fu").unwrap();
        let expected: BTreeSet<String> = ["r1", "r2"].iter().map(|s| s.to_string()).collect();
        assert_eq!(supp.residuals, expected);
    }

    #[test]
    fn json_round_trip_and_cell_validation() {
        let fsm = example_three_rows();
        let text = serde_json::to_string(&fsm).unwrap();
        let back: Fsm = serde_json::from_str(&text).unwrap();
        assert_eq!(fsm, back);

        let bad = r#"{"residuals":["r1"],"faults":["f1"],"cells":[[2]]}"#;
        assert!(serde_json::from_str::<Fsm>(bad).is_err());
        let dup = r#"{"residuals":["r1"],"faults":["f1","f1"],"cells":[[1,0]]}"#;
        assert!(serde_json::from_str::<Fsm>(dup).is_err());
    }
}
