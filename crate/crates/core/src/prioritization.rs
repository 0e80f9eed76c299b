//! Stakeholder priorities as numeric weights.
//!
//! Goals and context groups are ranked by a total order and weighted with
//! `1 / (1 + rank)`. Soft goals are weighted from a pairwise comparison
//! matrix: normalize each column by its sum, then take row means.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::Diagnostic;

/// Tolerance used for diagonal and reciprocity checks.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-9;
/// Consistency ratios at or below this are acceptable.
pub const CR_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubjectKind {
    Goals,
    Contexts,
    Softgoals,
}

impl std::fmt::Display for SubjectKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SubjectKind::Goals => "goals",
            SubjectKind::Contexts => "contexts",
            SubjectKind::Softgoals => "softgoals",
        })
    }
}

/// Subjects ordered from highest to lowest priority, or declared equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityRanking {
    pub kind: SubjectKind,
    pub order: Vec<String>,
    pub equal_priority: bool,
}

impl PriorityRanking {
    pub fn ordered(kind: SubjectKind, order: &[&str]) -> Self {
        PriorityRanking {
            kind,
            order: order.iter().map(|s| s.to_string()).collect(),
            equal_priority: false,
        }
    }

    pub fn equal(kind: SubjectKind) -> Self {
        PriorityRanking {
            kind,
            order: Vec::new(),
            equal_priority: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Bst,
    Ahp,
    Equal,
}

/// Weights keyed by subject id, in subject order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightAssignment {
    pub weights: Vec<(String, f64)>,
    pub provenance: Provenance,
}

impl WeightAssignment {
    pub fn get(&self, id: &str) -> Option<f64> {
        self.weights.iter().find(|(k, _)| k == id).map(|(_, w)| *w)
    }

    pub fn values(&self) -> Vec<f64> {
        self.weights.iter().map(|(_, w)| *w).collect()
    }

    /// Every weight multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        WeightAssignment {
            weights: self
                .weights
                .iter()
                .map(|(id, w)| (id.clone(), w * k))
                .collect(),
            provenance: self.provenance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrioritizationError {
    #[error("{kind} order must list every subject exactly once: {detail}")]
    NotPermutation { kind: SubjectKind, detail: String },
    #[error("comparison matrix must be {n}x{n} over its subjects")]
    Shape { n: usize },
    #[error("comparison matrix needs at least one subject")]
    Empty,
    #[error("entry [{row}][{col}] = {value} must be a positive finite number")]
    NonPositive { row: usize, col: usize, value: f64 },
    #[error("diagonal entry [{0}][{0}] must be 1")]
    Diagonal(usize),
    #[error("entries [{row}][{col}] and [{col}][{row}] are not reciprocal")]
    Reciprocity { row: usize, col: usize },
    #[error("consistency ratio needs at least 2 subjects")]
    TooSmall,
    #[error("no random index for n = {0}; consistency is supported for n <= 9")]
    TooLarge(usize),
}

/// Checks that `order` is a permutation of `subjects`.
pub fn check_permutation(
    kind: SubjectKind,
    order: &[String],
    subjects: &[String],
) -> Result<(), PrioritizationError> {
    let detail = if let Some(x) = order.iter().find(|x| !subjects.contains(x)) {
        format!("{x} is not one of the model's {kind}")
    } else if let Some((_, x)) = order
        .iter()
        .enumerate()
        .find(|(i, x)| order[..*i].contains(x))
    {
        format!("{x} is listed twice")
    } else if let Some(x) = subjects.iter().find(|x| !order.contains(x)) {
        format!("{x} is missing")
    } else {
        return Ok(());
    };
    Err(PrioritizationError::NotPermutation { kind, detail })
}

/// Rank values for a ranking over `subjects`: the k-th entry (k from 1)
/// weighs `1 / (1 + k)`; under equal priority every subject weighs 1.
pub fn bst_rank_values(
    r: &PriorityRanking,
    subjects: &[String],
) -> Result<WeightAssignment, PrioritizationError> {
    if r.equal_priority {
        return Ok(WeightAssignment {
            weights: subjects.iter().map(|s| (s.clone(), 1.0)).collect(),
            provenance: Provenance::Equal,
        });
    }
    check_permutation(r.kind, &r.order, subjects)?;
    Ok(WeightAssignment {
        weights: r
            .order
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), 1.0 / (2 + i) as f64))
            .collect(),
        provenance: Provenance::Bst,
    })
}

/// A reciprocal pairwise comparison matrix over soft goals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhpMatrix {
    pub subjects: Vec<String>,
    pub entries: Vec<Vec<f64>>,
}

fn on_saaty_scale(x: f64) -> bool {
    (1..=9).any(|k| {
        let k = k as f64;
        (x - k).abs() <= RECIPROCITY_TOLERANCE || (x - 1.0 / k).abs() <= RECIPROCITY_TOLERANCE
    })
}

impl AhpMatrix {
    pub fn new(subjects: &[&str], entries: Vec<Vec<f64>>) -> Self {
        AhpMatrix {
            subjects: subjects.iter().map(|s| s.to_string()).collect(),
            entries,
        }
    }

    /// A perfectly consistent matrix `a[i][j] = w[i] / w[j]`.
    pub fn from_weights(subjects: &[&str], w: &[f64]) -> Self {
        let entries = w
            .iter()
            .map(|wi| w.iter().map(|wj| wi / wj).collect())
            .collect();
        Self::new(subjects, entries)
    }

    /// Consistent matrix for a strict order: adjacent subjects differ by a
    /// judgment of 3, so `a[i][j] = 3^(j - i)` for positions i, j in the order.
    pub fn from_order(order: &[String]) -> Self {
        let n = order.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| 3f64.powi(j as i32 - i as i32)).collect())
            .collect();
        AhpMatrix {
            subjects: order.to_vec(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    pub fn validate(&self) -> Result<(), PrioritizationError> {
        let n = self.subjects.len();
        if n == 0 {
            return Err(PrioritizationError::Empty);
        }
        if self.entries.len() != n || self.entries.iter().any(|r| r.len() != n) {
            return Err(PrioritizationError::Shape { n });
        }
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v > 0.0) {
                    return Err(PrioritizationError::NonPositive {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        for i in 0..n {
            if (self.entries[i][i] - 1.0).abs() > RECIPROCITY_TOLERANCE {
                return Err(PrioritizationError::Diagonal(i));
            }
            for j in i + 1..n {
                if (self.entries[j][i] - 1.0 / self.entries[i][j]).abs() > RECIPROCITY_TOLERANCE {
                    return Err(PrioritizationError::Reciprocity { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Warnings for judgments outside 1..9 and their reciprocals.
    pub fn scale_warnings(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if !on_saaty_scale(v) {
                    out.push(Diagnostic::warning(
                        "ahp-off-scale",
                        &[&self.subjects[i], &self.subjects[j]],
                        format!(
                            "judgment {} vs {} = {v} is outside the 1..9 scale",
                            self.subjects[i], self.subjects[j]
                        ),
                    ));
                }
            }
        }
        out
    }

    /// The same judgments with subjects reordered by `perm` (new i = old perm[i]).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        AhpMatrix {
            subjects: perm.iter().map(|&p| self.subjects[p].clone()).collect(),
            entries: perm
                .iter()
                .map(|&pi| perm.iter().map(|&pj| self.entries[pi][pj]).collect())
                .collect(),
        }
    }
}

fn column_sums(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|j| a.iter().map(|row| row[j]).sum()).collect()
}

/// Importance values: row means of the column-normalized matrix.
pub fn ahp_ivalues(a: &AhpMatrix) -> Result<WeightAssignment, PrioritizationError> {
    a.validate()?;
    let n = a.len();
    let sums = column_sums(&a.entries);
    let weights = a
        .entries
        .iter()
        .zip(&a.subjects)
        .map(|(row, s)| {
            let mean = row.iter().zip(&sums).map(|(v, cs)| v / cs).sum::<f64>() / n as f64;
            (s.clone(), mean)
        })
        .collect();
    Ok(WeightAssignment {
        weights,
        provenance: Provenance::Ahp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub lambda_max: f64,
    pub ci: f64,
    pub cr: f64,
    pub acceptable: bool,
}

/// Saaty's random consistency index for n = 1..=9.
pub fn random_index(n: usize) -> Option<f64> {
    const RI: [f64; 9] = [0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45];
    RI.get(n.checked_sub(1)?).copied()
}

pub fn ahp_consistency(a: &AhpMatrix) -> Result<ConsistencyReport, PrioritizationError> {
    let w = ahp_ivalues(a)?.values();
    let n = a.len();
    if n < 2 {
        return Err(PrioritizationError::TooSmall);
    }
    let ri = random_index(n).ok_or(PrioritizationError::TooLarge(n))?;
    let lambda_max = a
        .entries
        .iter()
        .zip(&w)
        .map(|(row, wi)| row.iter().zip(&w).map(|(aij, wj)| aij * wj).sum::<f64>() / wi)
        .sum::<f64>()
        / n as f64;
    let ci = (lambda_max - n as f64) / (n as f64 - 1.0);
    let cr = if ri == 0.0 { 0.0 } else { ci / ri };
    Ok(ConsistencyReport {
        lambda_max,
        ci,
        cr,
        acceptable: n == 2 || cr <= CR_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn rank_values_follow_order() {
        let r = PriorityRanking::ordered(SubjectKind::Goals, &["g2", "g1", "g3"]);
        let w = bst_rank_values(&r, &s(&["g1", "g2", "g3"])).unwrap();
        assert_eq!(w.get("g2"), Some(0.5));
        assert_eq!(w.get("g1"), Some(1.0 / 3.0));
        assert_eq!(w.get("g3"), Some(0.25));
        assert_eq!(w.provenance, Provenance::Bst);
    }

    #[test]
    fn equal_priority_weighs_one() {
        let r = PriorityRanking::equal(SubjectKind::Softgoals);
        let w = bst_rank_values(&r, &s(&["sg1", "sg2", "sg3"])).unwrap();
        assert_eq!(w.values(), vec![1.0, 1.0, 1.0]);
        assert_eq!(w.provenance, Provenance::Equal);
    }

    #[test]
    fn order_must_be_a_permutation() {
        let subjects = s(&["c2", "c6"]);
        for bad in [&["c2"][..], &["c2", "c2"], &["c2", "c6", "c9"]] {
            let r = PriorityRanking::ordered(SubjectKind::Contexts, bad);
            assert!(matches!(
                bst_rank_values(&r, &subjects),
                Err(PrioritizationError::NotPermutation { .. })
            ));
        }
    }

    #[test]
    fn two_by_two_matrices() {
        let a = AhpMatrix::new(&["a", "b"], vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(ahp_ivalues(&a).unwrap().values(), vec![0.5, 0.5]);
        // Column sums 1.5 and 3 normalize both columns to (2/3, 1/3).
        let a = AhpMatrix::new(&["a", "b"], vec![vec![1.0, 2.0], vec![0.5, 1.0]]);
        let w = ahp_ivalues(&a).unwrap().values();
        assert_abs_diff_eq!(w[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 1.0 / 3.0, epsilon = 1e-12);
        let c = ahp_consistency(&a).unwrap();
        assert_abs_diff_eq!(c.ci, 0.0, epsilon = 1e-12);
        assert!(c.acceptable);
    }

    #[test]
    fn cyclic_judgments_are_inconsistent() {
        let a = AhpMatrix::new(
            &["a", "b", "c"],
            vec![
                vec![1.0, 9.0, 1.0 / 9.0],
                vec![1.0 / 9.0, 1.0, 9.0],
                vec![9.0, 1.0 / 9.0, 1.0],
            ],
        );
        let c = ahp_consistency(&a).unwrap();
        // Symmetric cycle: w = (1/3, 1/3, 1/3), each (Aw)_i / w_i = 1 + 9 + 1/9.
        assert_abs_diff_eq!(c.lambda_max, 1.0 + 9.0 + 1.0 / 9.0, epsilon = 1e-9);
        assert!(c.cr > CR_THRESHOLD);
        assert!(!c.acceptable);
    }

    #[test]
    fn matrix_validation() {
        let bad = AhpMatrix::new(&["a", "b"], vec![vec![1.0, 3.0], vec![0.33, 1.0]]);
        assert!(matches!(
            bad.validate(),
            Err(PrioritizationError::Reciprocity { .. })
        ));
        let bad = AhpMatrix::new(&["a", "b"], vec![vec![1.0, -3.0], vec![0.33, 1.0]]);
        assert!(matches!(
            bad.validate(),
            Err(PrioritizationError::NonPositive { .. })
        ));
        let bad = AhpMatrix::new(&["a", "b"], vec![vec![2.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(
            bad.validate(),
            Err(PrioritizationError::Diagonal(0))
        ));
        let bad = AhpMatrix::new(&["a", "b"], vec![vec![1.0, 1.0]]);
        assert!(matches!(
            bad.validate(),
            Err(PrioritizationError::Shape { n: 2 })
        ));
    }

    #[test]
    fn large_matrices_have_no_random_index() {
        let names: Vec<String> = (0..10).map(|i| format!("s{i}")).collect();
        let a = AhpMatrix::from_order(&names);
        assert!(matches!(
            ahp_consistency(&a),
            Err(PrioritizationError::TooLarge(10))
        ));
        assert!(ahp_ivalues(&a).is_ok());
    }

    #[test]
    fn synthetic_order_matrix() {
        let a = AhpMatrix::from_order(&s(&["sg1", "sg2", "sg3"]));
        assert_eq!(a.entries[0], vec![1.0, 3.0, 9.0]);
        assert!(a.scale_warnings().is_empty());
        let w = ahp_ivalues(&a).unwrap().values();
        for (got, want) in w.iter().zip([9.0 / 13.0, 3.0 / 13.0, 1.0 / 13.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert!(ahp_consistency(&a).unwrap().cr.abs() < 1e-9);
        let four = AhpMatrix::from_order(&s(&["a", "b", "c", "d"]));
        assert_eq!(four.scale_warnings().len(), 1);
    }
}
