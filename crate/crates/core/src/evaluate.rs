//! Scores cluster labels against ground-truth classes under the best
//! cluster-to-class relabeling.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on the number of labels searched exhaustively.
pub const MAX_PERMUTED_LABELS: usize = 10;

// a later permutation must beat the incumbent by this much to replace it
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvaluateError {
    #[error("{truth} true labels vs {pred} predicted labels")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("permutation is not a bijection: {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("{0} labels exceed the exhaustive search bound of {MAX_PERMUTED_LABELS}")]
    TooManyClusters(usize),
    #[error("no labels to score")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Rows are true classes, columns mapped clusters. Indices at or beyond
    /// the class count act as a reject class.
    pub confusion: Vec<Vec<usize>>,
    /// `permutation[cluster] = class`.
    pub permutation: Vec<usize>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_class: Vec<ClassScore>,
}

fn label_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

fn is_bijection(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&p| p < perm.len() && !std::mem::replace(&mut seen[p], true))
}

/// Square count matrix: entry `(i, j)` counts points of true class `i`
/// whose cluster is mapped to `j` by `permutation`.
pub fn confusion_matrix(
    true_labels: &[usize],
    pred_labels: &[usize],
    permutation: &[usize],
) -> Result<Vec<Vec<usize>>, EvaluateError> {
    if true_labels.len() != pred_labels.len() {
        return Err(EvaluateError::LengthMismatch {
            truth: true_labels.len(),
            pred: pred_labels.len(),
        });
    }
    if !is_bijection(permutation) || label_count(pred_labels) > permutation.len() {
        return Err(EvaluateError::InvalidPermutation(permutation.to_vec()));
    }
    let size = label_count(true_labels).max(permutation.len());
    let mut m = vec![vec![0; size]; size];
    for (&t, &p) in true_labels.iter().zip(pred_labels) {
        m[t][permutation[p]] += 1;
    }
    Ok(m)
}

/// `2PR/(P+R)` with `0/0 = 0`.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_scores(confusion: &[Vec<usize>], n_classes: usize) -> Vec<ClassScore> {
    (0..n_classes)
        .map(|i| {
            let tp = confusion[i][i];
            let predicted: usize = confusion.iter().map(|row| row[i]).sum();
            let actual: usize = confusion[i].iter().sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, actual);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassScore { precision, recall, f1 }
        })
        .collect()
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// Exhaustive search over permutations of `max(k, classes)` labels, in
/// lexicographic order; keeps the first permutation with the highest
/// macro-F1.
pub fn best_permutation_score(true_labels: &[usize], pred_labels: &[usize]) -> Result<EvalReport, EvaluateError> {
    if true_labels.len() != pred_labels.len() {
        return Err(EvaluateError::LengthMismatch {
            truth: true_labels.len(),
            pred: pred_labels.len(),
        });
    }
    if true_labels.is_empty() {
        return Err(EvaluateError::Empty);
    }
    let n_classes = label_count(true_labels);
    let size = n_classes.max(label_count(pred_labels));
    if size > MAX_PERMUTED_LABELS {
        return Err(EvaluateError::TooManyClusters(size));
    }
    // contingency[cluster][class]
    let mut contingency = vec![vec![0usize; size]; size];
    for (&t, &p) in true_labels.iter().zip(pred_labels) {
        contingency[p][t] += 1;
    }
    let class_totals: Vec<usize> = (0..size).map(|c| contingency.iter().map(|r| r[c]).sum()).collect();
    let cluster_totals: Vec<usize> = contingency.iter().map(|r| r.iter().sum()).collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..size).permutations(size) {
        let mut f1 = 0.0;
        for (cluster, &class) in perm.iter().enumerate() {
            if class >= n_classes {
                continue;
            }
            let tp = contingency[cluster][class];
            if tp > 0 {
                f1 += 2.0 * tp as f64 / (cluster_totals[cluster] + class_totals[class]) as f64;
            }
        }
        f1 /= n_classes as f64;
        if best.as_ref().is_none_or(|(b, _)| f1 > b + TIE_EPS) {
            best = Some((f1, perm));
        }
    }
    let (_, permutation) = best.expect("at least one permutation");
    let confusion = confusion_matrix(true_labels, pred_labels, &permutation)?;
    let per_class = class_scores(&confusion, n_classes);
    Ok(EvalReport {
        precision: mean(per_class.iter().map(|s| s.precision), n_classes),
        recall: mean(per_class.iter().map(|s| s.recall), n_classes),
        f1: mean(per_class.iter().map(|s| s.f1), n_classes),
        confusion,
        permutation,
        per_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn confusion_examples() {
        let t = [0, 0, 1, 1, 1];
        assert_eq!(confusion_matrix(&t, &t, &[0, 1]).unwrap(), vec![vec![2, 0], vec![0, 3]]);
        assert_eq!(
            confusion_matrix(&[0, 0, 1, 1], &[1, 1, 0, 0], &[1, 0]).unwrap(),
            vec![vec![2, 0], vec![0, 2]]
        );
        assert_eq!(
            confusion_matrix(&[0, 0, 1, 1], &[0, 1, 0, 1], &[0, 1]).unwrap(),
            vec![vec![1, 1], vec![1, 1]]
        );
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(
            confusion_matrix(&[0, 1], &[0], &[0, 1]),
            Err(EvaluateError::LengthMismatch { .. })
        ));
        assert!(matches!(
            confusion_matrix(&[0, 1], &[0, 1], &[1, 1]),
            Err(EvaluateError::InvalidPermutation(_))
        ));
        assert!(matches!(
            confusion_matrix(&[0, 1], &[0, 2], &[1, 0]),
            Err(EvaluateError::InvalidPermutation(_))
        ));
    }

    #[test]
    fn score_examples() {
        let r = best_permutation_score(&[0, 1, 1, 2], &[0, 1, 1, 2]).unwrap();
        assert_eq!((r.f1, r.permutation), (1.0, vec![0, 1, 2]));

        let r = best_permutation_score(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap();
        assert_eq!((r.f1, r.permutation), (1.0, vec![1, 0]));

        let r = best_permutation_score(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
        assert_eq!(r.f1, 0.5);
        assert_eq!(r.permutation, vec![0, 1]);
        for s in &r.per_class {
            assert_eq!((s.precision, s.recall), (0.5, 0.5));
        }
    }

    #[test]
    fn surplus_clusters_go_to_reject() {
        // three clusters for two classes: cluster 2 holds one point of class 1
        let r = best_permutation_score(&[0, 0, 1, 1], &[0, 0, 1, 2]).unwrap();
        assert_eq!(r.permutation, vec![0, 1, 2]);
        let expect_f1 = (1.0 + 2.0 * 1.0 * 0.5 / 1.5) / 2.0;
        assert!((r.f1 - expect_f1).abs() < 1e-15);
        assert_eq!(r.confusion[1][2], 1);
    }

    #[test]
    fn score_errors() {
        assert!(matches!(
            best_permutation_score(&[0; 3], &[0; 2]),
            Err(EvaluateError::LengthMismatch { .. })
        ));
        assert_eq!(best_permutation_score(&[], &[]), Err(EvaluateError::Empty));
        assert_eq!(
            best_permutation_score(&[0, 1], &[0, 10]),
            Err(EvaluateError::TooManyClusters(11))
        );
    }

    fn labels(seed: u64, n: usize, k: usize) -> Vec<usize> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(0..k)).collect()
    }

    proptest! {
        #[test]
        fn relabeling_invariance(seed in 0u64..10_000, k in 2usize..5) {
            let t = labels(seed, 40, k);
            let p = labels(seed ^ 0xABCD, 40, k);
            let mut sigma: Vec<usize> = (0..k).collect();
            sigma.shuffle(&mut ChaCha8Rng::seed_from_u64(seed + 1));
            let q: Vec<usize> = p.iter().map(|&c| sigma[c]).collect();
            let a = best_permutation_score(&t, &p).unwrap();
            let b = best_permutation_score(&t, &q).unwrap();
            prop_assert!((a.f1 - b.f1).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a.f1));
            for (i, row) in a.confusion.iter().enumerate() {
                prop_assert_eq!(row.iter().sum::<usize>(), t.iter().filter(|&&c| c == i).count());
            }
            prop_assert_eq!(a.confusion.iter().flatten().sum::<usize>(), t.len());
            // relabeled-perfect prediction scores 1
            let perfect: Vec<usize> = t.iter().map(|&c| sigma[c]).collect();
            prop_assert_eq!(best_permutation_score(&t, &perfect).unwrap().f1, 1.0);
        }
    }
}
