use serde::{Deserialize, Serialize};

use super::eigen::symmetric_eigen;
use super::numeric::ordered_sum;
use super::standardize::{standardize, Standardized};
use super::EngineError;
use crate::model::{DerivedMatrix, Exclusion};

/// Two-component embedding of a cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub video_ids: Vec<String>,
    /// Columns behind `loadings`, after constant columns were dropped.
    pub variable_ids: Vec<String>,
    pub dropped_variable_ids: Vec<String>,
    /// `(PC1, PC2)` per entry of `video_ids`.
    pub coords: Vec<[f64; 2]>,
    pub explained_variance_ratio: [f64; 2],
    /// Two rows of unit length, one weight per entry of `variable_ids`.
    pub loadings: [Vec<f64>; 2],
    pub excluded_video_ids: Vec<Exclusion>,
}

/// Eigenvalues closer than this fraction of the trace are treated as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Sample covariance (divisor N - 1) with order-independent sums, so that a
/// row permutation of the input produces a bitwise identical matrix.
fn covariance(z: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let n = z.len() as f64;
    let mut cov = vec![vec![0.0; k]; k];
    let mut terms = Vec::with_capacity(z.len());
    for i in 0..k {
        for j in i..k {
            terms.clear();
            terms.extend(z.iter().map(|row| row[i] * row[j]));
            let c = ordered_sum(&mut terms) / (n - 1.0);
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    cov
}

/// Index of the component with the largest magnitude; the lowest index wins
/// among magnitudes equal to within 1e-12.
fn dominant_index(vector: &[f64]) -> usize {
    let max = vector.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    vector
        .iter()
        .position(|x| x.abs() >= max - 1e-12)
        .unwrap_or(0)
}

/// Projects one standardized row onto a loading vector.
pub fn project(row: &[f64], loading: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, w) in row.iter().zip(loading) {
        acc += x * w;
    }
    acc
}

/// PCA on the z-scored selection. Sign convention: in each component the
/// loading with the largest magnitude is positive.
pub fn pca_embed(m: &DerivedMatrix) -> Result<PcaResult, EngineError> {
    if m.n_rows() < 3 {
        return Err(EngineError::TooFewRows {
            needed: 3,
            found: m.n_rows(),
        });
    }
    let st = match standardize(m) {
        Ok(st) => st,
        Err(EngineError::AllColumnsConstant) => {
            return Err(EngineError::TooFewColumns { needed: 2, found: 0 })
        }
        Err(e) => return Err(e),
    };
    pca_from_standardized(st, m.excluded_video_ids.clone())
}

fn pca_from_standardized(st: Standardized, excluded: Vec<Exclusion>) -> Result<PcaResult, EngineError> {
    let k = st.variable_ids.len();
    if k < 2 {
        return Err(EngineError::TooFewColumns { needed: 2, found: k });
    }

    let cov = covariance(&st.values, k);
    let trace: f64 = (0..k).map(|i| cov[i][i]).sum();
    let eig = symmetric_eigen(&cov);

    let mut components: Vec<(f64, Vec<f64>)> = (0..k)
        .map(|c| {
            let mut vector: Vec<f64> = (0..k).map(|r| eig.vectors[r][c]).collect();
            let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in &mut vector {
                *x /= norm;
            }
            if vector[dominant_index(&vector)] < 0.0 {
                for x in &mut vector {
                    *x = -*x;
                }
            }
            (eig.values[c], vector)
        })
        .collect();

    let tie = TIE_TOLERANCE * trace.abs().max(f64::MIN_POSITIVE);
    components.sort_by(|(la, _), (lb, _)| lb.total_cmp(la));
    // Runs of tied eigenvalues are ordered by their dominant column.
    let mut start = 0;
    while start < components.len() {
        let head = components[start].0;
        let mut end = start + 1;
        while end < components.len() && head - components[end].0 <= tie {
            end += 1;
        }
        components[start..end].sort_by_key(|(_, v)| dominant_index(v));
        start = end;
    }

    let ratio = |lambda: f64| (lambda.max(0.0) / trace).clamp(0.0, 1.0);
    let explained_variance_ratio = [ratio(components[0].0), ratio(components[1].0)];
    let mut top = components.into_iter().take(2).map(|(_, v)| v);
    let loadings = [top.next().unwrap(), top.next().unwrap()];

    let coords = st
        .values
        .iter()
        .map(|row| [project(row, &loadings[0]), project(row, &loadings[1])])
        .collect();

    Ok(PcaResult {
        video_ids: st.video_ids,
        variable_ids: st.variable_ids,
        dropped_variable_ids: st.dropped_variable_ids,
        coords,
        explained_variance_ratio,
        loadings,
        excluded_video_ids: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DerivedMatrix {
        let k = rows[0].len();
        DerivedMatrix::from_rows(
            (0..k).map(|j| format!("v{j}")).collect(),
            (0..rows.len()).map(|i| format!("r{i}")).collect(),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn diagonal_line() {
        let p = pca_embed(&matrix(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]])).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((p.loadings[0][0] - h).abs() < 1e-12);
        assert!((p.loadings[0][1] - h).abs() < 1e-12);
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        assert!(p.explained_variance_ratio[1].abs() < 1e-12);
        for c in &p.coords {
            assert!(c[1].abs() < 1e-12);
        }
    }

    #[test]
    fn anti_correlated_sign_convention() {
        let p = pca_embed(&matrix(&[&[1.0, -1.0], &[2.0, -2.0], &[4.0, -4.0], &[3.0, -3.0]])).unwrap();
        assert!(p.loadings[0][0] > 0.0);
        assert!(p.loadings[0][1] < 0.0);
        assert!(p.explained_variance_ratio[1].abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            pca_embed(&matrix(&[&[0.0, 1.0], &[1.0, 0.0]])),
            Err(EngineError::TooFewRows { needed: 3, .. })
        ));
        assert!(matches!(
            pca_embed(&matrix(&[&[0.0, 1.0], &[1.0, 1.0], &[2.0, 1.0]])),
            Err(EngineError::TooFewColumns { found: 1, .. })
        ));
    }

    #[test]
    fn constant_column_reported() {
        let p = pca_embed(&matrix(&[
            &[0.0, 7.0, 1.0],
            &[1.0, 7.0, 3.0],
            &[2.0, 7.0, 2.0],
            &[5.0, 7.0, 0.0],
        ]))
        .unwrap();
        assert_eq!(p.dropped_variable_ids, vec!["v1"]);
        assert_eq!(p.loadings[0].len(), 2);
    }
}
