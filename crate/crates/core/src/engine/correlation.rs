use serde::{Deserialize, Serialize};

use super::EngineError;

/// Pearson coefficient over the complete pairs of two sample lists.
/// `r` is `None` when fewer than two pairs remain or either side is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: Option<f64>,
    pub n: usize,
    pub defined: bool,
}

impl Correlation {
    fn undefined(n: usize) -> Self {
        Self {
            r: None,
            n,
            defined: false,
        }
    }
}

/// Pairwise-complete Pearson correlation: pairs where either side is missing
/// (or non-finite) are dropped.
pub fn pearson(x: &[Option<f64>], y: &[Option<f64>]) -> Result<Correlation, EngineError> {
    if x.len() != y.len() {
        return Err(EngineError::LengthMismatch(x.len(), y.len()));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => Some((*a, *b)),
            _ => None,
        })
        .collect();
    Ok(pearson_pairs(&pairs))
}

/// Pearson correlation of already-paired samples.
pub fn pearson_pairs(pairs: &[(f64, f64)]) -> Correlation {
    let n = pairs.len();
    if n < 2 {
        return Correlation::undefined(n);
    }
    let nf = n as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for (a, b) in pairs {
        sx += a;
        sy += b;
    }
    let (mx, my) = (sx / nf, sy / nf);

    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in pairs {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Correlation::undefined(n);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    if !r.is_finite() {
        return Correlation::undefined(n);
    }
    Correlation {
        r: Some(r),
        n,
        defined: true,
    }
}

/// Symmetric K×K matrix of Pearson coefficients. Undefined cells carry
/// `null` in `r` and `false` in `defined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub variable_ids: Vec<String>,
    pub r: Vec<Vec<Option<f64>>>,
    pub n_pairs: Vec<Vec<usize>>,
    pub defined: Vec<Vec<bool>>,
}

impl CorrelationMatrix {
    /// Builds the matrix from a function computing one cell; each unordered
    /// pair (including the diagonal) is evaluated once and mirrored.
    pub fn from_pairs<F>(variable_ids: Vec<String>, mut cell: F) -> Self
    where
        F: FnMut(usize, usize) -> Correlation,
    {
        let k = variable_ids.len();
        let mut r = vec![vec![None; k]; k];
        let mut n_pairs = vec![vec![0; k]; k];
        let mut defined = vec![vec![false; k]; k];
        for i in 0..k {
            for j in i..k {
                let c = cell(i, j);
                r[i][j] = c.r;
                r[j][i] = c.r;
                n_pairs[i][j] = c.n;
                n_pairs[j][i] = c.n;
                defined[i][j] = c.defined;
                defined[j][i] = c.defined;
            }
        }
        Self {
            variable_ids,
            r,
            n_pairs,
            defined,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Correlation {
        Correlation {
            r: self.r[i][j],
            n: self.n_pairs[i][j],
            defined: self.defined[i][j],
        }
    }
}

pub fn correlation_matrix(columns: &[(String, Vec<Option<f64>>)]) -> Result<CorrelationMatrix, EngineError> {
    if columns.len() < 2 {
        return Err(EngineError::TooFewColumns {
            needed: 2,
            found: columns.len(),
        });
    }
    let len = columns[0].1.len();
    if let Some((_, c)) = columns.iter().find(|(_, c)| c.len() != len) {
        return Err(EngineError::LengthMismatch(len, c.len()));
    }
    let ids = columns.iter().map(|(id, _)| id.clone()).collect();
    Ok(CorrelationMatrix::from_pairs(ids, |i, j| {
        pearson(&columns[i].1, &columns[j].1).expect("lengths checked")
    }))
}
