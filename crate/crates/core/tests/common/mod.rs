//! Independent reference implementations used as test oracles.
#![allow(dead_code, clippy::needless_range_loop)]

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
/// Returns eigenvalues in descending order and matching unit eigenvectors.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|r| v[r][i]).collect()).collect();
    (values, vectors)
}

pub struct OraclePca {
    pub ratios: [f64; 2],
    pub loadings: [Vec<f64>; 2],
    pub coords: Vec<[f64; 2]>,
    pub kept_columns: Vec<usize>,
}

/// Textbook PCA: population z-scores, sample covariance, Jacobi.
pub fn oracle_pca(rows: &[Vec<f64>]) -> OraclePca {
    let n = rows.len();
    let k = rows[0].len();
    let mut kept = Vec::new();
    let mut z_cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..k {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        let scale = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if sd <= 1e-12 * scale {
            continue;
        }
        kept.push(j);
        z_cols.push(col.iter().map(|x| (x - mean) / sd).collect());
    }
    let kk = z_cols.len();
    let cov: Vec<Vec<f64>> = (0..kk)
        .map(|a| {
            (0..kk)
                .map(|b| z_cols[a].iter().zip(&z_cols[b]).map(|(x, y)| x * y).sum::<f64>() / (n as f64 - 1.0))
                .collect()
        })
        .collect();
    let trace: f64 = (0..kk).map(|i| cov[i][i]).sum();
    let (values, vectors) = jacobi_eigen(&cov);
    let coords = (0..n)
        .map(|i| {
            let proj = |v: &Vec<f64>| (0..kk).map(|j| z_cols[j][i] * v[j]).sum::<f64>();
            [proj(&vectors[0]), proj(&vectors[1])]
        })
        .collect();
    OraclePca {
        ratios: [values[0].max(0.0) / trace, values[1].max(0.0) / trace],
        loadings: [vectors[0].clone(), vectors[1].clone()],
        coords,
        kept_columns: kept,
    }
}

/// Pearson r from the covariance definition over complete pairs.
pub fn oracle_pearson(x: &[Option<f64>], y: &[Option<f64>]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect();
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov = pairs.iter().map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    let sx = (pairs.iter().map(|(a, _)| (a - mx).powi(2)).sum::<f64>() / n).sqrt();
    let sy = (pairs.iter().map(|(_, b)| (b - my).powi(2)).sum::<f64>() / n).sqrt();
    if sx == 0.0 || sy == 0.0 {
        return None;
    }
    Some(cov / (sx * sy))
}

/// Frame spans with exact integer arithmetic. The duration is
/// `duration_ms / 1000` seconds and the rate `rate_num / rate_den` Hz;
/// span k starts at `floor(k * duration * rate / n)`, clamped to `len`.
pub fn exact_spans(duration_ms: u64, rate_num: u64, rate_den: u64, len: usize, n: usize) -> Vec<(usize, usize)> {
    let mut starts: Vec<usize> = (0..n)
        .map(|k| {
            let num = k as u128 * duration_ms as u128 * rate_num as u128;
            let den = n as u128 * 1000 * rate_den as u128;
            ((num / den) as usize).min(len)
        })
        .collect();
    starts.push(len);
    starts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Aligns two loading vectors up to a global sign.
pub fn sign_aligned(reference: &[f64], candidate: &[f64]) -> f64 {
    let dot: f64 = reference.iter().zip(candidate).map(|(a, b)| a * b).sum();
    if dot < 0.0 {
        -1.0
    } else {
        1.0
    }
}
