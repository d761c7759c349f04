//! Dense symmetric eigenvalues, numerical rank, and spectral robustness
//! measures of undirected graphs.

use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::graph::Graph;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Eigenvalues of a symmetric matrix, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSpectrum {
    pub eigenvalues: Vec<f64>,
    pub n: usize,
}

/// Full spectrum by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal norm falls below `1e-10` times the
/// Frobenius norm of the input.
pub fn sym_eigs(m: &DenseMatrix) -> Result<SymSpectrum, SpectralError> {
    let n = m.rows();
    if n != m.cols() {
        return Err(SpectralError::NotSquare(m.rows(), m.cols()));
    }
    for r in 0..n {
        for c in r + 1..n {
            let gap = (m.get(r, c) - m.get(c, r)).abs();
            if gap > 1e-12 {
                return Err(SpectralError::Asymmetric { row: r, col: c, gap });
            }
        }
    }
    let mut a = m.clone();
    let target = 1e-10 * m.frobenius();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a.get(r, c).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    Ok(SymSpectrum { eigenvalues, n })
}

/// Zeroes `a[p][q]` with one Jacobi rotation applied on both sides.
fn rotate(a: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, c * akp - s * akq);
        a.set(k, q, s * akp + c * akq);
    }
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, c * apk - s * aqk);
        a.set(q, k, s * apk + c * aqk);
    }
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
}

/// Rank by Gaussian elimination with partial pivoting: pivots with
/// magnitude above `tol` are counted.
pub fn matrix_rank(m: &DenseMatrix, tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (pivot, best) = (rank..rows)
            .map(|r| (r, a.get(r, col).abs()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        if pivot != rank {
            for c in 0..cols {
                let tmp = a.get(rank, c);
                a.set(rank, c, a.get(pivot, c));
                a.set(pivot, c, tmp);
            }
        }
        let pv = a.get(rank, col);
        for r in rank + 1..rows {
            let factor = a.get(r, col) / pv;
            if factor != 0.0 {
                for c in col..cols {
                    let v = a.get(r, c) - factor * a.get(rank, c);
                    a.set(r, c, v);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Spectral radius, spectral gap, natural connectivity and algebraic
/// connectivity of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasures {
    pub sr: f64,
    pub sg: f64,
    pub nc: f64,
    pub ac: f64,
}

/// Binary adjacency of the active subgraph, symmetrized as `max(A, A^T)`.
pub fn symmetric_adjacency(g: &Graph) -> DenseMatrix {
    let (sub, _) = g.active_subgraph();
    let mut a = DenseMatrix::zeros(sub.n(), sub.n());
    for (u, v, _) in sub.edges() {
        a.set(u, v, 1.0);
        a.set(v, u, 1.0);
    }
    a
}

pub fn spectral_measures(g: &Graph) -> SpectralMeasures {
    let a = symmetric_adjacency(g);
    let n = a.rows();
    if n == 0 {
        return SpectralMeasures { sr: 0.0, sg: 0.0, nc: 0.0, ac: 0.0 };
    }
    let adj = sym_eigs(&a).expect("symmetrized adjacency is symmetric").eigenvalues;
    let sr = adj[0];
    let sg = if n > 1 { adj[0] - adj[1] } else { 0.0 };
    // ln(mean(exp(l))) shifted by the largest eigenvalue for stability
    let nc = sr + (adj.iter().map(|l| (l - sr).exp()).sum::<f64>() / n as f64).ln();

    let mut lap = DenseMatrix::zeros(n, n);
    for r in 0..n {
        let mut deg = 0.0;
        for c in 0..n {
            let w = a.get(r, c);
            if w != 0.0 {
                lap.set(r, c, -w);
                deg += w;
            }
        }
        lap.set(r, r, deg);
    }
    let lap_eigs = sym_eigs(&lap).expect("Laplacian is symmetric").eigenvalues;
    let ac = if n > 1 { lap_eigs[n - 2] } else { 0.0 };
    // Jacobi leaves roundoff of order 1e-15 * scale on true zeros.
    let ac = if ac.abs() <= 1e-9 * lap_eigs[0].max(1.0) { 0.0 } else { ac };
    SpectralMeasures { sr, sg, nc, ac }
}
