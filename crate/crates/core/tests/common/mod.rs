//! Reference computations shared by the integration tests. Nothing here
//! calls into the library's solvers.

#![allow(dead_code, clippy::needless_range_loop)]

/// Dense Laplacian from an edge list.
pub fn laplacian(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let mut l = vec![vec![0.0; n]; n];
    for &(u, v) in edges {
        l[u][v] -= 1.0;
        l[v][u] -= 1.0;
        l[u][u] += 1.0;
        l[v][v] += 1.0;
    }
    l
}

/// Cyclic Jacobi rotations; eigenvalues sorted ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1.0);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Expanded eigenvalue multiset of `M_g^r` from the two families, ascending,
/// including the zero.
pub fn family_eigenvalues(r: usize, g: usize) -> Vec<f64> {
    let mut ev = vec![0.0];
    for i in 0..g {
        let mult = (r - 1) * r.pow(i as u32);
        ev.extend(std::iter::repeat_n((i + 1) as f64, mult));
    }
    for i in 0..g {
        let lam = (r.pow((g - i + 1) as u32) - 1) / (r - 1) + i;
        ev.extend(std::iter::repeat_n(lam as f64, r.pow(i as u32)));
    }
    ev.sort_by(f64::total_cmp);
    ev
}

/// `(1/2n) Σ 1/λ^p` over the nonzero entries of a sorted spectrum (Kahan).
pub fn coherence(ev: &[f64], p: i32) -> f64 {
    let n = ev.len() as f64;
    let mut terms: Vec<f64> = ev[1..].iter().map(|l| l.powi(-p)).collect();
    terms.sort_by(f64::total_cmp);
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for t in terms {
        let y = t - carry;
        let s = sum + y;
        carry = (s - sum) - y;
        sum = s;
    }
    sum / (2.0 * n)
}

/// Rank by Gaussian elimination with partial pivoting.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
        else {
            break;
        };
        if m[p][c].abs() <= tol {
            continue;
        }
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            let f = m[i][c] / m[rank][c];
            for k in c..cols {
                m[i][k] -= f * m[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

/// Max-norm distance between two equal-length sorted lists.
pub fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
