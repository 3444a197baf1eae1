use std::ops::{Index, IndexMut};

use super::Graph;

/// Square row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Adjacency, degree, Laplacian and transition matrices of one graph.
#[derive(Debug, Clone)]
pub struct MatrixSet {
    pub adjacency: DenseMatrix,
    pub degree: DenseMatrix,
    pub laplacian: DenseMatrix,
    pub transition: DenseMatrix,
}

pub fn build_matrices(g: &Graph) -> MatrixSet {
    let n = g.n();
    let mut adjacency = DenseMatrix::zeros(n);
    for &(u, v) in g.edges() {
        adjacency[(u, v)] = 1.0;
        adjacency[(v, u)] = 1.0;
    }
    let deg: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    let degree = DenseMatrix::from_fn(n, |i, j| if i == j { deg[i] } else { 0.0 });
    let laplacian = DenseMatrix::from_fn(n, |i, j| degree[(i, j)] - adjacency[(i, j)]);
    let transition = DenseMatrix::from_fn(n, |i, j| {
        if deg[i] > 0.0 {
            adjacency[(i, j)] / deg[i]
        } else {
            0.0
        }
    });
    MatrixSet {
        adjacency,
        degree,
        laplacian,
        transition,
    }
}
