use serde::Serialize;

use super::LieError;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(cols: usize, rows: &[Vec<f64>]) -> Self {
        let mut m = Matrix::zeros(0, cols);
        for r in rows {
            m.push_row(r);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    /// Rows `start..end` as a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Row-echelon rank with partial pivoting. A pivot counts iff its magnitude
/// exceeds `tol * max(1, max |a_ij|)` of the input.
pub fn numeric_rank(matrix: &Matrix, tol: f64) -> Result<usize, LieError> {
    for i in 0..matrix.rows {
        for j in 0..matrix.cols {
            if !matrix[(i, j)].is_finite() {
                return Err(LieError::NonFiniteEntry { row: i, col: j });
            }
        }
    }
    let threshold = tol * matrix.max_abs().max(1.0);
    let mut a = matrix.clone();
    let mut rank = 0;
    for col in 0..a.cols {
        if rank == a.rows {
            break;
        }
        let (pivot_row, pivot) =
            (rank..a.rows)
                .map(|r| (r, a[(r, col)].abs()))
                .fold(
                    (rank, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot <= threshold {
            continue;
        }
        if pivot_row != rank {
            for j in 0..a.cols {
                a.data.swap(pivot_row * a.cols + j, rank * a.cols + j);
            }
        }
        let p = a[(rank, col)];
        for r in rank + 1..a.rows {
            let factor = a[(r, col)] / p;
            if factor != 0.0 {
                for j in col..a.cols {
                    let v = a[(rank, j)];
                    a[(r, j)] -= factor * v;
                }
            }
        }
        rank += 1;
    }
    Ok(rank)
}
