//! Dense exact linear algebra: vectors as slices, a rectangular [`Matrix`],
//! fraction-free rank/determinant, reduced row echelon form and kernels.

use super::scalar::{Field, Rational};

pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn add<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn sub<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn scale<F: Field>(s: &F, a: &[F]) -> Vec<F> {
    a.iter().map(|x| s.clone() * x.clone()).collect()
}

pub fn neg<F: Field>(a: &[F]) -> Vec<F> {
    a.iter().map(|x| -x.clone()).collect()
}

pub fn is_zero_vec<F: Field>(a: &[F]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn zeros<F: Field>(n: usize) -> Vec<F> {
    vec![F::zero(); n]
}

pub fn unit<F: Field>(n: usize, i: usize) -> Vec<F> {
    let mut v = zeros(n);
    v[i] = F::one();
    v
}

/// `Σ coeffs[i] * vectors[i]`.
pub fn combine<F: Field>(coeffs: &[F], vectors: &[Vec<F>], dim: usize) -> Vec<F> {
    let mut out: Vec<F> = zeros(dim);
    for (c, v) in coeffs.iter().zip(vectors) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o = o.clone() + c.clone() * x.clone();
        }
    }
    out
}

/// True iff `a = λ b` for some `λ > 0` (both nonzero).
pub fn positively_proportional<F: Field>(a: &[F], b: &[F]) -> bool {
    proportionality(a, b).is_some_and(|l| l.is_positive())
}

/// The `λ` with `a = λ b`, if one exists and `b ≠ 0`.
pub fn proportionality<F: Field>(a: &[F], b: &[F]) -> Option<F> {
    let k = b.iter().position(|x| !x.is_zero())?;
    let lambda = a[k].clone() / b[k].clone();
    a.iter()
        .zip(b)
        .all(|(x, y)| *x == lambda.clone() * y.clone())
        .then_some(lambda)
}

/// Rectangular matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<F = Rational> {
    rows: Vec<Vec<F>>,
    ncols: usize,
}

impl<F: Field> Matrix<F> {
    /// Panics if the rows have unequal lengths.
    pub fn new(rows: Vec<Vec<F>>, ncols: usize) -> Self {
        assert!(
            rows.iter().all(|r| r.len() == ncols),
            "matrix rows must all have length {ncols}"
        );
        Self { rows, ncols }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        Self::new(rows, ncols)
    }

    pub fn from_columns(cols: &[Vec<F>], nrows: usize) -> Self {
        let rows = (0..nrows)
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        Self::new(rows, cols.len())
    }

    pub fn zero(nrows: usize, ncols: usize) -> Self {
        Self::new(vec![zeros(ncols); nrows], ncols)
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|i| unit(n, i)).collect(), n)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<F>> {
        self.rows
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.rows[i]
    }

    pub fn transpose(&self) -> Self {
        Self::from_columns(&self.rows, self.ncols)
    }

    pub fn mul_vec(&self, x: &[F]) -> Vec<F> {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }

    /// Rank by fraction-free (Bareiss) elimination.
    pub fn rank(&self) -> usize {
        bareiss(self.rows.clone(), self.ncols).0
    }

    /// Determinant of a square matrix, fraction-free.
    pub fn det(&self) -> F {
        assert_eq!(self.nrows(), self.ncols, "determinant needs a square matrix");
        if self.ncols == 0 {
            return F::one();
        }
        let (rank, det) = bareiss(self.rows.clone(), self.ncols);
        if rank < self.ncols {
            F::zero()
        } else {
            det
        }
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix<F>, Vec<usize>) {
        let (rows, pivots) = rref_rows(self.rows.clone(), self.ncols, &(0..self.ncols).collect::<Vec<_>>());
        (Matrix::new(rows, self.ncols), pivots)
    }

    /// Basis of `{x : A x = 0}`, one vector per free column, in RREF order.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        kernel_basis(&self.rows, self.ncols)
    }

    /// Some solution of `A x = b`, or `None` if the system is inconsistent.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        solve(&self.rows, self.ncols, b)
    }
}

/// Returns `(rank, signed last pivot)`; for a nonsingular square input the
/// second component is the determinant.
fn bareiss<F: Field>(mut a: Vec<Vec<F>>, ncols: usize) -> (usize, F) {
    let m = a.len();
    let mut prev = F::one();
    let mut sign = F::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        if p != r {
            a.swap(p, r);
            sign = -sign;
        }
        for i in r + 1..m {
            for j in c + 1..ncols {
                let v = (a[r][c].clone() * a[i][j].clone() - a[i][c].clone() * a[r][j].clone())
                    / prev.clone();
                a[i][j] = v;
            }
            a[i][c] = F::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    (r, sign * prev)
}

/// Gauss-Jordan over `rows`, choosing pivots among columns in the given
/// preference order. Zero rows are dropped from the output.
pub(crate) fn rref_rows<F: Field>(
    mut rows: Vec<Vec<F>>,
    ncols: usize,
    column_order: &[usize],
) -> (Vec<Vec<F>>, Vec<usize>) {
    let m = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for &c in column_order {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(p, r);
        let inv = F::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..m {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let f = rows[i][c].clone();
            let pivot_row = rows[r].clone();
            for (x, p) in rows[i].iter_mut().zip(&pivot_row).take(ncols) {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn kernel_basis<F: Field>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
    let (rref, pivots) = rref_rows(rows.to_vec(), ncols, &(0..ncols).collect::<Vec<_>>());
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = zeros(ncols);
            v[f] = F::one();
            for (row, &p) in rref.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

pub fn solve<F: Field>(rows: &[Vec<F>], ncols: usize, b: &[F]) -> Option<Vec<F>> {
    let aug: Vec<Vec<F>> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (rref, pivots) = rref_rows(aug, ncols + 1, &(0..=ncols).collect::<Vec<_>>());
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = zeros(ncols);
    for (row, &p) in rref.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

pub fn rank_of<F: Field>(vectors: &[Vec<F>]) -> usize {
    match vectors.first() {
        None => 0,
        Some(v) => bareiss(vectors.to_vec(), v.len()).0,
    }
}

/// Indices of a lexicographically-first maximal linearly independent subset.
pub fn independent_subset<F: Field>(vectors: &[Vec<F>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut current: Vec<Vec<F>> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        current.push(v.clone());
        if rank_of(&current) == current.len() {
            chosen.push(i);
        } else {
            current.pop();
        }
    }
    chosen
}

/// Canonical basis (RREF rows) of the row space.
pub fn row_space_basis<F: Field>(rows: &[Vec<F>], ncols: usize) -> Vec<Vec<F>> {
    rref_rows(rows.to_vec(), ncols, &(0..ncols).collect::<Vec<_>>()).0
}

/// Is `v` in the span of `basis`?
pub fn in_span<F: Field>(v: &[F], basis: &[Vec<F>]) -> bool {
    if basis.is_empty() {
        return is_zero_vec(v);
    }
    let mut all = basis.to_vec();
    all.push(v.to_vec());
    rank_of(&all) == rank_of(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::scalar::{int, qvec, ratio};
    use num_rational::Ratio;

    #[test]
    fn rank_examples() {
        assert_eq!(Matrix::<Rational>::identity(3).rank(), 3);
        assert_eq!(Matrix::<Rational>::zero(2, 3).rank(), 0);
        let m = Matrix::from_rows(vec![qvec(&[1, 1, 1]), qvec(&[1, -1, 1]), qvec(&[-1, -1, 1]), qvec(&[-1, 1, 1])]);
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn rank_is_generic_over_fixed_width_ratios() {
        let m: Matrix<Ratio<i64>> = Matrix::from_rows(vec![
            vec![Ratio::from_integer(2), Ratio::from_integer(4)],
            vec![Ratio::new(1, 3), Ratio::new(2, 3)],
        ]);
        assert_eq!(m.rank(), 1);
        assert_eq!(m.det(), Ratio::from_integer(0));
    }

    #[test]
    fn det_and_solve() {
        let m = Matrix::from_rows(vec![qvec(&[2, 1]), qvec(&[1, 3])]);
        assert_eq!(m.det(), int(5));
        let swapped = Matrix::from_rows(vec![qvec(&[1, 3]), qvec(&[2, 1])]);
        assert_eq!(swapped.det(), int(-5));
        assert_eq!(m.solve(&qvec(&[3, 4])), Some(vec![int(1), int(1)]));
        let singular = Matrix::from_rows(vec![qvec(&[1, 1]), qvec(&[2, 2])]);
        assert_eq!(singular.solve(&qvec(&[1, 3])), None);
    }

    #[test]
    fn kernel_of_ray_matrix() {
        // Columns rho1..rho4 of the square cone: one relation rho1 - rho2 + rho3 - rho4.
        let cols = vec![qvec(&[1, 1, 1]), qvec(&[1, -1, 1]), qvec(&[-1, -1, 1]), qvec(&[-1, 1, 1])];
        let m = Matrix::from_columns(&cols, 3);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(positively_proportional(&k[0], &qvec(&[1, -1, 1, -1])) || positively_proportional(&k[0], &qvec(&[-1, 1, -1, 1])));
        assert!(is_zero_vec(&m.mul_vec(&k[0])));
    }

    #[test]
    fn proportional_vectors() {
        assert_eq!(proportionality(&qvec(&[2, 4]), &qvec(&[1, 2])), Some(int(2)));
        assert_eq!(proportionality(&qvec(&[2, 5]), &qvec(&[1, 2])), None);
        assert!(!positively_proportional(&qvec(&[-1, -2]), &qvec(&[1, 2])));
        assert_eq!(proportionality(&[ratio(1, 2)], &[int(1)]), Some(ratio(1, 2)));
    }
}
