//! Exact integer/rational linear algebra used by every other module.
//!
//! Everything here works over `BigInt`/`BigRational`; there is no floating
//! point anywhere in the crate. Outputs are deterministic: pivot choices and
//! orderings are fixed so that golden tests stay stable.

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};

pub type IntVec = Vec<BigInt>;
pub type RatVec = Vec<BigRational>;

pub fn bint(x: i64) -> BigInt {
    BigInt::from(x)
}

pub fn brat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn bratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int_vec(v: &[i64]) -> IntVec {
    v.iter().map(|&x| bint(x)).collect()
}

pub fn rat_vec(v: &[i64]) -> RatVec {
    v.iter().map(|&x| brat(x)).collect()
}

/// Dense matrix of arbitrary-precision integers, row major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl std::fmt::Debug for IntMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IntMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntMat {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "data length mismatch");
        IntMat { rows, cols, data }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| bint(x)));
        }
        IntMat::new(r, c, data)
    }

    pub fn from_big_rows(rows: &[IntVec]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned());
        }
        IntMat::new(r, c, data)
    }

    pub fn from_columns(cols: &[IntVec]) -> Self {
        let c = cols.len();
        let r = cols[0].len();
        let mut m = IntMat::zero(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for i in 0..r {
                *m.at_mut(i, j) = col[i].clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> IntVec {
        (0..self.cols).map(|j| self.at(i, j).clone()).collect()
    }

    pub fn column(&self, j: usize) -> IntVec {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<IntVec> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn column_vecs(&self) -> Vec<IntVec> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if !b.is_zero() {
                        *out.at_mut(i, j) += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> IntVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                let mut s = BigInt::zero();
                for j in 0..self.cols {
                    s += self.at(i, j) * &v[j];
                }
                s
            })
            .collect()
    }

    pub fn mul_rat_vec(&self, v: &[BigRational]) -> RatVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_rat_vec");
        (0..self.rows)
            .map(|i| {
                let mut s = BigRational::zero();
                for j in 0..self.cols {
                    s += BigRational::from_integer(self.at(i, j).clone()) * &v[j];
                }
                s
            })
            .collect()
    }

    pub fn sub(&self, other: &IntMat) -> IntMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        IntMat::new(self.rows, self.cols, data)
    }

    pub fn neg(&self) -> IntMat {
        IntMat::new(self.rows, self.cols, self.data.iter().map(|a| -a).collect())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self.at(i, j) != self.at(j, i) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_identity(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let want = if i == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                };
                if *self.at(i, j) != want {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Fraction-free Bareiss determinant.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row(i)).collect();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                let mut swap = None;
                for i in (k + 1)..n {
                    if !a[i][k].is_zero() {
                        swap = Some(i);
                        break;
                    }
                }
                match swap {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = &num / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        if sign < 0 {
            -a[n - 1][n - 1].clone()
        } else {
            a[n - 1][n - 1].clone()
        }
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && self.det().abs().is_one()
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut a: Vec<RatVec> = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| BigRational::from_integer(self.at(i, j).clone()))
                    .collect()
            })
            .collect();
        rational_row_echelon(&mut a)
    }

    pub fn to_rational(&self) -> Vec<RatVec> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| BigRational::from_integer(self.at(i, j).clone()))
                    .collect()
            })
            .collect()
    }

    /// Exact inverse over the rationals; None when singular.
    pub fn inverse_rational(&self) -> Option<Vec<RatVec>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut work: Vec<RatVec> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row: RatVec = (0..n)
                .map(|j| BigRational::from_integer(self.at(i, j).clone()))
                .collect();
            for j in 0..n {
                row.push(if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                });
            }
            work.push(row);
        }
        let rank = rational_reduced_row_echelon(&mut work, n);
        if rank < n {
            return None;
        }
        Some(work.into_iter().map(|row| row[n..].to_vec()).collect())
    }
}

/// Forward elimination; returns the rank. Destroys `a`.
fn rational_row_echelon(a: &mut [RatVec]) -> usize {
    if a.is_empty() {
        return 0;
    }
    let rows = a.len();
    let cols = a[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let mut pivot = None;
        for r in rank..rows {
            if !a[r][col].is_zero() {
                pivot = Some(r);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        a.swap(rank, p);
        for r in (rank + 1)..rows {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &a[rank][col];
                for c in col..cols {
                    let sub = &f * &a[rank][c];
                    a[r][c] -= sub;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Full RREF on the leading `lead` columns (the rest ride along). Returns rank.
fn rational_reduced_row_echelon(a: &mut [RatVec], lead: usize) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut rank = 0;
    for col in 0..lead {
        let mut pivot = None;
        for r in rank..rows {
            if !a[r][col].is_zero() {
                pivot = Some(r);
                break;
            }
        }
        let Some(p) = pivot else { continue };
        a.swap(rank, p);
        let inv = a[rank][col].clone();
        for c in 0..cols {
            a[rank][c] = &a[rank][c] / &inv;
        }
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..cols {
                    let sub = &f * &a[rank][c];
                    a[r][c] -= sub;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    assert_eq!(a.len(), b.len());
    let mut s = BigInt::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        s += x * y;
    }
    s
}

pub fn dot_rat(a: &[BigRational], b: &[BigRational]) -> BigRational {
    assert_eq!(a.len(), b.len());
    let mut s = BigRational::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        s += x * y;
    }
    s
}

pub fn dot_rat_int(a: &[BigRational], b: &[BigInt]) -> BigRational {
    assert_eq!(a.len(), b.len());
    let mut s = BigRational::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        s += x * BigRational::from_integer(y.clone());
    }
    s
}

pub fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn gcd_vec(v: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
    }
    g
}

/// Divide by the gcd of the entries. The zero vector is returned unchanged.
pub fn primitivize(v: &[BigInt]) -> IntVec {
    let g = gcd_vec(v);
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Primitive representative with the first nonzero coordinate positive.
pub fn primitivize_signed(v: &[BigInt]) -> IntVec {
    let p = primitivize(v);
    for x in &p {
        if x.is_positive() {
            return p;
        }
        if x.is_negative() {
            return p.iter().map(|y| -y).collect();
        }
    }
    p
}

/// Clear denominators and reduce: the primitive integer vector spanning the
/// same ray as the rational input (direction preserved).
pub fn rat_to_primitive_int(v: &[BigRational]) -> IntVec {
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: IntVec = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    primitivize(&ints)
}

pub fn vec_to_rat(v: &[BigInt]) -> RatVec {
    v.iter()
        .map(|x| BigRational::from_integer(x.clone()))
        .collect()
}

/// Exact integer vector from a rational one; None if any entry is non-integral.
pub fn rat_vec_to_int(v: &[BigRational]) -> Option<IntVec> {
    v.iter()
        .map(|x| {
            if x.denom().is_one() {
                Some(x.numer().clone())
            } else {
                None
            }
        })
        .collect()
}

pub fn scale_vec(v: &[BigInt], s: &BigInt) -> IntVec {
    v.iter().map(|x| x * s).collect()
}

pub fn add_vec(a: &[BigInt], b: &[BigInt]) -> IntVec {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[BigInt], b: &[BigInt]) -> IntVec {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

/// Lexicographic comparison, used for every canonical ordering in the crate.
pub fn lex_cmp(a: &[BigInt], b: &[BigInt]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

pub fn sort_vecs(vs: &mut [IntVec]) {
    vs.sort_by(|a, b| lex_cmp(a, b));
}

// ---------------------------------------------------------------------------
// Smith normal form
// ---------------------------------------------------------------------------

/// U * M * V = D with U, V unimodular and D diagonal, d_i | d_{i+1}, d_i >= 0.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
}

impl Snf {
    /// Nonzero diagonal entries, in divisibility order.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let n = self.d.rows().min(self.d.cols());
        (0..n)
            .map(|i| self.d.at(i, i).clone())
            .filter(|x| !x.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

/// Pivot rule: smallest nonzero absolute value, ties broken by lowest row
/// index then lowest column index.
fn find_pivot(a: &IntMat, from: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut best_abs = BigInt::zero();
    for i in from..a.rows() {
        for j in from..a.cols() {
            let x = a.at(i, j);
            if x.is_zero() {
                continue;
            }
            let ab = x.abs();
            if best.is_none() || ab < best_abs {
                best = Some((i, j));
                best_abs = ab;
            }
        }
    }
    best
}

fn swap_rows(a: &mut IntMat, u: &mut IntMat, i: usize, j: usize) {
    if i == j {
        return;
    }
    for c in 0..a.cols() {
        let tmp = a.at(i, c).clone();
        *a.at_mut(i, c) = a.at(j, c).clone();
        *a.at_mut(j, c) = tmp;
    }
    for c in 0..u.cols() {
        let tmp = u.at(i, c).clone();
        *u.at_mut(i, c) = u.at(j, c).clone();
        *u.at_mut(j, c) = tmp;
    }
}

fn swap_cols(a: &mut IntMat, v: &mut IntMat, i: usize, j: usize) {
    if i == j {
        return;
    }
    for r in 0..a.rows() {
        let tmp = a.at(r, i).clone();
        *a.at_mut(r, i) = a.at(r, j).clone();
        *a.at_mut(r, j) = tmp;
    }
    for r in 0..v.rows() {
        let tmp = v.at(r, i).clone();
        *v.at_mut(r, i) = v.at(r, j).clone();
        *v.at_mut(r, j) = tmp;
    }
}

/// row_i -= q * row_t
fn row_sub(a: &mut IntMat, u: &mut IntMat, i: usize, t: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for c in 0..a.cols() {
        let sub = q * a.at(t, c);
        *a.at_mut(i, c) -= sub;
    }
    for c in 0..u.cols() {
        let sub = q * u.at(t, c);
        *u.at_mut(i, c) -= sub;
    }
}

/// col_j -= q * col_t
fn col_sub(a: &mut IntMat, v: &mut IntMat, j: usize, t: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for r in 0..a.rows() {
        let sub = q * a.at(r, t);
        *a.at_mut(r, j) -= sub;
    }
    for r in 0..v.rows() {
        let sub = q * v.at(r, t);
        *v.at_mut(r, j) -= sub;
    }
}

fn negate_row(a: &mut IntMat, u: &mut IntMat, i: usize) {
    for c in 0..a.cols() {
        let x = -a.at(i, c).clone();
        *a.at_mut(i, c) = x;
    }
    for c in 0..u.cols() {
        let x = -u.at(i, c).clone();
        *u.at_mut(i, c) = x;
    }
}

/// Division with remainder of minimal absolute value.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    if r.abs() * bint(2) > b.abs() {
        if (r.is_positive() && b.is_positive()) || (r.is_negative() && b.is_negative()) {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

pub fn smith_normal_form(m: &IntMat) -> Snf {
    let mut a = m.clone();
    let mut u = IntMat::identity(m.rows());
    let mut v = IntMat::identity(m.cols());
    let n = m.rows().min(m.cols());

    for t in 0..n {
        // Stop when everything from (t, t) on is zero.
        while let Some((pi, pj)) = find_pivot(&a, t) {
            swap_rows(&mut a, &mut u, t, pi);
            swap_cols(&mut a, &mut v, t, pj);

            let mut clean = true;
            for i in (t + 1)..a.rows() {
                if !a.at(i, t).is_zero() {
                    let q = round_div(a.at(i, t), a.at(t, t));
                    row_sub(&mut a, &mut u, i, t, &q);
                    if !a.at(i, t).is_zero() {
                        clean = false;
                    }
                }
            }
            for j in (t + 1)..a.cols() {
                if !a.at(t, j).is_zero() {
                    let q = round_div(a.at(t, j), a.at(t, t));
                    col_sub(&mut a, &mut v, j, t, &q);
                    if !a.at(t, j).is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if a.at(t, t).is_negative() {
            negate_row(&mut a, &mut u, t);
        }
    }

    // Enforce the divisibility chain d_i | d_{i+1}.
    loop {
        let mut changed = false;
        for i in 0..n.saturating_sub(1) {
            let di = a.at(i, i).clone();
            let dj = a.at(i + 1, i + 1).clone();
            if dj.is_zero() {
                continue;
            }
            if di.is_zero() || !(&dj % &di).is_zero() {
                // Fold entry (i+1, i+1) into column i and re-reduce the block.
                col_sub(&mut a, &mut v, i, i + 1, &-BigInt::one());
                while let Some((pi, pj)) = find_pivot(&a, i) {
                    swap_rows(&mut a, &mut u, i, pi);
                    swap_cols(&mut a, &mut v, i, pj);
                    let mut clean = true;
                    for r in (i + 1)..a.rows() {
                        if !a.at(r, i).is_zero() {
                            let q = round_div(a.at(r, i), a.at(i, i));
                            row_sub(&mut a, &mut u, r, i, &q);
                            if !a.at(r, i).is_zero() {
                                clean = false;
                            }
                        }
                    }
                    for c in (i + 1)..a.cols() {
                        if !a.at(i, c).is_zero() {
                            let q = round_div(a.at(i, c), a.at(i, i));
                            col_sub(&mut a, &mut v, c, i, &q);
                            if !a.at(i, c).is_zero() {
                                clean = false;
                            }
                        }
                    }
                    if clean {
                        break;
                    }
                }
                // The fold may have left entries off the (i, i+1) diagonal
                // block; clean the trailing block again.
                for t in (i + 1)..n {
                    while let Some((pi, pj)) = find_pivot(&a, t) {
                        swap_rows(&mut a, &mut u, t, pi);
                        swap_cols(&mut a, &mut v, t, pj);
                        let mut clean = true;
                        for r in (t + 1)..a.rows() {
                            if !a.at(r, t).is_zero() {
                                let q = round_div(a.at(r, t), a.at(t, t));
                                row_sub(&mut a, &mut u, r, t, &q);
                                if !a.at(r, t).is_zero() {
                                    clean = false;
                                }
                            }
                        }
                        for c in (t + 1)..a.cols() {
                            if !a.at(t, c).is_zero() {
                                let q = round_div(a.at(t, c), a.at(t, t));
                                col_sub(&mut a, &mut v, c, t, &q);
                                if !a.at(t, c).is_zero() {
                                    clean = false;
                                }
                            }
                        }
                        if clean {
                            break;
                        }
                    }
                    if a.at(t, t).is_negative() {
                        negate_row(&mut a, &mut u, t);
                    }
                }
                if a.at(i, i).is_negative() {
                    negate_row(&mut a, &mut u, i);
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    Snf { u, d: a, v }
}

// ---------------------------------------------------------------------------
// Rational linear systems
// ---------------------------------------------------------------------------

/// Outcome of an exact linear solve A x = b.
#[derive(Clone, Debug)]
pub enum LinSolve {
    /// One exact solution plus a basis of the kernel of A.
    Solution {
        particular: RatVec,
        kernel: Vec<RatVec>,
    },
    /// Certificate row y with y.A = 0 and y.b != 0.
    Inconsistent { certificate: RatVec },
}

impl LinSolve {
    pub fn solution(&self) -> Option<&RatVec> {
        match self {
            LinSolve::Solution { particular, .. } => Some(particular),
            LinSolve::Inconsistent { .. } => None,
        }
    }
}

pub fn solve_rational(a: &IntMat, b: &[BigRational]) -> LinSolve {
    assert_eq!(a.rows(), b.len(), "rhs length mismatch");
    let m = a.rows();
    let n = a.cols();
    // Augmented working rows: [A | b | T] with T tracking left-multiplication.
    let mut work: Vec<RatVec> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: RatVec = (0..n)
            .map(|j| BigRational::from_integer(a.at(i, j).clone()))
            .collect();
        row.push(b[i].clone());
        for j in 0..m {
            row.push(if i == j {
                BigRational::one()
            } else {
                BigRational::zero()
            });
        }
        work.push(row);
    }
    let rank = rational_reduced_row_echelon(&mut work, n);

    // Inconsistency: a row with zero A-part but nonzero b-part.
    for row in work.iter().skip(rank) {
        if !row[n].is_zero() {
            return LinSolve::Inconsistent {
                certificate: row[(n + 1)..].to_vec(),
            };
        }
    }
    // Pivot columns in order.
    let mut pivot_cols = Vec::with_capacity(rank);
    for (r, row) in work.iter().enumerate().take(rank) {
        for (c, x) in row.iter().enumerate().take(n) {
            if !x.is_zero() {
                pivot_cols.push((r, c));
                break;
            }
        }
    }
    let mut particular = vec![BigRational::zero(); n];
    for &(r, c) in &pivot_cols {
        particular[c] = work[r][n].clone();
    }
    let pivot_set: Vec<usize> = pivot_cols.iter().map(|&(_, c)| c).collect();
    let mut kernel = Vec::new();
    for free in 0..n {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut k = vec![BigRational::zero(); n];
        k[free] = BigRational::one();
        for &(r, c) in &pivot_cols {
            k[c] = -work[r][free].clone();
        }
        kernel.push(k);
    }
    LinSolve::Solution { particular, kernel }
}

// ---------------------------------------------------------------------------
// Signature of a symmetric matrix
// ---------------------------------------------------------------------------

/// Inertia (positive, negative, zero) of a symmetric integer matrix, computed
/// by exact symmetric Gaussian diagonalization (congruence) over Q.
pub fn signature_of_symmetric(g: &IntMat) -> Result<(usize, usize, usize), crate::Error> {
    if !g.is_symmetric() {
        return Err(crate::Error::NotSymmetric);
    }
    let n = g.rows();
    let mut a: Vec<RatVec> = g.to_rational();
    let mut active: Vec<usize> = (0..n).collect();
    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);

    while !active.is_empty() {
        // Prefer a nonzero diagonal entry (first in index order).
        let diag = active
            .iter()
            .position(|&i| !a[i][i].is_zero())
            .map(|k| active[k]);
        if let Some(i) = diag {
            if a[i][i].is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            let others: Vec<usize> = active.iter().cloned().filter(|&j| j != i).collect();
            for &j in &others {
                if a[j][i].is_zero() {
                    continue;
                }
                let f = &a[j][i] / &a[i][i];
                // row_j -= f row_i; col_j -= f col_i: only active entries matter.
                for &c in &others {
                    let sub = &f * &a[i][c];
                    a[j][c] -= sub;
                }
                a[j][i] = BigRational::zero();
                a[i][j] = BigRational::zero();
            }
            // Symmetrize the updated block exactly.
            for &j in &others {
                for &c in &others {
                    if j < c {
                        let v = a[j][c].clone();
                        a[c][j] = v;
                    }
                }
            }
            active.retain(|&k| k != i);
            continue;
        }
        // All active diagonal entries vanish; look for an off-diagonal one.
        let mut pair = None;
        'outer: for (x, &i) in active.iter().enumerate() {
            for &j in active.iter().skip(x + 1) {
                if !a[i][j].is_zero() {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        match pair {
            Some((i, j)) => {
                // row_i += row_j; col_i += col_j puts 2 a_ij on the diagonal.
                for &c in &active {
                    let add = a[j][c].clone();
                    a[i][c] += add;
                }
                for &r in &active {
                    let add = a[r][j].clone();
                    a[r][i] += add;
                }
            }
            None => {
                zero += active.len();
                break;
            }
        }
    }
    Ok((pos, neg, zero))
}

// ---------------------------------------------------------------------------
// Integer lattice computations built on SNF
// ---------------------------------------------------------------------------

/// Basis of the saturated integer kernel {x : M x = 0}.
pub fn integer_kernel(m: &IntMat) -> Vec<IntVec> {
    let snf = smith_normal_form(m);
    let r = snf.rank();
    (r..m.cols()).map(|j| snf.v.column(j)).collect()
}

/// Basis of the saturation of the column span: span_Q(columns) ∩ Z^n.
pub fn saturation_basis(m: &IntMat) -> Vec<IntVec> {
    let snf = smith_normal_form(m);
    let r = snf.rank();
    if r == 0 {
        return Vec::new();
    }
    let u_inv = invert_unimodular(&snf.u);
    (0..r).map(|j| u_inv.column(j)).collect()
}

/// Exact inverse of a unimodular integer matrix (stays integral).
pub fn invert_unimodular(m: &IntMat) -> IntMat {
    let inv = m
        .inverse_rational()
        .expect("unimodular matrix must be invertible");
    let n = m.rows();
    let mut out = IntMat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            assert!(inv[i][j].denom().is_one(), "inverse not integral");
            *out.at_mut(i, j) = inv[i][j].numer().clone();
        }
    }
    out
}

/// Unimodular matrix whose first column is the given primitive vector.
pub fn complete_primitive_to_basis(v: &[BigInt]) -> IntMat {
    let g = gcd_vec(v);
    assert!(g.is_one(), "vector must be primitive");
    let col = IntMat::from_columns(&[v.to_vec()]);
    let snf = smith_normal_form(&col);
    // u * v * s = e_1 with s = ±1, so (s * u)^{-1} e_1 = v.
    let mut u = snf.u;
    let s = snf.v.at(0, 0).clone();
    if s == bint(-1) {
        for i in 0..u.rows() {
            for j in 0..u.cols() {
                let x = -u.at(i, j).clone();
                *u.at_mut(i, j) = x;
            }
        }
    }
    invert_unimodular(&u)
}

/// Order of an integer matrix under iteration, up to `bound`. None when the
/// bound is exceeded (order unknown / infinite).
pub fn matrix_order(m: &IntMat, bound: usize) -> Option<usize> {
    assert!(m.is_square());
    let mut p = m.clone();
    for k in 1..=bound {
        if p.is_identity() {
            return Some(k);
        }
        p = p.mul(m);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn check_snf(m: &IntMat) {
        let snf = smith_normal_form(m);
        assert_eq!(snf.u.det().abs(), BigInt::one(), "U not unimodular");
        assert_eq!(snf.v.det().abs(), BigInt::one(), "V not unimodular");
        let umv = snf.u.mul(m).mul(&snf.v);
        assert_eq!(umv, snf.d, "U M V != D");
        let n = m.rows().min(m.cols());
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert!(snf.d.at(i, j).is_zero(), "D not diagonal");
                }
            }
            assert!(!snf.d.at(i, i).is_negative(), "negative diagonal");
        }
        for i in 0..n.saturating_sub(1) {
            let a = snf.d.at(i, i);
            let b = snf.d.at(i + 1, i + 1);
            if !a.is_zero() {
                assert!((b % a).is_zero(), "divisibility chain broken");
            } else {
                assert!(b.is_zero(), "zero before nonzero in chain");
            }
        }
    }

    #[test]
    fn snf_diagonal_stays() {
        let m = IntMat::from_rows(&[vec![2, 0], vec![0, 2]]);
        let snf = smith_normal_form(&m);
        assert_eq!(*snf.d.at(0, 0), bint(2));
        assert_eq!(*snf.d.at(1, 1), bint(2));
        check_snf(&m);
    }

    #[test]
    fn snf_hyperbolic_plane() {
        let m = IntMat::from_rows(&[vec![0, 1], vec![1, 0]]);
        let snf = smith_normal_form(&m);
        assert_eq!(*snf.d.at(0, 0), bint(1));
        assert_eq!(*snf.d.at(1, 1), bint(1));
        check_snf(&m);
    }

    #[test]
    fn snf_a2_gram() {
        let m = IntMat::from_rows(&[vec![2, 1], vec![1, 2]]);
        let snf = smith_normal_form(&m);
        assert_eq!(*snf.d.at(0, 0), bint(1));
        assert_eq!(*snf.d.at(1, 1), bint(3));
        check_snf(&m);
    }

    #[test]
    fn snf_random_matrices() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..60 {
            let rows = rng.random_range(1..5);
            let cols = rng.random_range(1..5);
            let data: Vec<BigInt> = (0..rows * cols)
                .map(|_| bint(rng.random_range(-9..10)))
                .collect();
            check_snf(&IntMat::new(rows, cols, data));
        }
    }

    #[test]
    fn solve_identity_system() {
        let a = IntMat::identity(3);
        let b = rat_vec(&[3, -1, 7]);
        match solve_rational(&a, &b) {
            LinSolve::Solution { particular, kernel } => {
                assert_eq!(particular, b);
                assert!(kernel.is_empty());
            }
            _ => panic!("expected a solution"),
        }
    }

    #[test]
    fn solve_inconsistent_has_certificate() {
        // x = 0 and x = 1.
        let a = IntMat::from_rows(&[vec![1], vec![1]]);
        let b = rat_vec(&[0, 1]);
        match solve_rational(&a, &b) {
            LinSolve::Inconsistent { certificate } => {
                // y A = 0 and y b != 0, exactly.
                let ya: BigRational = certificate[0].clone() + certificate[1].clone();
                assert!(ya.is_zero());
                let yb = &certificate[1] * brat(1);
                assert!(!yb.is_zero());
            }
            _ => panic!("expected inconsistency"),
        }
    }

    #[test]
    fn solve_underdetermined_kernel() {
        let a = IntMat::from_rows(&[vec![1, 1, 0]]);
        let b = rat_vec(&[2]);
        match solve_rational(&a, &b) {
            LinSolve::Solution { particular, kernel } => {
                assert_eq!(
                    dot_rat(&vec_to_rat(&int_vec(&[1, 1, 0])), &particular),
                    brat(2)
                );
                assert_eq!(kernel.len(), 2);
                for k in &kernel {
                    assert!(dot_rat(&vec_to_rat(&int_vec(&[1, 1, 0])), k).is_zero());
                }
            }
            _ => panic!("expected a solution"),
        }
    }

    #[test]
    fn solve_random_certificates() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..50 {
            let m = rng.random_range(1..5);
            let n = rng.random_range(1..5);
            let a = IntMat::new(
                m,
                n,
                (0..m * n).map(|_| bint(rng.random_range(-4..5))).collect(),
            );
            let b: RatVec = (0..m).map(|_| brat(rng.random_range(-4..5))).collect();
            match solve_rational(&a, &b) {
                LinSolve::Solution { particular, kernel } => {
                    let ax = a.mul_rat_vec(&particular);
                    assert_eq!(ax, b);
                    for k in kernel {
                        assert!(a.mul_rat_vec(&k).iter().all(|x| x.is_zero()));
                    }
                }
                LinSolve::Inconsistent { certificate } => {
                    // y A = 0
                    for j in 0..n {
                        let mut s = BigRational::zero();
                        for i in 0..m {
                            s += &certificate[i] * BigRational::from_integer(a.at(i, j).clone());
                        }
                        assert!(s.is_zero());
                    }
                    assert!(!dot_rat(&certificate, &b).is_zero());
                }
            }
        }
    }

    #[test]
    fn signature_hyperbolic() {
        let u = IntMat::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(signature_of_symmetric(&u).unwrap(), (1, 1, 0));
    }

    #[test]
    fn signature_diag() {
        let m = IntMat::from_rows(&[vec![2, 0], vec![0, -2]]);
        assert_eq!(signature_of_symmetric(&m).unwrap(), (1, 1, 0));
    }

    #[test]
    fn signature_rejects_asymmetric() {
        let m = IntMat::from_rows(&[vec![0, 1], vec![2, 0]]);
        assert!(signature_of_symmetric(&m).is_err());
    }

    #[test]
    fn signature_degenerate() {
        let m = IntMat::from_rows(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(signature_of_symmetric(&m).unwrap(), (1, 0, 1));
    }

    #[test]
    fn signature_congruence_invariant() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..40 {
            let n = rng.random_range(1..5);
            // Random symmetric matrix.
            let mut g = IntMat::zero(n, n);
            for i in 0..n {
                for j in i..n {
                    let x = bint(rng.random_range(-4..5));
                    *g.at_mut(i, j) = x.clone();
                    *g.at_mut(j, i) = x;
                }
            }
            // Random unimodular P as a product of elementary operations.
            let mut p = IntMat::identity(n);
            for _ in 0..6 {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n);
                if n > 1 {
                    while j == i {
                        j = rng.random_range(0..n);
                    }
                    let q = bint(rng.random_range(-2..3));
                    for r in 0..n {
                        let add = &q * p.at(r, i);
                        *p.at_mut(r, j) += add;
                    }
                }
            }
            let conj = p.transpose().mul(&g).mul(&p);
            assert_eq!(
                signature_of_symmetric(&g).unwrap(),
                signature_of_symmetric(&conj).unwrap()
            );
        }
    }

    #[test]
    fn kernel_and_saturation() {
        let m = IntMat::from_rows(&[vec![2, 4, 6]]);
        let ker = integer_kernel(&m);
        assert_eq!(ker.len(), 2);
        for k in &ker {
            assert!(dot(&m.row(0), k).is_zero());
        }
        // Saturation of span{(2,4)} is span{(1,2)}.
        let m2 = IntMat::from_columns(&[int_vec(&[2, 4])]);
        let sat = saturation_basis(&m2);
        assert_eq!(sat.len(), 1);
        assert_eq!(primitivize_signed(&sat[0]), int_vec(&[1, 2]));
    }

    #[test]
    fn basis_completion() {
        let v = int_vec(&[3, 5, 7]);
        let w = complete_primitive_to_basis(&v);
        assert!(w.is_unimodular());
        assert_eq!(w.column(0), v);
    }

    #[test]
    fn bareiss_det() {
        let m = IntMat::from_rows(&[vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]);
        assert_eq!(m.det(), bint(4));
        let s = IntMat::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(s.det(), bint(-1));
    }

    #[test]
    fn order_iteration() {
        let rot = IntMat::from_rows(&[vec![0, -1], vec![1, 0]]);
        assert_eq!(matrix_order(&rot, 10), Some(4));
        let shear = IntMat::from_rows(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(matrix_order(&shear, 10), None);
    }
}
