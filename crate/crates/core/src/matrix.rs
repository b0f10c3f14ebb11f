//! Dense matrices over the ring instances and their residue fields, plus the
//! elementary *-congruence moves shared by every elimination routine.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::residue::{ResidueElement, ResidueField};
use crate::ring::{RingDescriptor, RingElement};

/// The operations matrix code needs from an entry type.
pub trait Scalar: Clone + PartialEq + fmt::Debug {
    type Ctx: Copy + PartialEq + fmt::Debug;

    fn zero_in(ctx: &Self::Ctx) -> Self;
    fn one_in(ctx: &Self::Ctx) -> Self;
    fn ctx(&self) -> Self::Ctx;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    /// The involution.
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn is_unit(&self) -> bool;
    fn inverse(&self) -> Option<Self>;
}

impl Scalar for RingElement {
    type Ctx = RingDescriptor;

    fn zero_in(ctx: &RingDescriptor) -> Self {
        ctx.zero()
    }
    fn one_in(ctx: &RingDescriptor) -> Self {
        ctx.one()
    }
    fn ctx(&self) -> RingDescriptor {
        *self.descriptor()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        self.involute()
    }
    fn is_zero(&self) -> bool {
        RingElement::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        RingElement::is_unit(self)
    }
    fn inverse(&self) -> Option<Self> {
        self.invert().ok()
    }
}

impl Scalar for ResidueElement {
    type Ctx = ResidueField;

    fn zero_in(ctx: &ResidueField) -> Self {
        ctx.zero()
    }
    fn one_in(ctx: &ResidueField) -> Self {
        ctx.one()
    }
    fn ctx(&self) -> ResidueField {
        self.field()
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        ResidueElement::conj(self)
    }
    fn is_zero(&self) -> bool {
        ResidueElement::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        !ResidueElement::is_zero(self)
    }
    fn inverse(&self) -> Option<Self> {
        self.inv().ok()
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T: Scalar> {
    ctx: T::Ctx,
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RingMatrix = Matrix<RingElement>;
pub type ResidueMatrix = Matrix<ResidueElement>;

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn from_fn(ctx: T::Ctx, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { ctx, rows, cols, data }
    }

    /// Builds from rows; every entry must live in `ctx`.
    pub fn from_rows(ctx: T::Ctx, rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch);
            }
            for x in row {
                if x.ctx() != ctx {
                    return Err(Error::DescriptorMismatch);
                }
                data.push(x);
            }
        }
        Ok(Matrix { ctx, rows: r, cols: c, data })
    }

    pub fn zeros(ctx: T::Ctx, rows: usize, cols: usize) -> Self {
        let z = T::zero_in(&ctx);
        Matrix { ctx, rows, cols, data: alloc::vec![z; rows * cols] }
    }

    pub fn identity(ctx: T::Ctx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one_in(&ctx);
        }
        m
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(ctx: T::Ctx, diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(ctx, n, n);
        for (i, x) in diag.iter().enumerate() {
            m.data[i * n + i] = x.clone();
        }
        m
    }

    pub fn ctx(&self) -> T::Ctx {
        self.ctx
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: T) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn map<U: Scalar>(&self, ctx: U::Ctx, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { ctx, rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix shapes do not compose");
        Self::from_fn(self.ctx, self.rows, rhs.cols, |i, j| {
            let mut acc = T::zero_in(&self.ctx);
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(rhs.get(k, j)));
            }
            acc
        })
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.ctx, self.rows, self.cols, |i, j| self.get(i, j).add(rhs.get(i, j)))
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::from_fn(self.ctx, self.rows, self.cols, |i, j| c.mul(self.get(i, j)))
    }

    /// `X'*`, the transpose with the involution applied entrywise.
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.ctx, self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ctx, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// `X'* self X`.
    pub fn congruence(&self, x: &Self) -> Self {
        x.conj_transpose().mul(&self.mul(x))
    }

    pub fn block_diag(ctx: T::Ctx, blocks: &[&Self]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(ctx, n, m);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r + i, c + j, b.get(i, j).clone());
                }
            }
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// The square submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.ctx, idx.len(), idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Gauss-Jordan inverse, pivoting on units (over a local ring a column
    /// of an invertible matrix always contains one).
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch);
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(self.ctx, n);
        for k in 0..n {
            let piv = (k..n).find(|&i| a.get(i, k).is_unit()).ok_or(Error::Degenerate)?;
            a.swap_rows(k, piv);
            inv.swap_rows(k, piv);
            let s = a.get(k, k).inverse().ok_or(Error::Degenerate)?;
            for j in 0..n {
                let x = s.mul(a.get(k, j));
                a.set(k, j, x);
                let y = s.mul(inv.get(k, j));
                inv.set(k, j, y);
            }
            for i in 0..n {
                if i == k || a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).clone();
                for j in 0..n {
                    let x = a.get(i, j).sub(&f.mul(a.get(k, j)));
                    a.set(i, j, x);
                    let y = inv.get(i, j).sub(&f.mul(inv.get(k, j)));
                    inv.set(i, j, y);
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by elimination over a field (every nonzero entry a unit).
    pub fn determinant(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one_in(&self.ctx);
        for k in 0..n {
            let Some(piv) = (k..n).find(|&i| a.get(i, k).is_unit()) else {
                return T::zero_in(&self.ctx);
            };
            if piv != k {
                a.swap_rows(k, piv);
                det = det.neg();
            }
            let d = a.get(k, k).clone();
            det = det.mul(&d);
            let s = d.inverse().expect("unit pivot");
            for i in k + 1..n {
                if a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).mul(&s);
                for j in k..n {
                    let x = a.get(i, j).sub(&f.mul(a.get(k, j)));
                    a.set(i, j, x);
                }
            }
        }
        det
    }

    /// First `(i, j)` in row-major order with `self[j][i] != sign * self[i][j]*`.
    pub fn hermitian_defect(&self, sign: i64) -> Option<(usize, usize)> {
        for i in 0..self.rows {
            for j in i..self.cols {
                let c = self.get(i, j).conj();
                let c = if sign < 0 { c.neg() } else { c };
                if *self.get(j, i) != c {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl RingMatrix {
    /// Entrywise reduction to the residue field.
    pub fn residue(&self) -> ResidueMatrix {
        let f = self.ctx().residue_field();
        self.map(f, RingElement::residue)
    }

    /// Constant-coefficient lift of a residue matrix.
    pub fn lift(desc: RingDescriptor, m: &ResidueMatrix) -> RingMatrix {
        m.map(desc, |x| desc.lift(x))
    }

    /// Invertible over the ring iff invertible over the residue field.
    pub fn is_invertible(&self) -> bool {
        self.is_square() && !self.residue().determinant().is_zero()
    }
}

/// A Gram matrix `g = x'* m x` maintained under elementary column moves on
/// the basis `x`.
#[derive(Clone, Debug)]
pub struct CongruenceTracker<T: Scalar> {
    pub g: Matrix<T>,
    pub x: Matrix<T>,
}

impl<T: Scalar> CongruenceTracker<T> {
    pub fn new(g: Matrix<T>) -> Self {
        let x = Matrix::identity(g.ctx(), g.rows());
        CongruenceTracker { g, x }
    }

    pub fn size(&self) -> usize {
        self.g.rows()
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.g.swap_rows(a, b);
        self.g.swap_cols(a, b);
        self.x.swap_cols(a, b);
    }

    /// `e_i <- c e_i`.
    pub fn scale(&mut self, i: usize, c: &T) {
        let n = self.size();
        let cc = c.conj();
        for k in 0..n {
            let v = self.g.get(k, i).mul(c);
            self.g.set(k, i, v);
        }
        for k in 0..n {
            let v = cc.mul(self.g.get(i, k));
            self.g.set(i, k, v);
        }
        for k in 0..self.x.rows() {
            let v = self.x.get(k, i).mul(c);
            self.x.set(k, i, v);
        }
    }

    /// `e_i <- e_i + c e_j` for `i != j`.
    pub fn add(&mut self, i: usize, j: usize, c: &T) {
        debug_assert_ne!(i, j);
        if c.is_zero() {
            return;
        }
        let n = self.size();
        let cc = c.conj();
        for k in 0..n {
            let v = self.g.get(k, i).add(&self.g.get(k, j).mul(c));
            self.g.set(k, i, v);
        }
        for k in 0..n {
            let v = self.g.get(i, k).add(&cc.mul(self.g.get(j, k)));
            self.g.set(i, k, v);
        }
        for k in 0..self.x.rows() {
            let v = self.x.get(k, i).add(&self.x.get(k, j).mul(c));
            self.x.set(k, i, v);
        }
    }

    /// Replaces columns `a, b` of the basis by `(a, b) * t` for a 2x2 `t`.
    pub fn transform_pair(&mut self, a: usize, b: usize, t: [[T; 2]; 2]) {
        let apply = |m: &mut Matrix<T>| {
            for k in 0..m.rows() {
                let (xa, xb) = (m.get(k, a).clone(), m.get(k, b).clone());
                m.set(k, a, xa.mul(&t[0][0]).add(&xb.mul(&t[1][0])));
                m.set(k, b, xa.mul(&t[0][1]).add(&xb.mul(&t[1][1])));
            }
        };
        apply(&mut self.x);
        apply(&mut self.g);
        let tc = [[t[0][0].conj(), t[0][1].conj()], [t[1][0].conj(), t[1][1].conj()]];
        for k in 0..self.g.cols() {
            let (ra, rb) = (self.g.get(a, k).clone(), self.g.get(b, k).clone());
            self.g.set(a, k, tc[0][0].mul(&ra).add(&tc[1][0].mul(&rb)));
            self.g.set(b, k, tc[0][1].mul(&ra).add(&tc[1][1].mul(&rb)));
        }
    }
}
