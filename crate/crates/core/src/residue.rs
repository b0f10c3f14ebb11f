//! The residue field `F_p` or `F_{p^2} = F_p[t]/(t^2 - nu)` with its induced
//! involution, and the classification of nondegenerate forms over it.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::arith::{self, add_mod, mul_mod, neg_mod, sub_mod};
use crate::error::{Error, Result};
use crate::matrix::{CongruenceTracker, Matrix, ResidueMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueField {
    p: u64,
    nu: u64,
    ext: bool,
}

impl ResidueField {
    /// `F_p` (`ext = false`) or `F_p[t]/(t^2 - nu)` with `t* = -t`.
    pub fn new(p: u64, nu: u64, ext: bool) -> Self {
        ResidueField { p, nu, ext }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn nu(&self) -> u64 {
        self.nu
    }
    pub fn is_extension(&self) -> bool {
        self.ext
    }

    /// `a + b t`; `b` must vanish in `F_p`.
    pub fn element(&self, a: u64, b: u64) -> ResidueElement {
        let b = b % self.p;
        debug_assert!(self.ext || b == 0, "F_p element with a t-component");
        ResidueElement { field: *self, a: a % self.p, b: if self.ext { b } else { 0 } }
    }

    pub fn from_i64(&self, n: i64) -> ResidueElement {
        self.element(arith::reduce_i64(n, self.p), 0)
    }

    pub fn zero(&self) -> ResidueElement {
        self.element(0, 0)
    }

    pub fn one(&self) -> ResidueElement {
        self.element(1, 0)
    }

    pub fn nu_element(&self) -> ResidueElement {
        self.element(self.nu, 0)
    }

    /// The skew generator `t` of `F_{p^2}`.
    pub fn t(&self) -> Option<ResidueElement> {
        self.ext.then(|| self.element(0, 1))
    }

    /// All `p` or `p^2` elements.
    pub fn elements(&self) -> impl Iterator<Item = ResidueElement> + '_ {
        let bs = if self.ext { self.p } else { 1 };
        (0..bs).flat_map(move |b| (0..self.p).map(move |a| self.element(a, b)))
    }

    #[inline]
    pub(crate) fn mul_raw(&self, x: [u64; 2], y: [u64; 2]) -> [u64; 2] {
        let p = self.p;
        let a = add_mod(mul_mod(x[0], y[0], p), mul_mod(self.nu, mul_mod(x[1], y[1], p), p), p);
        let b = add_mod(mul_mod(x[0], y[1], p), mul_mod(x[1], y[0], p), p);
        [a, b]
    }

    pub(crate) fn inv_raw(&self, x: [u64; 2]) -> [u64; 2] {
        let p = self.p;
        let norm = sub_mod(mul_mod(x[0], x[0], p), mul_mod(self.nu, mul_mod(x[1], x[1], p), p), p);
        let ninv = arith::inv_mod(norm, p);
        [mul_mod(x[0], ninv, p), mul_mod(neg_mod(x[1], p), ninv, p)]
    }

    pub(crate) fn pow_raw(&self, x: [u64; 2], mut e: u64) -> [u64; 2] {
        let mut acc = [1, 0];
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueElement {
    field: ResidueField,
    a: u64,
    b: u64,
}

impl fmt::Debug for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (a, 0) => write!(f, "{a}"),
            (0, b) => write!(f, "{b}t"),
            (a, b) => write!(f, "{a}+{b}t"),
        }
    }
}

impl ResidueElement {
    pub fn field(&self) -> ResidueField {
        self.field
    }
    /// Component in `F_p`.
    pub fn a(&self) -> u64 {
        self.a
    }
    /// Coefficient of `t` (zero over `F_p`).
    pub fn b(&self) -> u64 {
        self.b
    }
    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }
    pub fn in_base_field(&self) -> bool {
        self.b == 0
    }
    fn raw(&self) -> [u64; 2] {
        [self.a, self.b]
    }
    fn from_raw(&self, x: [u64; 2]) -> ResidueElement {
        ResidueElement { field: self.field, a: x[0], b: x[1] }
    }

    /// The induced involution: Frobenius on `F_{p^2}`, identity on `F_p`.
    pub fn conj(&self) -> ResidueElement {
        ResidueElement { b: neg_mod(self.b, self.field.p), ..*self }
    }

    /// `x x*`, which lies in `F_p`.
    pub fn norm(&self) -> ResidueElement {
        self * &self.conj()
    }

    pub fn inv(&self) -> Result<ResidueElement> {
        if self.is_zero() {
            return Err(Error::NotAUnit);
        }
        Ok(self.from_raw(self.field.inv_raw(self.raw())))
    }

    pub fn pow(&self, e: u64) -> ResidueElement {
        self.from_raw(self.field.pow_raw(self.raw(), e))
    }
}

impl Add for &ResidueElement {
    type Output = ResidueElement;
    fn add(self, rhs: &ResidueElement) -> ResidueElement {
        let p = self.field.p;
        self.from_raw([add_mod(self.a, rhs.a, p), add_mod(self.b, rhs.b, p)])
    }
}

impl Sub for &ResidueElement {
    type Output = ResidueElement;
    fn sub(self, rhs: &ResidueElement) -> ResidueElement {
        let p = self.field.p;
        self.from_raw([sub_mod(self.a, rhs.a, p), sub_mod(self.b, rhs.b, p)])
    }
}

impl Mul for &ResidueElement {
    type Output = ResidueElement;
    fn mul(self, rhs: &ResidueElement) -> ResidueElement {
        self.from_raw(self.field.mul_raw(self.raw(), rhs.raw()))
    }
}

impl Neg for &ResidueElement {
    type Output = ResidueElement;
    fn neg(self) -> ResidueElement {
        let p = self.field.p;
        self.from_raw([neg_mod(self.a, p), neg_mod(self.b, p)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SquareClass {
    Zero,
    Square,
    Nonsquare,
}

/// Euler-criterion class of an element of `F_p`.
pub fn square_class(r: &ResidueElement) -> Result<SquareClass> {
    if !r.in_base_field() {
        return Err(Error::TypeMismatch("square class is defined on F_p only"));
    }
    let p = r.field.p;
    Ok(match arith::euler(r.a, p) {
        0 => SquareClass::Zero,
        1 => SquareClass::Square,
        _ => SquareClass::Nonsquare,
    })
}

/// A square root; over `F_p` the least representative, over `F_{p^2}` the
/// lexicographically smaller of the two roots `(a, b)`.
pub fn sqrt_residue(r: &ResidueElement) -> Result<ResidueElement> {
    let f = r.field;
    let p = f.p;
    if r.in_base_field() {
        if let Some(s) = arith::sqrt_mod(r.a, p) {
            return Ok(f.element(s, 0));
        }
        if !f.ext {
            return Err(Error::NotASquare);
        }
        // a = nu s^2 gives (s t)^2 = a
        let s = arith::sqrt_mod(mul_mod(r.a, arith::inv_mod(f.nu, p), p), p).expect("nu * square");
        return Ok(f.element(0, s));
    }
    // (c + d t)^2 = c^2 + nu d^2 + 2cd t, and c^2 - nu d^2 = +-sqrt(N(r)).
    let n = r.norm().a;
    let root = arith::sqrt_mod(n, p).ok_or(Error::NotASquare)?;
    let half = arith::inv_mod(2, p);
    for m in [root, neg_mod(root, p)] {
        let c2 = mul_mod(add_mod(r.a, m, p), half, p);
        if let Some(c) = arith::sqrt_mod(c2, p) {
            if c == 0 {
                continue;
            }
            let d = mul_mod(r.b, arith::inv_mod(mul_mod(2, c, p), p), p);
            let (c2, d2) = (neg_mod(c, p), neg_mod(d, p));
            let s = if (c, d) <= (c2, d2) { f.element(c, d) } else { f.element(c2, d2) };
            debug_assert_eq!(&s * &s, *r);
            return Ok(s);
        }
    }
    Err(Error::NotASquare)
}

/// `a` in `F_{p^2}` with `a a* = c`, found by scanning for `x^2 = c + nu y^2`.
pub fn solve_norm(c: &ResidueElement) -> Result<ResidueElement> {
    let f = c.field;
    if !f.ext {
        return Err(Error::WrongInstance("the norm map needs the unramified residue field F_{p^2}"));
    }
    if !c.in_base_field() {
        return Err(Error::TypeMismatch("norms lie in F_p"));
    }
    if c.is_zero() {
        return Err(Error::NoSolution);
    }
    let p = f.p;
    for y in 0..p {
        let x2 = add_mod(c.a, mul_mod(f.nu, mul_mod(y, y, p), p), p);
        if let Some(x) = arith::sqrt_mod(x2, p) {
            return Ok(f.element(x, y));
        }
    }
    Err(Error::NoSolution)
}

/// Symmetry type of a residue (or level) form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormType {
    Symmetric,
    Alternating,
    Hermitian,
    SkewHermitian,
}

impl FormType {
    pub fn name(self) -> &'static str {
        match self {
            FormType::Symmetric => "symmetric",
            FormType::Alternating => "alternating",
            FormType::Hermitian => "hermitian",
            FormType::SkewHermitian => "skew_hermitian",
        }
    }

    /// `+1` for symmetric and hermitian, `-1` otherwise.
    pub fn sign(self) -> i64 {
        match self {
            FormType::Symmetric | FormType::Hermitian => 1,
            FormType::Alternating | FormType::SkewHermitian => -1,
        }
    }

    fn needs_extension(self) -> bool {
        matches!(self, FormType::Hermitian | FormType::SkewHermitian)
    }
}

impl fmt::Display for FormType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiscClass {
    Square,
    Nonsquare,
    NotApplicable,
}

impl DiscClass {
    pub fn name(self) -> &'static str {
        match self {
            DiscClass::Square => "square",
            DiscClass::Nonsquare => "nonsquare",
            DiscClass::NotApplicable => "not_applicable",
        }
    }
}

/// Complete congruence invariant of a nondegenerate residue form of a fixed type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueClassification {
    pub rank: usize,
    pub disc: DiscClass,
}

fn check_type(m: &ResidueMatrix, ty: FormType) -> Result<()> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch);
    }
    if ty.needs_extension() != m.ctx().is_extension() {
        return Err(Error::TypeMismatch(if ty.needs_extension() {
            "hermitian and skew hermitian types live over F_{p^2}"
        } else {
            "symmetric and alternating types live over F_p"
        }));
    }
    if m.hermitian_defect(ty.sign()).is_some() {
        return Err(Error::TypeMismatch("matrix does not have the declared symmetry"));
    }
    Ok(())
}

pub fn classify_residue_form(m: &ResidueMatrix, ty: FormType) -> Result<ResidueClassification> {
    check_type(m, ty)?;
    let det = m.determinant();
    if det.is_zero() {
        return Err(Error::Degenerate);
    }
    let disc = match ty {
        FormType::Symmetric => match square_class(&det)? {
            SquareClass::Square => DiscClass::Square,
            _ => DiscClass::Nonsquare,
        },
        _ => DiscClass::NotApplicable,
    };
    Ok(ResidueClassification { rank: m.rows(), disc })
}

/// The standard symplectic block `[[0,1],[-1,0]]`.
fn j_block<T: crate::matrix::Scalar>(ctx: T::Ctx) -> Matrix<T> {
    let mut j = Matrix::zeros(ctx, 2, 2);
    j.set(0, 1, T::one_in(&ctx));
    j.set(1, 0, T::one_in(&ctx).neg());
    j
}

/// Direct sum of `k` copies of `[[0,1],[-1,0]]`.
pub fn symplectic_standard<T: crate::matrix::Scalar>(ctx: T::Ctx, k: usize) -> Matrix<T> {
    let j = j_block::<T>(ctx);
    let blocks: Vec<&Matrix<T>> = (0..k).map(|_| &j).collect();
    Matrix::block_diag(ctx, &blocks)
}

/// Representative of a residue class: `diag(1,...,1,delta)`, `J + ... + J`,
/// `I`, or `t I`.
pub fn canonical_residue_form(
    field: ResidueField,
    ty: FormType,
    class: ResidueClassification,
) -> Result<ResidueMatrix> {
    let n = class.rank;
    match ty {
        FormType::Symmetric => {
            let mut d = alloc::vec![field.one(); n];
            if class.disc == DiscClass::Nonsquare {
                if n == 0 {
                    return Err(Error::TypeMismatch("empty form has square discriminant"));
                }
                d[n - 1] = field.nu_element();
            }
            Ok(Matrix::diagonal(field, &d))
        }
        FormType::Alternating => {
            if n % 2 != 0 {
                return Err(Error::TypeMismatch("alternating forms have even rank"));
            }
            Ok(symplectic_standard(field, n / 2))
        }
        FormType::Hermitian => Ok(Matrix::identity(field, n)),
        FormType::SkewHermitian => {
            let t = field.t().ok_or(Error::TypeMismatch("skew hermitian needs F_{p^2}"))?;
            Ok(Matrix::diagonal(field, &alloc::vec![t; n]))
        }
    }
}

/// Diagonalises a nondegenerate symmetric or hermitian residue form.
fn diagonalise(t: &mut CongruenceTracker<crate::residue::ResidueElement>) -> Result<()> {
    let n = t.size();
    for k in 0..n {
        if t.g.get(k, k).is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !t.g.get(i, i).is_zero()) {
                t.swap(k, i);
            } else {
                let j = (k + 1..n).find(|&j| !t.g.get(k, j).is_zero()).ok_or(Error::Degenerate)?;
                // h(e_k + c e_j, same) = c h_kj + (c h_kj)* = 2 for c = h_kj^{-1}
                let c = t.g.get(k, j).inv()?;
                t.add(k, j, &c);
            }
        }
        let inv = t.g.get(k, k).inv()?;
        for l in k + 1..n {
            if t.g.get(k, l).is_zero() {
                continue;
            }
            let c = -&(&inv * t.g.get(k, l));
            t.add(l, k, &c);
        }
    }
    Ok(())
}

/// Symplectic Gram-Schmidt for a nondegenerate alternating form over `F_p`.
fn symplectic_gram_schmidt(t: &mut CongruenceTracker<ResidueElement>) -> Result<()> {
    let n = t.size();
    let mut k = 0;
    while k < n {
        let j = (k + 1..n).find(|&j| !t.g.get(k, j).is_zero()).ok_or(Error::Degenerate)?;
        t.swap(k + 1, j);
        let c = t.g.get(k, k + 1).inv()?;
        t.scale(k + 1, &c);
        for l in k + 2..n {
            // w <- w + h(v,w) u - h(u,w) v
            let a = *t.g.get(k + 1, l);
            let b = -t.g.get(k, l);
            t.add(l, k, &a);
            t.add(l, k + 1, &b);
        }
        k += 2;
    }
    Ok(())
}

/// `(class, X)` with `X'* m X` equal to the canonical representative.
pub fn residue_canonical_witness(
    m: &ResidueMatrix,
    ty: FormType,
) -> Result<(ResidueClassification, ResidueMatrix)> {
    let class = classify_residue_form(m, ty)?;
    let field = m.ctx();
    let n = m.rows();
    match ty {
        FormType::Alternating => {
            let mut t = CongruenceTracker::new(m.clone());
            symplectic_gram_schmidt(&mut t)?;
            Ok((class, t.x))
        }
        FormType::Hermitian | FormType::SkewHermitian => {
            let start = if ty == FormType::SkewHermitian {
                let tinv = field.t().expect("extension").inv()?;
                m.scale(&tinv)
            } else {
                m.clone()
            };
            let mut t = CongruenceTracker::new(start);
            diagonalise(&mut t)?;
            for k in 0..n {
                let a = solve_norm(t.g.get(k, k))?;
                t.scale(k, &a.inv()?);
            }
            Ok((class, t.x))
        }
        FormType::Symmetric => {
            let mut t = CongruenceTracker::new(m.clone());
            diagonalise(&mut t)?;
            let p = field.p;
            let nu_inv = field.nu_element().inv()?;
            let mut nus = Vec::new();
            for k in 0..n {
                let d = *t.g.get(k, k);
                let s = match sqrt_residue(&d) {
                    Ok(s) => s,
                    Err(_) => {
                        nus.push(k);
                        sqrt_residue(&(&d * &nu_inv))?
                    }
                };
                t.scale(k, &s.inv()?);
            }
            // nu (a^2 + b^2) = 1 turns diag(nu, nu) into the identity
            if nus.len() >= 2 {
                let target = nu_inv.a();
                let (a, b) = (0..p)
                    .find_map(|a| {
                        let rest = sub_mod(target, mul_mod(a, a, p), p);
                        arith::sqrt_mod(rest, p).map(|b| (a, b))
                    })
                    .expect("every element of F_p is a sum of two squares");
                let (a, b) = (field.element(a, 0), field.element(b, 0));
                for pair in nus.chunks_exact(2) {
                    t.transform_pair(pair[0], pair[1], [[a, -&b], [b, a]]);
                }
            }
            if nus.len() % 2 == 1 {
                let last = *nus.last().expect("odd count");
                t.swap(last, n - 1);
            }
            Ok((class, t.x))
        }
    }
}

/// An invertible `X` with `X'* m X = n` exactly.
pub fn residue_congruence_witness(m: &ResidueMatrix, n: &ResidueMatrix, ty: FormType) -> Result<ResidueMatrix> {
    if m.ctx() != n.ctx() || m.rows() != n.rows() {
        return Err(Error::ShapeMismatch);
    }
    let (cm, xm) = residue_canonical_witness(m, ty)?;
    let (cn, xn) = residue_canonical_witness(n, ty)?;
    if cm != cn {
        return Err(Error::NotCongruent);
    }
    Ok(xm.mul(&xn.inverse()?))
}
