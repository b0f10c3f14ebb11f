//! The six concrete complete discrete valuation rings with involution, all
//! truncated at a working precision `N` counted in powers of the uniformiser.
//!
//! | kind                | ring                              | involution    | uniformiser |
//! |---------------------|-----------------------------------|---------------|-------------|
//! | `SeriesTrivial`     | `F_p[[y]]`                        | identity      | `y`         |
//! | `SeriesRamified`    | `F_p[[y]]`                        | `y -> -y`     | `y`         |
//! | `SeriesUnramified`  | `F_{p^2}[[x]]`, `F_{p^2}=F_p[t]/(t^2-nu)` | `t -> -t` | `y = t x` |
//! | `PadicTrivial`      | `Z_p`                             | identity      | `p`         |
//! | `PadicRamified`     | `Z_p[y]/(y^2 - p)`                | `y -> -y`     | `y`         |
//! | `PadicUnramified`   | `Z_p[t]/(t^2 - nu)`               | `t -> -t`     | `y = t p`   |
//!
//! Every element also carries an exactness flag. An element is *exact* when
//! the stored data is the true value rather than a truncation: a polynomial of
//! degree below `N`, or an integer (pair) whose balanced representative is the
//! value. Exact zeros are what distinguish the radical of a form from entries
//! that merely vanish at the working precision.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::arith::{self, add_mod, mul_mod, neg_mod};
use crate::error::{Error, Result};
use crate::residue::{ResidueElement, ResidueField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingKind {
    SeriesTrivial,
    SeriesRamified,
    SeriesUnramified,
    PadicTrivial,
    PadicRamified,
    PadicUnramified,
}

impl RingKind {
    pub const ALL: [RingKind; 6] = [
        RingKind::SeriesTrivial,
        RingKind::SeriesRamified,
        RingKind::SeriesUnramified,
        RingKind::PadicTrivial,
        RingKind::PadicRamified,
        RingKind::PadicUnramified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RingKind::SeriesTrivial => "series-trivial",
            RingKind::SeriesRamified => "series-ramified",
            RingKind::SeriesUnramified => "series-unramified",
            RingKind::PadicTrivial => "padic-trivial",
            RingKind::PadicRamified => "padic-ramified",
            RingKind::PadicUnramified => "padic-unramified",
        }
    }

    pub fn from_name(name: &str) -> Option<RingKind> {
        RingKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn involution(self) -> InvolutionClass {
        match self {
            RingKind::SeriesTrivial | RingKind::PadicTrivial => InvolutionClass::Trivial,
            RingKind::SeriesRamified | RingKind::PadicRamified => InvolutionClass::Ramified,
            RingKind::SeriesUnramified | RingKind::PadicUnramified => InvolutionClass::Unramified,
        }
    }

    pub fn is_padic(self) -> bool {
        matches!(
            self,
            RingKind::PadicTrivial | RingKind::PadicRamified | RingKind::PadicUnramified
        )
    }
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the involution acts on the residue field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InvolutionClass {
    /// `*` is the identity.
    Trivial,
    /// Nontrivial, inducing the identity on the residue field.
    Ramified,
    /// Inducing the Frobenius of `F_{p^2}/F_p` on the residue field.
    Unramified,
}

impl InvolutionClass {
    /// Ramified in the broad sense: the induced involution on the residue
    /// field is trivial (this includes the trivial involution).
    pub fn fixes_residue_field(self) -> bool {
        !matches!(self, InvolutionClass::Unramified)
    }
}

/// Identifies the ring in play. Cheap to copy; two elements compose only when
/// their descriptors are equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingDescriptor {
    kind: RingKind,
    p: u64,
    nu: u64,
    precision: u32,
    /// `p^K` for the p-adic kinds, unused otherwise.
    modulus: u128,
    quotient: bool,
}

/// Valuation of an element, in powers of the uniformiser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    /// Zero at the working precision, not known to be zero.
    AtLeast(u32),
    /// Exactly zero.
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lower bound usable for divisibility checks.
    pub fn lower_bound(self) -> u32 {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v,
            Valuation::Infinite => u32::MAX,
        }
    }
}

impl RingDescriptor {
    /// Builds a descriptor. `precision` is the number of powers of the
    /// uniformiser kept; for `PadicRamified` it must be even.
    pub fn new(kind: RingKind, p: u64, precision: u32) -> Result<Self> {
        if p == 2 || p > arith::MAX_PRIME || !arith::is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        if precision < 2 {
            return Err(Error::InvalidPrecision {
                precision,
                reason: "precision must be at least 2",
            });
        }
        let modulus = match kind {
            RingKind::PadicTrivial | RingKind::PadicUnramified => precision,
            RingKind::PadicRamified => {
                if precision % 2 != 0 {
                    return Err(Error::InvalidPrecision {
                        precision,
                        reason: "padic-ramified precision counts powers of sqrt(p) and must be even",
                    });
                }
                precision / 2
            }
            _ => 0,
        };
        let modulus = if kind.is_padic() {
            match arith::pow_u128(p as u128, modulus) {
                Some(m) if 128 - m.leading_zeros() <= arith::MAX_MODULUS_BITS => m,
                _ => {
                    return Err(Error::InvalidPrecision {
                        precision,
                        reason: "p^K exceeds the supported 120-bit modulus",
                    })
                }
            }
        } else {
            0
        };
        Ok(RingDescriptor {
            kind,
            p,
            nu: arith::least_non_residue(p),
            precision,
            modulus,
            quotient: false,
        })
    }

    /// The finite quotient ring `A / y^N A`, in which vanishing at precision
    /// is the same as vanishing.
    pub fn quotient(kind: RingKind, p: u64, precision: u32) -> Result<Self> {
        Ok(RingDescriptor { quotient: true, ..Self::new(kind, p, precision)? })
    }

    /// Same ring at a different precision.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        let mut d = Self::new(self.kind, self.p, precision)?;
        d.quotient = self.quotient;
        Ok(d)
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    /// The least quadratic non-residue modulo `p`.
    pub fn nu(&self) -> u64 {
        self.nu
    }
    pub fn precision(&self) -> u32 {
        self.precision
    }
    pub fn is_quotient(&self) -> bool {
        self.quotient
    }
    pub fn involution(&self) -> InvolutionClass {
        self.kind.involution()
    }
    /// `p^K` for the p-adic kinds.
    pub fn modulus(&self) -> Option<u128> {
        self.kind.is_padic().then_some(self.modulus)
    }

    pub fn residue_field(&self) -> ResidueField {
        ResidueField::new(self.p, self.nu, self.involution() == InvolutionClass::Unramified)
    }

    fn n(&self) -> usize {
        self.precision as usize
    }

    fn half_modulus(&self) -> i128 {
        ((self.modulus - 1) / 2) as i128
    }

    fn with_payload(&self, payload: Payload, exact: bool) -> RingElement {
        RingElement { desc: *self, payload, exact }
    }

    /// The exact zero.
    pub fn zero(&self) -> RingElement {
        let payload = match self.kind {
            RingKind::SeriesTrivial | RingKind::SeriesRamified => Payload::Series(vec![0; self.n()]),
            RingKind::SeriesUnramified => Payload::SeriesExt(vec![[0, 0]; self.n()]),
            RingKind::PadicTrivial => Payload::Padic(0),
            RingKind::PadicRamified | RingKind::PadicUnramified => Payload::PadicPair(0, 0),
        };
        self.with_payload(payload, true)
    }

    pub fn one(&self) -> RingElement {
        self.from_i64(1)
    }

    /// The integer `n` as an exact constant (when it fits the precision).
    pub fn from_i64(&self, n: i64) -> RingElement {
        match self.kind {
            RingKind::SeriesTrivial | RingKind::SeriesRamified => {
                self.series(&[n]).expect("kind checked")
            }
            RingKind::SeriesUnramified => self.series_ext(&[(n, 0)]).expect("kind checked"),
            RingKind::PadicTrivial => self.padic(n as i128).expect("kind checked"),
            RingKind::PadicRamified | RingKind::PadicUnramified => {
                self.padic_pair(n as i128, 0).expect("kind checked")
            }
        }
    }

    /// `sum c_k y^k` for the `F_p[[y]]` kinds. Coefficients beyond the
    /// precision are dropped and make the element inexact.
    pub fn series(&self, coeffs: &[i64]) -> Result<RingElement> {
        if !matches!(self.kind, RingKind::SeriesTrivial | RingKind::SeriesRamified) {
            return Err(Error::WrongInstance("coefficient lists over F_p need a series-trivial or series-ramified ring"));
        }
        let n = self.n();
        let mut c = vec![0u64; n];
        let mut exact = true;
        for (k, &a) in coeffs.iter().enumerate() {
            let a = arith::reduce_i64(a, self.p);
            if k < n {
                c[k] = a;
            } else if a != 0 {
                exact = false;
            }
        }
        Ok(self.with_payload(Payload::Series(c), exact))
    }

    /// `sum (a_k + b_k t) x^k` for `SeriesUnramified`.
    pub fn series_ext(&self, coeffs: &[(i64, i64)]) -> Result<RingElement> {
        if self.kind != RingKind::SeriesUnramified {
            return Err(Error::WrongInstance("pair coefficient lists need a series-unramified ring"));
        }
        let n = self.n();
        let mut c = vec![[0u64; 2]; n];
        let mut exact = true;
        for (k, &(a, b)) in coeffs.iter().enumerate() {
            let v = [arith::reduce_i64(a, self.p), arith::reduce_i64(b, self.p)];
            if k < n {
                c[k] = v;
            } else if v != [0, 0] {
                exact = false;
            }
        }
        Ok(self.with_payload(Payload::SeriesExt(c), exact))
    }

    /// An integer of `Z_p` (padic-trivial).
    pub fn padic(&self, n: i128) -> Result<RingElement> {
        if self.kind != RingKind::PadicTrivial {
            return Err(Error::WrongInstance("single integers need a padic-trivial ring"));
        }
        Ok(self.with_payload(
            Payload::Padic(arith::from_signed(n, self.modulus)),
            n.abs() <= self.half_modulus(),
        ))
    }

    /// `a + b w` with `w = sqrt(p)` (padic-ramified) or `w = t` (padic-unramified).
    pub fn padic_pair(&self, a: i128, b: i128) -> Result<RingElement> {
        if !matches!(self.kind, RingKind::PadicRamified | RingKind::PadicUnramified) {
            return Err(Error::WrongInstance("integer pairs need a padic-ramified or padic-unramified ring"));
        }
        let h = self.half_modulus();
        Ok(self.with_payload(
            Payload::PadicPair(
                arith::from_signed(a, self.modulus),
                arith::from_signed(b, self.modulus),
            ),
            a.abs() <= h && b.abs() <= h,
        ))
    }

    /// The uniformiser `y`, chosen with `y* = -y` whenever `*` is nontrivial.
    pub fn uniformiser(&self) -> RingElement {
        match self.kind {
            RingKind::SeriesTrivial | RingKind::SeriesRamified => self.series(&[0, 1]).expect("kind"),
            RingKind::SeriesUnramified => self.series_ext(&[(0, 0), (0, 1)]).expect("kind"),
            RingKind::PadicTrivial => self.padic(self.p as i128).expect("kind"),
            RingKind::PadicRamified => self.padic_pair(0, 1).expect("kind"),
            RingKind::PadicUnramified => self.padic_pair(0, self.p as i128).expect("kind"),
        }
    }

    /// `y^k`; for `k >= N` this vanishes at precision but is not exactly zero.
    pub fn uniformiser_pow(&self, k: u32) -> RingElement {
        let y = self.uniformiser();
        let mut acc = self.one();
        let mut base = y;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// The fixed skew unit `b = t` (`b* = -b`), available only for the
    /// unramified kinds.
    pub fn skew_unit(&self) -> Option<RingElement> {
        match self.kind {
            RingKind::SeriesUnramified => Some(self.series_ext(&[(0, 1)]).expect("kind")),
            RingKind::PadicUnramified => Some(self.padic_pair(0, 1).expect("kind")),
            _ => None,
        }
    }

    /// The residue non-square `nu` as a constant.
    pub fn nu_element(&self) -> RingElement {
        self.from_i64(self.nu as i64)
    }

    /// Constant-coefficient section of the residue map.
    pub fn lift(&self, r: &ResidueElement) -> RingElement {
        let (a, b) = (r.a() as i64, r.b() as i64);
        match self.kind {
            RingKind::SeriesUnramified => self.series_ext(&[(a, b)]).expect("kind"),
            RingKind::PadicUnramified => self.padic_pair(a as i128, b as i128).expect("kind"),
            _ => {
                debug_assert_eq!(b, 0, "residue field is F_p");
                self.from_i64(a)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Payload {
    Series(Vec<u64>),
    SeriesExt(Vec<[u64; 2]>),
    Padic(u128),
    PadicPair(u128, u128),
}

/// Read-only view of an element's stored data.
#[derive(Clone, Copy, Debug)]
pub enum ElementView<'a> {
    /// Coefficients of `1, y, y^2, ...` in `F_p`.
    Series(&'a [u64]),
    /// Coefficients `(a, b)` meaning `a + b t` of `1, x, x^2, ...`.
    SeriesExt(&'a [[u64; 2]]),
    /// Residue modulo `p^K`.
    Padic(u128),
    /// Residues `(a, b)` modulo `p^K` of `a + b w`.
    PadicPair(u128, u128),
}

/// An element of a truncated ring, tagged with its descriptor.
#[derive(Clone, Debug)]
pub struct RingElement {
    desc: RingDescriptor,
    payload: Payload,
    exact: bool,
}

impl PartialEq for RingElement {
    /// Equality at the working precision; exactness is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc && self.payload == other.payload
    }
}

impl Eq for RingElement {}

/// Binary operations, for the checked entry point [`arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Checked arithmetic: fails on mismatched descriptors instead of panicking.
pub fn arith(op: ArithOp, x: &RingElement, y: &RingElement) -> Result<RingElement> {
    if x.desc != y.desc {
        return Err(Error::DescriptorMismatch);
    }
    Ok(match op {
        ArithOp::Add => x.add_impl(y),
        ArithOp::Sub => x.add_impl(&y.neg_impl()),
        ArithOp::Mul => x.mul_impl(y),
    })
}

impl RingElement {
    pub fn descriptor(&self) -> &RingDescriptor {
        &self.desc
    }

    pub fn view(&self) -> ElementView<'_> {
        match &self.payload {
            Payload::Series(c) => ElementView::Series(c),
            Payload::SeriesExt(c) => ElementView::SeriesExt(c),
            Payload::Padic(a) => ElementView::Padic(*a),
            Payload::PadicPair(a, b) => ElementView::PadicPair(*a, *b),
        }
    }

    /// Whether the stored data is the true value (not a truncation).
    pub fn is_exact(&self) -> bool {
        self.exact || self.desc.quotient
    }

    /// Zero at the working precision.
    pub fn is_zero(&self) -> bool {
        match &self.payload {
            Payload::Series(c) => c.iter().all(|&x| x == 0),
            Payload::SeriesExt(c) => c.iter().all(|x| *x == [0, 0]),
            Payload::Padic(a) => *a == 0,
            Payload::PadicPair(a, b) => *a == 0 && *b == 0,
        }
    }

    /// Provably zero (in the quotient ring every zero is).
    pub fn is_exact_zero(&self) -> bool {
        self.is_zero() && self.is_exact()
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Valuation::Finite(0)
    }

    /// Same value, marked inexact.
    pub fn truncated(mut self) -> Self {
        self.exact = false;
        self
    }

    pub fn valuation(&self) -> Valuation {
        let n = self.desc.precision;
        let v = match &self.payload {
            Payload::Series(c) => c.iter().position(|&x| x != 0).map(|k| k as u32),
            Payload::SeriesExt(c) => c.iter().position(|x| *x != [0, 0]).map(|k| k as u32),
            Payload::Padic(a) => (*a != 0).then(|| arith::val_u128(*a, self.desc.p as u128)),
            Payload::PadicPair(a, b) => {
                let p = self.desc.p as u128;
                let va = (*a != 0).then(|| arith::val_u128(*a, p));
                let vb = (*b != 0).then(|| arith::val_u128(*b, p));
                match self.desc.kind {
                    RingKind::PadicRamified => {
                        let va = va.map(|v| 2 * v);
                        let vb = vb.map(|v| 2 * v + 1);
                        match (va, vb) {
                            (Some(x), Some(y)) => Some(x.min(y)),
                            (x, y) => x.or(y),
                        }
                    }
                    _ => match (va, vb) {
                        (Some(x), Some(y)) => Some(x.min(y)),
                        (x, y) => x.or(y),
                    },
                }
            }
        };
        match v {
            Some(k) if k < n => Valuation::Finite(k),
            Some(_) => Valuation::AtLeast(n),
            None if self.is_exact() => Valuation::Infinite,
            None => Valuation::AtLeast(n),
        }
    }

    /// Applies the involution `*`.
    pub fn involute(&self) -> RingElement {
        let p = self.desc.p;
        let m = self.desc.modulus;
        let payload = match (&self.payload, self.desc.kind) {
            (Payload::Series(c), RingKind::SeriesRamified) => Payload::Series(
                c.iter()
                    .enumerate()
                    .map(|(k, &x)| if k % 2 == 1 { neg_mod(x, p) } else { x })
                    .collect(),
            ),
            (Payload::SeriesExt(c), _) => {
                Payload::SeriesExt(c.iter().map(|&[a, b]| [a, neg_mod(b, p)]).collect())
            }
            (Payload::PadicPair(a, b), _) => Payload::PadicPair(*a, (m - *b) % m),
            (other, _) => other.clone(),
        };
        RingElement { desc: self.desc, payload, exact: self.exact }
    }

    /// `1/2 (a + a*)`, the component fixed by the involution.
    pub fn symmetric_part(&self) -> RingElement {
        let half = self.desc.from_i64(2).invert().expect("2 is a unit");
        &(self + &self.involute()) * &half
    }

    /// `1/2 (a - a*)`, the component negated by the involution.
    pub fn skew_part(&self) -> RingElement {
        let half = self.desc.from_i64(2).invert().expect("2 is a unit");
        &(self - &self.involute()) * &half
    }

    fn add_impl(&self, rhs: &RingElement) -> RingElement {
        assert_eq!(self.desc, rhs.desc, "ring descriptor mismatch");
        let d = &self.desc;
        let p = d.p;
        let both = self.exact && rhs.exact;
        let (payload, exact) = match (&self.payload, &rhs.payload) {
            (Payload::Series(a), Payload::Series(b)) => (
                Payload::Series(a.iter().zip(b).map(|(&x, &y)| add_mod(x, y, p)).collect()),
                both,
            ),
            (Payload::SeriesExt(a), Payload::SeriesExt(b)) => (
                Payload::SeriesExt(
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| [add_mod(x[0], y[0], p), add_mod(x[1], y[1], p)])
                        .collect(),
                ),
                both,
            ),
            (Payload::Padic(a), Payload::Padic(b)) => {
                let m = d.modulus;
                let exact = both
                    && (arith::balanced(*a, m) + arith::balanced(*b, m)).abs() <= d.half_modulus();
                (Payload::Padic((a + b) % m), exact)
            }
            (Payload::PadicPair(a0, a1), Payload::PadicPair(b0, b1)) => {
                let m = d.modulus;
                let h = d.half_modulus();
                let exact = both
                    && (arith::balanced(*a0, m) + arith::balanced(*b0, m)).abs() <= h
                    && (arith::balanced(*a1, m) + arith::balanced(*b1, m)).abs() <= h;
                (Payload::PadicPair((a0 + b0) % m, (a1 + b1) % m), exact)
            }
            _ => unreachable!("payload matches descriptor"),
        };
        RingElement { desc: *d, payload, exact }
    }

    fn neg_impl(&self) -> RingElement {
        let p = self.desc.p;
        let m = self.desc.modulus;
        let payload = match &self.payload {
            Payload::Series(c) => Payload::Series(c.iter().map(|&x| neg_mod(x, p)).collect()),
            Payload::SeriesExt(c) => {
                Payload::SeriesExt(c.iter().map(|&[a, b]| [neg_mod(a, p), neg_mod(b, p)]).collect())
            }
            Payload::Padic(a) => Payload::Padic((m - a) % m),
            Payload::PadicPair(a, b) => Payload::PadicPair((m - a) % m, (m - b) % m),
        };
        RingElement { desc: self.desc, payload, exact: self.exact }
    }

    fn mul_impl(&self, rhs: &RingElement) -> RingElement {
        assert_eq!(self.desc, rhs.desc, "ring descriptor mismatch");
        if self.is_exact_zero() || rhs.is_exact_zero() {
            return self.desc.zero();
        }
        let d = &self.desc;
        let p = d.p;
        let n = d.n();
        let both = self.exact && rhs.exact;
        let (payload, exact) = match (&self.payload, &rhs.payload) {
            (Payload::Series(a), Payload::Series(b)) => {
                let da = a.iter().rposition(|&x| x != 0).unwrap_or(0);
                let db = b.iter().rposition(|&x| x != 0).unwrap_or(0);
                let mut c = vec![0u64; n];
                for (i, &x) in a.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in b[..n - i].iter().enumerate() {
                        c[i + j] = add_mod(c[i + j], mul_mod(x, y, p), p);
                    }
                }
                (Payload::Series(c), both && da + db < n)
            }
            (Payload::SeriesExt(a), Payload::SeriesExt(b)) => {
                let f = d.residue_field();
                let da = a.iter().rposition(|x| *x != [0, 0]).unwrap_or(0);
                let db = b.iter().rposition(|x| *x != [0, 0]).unwrap_or(0);
                let mut c = vec![[0u64; 2]; n];
                for (i, x) in a.iter().enumerate() {
                    if *x == [0, 0] {
                        continue;
                    }
                    for (j, y) in b[..n - i].iter().enumerate() {
                        let prod = f.mul_raw(*x, *y);
                        let slot = &mut c[i + j];
                        *slot = [add_mod(slot[0], prod[0], p), add_mod(slot[1], prod[1], p)];
                    }
                }
                (Payload::SeriesExt(c), both && da + db < n)
            }
            (Payload::Padic(a), Payload::Padic(b)) => {
                let m = d.modulus;
                let exact = both
                    && arith::balanced(*a, m)
                        .checked_mul(arith::balanced(*b, m))
                        .is_some_and(|x| x.abs() <= d.half_modulus());
                (Payload::Padic(arith::mul_mod_wide(*a, *b, m)), exact)
            }
            (Payload::PadicPair(a0, a1), Payload::PadicPair(b0, b1)) => {
                let m = d.modulus;
                let k = self.pair_square();
                let mm = |x: u128, y: u128| arith::mul_mod_wide(x, y, m);
                let c0 = (mm(*a0, *b0) + mm(k, mm(*a1, *b1))) % m;
                let c1 = (mm(*a0, *b1) + mm(*a1, *b0)) % m;
                let exact = both && self.pair_product_fits(rhs);
                (Payload::PadicPair(c0, c1), exact)
            }
            _ => unreachable!("payload matches descriptor"),
        };
        RingElement { desc: *d, payload, exact }
    }

    /// `w^2` for the pair kinds: `p` (ramified) or `nu` (unramified).
    fn pair_square(&self) -> u128 {
        match self.desc.kind {
            RingKind::PadicRamified => self.desc.p as u128,
            _ => self.desc.nu as u128,
        }
    }

    fn pair_product_fits(&self, rhs: &RingElement) -> bool {
        let (Payload::PadicPair(a0, a1), Payload::PadicPair(b0, b1)) = (&self.payload, &rhs.payload)
        else {
            return false;
        };
        let m = self.desc.modulus;
        let [a0, a1, b0, b1] = [*a0, *a1, *b0, *b1].map(|x| arith::balanced(x, m));
        let k = self.pair_square() as i128;
        let h = self.desc.half_modulus();
        let c0 = a0
            .checked_mul(b0)
            .zip(a1.checked_mul(b1).and_then(|x| x.checked_mul(k)))
            .and_then(|(x, y)| x.checked_add(y));
        let c1 = a0
            .checked_mul(b1)
            .zip(a1.checked_mul(b0))
            .and_then(|(x, y)| x.checked_add(y));
        matches!((c0, c1), (Some(x), Some(y)) if x.abs() <= h && y.abs() <= h)
    }

    /// Marks `candidate` exact when `divisor * candidate == dividend` holds
    /// without truncation; quotients in a domain are unique.
    fn certify_quotient(mut candidate: RingElement, divisor: &RingElement, dividend: &RingElement) -> RingElement {
        if !(divisor.exact && dividend.exact) || candidate.exact {
            return candidate;
        }
        candidate.exact = true;
        let back = divisor.mul_impl(&candidate);
        if back.exact && back.payload == dividend.payload {
            candidate
        } else {
            candidate.exact = false;
            candidate
        }
    }

    /// Multiplicative inverse of a unit.
    pub fn invert(&self) -> Result<RingElement> {
        if !self.is_unit() {
            return Err(Error::NotAUnit);
        }
        let d = &self.desc;
        let p = d.p;
        let n = d.n();
        let inv = match &self.payload {
            Payload::Series(a) => {
                let c0 = arith::inv_mod(a[0], p);
                let mut c = vec![0u64; n];
                c[0] = c0;
                for k in 1..n {
                    let mut s = 0u64;
                    for j in 1..=k {
                        s = add_mod(s, mul_mod(a[j], c[k - j], p), p);
                    }
                    c[k] = mul_mod(neg_mod(s, p), c0, p);
                }
                let constant = a[1..].iter().all(|&x| x == 0);
                return Ok(RingElement { desc: *d, payload: Payload::Series(c), exact: self.exact && constant });
            }
            Payload::SeriesExt(a) => {
                let f = d.residue_field();
                let c0 = f.inv_raw(a[0]);
                let mut c = vec![[0u64; 2]; n];
                c[0] = c0;
                for k in 1..n {
                    let mut s = [0u64; 2];
                    for j in 1..=k {
                        let t = f.mul_raw(a[j], c[k - j]);
                        s = [add_mod(s[0], t[0], p), add_mod(s[1], t[1], p)];
                    }
                    c[k] = f.mul_raw([neg_mod(s[0], p), neg_mod(s[1], p)], c0);
                }
                let constant = a[1..].iter().all(|x| *x == [0, 0]);
                return Ok(RingElement { desc: *d, payload: Payload::SeriesExt(c), exact: self.exact && constant });
            }
            Payload::Padic(a) => Payload::Padic(inv_padic(*a, p, d.modulus)),
            Payload::PadicPair(a, b) => {
                // (a + b w)^{-1} = (a - b w) / (a^2 - k b^2)
                let m = d.modulus;
                let k = self.pair_square();
                let mm = |x: u128, y: u128| arith::mul_mod_wide(x, y, m);
                let norm = (mm(*a, *a) + m - mm(k, mm(*b, *b))) % m;
                let ninv = inv_padic(norm, p, m);
                Payload::PadicPair(mm(*a, ninv), mm((m - b) % m, ninv))
            }
        };
        let candidate = RingElement { desc: *d, payload: inv, exact: false };
        Ok(Self::certify_quotient(candidate, self, &d.one()))
    }

    /// Whether `self / y^k` is a unit with an exact inverse; such pivots keep
    /// elimination exact.
    pub fn has_exact_unit_part(&self, k: u32) -> bool {
        self.divide_by_uniformiser(k).and_then(|u| u.invert()).is_ok_and(|u| u.exact)
    }

    /// `z` with `y^k z = self` (at the working precision).
    pub fn divide_by_uniformiser(&self, k: u32) -> Result<RingElement> {
        if self.valuation().lower_bound() < k {
            return Err(Error::InsufficientValuation { requested: k });
        }
        if k == 0 {
            return Ok(self.clone());
        }
        if self.is_exact_zero() {
            return Ok(self.desc.zero());
        }
        let d = &self.desc;
        let n = d.n();
        let ku = k as usize;
        let m = d.modulus;
        let p = d.p as u128;
        let shift = |c: &[u64]| -> Vec<u64> {
            (0..n).map(|i| if i + ku < n { c[i + ku] } else { 0 }).collect()
        };
        Ok(match &self.payload {
            Payload::Series(c) => RingElement { desc: *d, payload: Payload::Series(shift(c)), exact: self.exact },
            Payload::SeriesExt(c) => {
                // y^k = t^k x^k
                let f = d.residue_field();
                let t_inv_k = f.pow_raw(f.inv_raw([0, 1]), k as u64);
                let shifted: Vec<[u64; 2]> = (0..n)
                    .map(|i| if i + ku < n { f.mul_raw(c[i + ku], t_inv_k) } else { [0, 0] })
                    .collect();
                RingElement { desc: *d, payload: Payload::SeriesExt(shifted), exact: self.exact }
            }
            Payload::Padic(a) => {
                let pk = p.pow(k.min(d.precision));
                let q = arith::balanced(*a, m) / pk as i128;
                RingElement { desc: *d, payload: Payload::Padic(arith::from_signed(q, m)), exact: self.exact }
            }
            Payload::PadicPair(a, b) if d.kind == RingKind::PadicRamified => {
                // (a + b y) / y = b + (a/p) y
                let (mut a, mut b) = (arith::balanced(*a, m), arith::balanced(*b, m));
                for _ in 0..k {
                    let na = b;
                    let nb = a / p as i128;
                    a = na;
                    b = nb;
                }
                RingElement {
                    desc: *d,
                    payload: Payload::PadicPair(arith::from_signed(a, m), arith::from_signed(b, m)),
                    exact: self.exact,
                }
            }
            Payload::PadicPair(a, b) => {
                // y^k = t^k p^k
                let pk = p.pow(k.min(d.precision)) as i128;
                let a = arith::balanced(*a, m) / pk;
                let b = arith::balanced(*b, m) / pk;
                let base = RingElement {
                    desc: *d,
                    payload: Payload::PadicPair(arith::from_signed(a, m), arith::from_signed(b, m)),
                    exact: false,
                };
                let t_inv = d.skew_unit().expect("unramified").invert().expect("unit");
                let mut z = base;
                for _ in 0..k {
                    z = z.mul_impl(&t_inv);
                }
                z.exact = false;
                Self::certify_quotient(z, &d.uniformiser_pow(k), self)
            }
        })
    }

    /// Exact quotient `self / divisor` in the ring; requires
    /// `valuation(self) >= valuation(divisor)` with the divisor nonzero.
    pub fn divide(&self, divisor: &RingElement) -> Result<RingElement> {
        let e = divisor.valuation().finite().ok_or(Error::NotAUnit)?;
        if self.is_exact_zero() {
            return Ok(self.desc.zero());
        }
        let num = self.divide_by_uniformiser(e)?;
        let unit = divisor.divide_by_uniformiser(e)?;
        let q = num.mul_impl(&unit.invert()?);
        Ok(Self::certify_quotient(q, divisor, self))
    }

    /// Reduction modulo the maximal ideal.
    pub fn residue(&self) -> ResidueElement {
        let d = &self.desc;
        let f = d.residue_field();
        let p = d.p;
        match &self.payload {
            Payload::Series(c) => f.element(c[0], 0),
            Payload::SeriesExt(c) => f.element(c[0][0], c[0][1]),
            Payload::Padic(a) => f.element((*a % p as u128) as u64, 0),
            Payload::PadicPair(a, _) if d.kind == RingKind::PadicRamified => {
                f.element((*a % p as u128) as u64, 0)
            }
            Payload::PadicPair(a, b) => f.element((*a % p as u128) as u64, (*b % p as u128) as u64),
        }
    }

    /// Balanced integer representatives of the p-adic components.
    pub fn balanced_parts(&self) -> Option<(i128, i128)> {
        let m = self.desc.modulus;
        match &self.payload {
            Payload::Padic(a) => Some((arith::balanced(*a, m), 0)),
            Payload::PadicPair(a, b) => Some((arith::balanced(*a, m), arith::balanced(*b, m))),
            _ => None,
        }
    }

    pub fn pow(&self, mut e: u32) -> RingElement {
        let mut acc = self.desc.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_impl(&base);
            }
        }
        acc
    }
}

/// Inverse of a unit modulo `m = p^K` by Newton iteration.
fn inv_padic(a: u128, p: u64, m: u128) -> u128 {
    let a0 = (a % p as u128) as u64;
    let mut x = arith::inv_mod(a0, p) as u128;
    let mut correct = p as u128;
    while correct < m {
        // x <- x (2 - a x)
        let ax = arith::mul_mod_wide(a % m, x, m);
        let two_minus = (2 + m - ax) % m;
        x = arith::mul_mod_wide(x, two_minus, m);
        correct = correct.saturating_mul(correct);
    }
    x % m
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        self.add_impl(rhs)
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        self.add_impl(&rhs.neg_impl())
    }
}

impl Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        self.mul_impl(rhs)
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        self.neg_impl()
    }
}

impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        self.neg_impl()
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut term = |f: &mut fmt::Formatter<'_>, coeff: &dyn fmt::Display, k: usize, var: &str| {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{coeff}"),
                1 => write!(f, "{coeff}*{var}"),
                _ => write!(f, "{coeff}*{var}^{k}"),
            }
        };
        match &self.payload {
            Payload::Series(c) => {
                for (k, &x) in c.iter().enumerate().filter(|(_, &x)| x != 0) {
                    term(f, &x, k, "y")?;
                }
            }
            Payload::SeriesExt(c) => {
                for (k, x) in c.iter().enumerate().filter(|(_, x)| **x != [0, 0]) {
                    let s = PairDisplay(x[0] as i128, x[1] as i128, "t");
                    term(f, &s, k, "x")?;
                }
            }
            Payload::Padic(_) | Payload::PadicPair(..) => {
                let (a, b) = self.balanced_parts().expect("padic");
                let w = if self.desc.kind == RingKind::PadicRamified { "y" } else { "t" };
                if matches!(self.payload, Payload::Padic(_)) {
                    return write!(f, "{a}");
                }
                return write!(f, "{}", PairDisplay(a, b, w));
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

struct PairDisplay(i128, i128, &'static str);

impl fmt::Display for PairDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.0, self.1) {
            (a, 0) => write!(f, "{a}"),
            (0, b) => write!(f, "({b}{})", self.2),
            (a, b) => write!(f, "({a}+{b}{})", self.2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(kind: RingKind, p: u64, n: u32) -> RingDescriptor {
        RingDescriptor::new(kind, p, n).unwrap()
    }

    #[test]
    fn make_ring_picks_least_non_residue() {
        assert_eq!(ring(RingKind::SeriesRamified, 3, 16).nu(), 2);
        assert_eq!(ring(RingKind::PadicTrivial, 5, 8).nu(), 2);
        assert_eq!(ring(RingKind::PadicTrivial, 7, 8).nu(), 3);
        assert_eq!(RingDescriptor::new(RingKind::SeriesTrivial, 2, 16), Err(Error::InvalidPrime(2)));
        assert_eq!(RingDescriptor::new(RingKind::SeriesTrivial, 9, 16), Err(Error::InvalidPrime(9)));
        assert!(RingDescriptor::new(RingKind::SeriesTrivial, 3, 1).is_err());
        assert!(RingDescriptor::new(RingKind::PadicRamified, 3, 7).is_err());
    }

    #[test]
    fn uniformiser_squares() {
        let r = ring(RingKind::PadicRamified, 5, 8);
        let y = r.uniformiser();
        assert_eq!(&y * &y, r.from_i64(5));
        assert_eq!(r.from_i64(5).valuation(), Valuation::Finite(2));
        let u = ring(RingKind::SeriesUnramified, 3, 8);
        let t = u.skew_unit().unwrap();
        assert_eq!(&t * &t, u.nu_element());
        let pu = ring(RingKind::PadicUnramified, 5, 6);
        let t = pu.skew_unit().unwrap();
        assert_eq!(&t * &t, pu.nu_element());
        assert_eq!(pu.uniformiser().valuation(), Valuation::Finite(1));
    }

    #[test]
    fn involution_on_uniformiser() {
        for kind in RingKind::ALL {
            let r = ring(kind, 5, 8);
            let y = r.uniformiser();
            match kind.involution() {
                InvolutionClass::Trivial => assert_eq!(y.involute(), y),
                _ => assert_eq!(y.involute(), -&y),
            }
        }
        let r = ring(RingKind::PadicUnramified, 5, 4);
        let x = r.padic_pair(3, 7).unwrap();
        assert_eq!(x.involute(), r.padic_pair(3, -7).unwrap());
    }

    #[test]
    fn exact_zero_tracking() {
        let r = ring(RingKind::SeriesTrivial, 3, 4);
        let a = r.series(&[1, 2]).unwrap();
        assert!((&a + &(-&a)).is_exact_zero());
        assert_eq!(r.zero().valuation(), Valuation::Infinite);
        // y^2 * y^2 truncates at precision 4: zero, but not provably zero.
        let y2 = r.series(&[0, 0, 1]).unwrap();
        let prod = &y2 * &y2;
        assert!(prod.is_zero() && !prod.is_exact_zero());
        assert_eq!(prod.valuation(), Valuation::AtLeast(4));
        let q = RingDescriptor::quotient(RingKind::SeriesTrivial, 3, 4).unwrap();
        let y2 = q.series(&[0, 0, 1]).unwrap();
        assert_eq!((&y2 * &y2).valuation(), Valuation::Infinite);
    }

    #[test]
    fn inversion() {
        let r = ring(RingKind::SeriesTrivial, 3, 8);
        let one_plus_y = r.series(&[1, 1]).unwrap();
        let inv = one_plus_y.invert().unwrap();
        // 1 - y + y^2 - ... with -1 = 2 mod 3
        assert_eq!(inv, r.series(&[1, 2, 1, 2, 1, 2, 1, 2]).unwrap());
        assert_eq!(&inv * &one_plus_y, r.one());
        assert_eq!(r.uniformiser().invert(), Err(Error::NotAUnit));
        assert_eq!(r.one().invert().unwrap(), r.one());
        for kind in RingKind::ALL {
            let r = ring(kind, 7, 6);
            let x = &r.from_i64(3) + &r.uniformiser();
            assert_eq!(&x * &x.invert().unwrap(), r.one(), "{kind}");
        }
    }

    #[test]
    fn division_by_uniformiser() {
        for kind in RingKind::ALL {
            let r = ring(kind, 5, 8);
            let y = r.uniformiser();
            let y3 = r.uniformiser_pow(3);
            assert_eq!(y3.divide_by_uniformiser(2).unwrap(), y, "{kind}");
            assert_eq!(
                y.divide_by_uniformiser(2),
                Err(Error::InsufficientValuation { requested: 2 })
            );
            let u = &r.from_i64(2) + &y;
            let x = &u * &y3;
            assert_eq!(&r.uniformiser_pow(3) * &x.divide_by_uniformiser(3).unwrap(), x);
            assert_eq!(x.divide(&y3).unwrap(), u);
        }
        let r = ring(RingKind::PadicTrivial, 5, 6);
        let u = r.padic(7).unwrap();
        let pu = &r.padic(5).unwrap() * &u;
        let q = pu.divide_by_uniformiser(1).unwrap();
        assert_eq!(q, u);
        assert!(q.is_exact());
    }

    #[test]
    fn symmetric_skew_split() {
        for kind in RingKind::ALL {
            let r = ring(kind, 5, 6);
            let a = &(&r.from_i64(3) + &r.uniformiser()) * &(&r.from_i64(1) + &r.uniformiser_pow(3));
            let a = match r.skew_unit() {
                Some(t) => &a + &t,
                None => a,
            };
            let s = a.symmetric_part();
            let k = a.skew_part();
            assert_eq!(&s + &k, a);
            assert_eq!(s.involute(), s);
            assert_eq!(k.involute(), -&k);
        }
    }

    #[test]
    fn checked_arith_rejects_mismatch() {
        let a = ring(RingKind::SeriesTrivial, 3, 4).one();
        let b = ring(RingKind::SeriesTrivial, 5, 4).one();
        assert_eq!(arith(ArithOp::Add, &a, &b), Err(Error::DescriptorMismatch));
        assert!(arith(ArithOp::Mul, &a, &a).is_ok());
    }
}
