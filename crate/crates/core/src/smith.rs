//! Smith normal form over the truncated DVR instances.

use alloc::vec::Vec;

use crate::decompose;
use crate::error::{Error, Result};
use crate::form::GramForm;
use crate::matrix::{Matrix, RingMatrix};
use crate::ring::{InvolutionClass, RingElement, Valuation};

#[derive(Clone, Debug, PartialEq)]
pub struct SmithForm {
    /// Nondecreasing valuations `k_1 <= ... <= k_r` of the invariant factors.
    pub valuations: Vec<u32>,
    pub corank: usize,
    pub p: RingMatrix,
    pub q: RingMatrix,
}

impl SmithForm {
    /// `diag(y^{k_1}, ..., y^{k_r}, 0, ..., 0)`.
    pub fn diagonal(&self) -> RingMatrix {
        let desc = self.p.ctx();
        let mut d: Vec<RingElement> = self.valuations.iter().map(|&k| desc.uniformiser_pow(k)).collect();
        d.extend((0..self.corank).map(|_| desc.zero()));
        Matrix::diagonal(desc, &d)
    }
}

fn row_axpy(m: &mut RingMatrix, dst: usize, src: usize, f: &RingElement) {
    for j in 0..m.cols() {
        let v = m.get(dst, j) - &(f * m.get(src, j));
        m.set(dst, j, v);
    }
}

fn col_axpy(m: &mut RingMatrix, dst: usize, src: usize, f: &RingElement) {
    for i in 0..m.rows() {
        let v = m.get(i, dst) - &(m.get(i, src) * f);
        m.set(i, dst, v);
    }
}

fn is_skew_symmetric(m: &RingMatrix) -> bool {
    let n = m.rows();
    (0..n).all(|i| (i..n).all(|j| *m.get(j, i) == -m.get(i, j)))
}

/// Pivot search over the active block: minimal valuation, then an exactly
/// invertible unit part, then row-major. `Ok(None)` when the block is exactly
/// zero.
fn min_valuation(a: &RingMatrix, s: usize, upper: bool) -> Result<Option<(u32, usize, usize)>> {
    let n = a.rows();
    let mut best: Option<(u32, bool, usize, usize)> = None;
    let mut all_zero = true;
    for i in s..n {
        for j in if upper { i + 1 } else { s }..n {
            let x = a.get(i, j);
            all_zero &= x.is_exact_zero();
            if let Valuation::Finite(v) = x.valuation() {
                let exact = x.has_exact_unit_part(v);
                if best.is_none_or(|(b, e, _, _)| v < b || (v == b && exact && !e)) {
                    best = Some((v, exact, i, j));
                }
            }
        }
    }
    match best {
        None if !all_zero => Err(Error::PrecisionExhausted { precision: a.ctx().precision() }),
        b => Ok(b.map(|(v, _, i, j)| (v, i, j))),
    }
}

/// Skew-symmetric input: eliminate with matching row and column operations,
/// so the diagonal stays identically zero and invariant factors pair up.
fn skew_smith_form(m: &RingMatrix) -> Result<SmithForm> {
    let desc = m.ctx();
    let n = m.rows();
    let mut a = m.clone();
    let mut p = Matrix::identity(desc, n);
    let mut q = Matrix::identity(desc, n);
    let mut valuations = Vec::with_capacity(n);
    let swap = |a: &mut RingMatrix, p: &mut RingMatrix, q: &mut RingMatrix, i: usize, j: usize| {
        a.swap_rows(i, j);
        a.swap_cols(i, j);
        p.swap_rows(i, j);
        q.swap_cols(i, j);
    };
    let mut s = 0;
    while s + 1 < n {
        let Some((v, i, j)) = min_valuation(&a, s, true)? else {
            break;
        };
        swap(&mut a, &mut p, &mut q, s, i);
        swap(&mut a, &mut p, &mut q, s + 1, j);
        let piv = a.get(s, s + 1).clone();
        for l in s + 2..n {
            // row_l -= c0 row_s + c1 row_{s+1}, and the same on columns
            let c0 = a.get(l, s + 1).divide(&piv)?;
            let c1 = -&a.get(l, s).divide(&piv)?;
            for (src, c) in [(s, &c0), (s + 1, &c1)] {
                if c.is_exact_zero() {
                    continue;
                }
                row_axpy(&mut a, l, src, c);
                row_axpy(&mut p, l, src, c);
                col_axpy(&mut a, l, src, c);
                col_axpy(&mut q, l, src, c);
            }
        }
        for l in s + 2..n {
            for k in [s, s + 1] {
                a.set(l, k, desc.zero());
                a.set(k, l, desc.zero());
            }
            a.set(l, l, desc.zero());
        }
        // [[0, y^v u], [-y^v u, 0]] -> diag(y^v, y^v): swap rows, scale by units
        let u_inv = piv.divide_by_uniformiser(v)?.invert()?;
        p.swap_rows(s, s + 1);
        for jj in 0..n {
            let x = -&(&u_inv * p.get(s, jj));
            p.set(s, jj, x);
            let x = &u_inv * p.get(s + 1, jj);
            p.set(s + 1, jj, x);
        }
        a.set(s, s + 1, desc.zero());
        a.set(s + 1, s, desc.zero());
        a.set(s, s, desc.uniformiser_pow(v));
        a.set(s + 1, s + 1, desc.uniformiser_pow(v));
        valuations.extend([v, v]);
        s += 2;
    }
    if s + 1 == n {
        a.set(s, s, desc.zero());
    }
    let corank = n - valuations.len();
    Ok(SmithForm { valuations, corank, p, q })
}

/// `P M Q = diag(y^{k_1}, ..., y^{k_r}, 0, ...)` by minimal-valuation pivoting.
pub fn smith_form(m: &RingMatrix) -> Result<SmithForm> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch);
    }
    if is_skew_symmetric(m) {
        return skew_smith_form(m);
    }
    let desc = m.ctx();
    let n = m.rows();
    let mut a = m.clone();
    let mut p = Matrix::identity(desc, n);
    let mut q = Matrix::identity(desc, n);
    let mut valuations = Vec::with_capacity(n);
    for s in 0..n {
        let Some((v, i, j)) = min_valuation(&a, s, false)? else {
            break;
        };
        a.swap_rows(s, i);
        p.swap_rows(s, i);
        a.swap_cols(s, j);
        q.swap_cols(s, j);
        let piv = a.get(s, s).clone();
        for r in s + 1..n {
            if a.get(r, s).is_exact_zero() {
                continue;
            }
            let f = a.get(r, s).divide(&piv)?;
            row_axpy(&mut a, r, s, &f);
            row_axpy(&mut p, r, s, &f);
            a.set(r, s, desc.zero());
        }
        for c in s + 1..n {
            if a.get(s, c).is_exact_zero() {
                continue;
            }
            let f = a.get(s, c).divide(&piv)?;
            col_axpy(&mut q, c, s, &f);
            a.set(s, c, desc.zero());
        }
        // strip the unit: row s times (piv / y^v)^{-1}
        let u_inv = piv.divide_by_uniformiser(v)?.invert()?;
        for jj in 0..n {
            let x = &u_inv * p.get(s, jj);
            p.set(s, jj, x);
        }
        a.set(s, s, desc.uniformiser_pow(v));
        valuations.push(v);
    }
    let corank = n - valuations.len();
    Ok(SmithForm { valuations, corank, p, q })
}

/// Equivalence by invariant factors; a complete congruence test only when the
/// residue norm map is surjective, i.e. over the unramified instances.
pub fn congruent_by_invariant_factors(f: &GramForm, g: &GramForm) -> Result<bool> {
    if f.descriptor().involution() != InvolutionClass::Unramified {
        return Err(Error::WrongInstance("invariant factors decide congruence only for unramified involutions"));
    }
    if f.descriptor() != g.descriptor() || f.epsilon() != g.epsilon() || f.size() != g.size() {
        return Err(Error::ShapeMismatch);
    }
    let (sf, sg) = (smith_form(f.matrix())?, smith_form(g.matrix())?);
    Ok(sf.valuations == sg.valuations && sf.corank == sg.corank)
}

/// Multiset of O'Meara levels with multiplicity `d_i`, for cross-checks.
pub fn omeara_exponents(f: &GramForm) -> Result<(Vec<u32>, usize)> {
    let dec = decompose::omeara_decompose(f)?;
    let mut e = Vec::new();
    for b in &dec.blocks {
        e.extend(core::iter::repeat(b.level).take(b.form.size()));
    }
    Ok((e, dec.zero_rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{matrix, validate, Epsilon};
    use crate::ring::{RingDescriptor, RingKind};
    use alloc::vec;

    #[test]
    fn smith_examples() {
        let r = RingDescriptor::new(RingKind::SeriesTrivial, 5, 16).unwrap();
        let s = smith_form(&Matrix::identity(r, 3)).unwrap();
        assert_eq!((s.valuations.clone(), s.corank), (vec![0, 0, 0], 0));
        let d = Matrix::diagonal(r, &[r.one(), r.uniformiser(), r.uniformiser_pow(2)]);
        let s = smith_form(&d).unwrap();
        assert_eq!(s.valuations, vec![0, 1, 2]);
        assert_eq!(s.p.mul(&d).mul(&s.q), s.diagonal());

        let pr = RingDescriptor::new(RingKind::PadicRamified, 5, 16).unwrap();
        let y = pr.uniformiser();
        let m = matrix(pr, vec![vec![y.clone(), pr.one()], vec![-pr.one(), y]]).unwrap();
        let s = smith_form(&m).unwrap();
        assert_eq!(s.valuations, vec![0, 0]);
        assert_eq!(s.p.mul(&m).mul(&s.q), s.diagonal());
    }

    #[test]
    fn invariant_factor_congruence() {
        let u = RingDescriptor::new(RingKind::SeriesUnramified, 3, 16).unwrap();
        let y = u.uniformiser();
        // y* = -y, so y t is fixed by the involution
        let yt = &y * &u.skew_unit().unwrap();
        let f = validate(Matrix::diagonal(u, &[u.one(), yt]), Epsilon::Plus).unwrap();
        let g = validate(matrix(u, vec![vec![u.zero(), u.one()], vec![u.one(), u.zero()]]).unwrap(), Epsilon::Plus)
            .unwrap();
        assert_eq!(congruent_by_invariant_factors(&f, &g), Ok(false));
        assert_eq!(congruent_by_invariant_factors(&f, &f), Ok(true));
        let t = RingDescriptor::new(RingKind::SeriesTrivial, 3, 16).unwrap();
        let ft = validate(Matrix::identity(t, 2), Epsilon::Plus).unwrap();
        assert!(matches!(congruent_by_invariant_factors(&ft, &ft), Err(Error::WrongInstance(_))));
    }
}
