//! Lifting engines: square roots and norm equations by Newton iteration, the
//! skew quadratic `α t*t + β t - t*β* + γ = 0`, and symplectic pairs.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::form::{Epsilon, GramForm};
use crate::residue::{self, SquareClass};
use crate::ring::{InvolutionClass, RingElement};

fn half(x: &RingElement) -> RingElement {
    let two = x.descriptor().from_i64(2);
    two.invert().map(|h| &h * x).expect("2 is a unit")
}

fn check_fixed_unit(b: &RingElement) -> Result<()> {
    if !b.is_unit() {
        return Err(Error::NotAUnit);
    }
    if b.involute() != *b {
        return Err(Error::TypeMismatch("expected an element fixed by the involution"));
    }
    Ok(())
}

/// `s` with `s^2 = b`, `s* = s`, and residue the least residue square root.
pub fn hensel_sqrt(b: &RingElement) -> Result<RingElement> {
    check_fixed_unit(b)?;
    let d = *b.descriptor();
    let r = b.residue();
    if residue::square_class(&r)? != SquareClass::Square {
        return Err(Error::NotASquare);
    }
    let mut s = d.lift(&residue::sqrt_residue(&r)?);
    // Newton doubles the number of correct digits.
    let steps = 2 + 32 - d.precision().leading_zeros();
    for _ in 0..=steps {
        if (&(&s * &s) - b).is_zero() {
            return Ok(s);
        }
        s = half(&(&s + &(b * &s.invert()?)));
    }
    if (&(&s * &s) - b).is_zero() {
        Ok(s)
    } else {
        Err(Error::Inconsistent("Newton iteration for the square root did not converge"))
    }
}

/// `c` with `c* c = b` for a unit `b` fixed by the involution.
pub fn solve_norm_equation(b: &RingElement) -> Result<RingElement> {
    check_fixed_unit(b)?;
    let d = *b.descriptor();
    let r = b.residue();
    let a = if d.involution() == InvolutionClass::Unramified {
        residue::solve_norm(&r).map_err(|_| Error::NoResidueSolution)?
    } else {
        residue::sqrt_residue(&r).map_err(|_| Error::NoResidueSolution)?
    };
    let la = d.lift(&a);
    let q = b * &(&la.involute() * &la).invert()?;
    let c = &la * &hensel_sqrt(&q)?;
    debug_assert!((&(&c.involute() * &c) - b).is_zero());
    Ok(c)
}

/// `c u` with `h(cu, cu) = b`, given `h(u, u) ≡ b` modulo the maximal ideal.
pub fn rescale_vector(u: &[RingElement], b: &RingElement, h: &GramForm) -> Result<Vec<RingElement>> {
    let huu = h.pairing(u, u);
    if !huu.is_unit() {
        return Err(Error::NotAUnitLength);
    }
    if !b.is_unit() {
        return Err(Error::NotAUnit);
    }
    let eb = if h.epsilon() == Epsilon::Minus { -b } else { b.clone() };
    if b.involute() != eb {
        return Err(Error::TypeMismatch("target must satisfy b* = εb"));
    }
    if huu.residue() != b.residue() {
        return Err(Error::NoResidueSolution);
    }
    let c = solve_norm_equation(&(b * &huu.invert()?))?;
    Ok(u.iter().map(|x| x * &c).collect())
}

/// Partial sums `t_k = -1/2 Σ_{i≤k} γ_i/β_i`, one per iteration, stopping
/// once `γ_k` vanishes at the working precision.
pub fn skew_quadratic_iterates(
    alpha: &RingElement,
    beta: &RingElement,
    gamma: &RingElement,
) -> Result<Vec<RingElement>> {
    let d = *alpha.descriptor();
    if *beta.descriptor() != d || *gamma.descriptor() != d {
        return Err(Error::DescriptorMismatch);
    }
    if d.involution() == InvolutionClass::Unramified {
        return Err(Error::WrongInstance("the skew quadratic needs a ramified involution"));
    }
    if alpha.involute() != -alpha || gamma.involute() != -gamma {
        return Err(Error::TypeMismatch("α and γ must be skew"));
    }
    if !beta.is_unit() {
        return Err(Error::NotAUnit);
    }
    let two = d.from_i64(2);
    let four = d.from_i64(4);
    let mut t = d.zero();
    let mut g = gamma.clone();
    let mut b = beta.clone();
    let mut out = Vec::new();
    for _ in 0..=d.precision() {
        if g.is_zero() {
            return Ok(out);
        }
        let bs = b.involute();
        t = &t - &(&g * &(&two * &b).invert()?);
        out.push(t.clone());
        let g_next = -&(&(alpha * &(&g * &g)) * &(&four * &(&bs * &b)).invert()?);
        b = &b + &(&(alpha * &g) * &(&two * &bs).invert()?);
        g = g_next;
    }
    if g.is_zero() {
        Ok(out)
    } else {
        Err(Error::Inconsistent("skew quadratic iteration did not terminate"))
    }
}

/// `f(t) = α t*t + β t - t*β* + γ`.
pub fn skew_quadratic_residual(
    alpha: &RingElement,
    beta: &RingElement,
    gamma: &RingElement,
    t: &RingElement,
) -> RingElement {
    let ts = t.involute();
    &(&(&(alpha * &(&ts * t)) + &(beta * t)) - &(&ts * &beta.involute())) + gamma
}

/// A root `t ∈ Aγ` of the skew quadratic at the working precision.
pub fn solve_skew_quadratic(alpha: &RingElement, beta: &RingElement, gamma: &RingElement) -> Result<RingElement> {
    let it = skew_quadratic_iterates(alpha, beta, gamma)?;
    Ok(it.last().cloned().unwrap_or_else(|| alpha.descriptor().zero()))
}

/// Coefficients `T` (columns are the new vectors in terms of `u, v`) turning
/// a skew hermitian pair with Gram `[[huu, huv], [-huv*, hvv]]` into a
/// symplectic pair.
pub(crate) fn symplectic_pair_transform(
    huu: &RingElement,
    huv: &RingElement,
    hvv: &RingElement,
) -> Result<[[RingElement; 2]; 2]> {
    if !huv.is_unit() {
        return Err(Error::NotAUnitPairing);
    }
    let d = *huu.descriptor();
    let one = d.one();
    let n = huv.invert()?;
    let hvv1 = &(&n.involute() * &n) * hvv;
    let b = if d.involution() == InvolutionClass::Trivial {
        d.zero()
    } else {
        solve_skew_quadratic(&hvv1, &one, huu)?
    };
    let c = &one + &(&b.involute() * &hvv1);
    let ci = c.invert()?;
    let s = &half(&hvv1) * &c.involute().invert()?;
    Ok([
        [one.clone(), &ci * &s],
        [&b * &n, &(&ci * &n) * &(&one + &(&s * &b))],
    ])
}

/// The construction that turns `u, v` with `h(u,v)` a unit into a pair with
/// Gram `[[0,1],[-1,0]]` spanning the same submodule.
pub fn make_symplectic_pair(
    u: &[RingElement],
    v: &[RingElement],
    h: &GramForm,
) -> Result<(Vec<RingElement>, Vec<RingElement>)> {
    if h.epsilon() != Epsilon::Minus {
        return Err(Error::TypeMismatch("symplectic pairs need a skew hermitian form"));
    }
    if h.descriptor().involution() == InvolutionClass::Unramified {
        return Err(Error::WrongInstance("symplectic pairs need a ramified involution"));
    }
    let t = symplectic_pair_transform(&h.pairing(u, u), &h.pairing(u, v), &h.pairing(v, v))?;
    let combine = |a: &RingElement, b: &RingElement| -> Vec<RingElement> {
        u.iter().zip(v).map(|(x, y)| &(x * a) + &(y * b)).collect()
    };
    Ok((combine(&t[0][0], &t[1][0]), combine(&t[0][1], &t[1][1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{matrix, validate};
    use crate::ring::{ElementView, RingDescriptor, RingKind, Valuation};
    use alloc::vec;

    #[test]
    fn sqrt_examples() {
        let r = RingDescriptor::new(RingKind::SeriesTrivial, 3, 16).unwrap();
        assert_eq!(hensel_sqrt(&r.one()).unwrap(), r.one());
        let b = r.series(&[1, 0, 1]).unwrap();
        let s = hensel_sqrt(&b).unwrap();
        assert_eq!(&s * &s, b);
        match s.view() {
            ElementView::Series(c) => assert_eq!(&c[..3], &[1, 0, 2]),
            _ => unreachable!(),
        }
        assert_eq!(hensel_sqrt(&r.nu_element()), Err(Error::NotASquare));
    }

    #[test]
    fn norm_equation_examples() {
        let r = RingDescriptor::new(RingKind::SeriesTrivial, 5, 16).unwrap();
        let b = r.series(&[4, 1]).unwrap();
        let c = solve_norm_equation(&b).unwrap();
        assert_eq!(&c * &c, b);
        assert_eq!(c.residue().a(), 2);
        let u = RingDescriptor::new(RingKind::PadicUnramified, 3, 10).unwrap();
        let c = solve_norm_equation(&u.nu_element()).unwrap();
        assert_eq!(&c.involute() * &c, u.nu_element());
        assert_eq!(solve_norm_equation(&r.uniformiser()), Err(Error::NotAUnit));
    }

    #[test]
    fn rescale_examples() {
        let r = RingDescriptor::new(RingKind::SeriesTrivial, 5, 12).unwrap();
        let y = r.uniformiser();
        let f = validate(crate::matrix::Matrix::diagonal(r, &[&r.one() + &y]), Epsilon::Plus).unwrap();
        let w = rescale_vector(&[r.one()], &r.one(), &f).unwrap();
        assert_eq!(f.pairing(&w, &w), r.one());
        let nu = r.nu_element();
        let f = validate(crate::matrix::Matrix::diagonal(r, &[&nu * &(&r.one() + &y)]), Epsilon::Plus).unwrap();
        let w = rescale_vector(&[r.one()], &nu, &f).unwrap();
        assert_eq!(f.pairing(&w, &w), nu);
        let f = validate(crate::matrix::Matrix::identity(r, 1), Epsilon::Plus).unwrap();
        assert_eq!(rescale_vector(&[r.one()], &r.one(), &f).unwrap(), vec![r.one()]);
    }

    #[test]
    fn skew_quadratic_examples() {
        let r = RingDescriptor::new(RingKind::PadicRamified, 5, 32).unwrap();
        let y = r.uniformiser();
        let one = r.one();
        assert_eq!(solve_skew_quadratic(&y, &one, &r.zero()).unwrap(), r.zero());
        let it = skew_quadratic_iterates(&y, &one, &y).unwrap();
        let t1 = &it[0];
        assert_eq!(*t1, -&half(&y));
        let res = skew_quadratic_residual(&y, &one, &y, t1);
        assert_eq!(res.valuation(), Valuation::Finite(3));
        let t = it.last().unwrap();
        assert!(skew_quadratic_residual(&y, &one, &y, t).is_zero());

        let s = RingDescriptor::new(RingKind::SeriesRamified, 3, 32).unwrap();
        let y = s.uniformiser();
        let alpha = s.uniformiser_pow(3);
        let beta = &s.one() + &s.uniformiser_pow(2);
        let t = solve_skew_quadratic(&alpha, &beta, &y).unwrap();
        assert!(skew_quadratic_residual(&alpha, &beta, &y, &t).is_zero());
    }

    #[test]
    fn symplectic_pair_examples() {
        let r = RingDescriptor::new(RingKind::PadicRamified, 5, 32).unwrap();
        let y = r.uniformiser();
        let one = r.one();
        let g = matrix(r, vec![vec![y.clone(), one.clone()], vec![-&one, y.clone()]]).unwrap();
        let h = validate(g, Epsilon::Minus).unwrap();
        let (e1, e2) = (vec![one.clone(), r.zero()], vec![r.zero(), one.clone()]);
        let (u, v) = make_symplectic_pair(&e1, &e2, &h).unwrap();
        assert!(h.pairing(&u, &u).is_zero());
        assert!(h.pairing(&v, &v).is_zero());
        assert_eq!(h.pairing(&u, &v), one);

        let j = matrix(r, vec![vec![r.zero(), one.clone()], vec![-&one, r.zero()]]).unwrap();
        let hj = validate(j, Epsilon::Minus).unwrap();
        assert_eq!(make_symplectic_pair(&e1, &e2, &hj).unwrap(), (e1.clone(), e2.clone()));

        let hy = validate(
            matrix(r, vec![vec![r.zero(), y.clone()], vec![y.clone(), r.zero()]]).unwrap(),
            Epsilon::Minus,
        )
        .unwrap();
        assert_eq!(make_symplectic_pair(&e1, &e2, &hy), Err(Error::NotAUnitPairing));
    }
}
