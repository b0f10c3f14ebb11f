//! Splitting lemmas, the O'Meara decomposition, lifting of residue
//! congruences, symplectic bases, canonical forms and congruence decisions.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::form::{self, level_epsilon, level_type, Epsilon, GramForm, InvariantProfile, LevelData};
use crate::hensel;
use crate::matrix::{CongruenceTracker, Matrix, RingMatrix};
use crate::residue::{self, DiscClass, FormType, ResidueClassification};
use crate::ring::{InvolutionClass, RingDescriptor, RingElement, Valuation};

/// An invertible change of basis `X`, meant to satisfy `X'* source X = target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    x: RingMatrix,
}

impl Witness {
    pub fn new(x: RingMatrix) -> Self {
        Witness { x }
    }
    pub fn matrix(&self) -> &RingMatrix {
        &self.x
    }
    pub fn into_matrix(self) -> RingMatrix {
        self.x
    }

    /// Recomputes `X'* source X` and compares entrywise at precision; also
    /// checks that `X` is invertible.
    pub fn verify(&self, source: &GramForm, target: &GramForm) -> bool {
        source.descriptor() == target.descriptor()
            && source.epsilon() == target.epsilon()
            && self.x.rows() == source.size()
            && self.x.cols() == target.size()
            && self.x.is_invertible()
            && source.matrix().congruence(&self.x) == *target.matrix()
    }
}

fn basis_vector(desc: RingDescriptor, m: usize, i: usize) -> Vec<RingElement> {
    (0..m).map(|k| if k == i { desc.one() } else { desc.zero() }).collect()
}

fn combine(a: &RingElement, u: &[RingElement], b: &RingElement, v: &[RingElement]) -> Vec<RingElement> {
    u.iter().zip(v).map(|(x, y)| &(a * x) + &(b * y)).collect()
}

/// `u, w_2, ..., w_m` with `w_j = e_j - h(u,e_j) h(u,u)^{-1} u`, dropping the
/// first standard vector on which `u` has a unit coordinate.
pub fn split_unit_vector(f: &GramForm, u: &[RingElement]) -> Result<Vec<Vec<RingElement>>> {
    let huu = f.pairing(u, u);
    if !huu.is_unit() {
        return Err(Error::NotAUnitLength);
    }
    let m = f.size();
    let desc = f.descriptor();
    let drop = u.iter().position(RingElement::is_unit).ok_or(Error::NotAUnitLength)?;
    let inv = huu.invert()?;
    let mut basis = alloc::vec![u.to_vec()];
    for j in (0..m).filter(|&j| j != drop) {
        let e = basis_vector(desc, m, j);
        let c = -&(&inv * &f.pairing(u, &e));
        basis.push(combine(&desc.one(), &e, &c, u));
    }
    Ok(basis)
}

/// `u, v, w_3, ...` with each `w_i` orthogonal to `u` and `v`.
pub fn split_rank_two(f: &GramForm, u: &[RingElement], v: &[RingElement]) -> Result<Vec<Vec<RingElement>>> {
    let desc = f.descriptor();
    if desc.involution() == InvolutionClass::Unramified || f.epsilon() != Epsilon::Minus {
        return Err(Error::WrongInstance("rank two splitting needs a skew form over a ramified involution"));
    }
    let huv = f.pairing(u, v);
    if !huv.is_unit() {
        return Err(Error::NotAUnitPairing);
    }
    let m = f.size();
    let b = [[f.pairing(u, u), huv], [f.pairing(v, u), f.pairing(v, v)]];
    let det = &(&b[0][0] * &b[1][1]) - &(&b[0][1] * &b[1][0]);
    let di = det.invert().map_err(|_| Error::NotAUnitPairing)?;
    // keep the standard vectors outside a unit 2x2 minor of [u v]
    let (k1, k2) = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .find(|&(i, j)| (&(&u[i] * &v[j]) - &(&u[j] * &v[i])).is_unit())
        .ok_or(Error::NotAUnitPairing)?;
    let mut basis = alloc::vec![u.to_vec(), v.to_vec()];
    for i in (0..m).filter(|&i| i != k1 && i != k2) {
        let e = basis_vector(desc, m, i);
        let (r0, r1) = (f.pairing(u, &e), f.pairing(v, &e));
        let a = &di * &(&(&b[1][1] * &r0) - &(&b[0][1] * &r1));
        let bb = &di * &(&(&b[0][0] * &r1) - &(&b[1][0] * &r0));
        let w: Vec<RingElement> = (0..m).map(|k| &(&e[k] - &(&a * &u[k])) - &(&bb * &v[k])).collect();
        basis.push(w);
    }
    Ok(basis)
}

/// One of `u`, `v`, `u + v` (after normalising `h(u,v)` to 1, or to `b^{-1}`
/// for skew forms over the unramified instances) with unit self-pairing.
pub fn find_unit_length(f: &GramForm, u: &[RingElement], v: &[RingElement]) -> Result<Vec<RingElement>> {
    let desc = f.descriptor();
    let skew = f.epsilon() == Epsilon::Minus;
    let s = match (desc.involution(), skew) {
        (InvolutionClass::Unramified, true) => desc.skew_unit().expect("unramified"),
        (_, false) => desc.one(),
        _ => return Err(Error::WrongInstance("skew forms over a ramified involution have no unit-length vectors")),
    };
    let huv = f.pairing(u, v);
    if !huv.is_unit() {
        return Err(Error::NotAUnitPairing);
    }
    if f.pairing(u, u).is_unit() {
        return Ok(u.to_vec());
    }
    let c = (&s * &huv).invert()?;
    let v: Vec<RingElement> = v.iter().map(|x| &c * x).collect();
    if f.pairing(&v, &v).is_unit() {
        return Ok(v);
    }
    let w: Vec<RingElement> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
    if f.pairing(&w, &w).is_unit() {
        Ok(w)
    } else {
        Err(Error::Inconsistent("no unit-length vector among u, v, u+v"))
    }
}

/// A block `y^level · form` of an O'Meara decomposition; `form` is invertible
/// and carries the level sign.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub level: u32,
    pub form: GramForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OMearaDecomposition {
    pub descriptor: RingDescriptor,
    pub epsilon: Epsilon,
    /// Strictly increasing levels.
    pub blocks: Vec<Block>,
    pub zero_rank: usize,
    /// `X` with `X'* M X` equal to [`OMearaDecomposition::block_sum`].
    pub witness: RingMatrix,
}

impl OMearaDecomposition {
    /// `y^{i_1} M_1 ⊕ y^{i_2} M_2 ⊕ ... ⊕ 0`.
    pub fn block_sum(&self) -> RingMatrix {
        let scaled: Vec<RingMatrix> = self
            .blocks
            .iter()
            .map(|b| b.form.matrix().scale(&self.descriptor.uniformiser_pow(b.level)))
            .collect();
        let zero = Matrix::zeros(self.descriptor, self.zero_rank, self.zero_rank);
        let mut parts: Vec<&RingMatrix> = scaled.iter().collect();
        parts.push(&zero);
        Matrix::block_diag(self.descriptor, &parts)
    }

    pub fn profile(&self) -> Result<InvariantProfile> {
        let mut levels = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let ty = level_type(b.level, self.epsilon, &self.descriptor);
            let classification = residue::classify_residue_form(&b.form.matrix().residue(), ty)?;
            levels.push(LevelData { level: b.level, size: b.form.size(), form_type: ty, classification });
        }
        Ok(InvariantProfile {
            descriptor: self.descriptor,
            epsilon: self.epsilon,
            levels,
            zero_rank: self.zero_rank,
        })
    }
}

fn clear_cross(t: &mut CongruenceTracker<RingElement>, pivots: core::ops::Range<usize>) {
    let z = t.g.ctx().zero();
    for k in pivots.clone() {
        for l in pivots.end..t.size() {
            t.g.set(k, l, z.clone());
            t.g.set(l, k, z.clone());
        }
    }
}

/// Clears row and column `k` against the pivot `G[k][k]`.
fn eliminate_unit(t: &mut CongruenceTracker<RingElement>, k: usize) -> Result<()> {
    let piv = t.g.get(k, k).clone();
    for l in k + 1..t.size() {
        if t.g.get(k, l).is_exact_zero() {
            continue;
        }
        let a = t.g.get(k, l).divide(&piv)?;
        t.add(l, k, &-a);
    }
    clear_cross(t, k..k + 1);
    Ok(())
}

/// Clears rows and columns `k, k+1` against the pivot block, whose
/// `y^{-d}`-rescaling has unit determinant.
fn eliminate_pair(t: &mut CongruenceTracker<RingElement>, k: usize, d: u32) -> Result<()> {
    let q = |t: &CongruenceTracker<RingElement>, i: usize, j: usize| t.g.get(i, j).divide_by_uniformiser(d);
    let (b00, b01, b10, b11) = (q(t, k, k)?, q(t, k, k + 1)?, q(t, k + 1, k)?, q(t, k + 1, k + 1)?);
    let di = (&(&b00 * &b11) - &(&b01 * &b10))
        .invert()
        .map_err(|_| Error::Inconsistent("pivot block is not invertible"))?;
    for l in k + 2..t.size() {
        let (r0, r1) = (q(t, k, l)?, q(t, k + 1, l)?);
        if r0.is_exact_zero() && r1.is_exact_zero() {
            continue;
        }
        let a = &di * &(&(&b11 * &r0) - &(&b01 * &r1));
        let b = &di * &(&(&b00 * &r1) - &(&b10 * &r0));
        t.add(l, k, &-a);
        t.add(l, k + 1, &-b);
    }
    clear_cross(t, k..k + 2);
    Ok(())
}

/// First of `candidates` whose entry has valuation `d`, preferring one with an
/// exactly invertible unit part.
fn pick_pivot(
    t: &CongruenceTracker<RingElement>,
    d: u32,
    candidates: impl Iterator<Item = (usize, usize)>,
) -> Option<(usize, usize)> {
    let mut first = None;
    for (i, j) in candidates {
        let x = t.g.get(i, j);
        if x.valuation() == Valuation::Finite(d) {
            if x.has_exact_unit_part(d) {
                return Some((i, j));
            }
            first.get_or_insert((i, j));
        }
    }
    first
}

fn first_off_diagonal(t: &CongruenceTracker<RingElement>, k: usize, d: u32) -> Option<(usize, usize)> {
    let m = t.size();
    pick_pivot(t, d, (k..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))))
}

/// Runs the splitting recursion; returns the tracker, the level of each
/// split index, and the size of the zero block.
fn run_decomposition(g: &RingMatrix, eps: Epsilon) -> Result<(CongruenceTracker<RingElement>, Vec<u32>)> {
    let desc = g.ctx();
    let m = g.rows();
    let mut t = CongruenceTracker::new(g.clone());
    let mut levels = Vec::with_capacity(m);
    // alternating forms have identically zero diagonal; say so exactly so
    // that odd-size radicals can be certified
    let alternating_form = desc.involution() == InvolutionClass::Trivial && eps == Epsilon::Minus;
    let mut k = 0;
    while k < m {
        if alternating_form {
            for i in k..m {
                t.g.set(i, i, desc.zero());
            }
        }
        let mut d: Option<u32> = None;
        let mut all_zero = true;
        for i in k..m {
            for j in i..m {
                let x = t.g.get(i, j);
                if let Valuation::Finite(v) = x.valuation() {
                    d = Some(d.map_or(v, |w| w.min(v)));
                }
                all_zero &= x.is_exact_zero();
            }
        }
        let Some(d) = d else {
            if all_zero {
                break;
            }
            return Err(Error::PrecisionExhausted { precision: desc.precision() });
        };
        let eps_d = level_epsilon(d, eps, &desc);
        let alternating = desc.involution() != InvolutionClass::Unramified && eps_d == Epsilon::Minus;
        if alternating {
            let (i, j) = first_off_diagonal(&t, k, d).ok_or(Error::Inconsistent("no pivot pair"))?;
            t.swap(k, i);
            t.swap(k + 1, j);
            eliminate_pair(&mut t, k, d)?;
            levels.extend([d, d]);
            k += 2;
        } else {
            let diag = pick_pivot(&t, d, (k..m).map(|i| (i, i))).map(|(i, _)| i);
            let i = match diag {
                Some(i) => i,
                None => {
                    let (i, j) = first_off_diagonal(&t, k, d).ok_or(Error::Inconsistent("no pivot"))?;
                    let s = if eps_d == Epsilon::Minus { desc.skew_unit().expect("unramified") } else { desc.one() };
                    let c = (&s * &t.g.get(i, j).divide_by_uniformiser(d)?).invert()?;
                    t.add(i, j, &c);
                    if t.g.get(i, i).valuation() != Valuation::Finite(d) {
                        return Err(Error::Inconsistent("u + v does not have unit length"));
                    }
                    i
                }
            };
            t.swap(k, i);
            eliminate_unit(&mut t, k)?;
            levels.push(d);
            k += 1;
        }
    }
    Ok((t, levels))
}

/// Rebuilds an ε-hermitian block from its upper triangle.
fn hermitian_block(m: &RingMatrix, eps: Epsilon) -> RingMatrix {
    let n = m.rows();
    Matrix::from_fn(m.ctx(), n, n, |i, j| {
        if i <= j {
            m.get(i, j).clone()
        } else {
            let c = m.get(j, i).involute();
            if eps == Epsilon::Minus {
                -c
            } else {
                c
            }
        }
    })
}

pub fn omeara_decompose(f: &GramForm) -> Result<OMearaDecomposition> {
    let desc = f.descriptor();
    let eps = f.epsilon();
    let (t, levels) = run_decomposition(f.matrix(), eps)?;
    let mut blocks = Vec::new();
    let mut start = 0;
    while start < levels.len() {
        let level = levels[start];
        let end = start + levels[start..].iter().take_while(|&&l| l == level).count();
        let idx: Vec<usize> = (start..end).collect();
        let sub = t.g.submatrix(&idx);
        let scaled = Matrix::from_fn(desc, idx.len(), idx.len(), |i, j| {
            sub.get(i, j).divide_by_uniformiser(level).expect("entries divisible by y^level")
        });
        let e = level_epsilon(level, eps, &desc);
        blocks.push(Block { level, form: GramForm::from_parts(hermitian_block(&scaled, e), e) });
        start = end;
    }
    Ok(OMearaDecomposition {
        descriptor: desc,
        epsilon: eps,
        blocks,
        zero_rank: f.size() - levels.len(),
        witness: t.x,
    })
}

fn check_invertible(f: &GramForm) -> Result<()> {
    if f.matrix().is_invertible() {
        Ok(())
    } else {
        Err(Error::Degenerate)
    }
}

/// Witness to `⊕ [[0,1],[-1,0]]` for an invertible skew hermitian form over
/// a ramified (or trivial) involution.
pub fn symplectic_basis(f: &GramForm) -> Result<Witness> {
    let desc = f.descriptor();
    if desc.involution() == InvolutionClass::Unramified || f.epsilon() != Epsilon::Minus {
        return Err(Error::WrongInstance("symplectic bases need a skew form over a ramified involution"));
    }
    check_invertible(f)?;
    let m = f.size();
    let mut t = CongruenceTracker::new(f.matrix().clone());
    let mut k = 0;
    while k < m {
        let j = (k + 1..m).find(|&j| t.g.get(k, j).is_unit()).ok_or(Error::Degenerate)?;
        t.swap(k + 1, j);
        let tr = hensel::symplectic_pair_transform(t.g.get(k, k), t.g.get(k, k + 1), t.g.get(k + 1, k + 1))?;
        t.transform_pair(k, k + 1, tr);
        for l in k + 2..m {
            // pivot block is J: solve J (a, b) = (G_kl, G_{k+1,l})
            let a = -t.g.get(k + 1, l);
            let b = t.g.get(k, l).clone();
            t.add(l, k, &-a);
            t.add(l, k + 1, &-b);
        }
        clear_cross(&mut t, k..k + 2);
        k += 2;
    }
    Ok(Witness::new(t.x))
}

/// Lifts a residue witness `Xbar` (with `Xbar'* M̄ Xbar = N̄`) to `X` with
/// `X'* M X = N` at the working precision.
pub fn lift_residue_congruence(
    m: &GramForm,
    n: &GramForm,
    xbar: &crate::matrix::ResidueMatrix,
) -> Result<Witness> {
    let desc = m.descriptor();
    if desc != n.descriptor() || m.epsilon() != n.epsilon() || m.size() != n.size() {
        return Err(Error::ShapeMismatch);
    }
    check_invertible(m)?;
    check_invertible(n)?;
    if xbar.rows() != m.size()
        || xbar.cols() != m.size()
        || xbar.determinant().is_zero()
        || m.matrix().residue().congruence(xbar) != n.matrix().residue()
    {
        return Err(Error::ResidueWitnessInvalid);
    }
    let l = RingMatrix::lift(desc, xbar);
    let m1 = m.congruence(&l);
    let alternating = desc.involution() != InvolutionClass::Unramified && m.epsilon() == Epsilon::Minus;
    let x = if alternating {
        let sm = symplectic_basis(&m1)?.into_matrix();
        let sn = symplectic_basis(n)?.into_matrix();
        l.mul(&sm).mul(&sn.inverse()?)
    } else {
        // diagonalise N, then match M's diagonal entries one at a time
        let (ty, _) = run_decomposition(n.matrix(), n.epsilon())?;
        let y = ty.x;
        let dg = ty.g;
        let mut t = CongruenceTracker::new(m1.matrix().congruence(&y));
        for k in 0..t.size() {
            let ratio = dg.get(k, k) * &t.g.get(k, k).invert()?;
            let c = hensel::solve_norm_equation(&ratio)?;
            t.scale(k, &c);
            eliminate_unit(&mut t, k)?;
        }
        l.mul(&y).mul(&t.x).mul(&y.inverse()?)
    };
    let w = Witness::new(x);
    if !w.verify(m, n) {
        return Err(Error::Inconsistent("lifted witness does not verify"));
    }
    Ok(w)
}

/// Ring-level canonical block; reduces to the residue representative.
fn canonical_block(desc: RingDescriptor, ty: FormType, class: ResidueClassification) -> Result<RingMatrix> {
    // validates the class and rank parity
    residue::canonical_residue_form(desc.residue_field(), ty, class)?;
    let n = class.rank;
    Ok(match ty {
        FormType::Symmetric => {
            let mut d = alloc::vec![desc.one(); n];
            if class.disc == DiscClass::Nonsquare {
                d[n - 1] = desc.nu_element();
            }
            Matrix::diagonal(desc, &d)
        }
        FormType::Alternating => residue::symplectic_standard(desc, n / 2),
        FormType::Hermitian => Matrix::identity(desc, n),
        FormType::SkewHermitian => {
            let b = desc.skew_unit().ok_or(Error::TypeMismatch("skew hermitian blocks need an unramified ring"))?;
            Matrix::diagonal(desc, &alloc::vec![b; n])
        }
    })
}

/// The canonical matrix `⊕ y^i C_i ⊕ 0` of a profile.
pub fn canonical_from_profile(profile: &InvariantProfile) -> Result<GramForm> {
    let desc = profile.descriptor;
    let mut parts = Vec::new();
    for l in &profile.levels {
        if l.level >= desc.precision() {
            return Err(Error::PrecisionExhausted { precision: desc.precision() });
        }
        let c = canonical_block(desc, l.form_type, l.classification)?;
        parts.push(c.scale(&desc.uniformiser_pow(l.level)));
    }
    parts.push(Matrix::zeros(desc, profile.zero_rank, profile.zero_rank));
    let refs: Vec<&RingMatrix> = parts.iter().collect();
    form::validate(Matrix::block_diag(desc, &refs), profile.epsilon)
}

/// The canonical form of `f` and a witness to it.
pub fn normal_form(f: &GramForm) -> Result<(GramForm, Witness)> {
    let desc = f.descriptor();
    let dec = omeara_decompose(f)?;
    let profile = dec.profile()?;
    let mut xs = Vec::with_capacity(dec.blocks.len() + 1);
    for (b, l) in dec.blocks.iter().zip(&profile.levels) {
        let target = GramForm::from_parts(canonical_block(desc, l.form_type, l.classification)?, b.form.epsilon());
        let xbar = residue::residue_congruence_witness(
            &b.form.matrix().residue(),
            &target.matrix().residue(),
            l.form_type,
        )?;
        xs.push(lift_residue_congruence(&b.form, &target, &xbar)?.into_matrix());
    }
    xs.push(Matrix::identity(desc, dec.zero_rank));
    let refs: Vec<&RingMatrix> = xs.iter().collect();
    let x = dec.witness.mul(&Matrix::block_diag(desc, &refs));
    let canonical = canonical_from_profile(&profile)?;
    let w = Witness::new(x);
    if !w.verify(f, &canonical) {
        return Err(Error::Inconsistent("normal form witness does not verify"));
    }
    Ok((canonical, w))
}

/// Where two profiles first differ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Disagreement {
    Size { level: u32 },
    Disc { level: u32 },
    Radical,
}

impl fmt::Display for Disagreement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disagreement::Size { level } => write!(f, "level {level}: size"),
            Disagreement::Disc { level } => write!(f, "level {level}: disc"),
            Disagreement::Radical => f.write_str("d_inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub congruent: bool,
    pub reason: Option<Disagreement>,
    pub profiles: (InvariantProfile, InvariantProfile),
}

fn check_shape(f: &GramForm, g: &GramForm) -> Result<()> {
    if f.descriptor() != g.descriptor() || f.epsilon() != g.epsilon() || f.size() != g.size() {
        return Err(Error::ShapeMismatch);
    }
    Ok(())
}

/// First level at which two profiles disagree.
pub fn compare_profiles(a: &InvariantProfile, b: &InvariantProfile) -> Option<Disagreement> {
    let mut levels: Vec<u32> = a.levels.iter().chain(&b.levels).map(|l| l.level).collect();
    levels.sort_unstable();
    levels.dedup();
    for level in levels {
        let find = |p: &InvariantProfile| p.levels.iter().find(|l| l.level == level).copied();
        match (find(a), find(b)) {
            (Some(x), Some(y)) if x.size == y.size => {
                if x.classification.disc != y.classification.disc && x.classification.disc != DiscClass::NotApplicable {
                    return Some(Disagreement::Disc { level });
                }
            }
            _ => return Some(Disagreement::Size { level }),
        }
    }
    (a.zero_rank != b.zero_rank).then_some(Disagreement::Radical)
}

pub fn decide_congruent(f: &GramForm, g: &GramForm) -> Result<Decision> {
    check_shape(f, g)?;
    let pf = form::invariant_profile(f)?;
    let pg = form::invariant_profile(g)?;
    let reason = compare_profiles(&pf, &pg);
    Ok(Decision { congruent: reason.is_none(), reason, profiles: (pf, pg) })
}

/// `X` with `X'* f X = g`, composed through the shared canonical form.
pub fn congruence_witness(f: &GramForm, g: &GramForm) -> Result<Witness> {
    if !decide_congruent(f, g)?.congruent {
        return Err(Error::NotCongruent);
    }
    let (cf, xf) = normal_form(f)?;
    let (cg, xg) = normal_form(g)?;
    if cf != cg {
        return Err(Error::Inconsistent("congruent forms with different canonical forms"));
    }
    let w = Witness::new(xf.matrix().mul(&xg.matrix().inverse()?));
    if !w.verify(f, g) {
        return Err(Error::Inconsistent("composed witness does not verify"));
    }
    Ok(w)
}

/// Whether some form has `d_i = d[i]` at every finite level.
pub fn realisable(d: &[usize], epsilon: Epsilon, desc: &RingDescriptor) -> bool {
    if desc.involution() == InvolutionClass::Unramified {
        return true;
    }
    d.iter()
        .enumerate()
        .all(|(i, &di)| di % 2 == 0 || level_type(i as u32, epsilon, desc) != FormType::Alternating)
}

/// A canonical form with `d_i = d[i]` and `d_∞ = zero_rank`, or `None` when
/// the profile is not realisable.
pub fn realise(d: &[usize], zero_rank: usize, epsilon: Epsilon, desc: &RingDescriptor) -> Result<Option<GramForm>> {
    if !realisable(d, epsilon, desc) {
        return Ok(None);
    }
    let levels = d
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .map(|(i, &size)| {
            let ty = level_type(i as u32, epsilon, desc);
            let disc = if ty == FormType::Symmetric { DiscClass::Square } else { DiscClass::NotApplicable };
            LevelData { level: i as u32, size, form_type: ty, classification: ResidueClassification { rank: size, disc } }
        })
        .collect();
    let profile = InvariantProfile { descriptor: *desc, epsilon, levels, zero_rank };
    canonical_from_profile(&profile).map(Some)
}
