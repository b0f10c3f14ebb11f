//! ε-hermitian Gram matrices, the level types of the induced residue forms,
//! and the invariant profile `(d_i)`.

use alloc::vec::Vec;
use core::fmt;

use crate::decompose;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, RingMatrix};
use crate::residue::{FormType, ResidueClassification};
use crate::ring::{InvolutionClass, RingDescriptor, RingElement};
use crate::smith;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Epsilon {
    Plus,
    Minus,
}

impl Epsilon {
    pub fn from_sign(s: i64) -> Option<Epsilon> {
        match s {
            1 => Some(Epsilon::Plus),
            -1 => Some(Epsilon::Minus),
            _ => None,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Epsilon::Plus => 1,
            Epsilon::Minus => -1,
        }
    }

    /// `self * (-1)^i`.
    pub fn twist(self, i: u32) -> Epsilon {
        if i % 2 == 0 {
            self
        } else {
            match self {
                Epsilon::Plus => Epsilon::Minus,
                Epsilon::Minus => Epsilon::Plus,
            }
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sign())
    }
}

/// Builds a ring matrix from rows, checking shape and descriptors.
pub fn matrix(desc: RingDescriptor, rows: Vec<Vec<RingElement>>) -> Result<RingMatrix> {
    Matrix::from_rows(desc, rows)
}

/// A validated ε-hermitian Gram matrix: `G[j][i] = ε G[i][j]*`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramForm {
    matrix: RingMatrix,
    epsilon: Epsilon,
}

pub fn validate(m: RingMatrix, epsilon: Epsilon) -> Result<GramForm> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch);
    }
    if let Some((row, col)) = m.hermitian_defect(epsilon.sign()) {
        return Err(Error::NotEpsilonHermitian { row, col });
    }
    Ok(GramForm { matrix: m, epsilon })
}

impl GramForm {
    pub fn matrix(&self) -> &RingMatrix {
        &self.matrix
    }
    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }
    pub fn descriptor(&self) -> RingDescriptor {
        self.matrix.ctx()
    }
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }
    pub fn entry(&self, i: usize, j: usize) -> &RingElement {
        self.matrix.get(i, j)
    }

    /// The form in the basis given by the columns of `x`: `x'* G x`.
    pub fn congruence(&self, x: &RingMatrix) -> GramForm {
        GramForm { matrix: self.matrix.congruence(x), epsilon: self.epsilon }
    }

    /// `h(u, v) = u'* G v`.
    pub fn pairing(&self, u: &[RingElement], v: &[RingElement]) -> RingElement {
        let d = self.descriptor();
        let mut acc = d.zero();
        for (i, ui) in u.iter().enumerate() {
            if ui.is_exact_zero() {
                continue;
            }
            let mut row = d.zero();
            for (j, vj) in v.iter().enumerate() {
                row = &row + &(self.matrix.get(i, j) * vj);
            }
            acc = &acc + &(&ui.involute() * &row);
        }
        acc
    }

    /// Same matrix reinterpreted at another sign; used for rescaled blocks.
    pub(crate) fn from_parts(matrix: RingMatrix, epsilon: Epsilon) -> GramForm {
        GramForm { matrix, epsilon }
    }
}

/// Type of the induced residue form `h_i` on level `i`.
pub fn level_type(level: u32, epsilon: Epsilon, desc: &RingDescriptor) -> FormType {
    match desc.involution() {
        InvolutionClass::Trivial => match epsilon {
            Epsilon::Plus => FormType::Symmetric,
            Epsilon::Minus => FormType::Alternating,
        },
        InvolutionClass::Ramified => match epsilon.twist(level) {
            Epsilon::Plus => FormType::Symmetric,
            Epsilon::Minus => FormType::Alternating,
        },
        InvolutionClass::Unramified => match epsilon.twist(level) {
            Epsilon::Plus => FormType::Hermitian,
            Epsilon::Minus => FormType::SkewHermitian,
        },
    }
}

/// Sign of the rescaled form `y^{-i} h` on level `i`.
pub fn level_epsilon(level: u32, epsilon: Epsilon, desc: &RingDescriptor) -> Epsilon {
    match desc.involution() {
        InvolutionClass::Trivial => epsilon,
        _ => epsilon.twist(level),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LevelData {
    pub level: u32,
    pub size: usize,
    pub form_type: FormType,
    pub classification: ResidueClassification,
}

/// The sequence `d_i` with the residue datum of each nonempty finite level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantProfile {
    pub descriptor: RingDescriptor,
    pub epsilon: Epsilon,
    /// Nonempty finite levels, increasing.
    pub levels: Vec<LevelData>,
    /// `d_∞`, the rank of the radical.
    pub zero_rank: usize,
}

impl InvariantProfile {
    /// `d_i` for a finite level.
    pub fn d(&self, level: u32) -> usize {
        self.levels.iter().find(|l| l.level == level).map_or(0, |l| l.size)
    }

    pub fn total_size(&self) -> usize {
        self.levels.iter().map(|l| l.size).sum::<usize>() + self.zero_rank
    }

    /// Each level repeated `d_i` times.
    pub fn exponent_multiset(&self) -> Vec<u32> {
        self.levels.iter().flat_map(|l| core::iter::repeat(l.level).take(l.size)).collect()
    }
}

impl fmt::Display for InvariantProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.levels {
            write!(f, "d_{}={} ({}", l.level, l.size, l.form_type)?;
            if l.form_type == FormType::Symmetric {
                write!(f, ", disc={}", l.classification.disc.name())?;
            }
            f.write_str("); ")?;
        }
        write!(f, "d_inf={}", self.zero_rank)
    }
}

/// Computes the profile from the O'Meara decomposition and checks the level
/// multiset against the Smith invariant factors.
pub fn invariant_profile(form: &GramForm) -> Result<InvariantProfile> {
    let dec = decompose::omeara_decompose(form)?;
    let profile = dec.profile()?;
    let sm = smith::smith_form(form.matrix())?;
    if sm.valuations != profile.exponent_multiset() || sm.corank != profile.zero_rank {
        return Err(Error::Inconsistent("O'Meara levels disagree with Smith invariant factors"));
    }
    Ok(profile)
}

/// Basis of the radical `{v : h(v, V) = 0}`.
pub fn radical_basis(form: &GramForm) -> Result<Vec<Vec<RingElement>>> {
    let dec = decompose::omeara_decompose(form)?;
    let m = form.size();
    Ok((m - dec.zero_rank..m).map(|j| dec.witness.column(j)).collect())
}
