//! Classification of possibly degenerate ε-hermitian forms over complete
//! discrete valuation rings with involution.
//!
//! The crate works over six concrete truncated rings (see [`ring::RingKind`])
//! and provides the O'Meara decomposition of a Gram matrix, the invariant
//! dimensions `d_i` with their residue forms, canonical normal forms with
//! change-of-basis witnesses, congruence decisions, Smith forms, and the
//! Hensel-type lifting routines these rest on.
//!
//! ```
//! use locform_core::{decompose, form, ring::{RingDescriptor, RingKind}};
//!
//! let r = RingDescriptor::new(RingKind::PadicRamified, 5, 32).unwrap();
//! let y = r.uniformiser();
//! let m = form::matrix(r, vec![vec![y.clone(), r.one()], vec![-r.one(), y]]).unwrap();
//! let f = form::validate(m, form::Epsilon::Minus).unwrap();
//! let (canonical, witness) = decompose::normal_form(&f).unwrap();
//! assert!(witness.verify(&f, &canonical));
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arith;
pub mod decompose;
pub mod error;
pub mod form;
pub mod hensel;
pub mod matrix;
pub mod residue;
pub mod ring;
pub mod smith;

pub use error::{Error, Result};
