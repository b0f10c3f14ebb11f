#![allow(dead_code)]

use locform_core::form::{self, Epsilon, GramForm};
use locform_core::matrix::{Matrix, RingMatrix};
use locform_core::ring::{RingDescriptor, RingElement, RingKind};
use rand::rngs::StdRng;
use rand::Rng;

pub fn ring(kind: RingKind, p: u64, precision: u32) -> RingDescriptor {
    RingDescriptor::new(kind, p, precision).unwrap()
}

/// A unit of small degree/height, so products stay exact for a while.
pub fn random_unit(r: &RingDescriptor, rng: &mut StdRng) -> RingElement {
    let p = r.p() as i64;
    let nz = |rng: &mut StdRng| rng.gen_range(1..p);
    match r.kind() {
        RingKind::SeriesTrivial | RingKind::SeriesRamified => {
            let deg = rng.gen_range(0..5);
            let mut c = vec![nz(rng)];
            c.extend((0..deg).map(|_| rng.gen_range(0..p)));
            r.series(&c).unwrap()
        }
        RingKind::SeriesUnramified => {
            let deg = rng.gen_range(0..5);
            let mut c = vec![(nz(rng), rng.gen_range(0..p))];
            if rng.gen_bool(0.5) {
                c[0] = (rng.gen_range(0..p), nz(rng));
            }
            c.extend((0..deg).map(|_| (rng.gen_range(0..p), rng.gen_range(0..p))));
            r.series_ext(&c).unwrap()
        }
        RingKind::PadicTrivial => {
            let h = (p * p * p) as i128;
            r.padic(nz(rng) as i128 + p as i128 * rng.gen_range(-h..=h)).unwrap()
        }
        RingKind::PadicRamified => {
            let h = (p * p) as i128;
            r.padic_pair(nz(rng) as i128 + p as i128 * rng.gen_range(-h..=h), rng.gen_range(-h..=h))
                .unwrap()
        }
        RingKind::PadicUnramified => {
            let h = (p * p) as i128;
            let (mut a, mut b) = (rng.gen_range(0..p) as i128, nz(rng) as i128);
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut a, &mut b);
            }
            r.padic_pair(a + p as i128 * rng.gen_range(-h..=h), b + p as i128 * rng.gen_range(-h..=h))
                .unwrap()
        }
    }
}

/// `y^v` times a random unit.
pub fn random_with_valuation(r: &RingDescriptor, v: u32, rng: &mut StdRng) -> RingElement {
    &r.uniformiser_pow(v) * &random_unit(r, rng)
}

pub fn random_element(r: &RingDescriptor, max_val: u32, rng: &mut StdRng) -> RingElement {
    let v = rng.gen_range(0..=max_val);
    random_with_valuation(r, v, rng)
}

fn twist(x: RingElement, eps: Epsilon) -> RingElement {
    match eps {
        Epsilon::Plus => x,
        Epsilon::Minus => -x,
    }
}

/// A random ε-hermitian matrix with nonzero entries of valuation at most `max_val`.
pub fn random_hermitian(r: &RingDescriptor, m: usize, eps: Epsilon, max_val: u32, rng: &mut StdRng) -> GramForm {
    let mut g = Matrix::zeros(*r, m, m);
    for i in 0..m {
        for j in i..m {
            let x = random_element(r, max_val, rng);
            if i == j {
                // x + εx* is fixed (ε = 1) or negated (ε = -1) by the involution
                let d = &x + &twist(x.involute(), eps);
                g.set(i, i, d);
            } else {
                g.set(j, i, twist(x.involute(), eps));
                g.set(i, j, x);
            }
        }
    }
    form::validate(g, eps).expect("constructed hermitian")
}

/// A random matrix that is invertible over the ring.
pub fn random_invertible(r: &RingDescriptor, m: usize, rng: &mut StdRng) -> RingMatrix {
    loop {
        let x = Matrix::from_fn(*r, m, m, |_, _| {
            if rng.gen_bool(0.2) {
                r.zero()
            } else {
                random_element(r, 2, rng)
            }
        });
        if x.is_invertible() {
            return x;
        }
    }
}

/// `X'* M X` computed entry by entry, independently of the library's
/// matrix product.
pub fn congruence_by_hand(m: &RingMatrix, x: &RingMatrix) -> Vec<Vec<RingElement>> {
    let r = m.ctx();
    let n = m.rows();
    let k = x.cols();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut acc = r.zero();
                    for a in 0..n {
                        for b in 0..n {
                            let t = &(&x.get(a, i).involute() * m.get(a, b)) * x.get(b, j);
                            acc = &acc + &t;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn equals_by_hand(lhs: &[Vec<RingElement>], rhs: &RingMatrix) -> bool {
    lhs.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, x)| (x - rhs.get(i, j)).is_zero()))
}

pub fn all_instances(p: u64, precision: u32) -> Vec<RingDescriptor> {
    RingKind::ALL.iter().map(|&k| ring(k, p, precision)).collect()
}

pub const EPSILONS: [Epsilon; 2] = [Epsilon::Plus, Epsilon::Minus];
