//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use common::*;
use locform_core::decompose::{self, Witness};
use locform_core::form::{self, Epsilon, GramForm};
use locform_core::hensel;
use locform_core::matrix::{Matrix, RingMatrix};
use locform_core::ring::{InvolutionClass, RingDescriptor, RingElement, RingKind, Valuation};
use locform_core::smith;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const N: u32 = 32;
const PRIMES: [u64; 2] = [3, 5];

type Outcome = Result<String, String>;

fn random_form(r: &RingDescriptor, rng: &mut StdRng) -> GramForm {
    let m = rng.gen_range(1..=5);
    let eps = EPSILONS[rng.gen_range(0..2)];
    random_hermitian(r, m, eps, 4, rng)
}

fn instances() -> Vec<RingDescriptor> {
    PRIMES.iter().flat_map(|&p| all_instances(p, N)).collect()
}

fn label(r: &RingDescriptor) -> String {
    format!("{} p={}", r.kind().name(), r.p())
}

fn time_limit(start: Instant, limit: Duration, summary: String) -> Outcome {
    let el = start.elapsed();
    if el < limit {
        Ok(format!("{summary} in {:.1}s", el.as_secs_f64()))
    } else {
        Err(format!("{summary} but took {:.1}s (limit {}s)", el.as_secs_f64(), limit.as_secs()))
    }
}

fn witness_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut total = 0;
    for r in instances() {
        for _ in 0..200 {
            let f = random_form(&r, &mut rng);
            let (canon, w) = decompose::normal_form(&f).map_err(|e| format!("{}: {e} on {:?}", label(&r), f))?;
            let lhs = congruence_by_hand(f.matrix(), w.matrix());
            if !w.matrix().is_invertible() || !equals_by_hand(&lhs, canon.matrix()) {
                return Err(format!("{}: witness fails for {:?}", label(&r), f));
            }
            total += 1;
        }
    }
    time_limit(start, Duration::from_secs(30), format!("{total}/{total} witnesses verified"))
}

fn congruence_completeness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut total = 0;
    for r in instances() {
        for _ in 0..200 {
            let f = random_form(&r, &mut rng);
            let x = random_invertible(&r, f.size(), &mut rng);
            let g = form::validate(f.matrix().congruence(&x), f.epsilon()).map_err(|e| e.to_string())?;
            let d = decompose::decide_congruent(&f, &g).map_err(|e| format!("{}: {e}", label(&r)))?;
            if !d.congruent {
                return Err(format!("{}: {:?} rejected ({:?})", label(&r), f, d.reason));
            }
            total += 1;
        }
    }
    Ok(format!("{total}/{total} conjugates recognised"))
}

/// A nine-element ring given by tables, independent of the library arithmetic.
struct Table {
    add: [[u8; 9]; 9],
    mul: [[u8; 9]; 9],
    neg: [u8; 9],
    conj: [u8; 9],
    unit: [bool; 9],
}

impl Table {
    /// `F_3[y]/(y^2)`, element `a + b y` encoded as `a + 3b`.
    fn dual_numbers(ramified: bool) -> Table {
        let enc = |a: i64, b: i64| (a.rem_euclid(3) + 3 * b.rem_euclid(3)) as u8;
        let dec = |x: usize| ((x % 3) as i64, (x / 3) as i64);
        let mut t = Table { add: [[0; 9]; 9], mul: [[0; 9]; 9], neg: [0; 9], conj: [0; 9], unit: [false; 9] };
        for x in 0..9 {
            let (a, b) = dec(x);
            t.neg[x] = enc(-a, -b);
            t.conj[x] = if ramified { enc(a, -b) } else { x as u8 };
            t.unit[x] = a != 0;
            for y in 0..9 {
                let (c, d) = dec(y);
                t.add[x][y] = enc(a + c, b + d);
                t.mul[x][y] = enc(a * c, a * d + b * c);
            }
        }
        t
    }

    fn integers_mod_9() -> Table {
        let mut t = Table { add: [[0; 9]; 9], mul: [[0; 9]; 9], neg: [0; 9], conj: [0; 9], unit: [false; 9] };
        for x in 0..9 {
            t.neg[x] = ((9 - x) % 9) as u8;
            t.conj[x] = x as u8;
            t.unit[x] = x % 3 != 0;
            for y in 0..9 {
                t.add[x][y] = ((x + y) % 9) as u8;
                t.mul[x][y] = ((x * y) % 9) as u8;
            }
        }
        t
    }

    fn hermitian(&self, eps: Epsilon) -> Vec<[u8; 4]> {
        let tw = |x: u8| if eps == Epsilon::Plus { x } else { self.neg[x as usize] };
        let mut out = Vec::new();
        for a in 0..9u8 {
            for b in 0..9u8 {
                for d in 0..9u8 {
                    let ok = |x: u8| tw(self.conj[x as usize]) == x;
                    if ok(a) && ok(d) {
                        out.push([a, b, tw(self.conj[b as usize]), d]);
                    }
                }
            }
        }
        out
    }

    fn gl2(&self) -> Vec<[u8; 4]> {
        let mut out = Vec::new();
        for code in 0..9 * 9 * 9 * 9 {
            let x = [code % 9, code / 9 % 9, code / 81 % 9, code / 729];
            let det = self.add[self.mul[x[0]][x[3]] as usize][self.neg[self.mul[x[1]][x[2]] as usize] as usize];
            if self.unit[det as usize] {
                out.push(x.map(|v| v as u8));
            }
        }
        out
    }

    /// `X'* M X` for row-major 2x2 matrices.
    fn congruence(&self, m: &[u8; 4], x: &[u8; 4]) -> [u8; 4] {
        let mul = |a: u8, b: u8| self.mul[a as usize][b as usize];
        let add = |a: u8, b: u8| self.add[a as usize][b as usize];
        let mut mx = [0u8; 4];
        for i in 0..2 {
            for j in 0..2 {
                mx[2 * i + j] = add(mul(m[2 * i], x[j]), mul(m[2 * i + 1], x[2 + j]));
            }
        }
        let mut out = [0u8; 4];
        for i in 0..2 {
            for j in 0..2 {
                let xs = |k: usize| self.conj[x[2 * k + i] as usize];
                out[2 * i + j] = add(mul(xs(0), mx[j]), mul(xs(1), mx[2 + j]));
            }
        }
        out
    }
}

fn exhaustive_oracle() -> Outcome {
    let start = Instant::now();
    let cases = [
        (RingKind::SeriesTrivial, Table::dual_numbers(false)),
        (RingKind::SeriesRamified, Table::dual_numbers(true)),
        (RingKind::PadicTrivial, Table::integers_mod_9()),
    ];
    let mut checked = 0;
    let mut classes_total = 0;
    for (kind, table) in &cases {
        let r = RingDescriptor::quotient(*kind, 3, 2).map_err(|e| e.to_string())?;
        let elem = |x: u8| -> RingElement {
            if kind.is_padic() {
                r.padic(x as i128).unwrap()
            } else {
                r.series(&[(x % 3) as i64, (x / 3) as i64]).unwrap()
            }
        };
        let gl = table.gl2();
        for eps in EPSILONS {
            let forms = table.hermitian(eps);
            let mut class: HashMap<[u8; 4], usize> = HashMap::new();
            let mut reps = Vec::new();
            for m in &forms {
                if class.contains_key(m) {
                    continue;
                }
                let id = reps.len();
                reps.push(*m);
                for x in &gl {
                    class.insert(table.congruence(m, x), id);
                }
            }
            let to_form = |m: &[u8; 4]| {
                let mat = Matrix::from_fn(r, 2, 2, |i, j| elem(m[2 * i + j]));
                form::validate(mat, eps).unwrap()
            };
            let rep_forms: Vec<GramForm> = reps.iter().map(to_form).collect();
            for m in &forms {
                let f = to_form(m);
                for (id, g) in rep_forms.iter().enumerate() {
                    let d = decompose::decide_congruent(&f, g)
                        .map_err(|e| format!("{} eps={eps}: {e} on {m:?}", kind.name()))?;
                    if d.congruent != (class[m] == id) {
                        return Err(format!(
                            "{} eps={eps}: {m:?} vs {:?}: oracle {} library {}",
                            kind.name(),
                            reps[id],
                            class[m] == id,
                            d.congruent
                        ));
                    }
                    checked += 1;
                }
            }
            classes_total += reps.len();
        }
    }
    time_limit(
        start,
        Duration::from_secs(300),
        format!("{classes_total} classes, {checked} verdicts match brute force"),
    )
}

fn random_skew(r: &RingDescriptor, rng: &mut StdRng) -> RingElement {
    random_element(r, 3, rng).skew_part()
}

fn skew_quadratic_certificate() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut total = 0;
    for p in PRIMES {
        for kind in [RingKind::SeriesRamified, RingKind::PadicRamified] {
            let r = ring(kind, p, N);
            for _ in 0..100 {
                let alpha = random_skew(&r, &mut rng);
                let gamma = random_skew(&r, &mut rng);
                let beta = random_unit(&r, &mut rng);
                let its = hensel::skew_quadratic_iterates(&alpha, &beta, &gamma).map_err(|e| e.to_string())?;
                let mut last = Valuation::Infinite;
                for (k, t) in its.iter().enumerate() {
                    let v = hensel::skew_quadratic_residual(&alpha, &beta, &gamma, t).valuation();
                    if v.lower_bound() < k as u32 + 1 {
                        return Err(format!("{}: residual {} has valuation {v:?}", label(&r), k + 1));
                    }
                    last = v;
                }
                if its.is_empty() {
                    last = gamma.valuation();
                }
                if last.lower_bound() < N {
                    return Err(format!("{}: final residual valuation {last:?}", label(&r)));
                }
                total += 1;
            }
        }
    }
    Ok(format!("{total}/{total} iterate sequences certified"))
}

fn sqrt_p_symplectic_basis() -> Outcome {
    let r = ring(RingKind::PadicRamified, 5, N);
    let y = r.uniformiser();
    let m = Matrix::from_rows(r, vec![vec![y.clone(), r.one()], vec![-r.one(), y]]).unwrap();
    let f = form::validate(m, Epsilon::Minus).map_err(|e| e.to_string())?;
    let w: Witness = decompose::symplectic_basis(&f).map_err(|e| e.to_string())?;
    let g = congruence_by_hand(f.matrix(), w.matrix());
    let j = Matrix::from_rows(r, vec![vec![r.zero(), r.one()], vec![-r.one(), r.zero()]]).unwrap();
    if w.matrix().is_invertible() && equals_by_hand(&g, &j) && w.verify(&f, &form::validate(j, Epsilon::Minus).unwrap()) {
        Ok(format!("Gram of basis is [[0,1],[-1,0]] mod 5^{}", N / 2))
    } else {
        Err(format!("basis {:?} gives {:?}", w.matrix(), g))
    }
}

fn smith_bridge() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut total = 0;
    for r in instances() {
        for _ in 0..200 {
            let f = random_form(&r, &mut rng);
            let (e, z) = smith::omeara_exponents(&f).map_err(|e| format!("{}: {e}", label(&r)))?;
            let s = smith::smith_form(f.matrix()).map_err(|e| format!("{}: {e}", label(&r)))?;
            if e != s.valuations || z != s.corank {
                return Err(format!("{}: levels {e:?} vs smith {:?} for {:?}", label(&r), s.valuations, f));
            }
            total += 1;
        }
    }
    Ok(format!("{total}/{total} multisets agree"))
}

/// `⊕ y^i B_i` with random invertible blocks of the right sign.
fn engineered(r: &RingDescriptor, eps: Epsilon, sizes: &[usize], rng: &mut StdRng) -> GramForm {
    let m: usize = sizes.iter().sum();
    let mut g = Matrix::zeros(*r, m, m);
    let mut off = 0;
    for (i, &s) in sizes.iter().enumerate() {
        if s == 0 {
            continue;
        }
        // (y^i)* = (-1)^i y^i, so B_i is ε(-1)^i-hermitian
        let beps = if i % 2 == 0 { eps } else { EPSILONS.into_iter().find(|&e| e != eps).unwrap() };
        let b = loop {
            let b = random_hermitian(r, s, beps, 1, rng);
            if b.matrix().is_invertible() {
                break b;
            }
        };
        let yi = r.uniformiser_pow(i as u32);
        for a in 0..s {
            for c in 0..s {
                g.set(off + a, off + c, &yi * b.entry(a, c));
            }
        }
        off += s;
    }
    let f = form::validate(g, eps).unwrap();
    let x = random_invertible(r, m, rng);
    f.congruence(&x)
}

fn invariant_factor_crosscheck() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let mut total = 0;
    let mut congruent = 0;
    for p in PRIMES {
        for kind in [RingKind::SeriesUnramified, RingKind::PadicUnramified] {
            let r = ring(kind, p, N);
            for k in 0..200 {
                let eps = EPSILONS[rng.gen_range(0..2)];
                let (f, g) = match k % 4 {
                    0 => {
                        let f = random_hermitian(&r, rng.gen_range(1..=5), eps, 4, &mut rng);
                        let x = random_invertible(&r, f.size(), &mut rng);
                        let g = f.congruence(&x);
                        (f, g)
                    }
                    1 => {
                        let sizes: Vec<usize> = (0..3).map(|_| rng.gen_range(0..=2)).collect();
                        let sizes = if sizes.iter().sum::<usize>() == 0 { vec![1] } else { sizes };
                        (engineered(&r, eps, &sizes, &mut rng), engineered(&r, eps, &sizes, &mut rng))
                    }
                    2 => {
                        let a: Vec<usize> = vec![rng.gen_range(0..=2), rng.gen_range(1..=2), rng.gen_range(0..=2)];
                        let mut b = a.clone();
                        b[1] -= 1;
                        b[if rng.gen_bool(0.5) { 0 } else { 2 }] += 1;
                        (engineered(&r, eps, &a, &mut rng), engineered(&r, eps, &b, &mut rng))
                    }
                    _ => {
                        let m = rng.gen_range(1..=5);
                        (random_hermitian(&r, m, eps, 4, &mut rng), random_hermitian(&r, m, eps, 4, &mut rng))
                    }
                };
                let by_smith = smith::congruent_by_invariant_factors(&f, &g).map_err(|e| e.to_string())?;
                let by_levels = decompose::decide_congruent(&f, &g).map_err(|e| e.to_string())?.congruent;
                if by_smith != by_levels {
                    return Err(format!("{}: smith {by_smith} vs levels {by_levels} on {f:?} / {g:?}", label(&r)));
                }
                congruent += by_smith as usize;
                total += 1;
            }
        }
    }
    Ok(format!("{total}/{total} pairs agree ({congruent} congruent)"))
}

fn fixed_unit(r: &RingDescriptor, rng: &mut StdRng) -> RingElement {
    loop {
        let x = random_unit(r, rng).symmetric_part();
        if x.is_unit() {
            return x;
        }
    }
}

fn hensel_engines() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut total = 0;
    for r in instances() {
        let nu = r.nu_element();
        for _ in 0..200 {
            let x = fixed_unit(&r, &mut rng);
            let b = &x * &x;
            let s = hensel::hensel_sqrt(&b).map_err(|e| format!("{}: sqrt: {e}", label(&r)))?;
            if !(&(&s * &s) - &b).is_zero() || s.involute() != s {
                return Err(format!("{}: sqrt of {b} gave {s}", label(&r)));
            }
            // admissible norm targets: any fixed unit when unramified, else
            // one with square residue
            let mut c = fixed_unit(&r, &mut rng);
            if r.involution() != InvolutionClass::Unramified && hensel::hensel_sqrt(&c).is_err() {
                c = &c * &nu;
            }
            let a = hensel::solve_norm_equation(&c).map_err(|e| format!("{}: norm: {e} for {c}", label(&r)))?;
            if !(&(&a.involute() * &a) - &c).is_zero() {
                return Err(format!("{}: norm of {a} is not {c}", label(&r)));
            }
            total += 1;
        }
    }
    Ok(format!("{total}/{total} square roots and {total}/{total} norm solutions re-substitute"))
}

/// Level type computed from scratch: `true` when the rescaled residue form on
/// level `i` is alternating.
fn alternating_level(r: &RingDescriptor, eps: Epsilon, i: usize) -> bool {
    match r.involution() {
        InvolutionClass::Trivial => eps == Epsilon::Minus,
        InvolutionClass::Ramified => (eps == Epsilon::Minus) == (i % 2 == 0),
        InvolutionClass::Unramified => false,
    }
}

/// Canonical candidate for a profile; odd alternating levels get a 1x1 block
/// `y^i s` with `s` skew, which then lands elsewhere.
fn candidate(r: &RingDescriptor, eps: Epsilon, d: &[usize]) -> GramForm {
    let m: usize = d.iter().sum();
    let mut g: RingMatrix = Matrix::zeros(*r, m, m);
    let mut off = 0;
    for (i, &s) in d.iter().enumerate() {
        let yi = r.uniformiser_pow(i as u32);
        if alternating_level(r, eps, i) {
            for k in 0..s / 2 {
                let a = off + 2 * k;
                g.set(a, a + 1, yi.clone());
                // mirror entry is ε (y^i)*
                let mirror = yi.involute();
                g.set(a + 1, a, if eps == Epsilon::Plus { mirror } else { -mirror });
            }
            if s % 2 == 1 {
                let sk = if r.involution() == InvolutionClass::Ramified { r.uniformiser() } else { r.zero() };
                g.set(off + s - 1, off + s - 1, &yi * &sk);
            }
        } else {
            let unit = match r.involution() {
                InvolutionClass::Unramified if (eps == Epsilon::Minus) == (i % 2 == 0) => r.skew_unit().unwrap(),
                _ => r.one(),
            };
            for k in 0..s {
                g.set(off + k, off + k, &yi * &unit);
            }
        }
        off += s;
    }
    form::validate(g, eps).expect("candidate is ε-hermitian")
}

fn realisability() -> Outcome {
    let start = Instant::now();
    let mut total = 0;
    let mut yes = 0;
    for r in instances() {
        for eps in EPSILONS {
            for code in 0..64 {
                let d = [code % 4, code / 4 % 4, code / 16];
                let c = candidate(&r, eps, &d);
                let prof = form::invariant_profile(&c).map_err(|e| format!("{}: {e} on {d:?}", label(&r)))?;
                let achieved = (0..3).all(|i| prof.d(i as u32) == d[i]) && prof.zero_rank == 0 && prof.total_size() == c.size();
                let verdict = decompose::realisable(&d, eps, &r);
                if achieved != verdict {
                    return Err(format!("{} eps={eps} d={d:?}: realisable {verdict}, candidate {achieved}", label(&r)));
                }
                if verdict {
                    let built = decompose::realise(&d, 0, eps, &r).map_err(|e| e.to_string())?.expect("realisable");
                    let bp = form::invariant_profile(&built).map_err(|e| e.to_string())?;
                    if (0..3).any(|i| bp.d(i as u32) != d[i]) {
                        return Err(format!("{} eps={eps} d={d:?}: realise gave {bp}", label(&r)));
                    }
                    yes += 1;
                }
                total += 1;
            }
        }
    }
    time_limit(start, Duration::from_secs(60), format!("{total} profiles checked ({yes} realisable)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("witness soundness", witness_soundness),
        ("congruence completeness under conjugation", congruence_completeness),
        ("exhaustive oracle equivalence", exhaustive_oracle),
        ("skew quadratic convergence certificate", skew_quadratic_certificate),
        ("symplectic basis for [[sqrt5,1],[-1,sqrt5]]", sqrt_p_symplectic_basis),
        ("O'Meara levels vs Smith invariant factors", smith_bridge),
        ("invariant-factor congruence cross-check", invariant_factor_crosscheck),
        ("Hensel engines", hensel_engines),
        ("realisability", realisability),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("PASS {} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg}", i + 1)
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
