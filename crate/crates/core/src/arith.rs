//! Integer helpers: primality, arithmetic modulo a small prime, square roots
//! modulo p, and multiplication modulo a prime power that may exceed 64 bits.

/// Largest residue characteristic accepted; keeps products of two residues in `u64`.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

/// Largest bit length of `p^K` accepted for the p-adic instances.
pub const MAX_MODULUS_BITS: u32 = 120;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn neg_mod(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (a * b) % p
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo the prime `p`; `a` must be nonzero mod `p`.
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

/// Reduce a signed integer into `[0, p)`.
pub fn reduce_i64(a: i64, p: u64) -> u64 {
    a.rem_euclid(p as i64) as u64
}

/// Euler criterion: 1 for a nonzero square, `p - 1` for a non-square, 0 for zero.
pub fn euler(a: u64, p: u64) -> u64 {
    pow_mod(a, (p - 1) / 2, p)
}

pub fn least_non_residue(p: u64) -> u64 {
    (2..p).find(|&a| euler(a, p) == p - 1).expect("odd prime has a non-residue")
}

/// Square root modulo an odd prime (Tonelli-Shanks). Returns the smaller of
/// the two roots, or `None` for a non-square.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if euler(a, p) != 1 {
        return None;
    }
    let root = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        let mut q = p - 1;
        let mut s = 0;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let z = least_non_residue(p);
        let mut m = s;
        let mut c = pow_mod(z, q, p);
        let mut t = pow_mod(a, q, p);
        let mut r = pow_mod(a, (q + 1) / 2, p);
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = mul_mod(t2, t2, p);
                i += 1;
            }
            let b = pow_mod(c, 1 << (m - i - 1), p);
            m = i;
            c = mul_mod(b, b, p);
            t = mul_mod(t, c, p);
            r = mul_mod(r, b, p);
        }
        r
    };
    Some(root.min(p - root))
}

/// `a * b mod m` for `m < 2^MAX_MODULUS_BITS`, with `a, b < m`.
pub fn mul_mod_wide(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a * b) % m;
    }
    // Horner over chunks of `b`, sized so that neither the shift nor the
    // partial product can overflow.
    let bits = 128 - m.leading_zeros();
    let chunk = (127 - bits).clamp(1, 64);
    let mask = (1u128 << chunk) - 1;
    let total = 128 - b.leading_zeros();
    let mut shift = total.div_ceil(chunk) * chunk;
    let mut acc = 0u128;
    while shift > 0 {
        shift -= chunk;
        let digit = (b >> shift) & mask;
        acc = ((acc << chunk) % m + a * digit % m) % m;
    }
    acc
}

pub fn pow_u128(base: u128, exp: u32) -> Option<u128> {
    base.checked_pow(exp)
}

/// p-adic valuation of `x` (`x != 0`).
pub fn val_u128(mut x: u128, p: u128) -> u32 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Balanced representative of a residue modulo an odd modulus.
#[inline]
pub fn balanced(r: u128, m: u128) -> i128 {
    if r > m / 2 {
        r as i128 - m as i128
    } else {
        r as i128
    }
}

#[inline]
pub fn from_signed(x: i128, m: u128) -> u128 {
    x.rem_euclid(m as i128) as u128
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_non_residues() {
        assert!(is_prime(3) && is_prime(5) && is_prime(7) && is_prime(1_000_003));
        assert!(!is_prime(1) && !is_prime(9) && !is_prime(15));
        assert_eq!(least_non_residue(3), 2);
        assert_eq!(least_non_residue(5), 2);
        assert_eq!(least_non_residue(7), 3);
        assert_eq!(least_non_residue(17), 3);
    }

    #[test]
    fn sqrt_mod_matches_enumeration() {
        for p in [3u64, 5, 7, 11, 13, 17, 41] {
            for a in 0..p {
                let brute = (0..p).find(|x| x * x % p == a);
                assert_eq!(sqrt_mod(a, p), brute, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn wide_multiplication() {
        let m = 5u128.pow(40);
        let a = m - 3;
        let b = m - 7;
        // (m-3)(m-7) = 21 mod m
        assert_eq!(mul_mod_wide(a, b, m), 21);
        let a = 123_456_789_123_456_789u128 % m;
        let b = 987_654_321_987_654_321u128 % m;
        let expected = {
            // schoolbook via doubling
            let mut acc = 0u128;
            let mut x = a;
            let mut y = b;
            while y > 0 {
                if y & 1 == 1 {
                    acc = (acc + x) % m;
                }
                x = (x + x) % m;
                y >>= 1;
            }
            acc
        };
        assert_eq!(mul_mod_wide(a, b, m), expected);
    }
}
