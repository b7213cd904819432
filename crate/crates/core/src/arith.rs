//! Small integer helpers shared by the number-theoretic modules.

use num_integer::Integer;

/// Floor of the square root of a non-negative integer.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt(n as u128);
    r * r == n as u128
}

/// Prime factorization by trial division, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    for p in [2u64, 3] {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut p = 5u64;
    while p * p <= n {
        for cand in [p, p + 2] {
            if n.is_multiple_of(cand) {
                let mut e = 0;
                while n.is_multiple_of(cand) {
                    n /= cand;
                    e += 1;
                }
                out.push((cand, e));
            }
        }
        p += 6;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

/// Distinct prime divisors.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Primes `<= n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let e = a.rem_euclid(m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

/// Sign of `u + v*sqrt(d)` for non-square `d > 0`, decided exactly.
pub fn surd_sign(u: i128, v: i128, d: i128) -> i32 {
    let su = u.signum() as i32;
    let sv = v.signum() as i32;
    if sv == 0 {
        return su;
    }
    if su == 0 || su == sv {
        return sv;
    }
    // opposite signs: compare u^2 with v^2 d
    let lhs = u * u;
    let rhs = v * v * d;
    if lhs > rhs {
        su
    } else {
        sv
    }
}
