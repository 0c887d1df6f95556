//! Integer-argument special values shared by the engines.

use std::sync::{Mutex, OnceLock};

use rug::{Integer, Rational};

/// Barnes G at a positive integer: `G(n) = 1!·2!···(n-2)!`.
pub fn barnes_g_int(n: u32) -> Integer {
    assert!(n >= 1, "barnes_g_int needs n >= 1");
    let mut acc = Integer::from(1);
    let mut fact = Integer::from(1);
    for j in 1..n.saturating_sub(1) {
        fact *= j;
        acc *= &fact;
    }
    acc
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

pub fn binomial(n: u32, k: u32) -> Integer {
    Integer::from(Integer::binomial_u(n, k))
}

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = -1/2`), cached across calls.
pub fn bernoulli(n: usize) -> Vec<Rational> {
    static CACHE: OnceLock<Mutex<Vec<Rational>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![Rational::from(1)]));
    let mut b = cache.lock().unwrap();
    while b.len() <= n {
        let m = b.len() as u32;
        // sum_{j=0}^{m} C(m+1, j) B_j = 0
        let mut s = Rational::new();
        for (j, bj) in b.iter().enumerate() {
            s += Rational::from(bj * binomial(m + 1, j as u32));
        }
        let next = -s / Integer::from(m + 1);
        b.push(next);
    }
    b[..=n].to_vec()
}

/// All primes `<= limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
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

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
