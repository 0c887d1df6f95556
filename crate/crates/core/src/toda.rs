//! Taylor coefficients of `log D_k(t)` from the Toda recursion, the resulting series for
//! `D_k(t)`, and the Gaussian approximation of γ_k near the centre of its support.
//!
//! Convention: `log D_k(t) = log D_k(0) + Σ_{m≥1} c_m(k) t^m / m`, with `c_m(0) = 0`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::hp::{self, PrecisionContext};
use crate::special::barnes_g_int;

/// Exact `c_m(k)` for `1 <= m <= max_m`, `0 <= k <= max_k`.
#[derive(Clone, Debug)]
pub struct CoeffTable {
    max_m: u32,
    max_k: u32,
    // values[m][k], m = 0 unused
    values: Vec<Vec<Rational>>,
}

pub fn c1(k: u32) -> Rational {
    Rational::from((-(k as i64), 2))
}

pub fn c2(k: u32) -> Rational {
    if k == 0 {
        return Rational::new();
    }
    let k2 = Integer::from(k) * k;
    let den = Integer::from(4) * (Integer::from(4) * &k2 - 1u32);
    Rational::from((k2, den))
}

/// Closed form `c_4(k) = k² / (16 (4k²-1)² (4k²-9))`.
pub fn c4_closed_form(k: u32) -> Rational {
    if k == 0 {
        return Rational::new();
    }
    let k2 = Integer::from(k) * k;
    let a: Integer = Integer::from(4) * &k2 - 1u32;
    let b: Integer = Integer::from(4) * &k2 - 9u32;
    let den = Integer::from(16) * a.square() * b;
    Rational::from((k2, den))
}

impl CoeffTable {
    pub fn new(max_m: u32, max_k: u32) -> Result<Self> {
        if max_m == 0 {
            return Err(Error::invalid("max_m must be at least 1"));
        }
        // c_M(k) reads c_{M-2}(k±1), so the k range shrinks by one per order
        let width = (max_k + max_m) as usize + 1;
        let mut values = vec![vec![Rational::new(); width]; max_m as usize + 1];
        for k in 1..width {
            values[1][k] = c1(k as u32);
            if max_m >= 2 {
                values[2][k] = c2(k as u32);
            }
        }
        for big_m in 3..=max_m as usize {
            let reach = width - 1 - (big_m - 2);
            for k in 1..=reach.min(width - 2) {
                let mut s = Rational::new();
                for m in 0..=big_m - 3 {
                    let inner = big_m - m - 2;
                    let a = &values[m + 2][k];
                    if *a == 0 {
                        continue;
                    }
                    let second = Rational::from(&values[inner][k - 1] + &values[inner][k + 1])
                        - Rational::from(&values[inner][k] * 2u32);
                    s += Rational::from(a * (m as u32 + 1)) * second;
                }
                values[big_m][k] = s / Integer::from((big_m - 1) * (big_m - 2));
            }
        }
        for row in values.iter_mut() {
            row.truncate(max_k as usize + 1);
        }
        Ok(CoeffTable {
            max_m,
            max_k,
            values,
        })
    }

    pub fn max_m(&self) -> u32 {
        self.max_m
    }

    pub fn max_k(&self) -> u32 {
        self.max_k
    }

    pub fn get(&self, m: u32, k: u32) -> Result<&Rational> {
        if m == 0 || m > self.max_m || k > self.max_k {
            return Err(Error::invalid(format!(
                "c_{m}({k}) outside table (m <= {}, k <= {})",
                self.max_m, self.max_k
            )));
        }
        Ok(&self.values[m as usize][k as usize])
    }
}

/// Memoised `c_m(k)`; tables are rebuilt on demand when a larger range is requested.
pub fn c_coeff(m: u32, k: u32) -> Result<Rational> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Rational>>> = OnceLock::new();
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(m, k)) {
        return Ok(v.clone());
    }
    let table = CoeffTable::new(m, k)?;
    let mut guard = cache.lock().unwrap();
    for mm in 1..=m {
        for kk in 0..=k {
            guard.insert((mm, kk), table.get(mm, kk)?.clone());
        }
    }
    Ok(table.get(m, k)?.clone())
}

/// `D_k(0) = G(k+1)^4 / G(2k+1)`.
pub fn dk_at_zero(k: u32) -> Rational {
    if k == 0 {
        return Rational::from(1);
    }
    let g = barnes_g_int(k + 1);
    let num = Integer::from(g.square_ref()).square();
    Rational::from((num, barnes_g_int(2 * k + 1)))
}

/// Truncated series value with its estimated relative truncation error.
#[derive(Clone, Debug)]
pub struct SeriesEval {
    pub value: Float,
    /// Estimated `|log D - partial sum|`, i.e. relative error in `value`.
    pub tail_bound: Float,
    /// Empirical growth ratio of `|c_m/m|` used for the tail estimate.
    pub ratio: f64,
}

impl SeriesEval {
    /// Error unless the tail estimate is at most `tol`.
    pub fn require(self, tol: &Float) -> Result<Self> {
        if self.tail_bound > *tol {
            return Err(Error::TailBound {
                bound: hp::to_decimal(&self.tail_bound, 6),
                tolerance: hp::to_decimal(tol, 6),
            });
        }
        Ok(self)
    }
}

/// `D_k(0) exp(Σ_{m<=M} c_m(k) t^m / m)` with a ratio-based tail estimate.
pub fn dk_series_eval(k: u32, t: &Float, big_m: u32, ctx: &PrecisionContext) -> Result<SeriesEval> {
    if k == 0 || big_m == 0 {
        return Err(Error::invalid("dk_series_eval needs k >= 1 and M >= 1"));
    }
    let bits = ctx.bits();
    let table = CoeffTable::new(big_m + 2, k)?;
    let mut sum = Float::with_val(bits, 0);
    let mut tp = Float::with_val(bits, 1);
    for m in 1..=big_m {
        tp *= t;
        let e = Rational::from(table.get(m, k)? / m);
        sum += hp::from_rational(&e, bits) * &tp;
    }

    // ratio of successive nonzero |c_m/m| over the upper half of the table, per unit step
    let mag = |m: u32| -> f64 {
        let e = Rational::from(table.get(m, k).unwrap() / m);
        e.to_f64().abs()
    };
    let mut ratio: f64 = 0.0;
    let mut prev: Option<(u32, f64)> = None;
    for m in (big_m / 2).max(1)..=big_m + 2 {
        let v = mag(m);
        if v == 0.0 {
            continue;
        }
        if let Some((pm, pv)) = prev {
            ratio = ratio.max((v / pv).powf(1.0 / (m - pm) as f64));
        }
        prev = Some((m, v));
    }
    let abs_t = t.to_f64().abs();
    let first_tail = (big_m + 1..=big_m + 2)
        .map(mag)
        .find(|v| *v != 0.0)
        .unwrap_or(0.0);
    let q = abs_t * ratio;
    if q >= 1.0 {
        return Err(Error::TailBound {
            bound: "inf".into(),
            tolerance: format!("|t|·ratio = {q:.3} >= 1"),
        });
    }
    let tail = first_tail * abs_t.powi(big_m as i32 + 1) / (1.0 - q);
    let value = Float::with_val(bits, sum.exp_ref()) * hp::from_rational(&dk_at_zero(k), bits);
    Ok(SeriesEval {
        value,
        tail_bound: Float::with_val(bits, tail),
        ratio,
    })
}

/// `b_k = 8 (1 - 1/(4k²))`.
pub fn b_k(k: u32) -> Rational {
    Rational::from(8) * (Rational::from(1) - Rational::from((1, 4 * k as u64 * k as u64)))
}

/// First-order correction factor in `x = c - k/2`.
pub fn gaussian_correction(k: u32, x: &Float) -> Float {
    let bits = x.prec();
    let kf = Float::with_val(bits, k);
    let k2 = Float::with_val(bits, kf.square_ref());
    let x2 = Float::with_val(bits, x.square_ref());
    let x4 = Float::with_val(bits, x2.square_ref());
    let t1 =
        (Float::with_val(bits, &x4 * 64u32) - Float::with_val(bits, &x2 * 24u32) + 0.75f64) / &k2;
    let k4 = Float::with_val(bits, k2.square_ref());
    let t2 = Float::with_val(bits, &x2 * 2u32) * (Float::with_val(bits, &x2 * 16u32) - 3u32) / &k4;
    let k6 = Float::with_val(bits, &k4 * &k2);
    let t3 = Float::with_val(bits, &x4 * 4u32) / k6;
    let denom = Float::with_val(bits, &k2 * 4u32) - 9u32;
    Float::with_val(bits, 1) + (t1 - t2 + t3) / denom
}

/// Gaussian-centre approximation of γ_k(c) including the first-order correction.
pub fn gaussian_gamma(k: u32, c: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if k < 2 {
        return Err(Error::invalid("gaussian_gamma needs k >= 2"));
    }
    let bits = ctx.bits();
    let g = barnes_g_int(k + 1);
    let lead = hp::from_rational(
        &Rational::from((Integer::from(g.square_ref()), barnes_g_int(2 * k + 1))),
        bits,
    );
    let b = hp::from_rational(&b_k(k), bits);
    let x = Float::with_val(bits, c - Float::with_val(bits, k) / 2u32);
    let root = Float::with_val(bits, &b / hp::pi(bits)).sqrt();
    let expo = (-(Float::with_val(bits, x.square_ref()) * &b)).exp();
    Ok(lead * root * expo * gaussian_correction(k, &x))
}

/// Size of the first omitted relative correction at `c = k/2`: the `c_6` and
/// `c_8 + c_4²/4` contributions integrated against the quadratic Gaussian.
pub fn next_order_envelope(k: u32, ctx: &PrecisionContext) -> Result<Float> {
    let bits = ctx.bits();
    let table = CoeffTable::new(8, k)?;
    let f = |q: &Rational| hp::from_rational(q, bits);
    let two_pi = Float::with_val(bits, hp::pi(bits) * 2u32);
    // weight exp(-a u²) with a = 2π² c_2; <u^{2n}> = (2n-1)!! / (2a)^n
    let a = Float::with_val(bits, hp::pi(bits).square() * 2u32) * f(table.get(2, k)?);
    let two_a = Float::with_val(bits, &a * 2u32);
    let moment = |n: u32| -> Float {
        let dfact: u64 = (1..=2 * n as u64 - 1).step_by(2).product();
        Float::with_val(bits, dfact) / Float::with_val(bits, (&two_a).pow(n))
    };
    let c4 = f(table.get(4, k)?);
    let c6 = f(table.get(6, k)?);
    let c8 = f(table.get(8, k)?);
    let t6 = c6 / 6u32 * Float::with_val(bits, (&two_pi).pow(6u32)) * moment(3);
    let t8 = (c8 / 8u32 + Float::with_val(bits, c4.square_ref()) / 32u32)
        * Float::with_val(bits, (&two_pi).pow(8u32))
        * moment(4);
    Ok(t6.abs() + t8.abs())
}
