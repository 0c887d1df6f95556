//! Configurable-precision real and complex scalars on top of MPFR.
//!
//! Every routine in the numeric engines takes a [`PrecisionContext`] and works at
//! `ctx.bits()` (target digits plus guard digits) or an explicitly boosted
//! precision derived from it.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

pub type HPReal = Float;

const BITS_PER_DIGIT: f64 = std::f64::consts::LOG2_10;

/// Target decimal digits plus extra working digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    pub digits: u32,
    pub guard: u32,
}

impl PrecisionContext {
    pub const DEFAULT_GUARD: u32 = 20;

    pub fn new(digits: u32) -> Result<Self> {
        Self::with_guard(digits, Self::DEFAULT_GUARD)
    }

    pub fn with_guard(digits: u32, guard: u32) -> Result<Self> {
        if digits < 10 {
            return Err(Error::invalid(format!(
                "digits must be at least 10, got {digits}"
            )));
        }
        Ok(PrecisionContext { digits, guard })
    }

    /// Same target, `extra` more working digits.
    pub fn boosted(&self, extra: u32) -> Self {
        PrecisionContext {
            digits: self.digits,
            guard: self.guard + extra,
        }
    }

    pub fn working_digits(&self) -> u32 {
        self.digits + self.guard
    }

    pub fn bits(&self) -> u32 {
        digits_to_bits(self.working_digits())
    }

    /// `10^-digits` at working precision.
    pub fn target_eps(&self) -> Float {
        pow10(-(self.digits as i64), self.bits())
    }

    /// `10^-(digits+guard)`, the size of terms that can be dropped from a series.
    pub fn working_eps(&self) -> Float {
        pow10(-(self.working_digits() as i64), self.bits())
    }
}

pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * BITS_PER_DIGIT).ceil() as u32 + 8
}

pub fn pow10(e: i64, bits: u32) -> Float {
    let ten = Float::with_val(bits, 10);
    Float::with_val(bits, ten.pow(e as i32))
}

pub fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

pub fn euler_gamma(bits: u32) -> Float {
    Float::with_val(bits, Constant::Euler)
}

pub fn from_rational(q: &Rational, bits: u32) -> Float {
    Float::with_val(bits, q)
}

pub fn from_integer(n: &Integer, bits: u32) -> Float {
    Float::with_val(bits, n)
}

/// Approximate `log10 |x|`, `-inf` for zero.
pub fn log10_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log10() + e as f64 * std::f64::consts::LOG10_2
}

/// Decimal string with `digits` significant digits (scientific notation for tiny or huge values).
pub fn to_decimal(x: &Float, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let l = log10_abs(x);
    if (-5.0..(digits as f64)).contains(&l) {
        // fixed notation
        let int_digits = if l >= 0.0 { l.floor() as i64 + 1 } else { 0 };
        let frac = (digits as i64 - int_digits).max(0);
        let scale = pow10(frac, x.prec() + 16);
        let scaled = Float::with_val(x.prec() + 16, x * &scale);
        let n = scaled.round().to_integer().unwrap_or_default();
        let neg = n < 0;
        let mut s = Integer::from(n.abs_ref()).to_string();
        if frac > 0 {
            while (s.len() as i64) <= frac {
                s.insert(0, '0');
            }
            s.insert(s.len() - frac as usize, '.');
            let trimmed = s.trim_end_matches('0').trim_end_matches('.');
            s = trimmed.to_string();
        }
        if neg && s != "0" {
            s.insert(0, '-');
        }
        s
    } else {
        x.to_string_radix(10, Some(digits as usize))
    }
}

/// Parse a decimal literal (`0.3`, `-2`, `1e-3`) or a fraction (`7/4`) exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: Integer = n
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
        let d: Integer = d
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad rational {s:?}")))?;
        if d == 0 {
            return Err(Error::invalid("zero denominator"));
        }
        return Ok(Rational::from((n, d)));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .parse()
                .map_err(|_| Error::invalid(format!("bad number {s:?}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::invalid(format!("bad number {s:?}")));
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(Error::invalid(format!("bad number {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut q = Rational::from(digits.parse::<Integer>().unwrap_or_default());
    let shift = exp - frac_part.len() as i64;
    let ten = Integer::from(10);
    if shift >= 0 {
        q *= ten.pow(shift as u32);
    } else {
        q /= ten.pow((-shift) as u32);
    }
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Complex number as a pair of MPFR floats at a common precision.
#[derive(Clone, PartialEq)]
pub struct HPComplex {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for HPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl HPComplex {
    pub fn new(re: Float, im: Float) -> Self {
        HPComplex { re, im }
    }

    pub fn zero(bits: u32) -> Self {
        HPComplex {
            re: Float::new(bits),
            im: Float::new(bits),
        }
    }

    pub fn one(bits: u32) -> Self {
        HPComplex {
            re: Float::with_val(bits, 1),
            im: Float::new(bits),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        HPComplex { re, im }
    }

    /// `i·x`.
    pub fn from_imag(im: Float) -> Self {
        let re = Float::new(im.prec());
        HPComplex { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Self {
        HPComplex {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec();
        HPComplex {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    /// Multiply by `i^n`.
    pub fn mul_i_pow(&self, n: i64) -> Self {
        let p = self.prec();
        match n.rem_euclid(4) {
            0 => self.clone(),
            1 => HPComplex {
                re: Float::with_val(p, -&self.im),
                im: self.re.clone(),
            },
            2 => HPComplex {
                re: Float::with_val(p, -&self.re),
                im: Float::with_val(p, -&self.im),
            },
            _ => HPComplex {
                re: self.im.clone(),
                im: Float::with_val(p, -&self.re),
            },
        }
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        let p = self.prec();
        HPComplex {
            re: Float::with_val(p, &self.re / &n),
            im: Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        }
    }

    pub fn div(&self, other: &HPComplex) -> Self {
        self * &other.recip()
    }

    /// `e^{i theta}`.
    pub fn cis(theta: &Float) -> Self {
        let p = theta.prec();
        let (s, c) = theta.clone().sin_cos(Float::new(p));
        HPComplex { re: c, im: s }
    }

    pub fn exp(&self) -> Self {
        let m = self.re.clone().exp();
        HPComplex::cis(&self.im).scale(&m)
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        let p = self.prec();
        let r = self.abs().ln();
        let arg = Float::with_val(p, self.im.atan2_ref(&self.re));
        HPComplex { re: r, im: arg }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = HPComplex::one(self.prec());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl Add<&HPComplex> for &HPComplex {
    type Output = HPComplex;
    fn add(self, o: &HPComplex) -> HPComplex {
        let p = self.prec();
        HPComplex {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }
}

impl Sub<&HPComplex> for &HPComplex {
    type Output = HPComplex;
    fn sub(self, o: &HPComplex) -> HPComplex {
        let p = self.prec();
        HPComplex {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }
}

impl Mul<&HPComplex> for &HPComplex {
    type Output = HPComplex;
    fn mul(self, o: &HPComplex) -> HPComplex {
        let p = self.prec();
        let rr = Float::with_val(p, &self.re * &o.re);
        let ii = Float::with_val(p, &self.im * &o.im);
        let ri = Float::with_val(p, &self.re * &o.im);
        let ir = Float::with_val(p, &self.im * &o.re);
        HPComplex {
            re: rr - ii,
            im: ri + ir,
        }
    }
}

impl Neg for &HPComplex {
    type Output = HPComplex;
    fn neg(self) -> HPComplex {
        let p = self.prec();
        HPComplex {
            re: Float::with_val(p, -&self.re),
            im: Float::with_val(p, -&self.im),
        }
    }
}

impl Add for HPComplex {
    type Output = HPComplex;
    fn add(self, o: HPComplex) -> HPComplex {
        &self + &o
    }
}

impl Sub for HPComplex {
    type Output = HPComplex;
    fn sub(self, o: HPComplex) -> HPComplex {
        &self - &o
    }
}

impl Mul for HPComplex {
    type Output = HPComplex;
    fn mul(self, o: HPComplex) -> HPComplex {
        &self * &o
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det_real(mut m: Vec<Vec<Float>>) -> Float {
    let n = m.len();
    let bits = m.first().and_then(|r| r.first()).map_or(64, |x| x.prec());
    let mut det = Float::with_val(bits, 1);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| {
                m[a][col]
                    .as_abs()
                    .partial_cmp(&*m[b][col].as_abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[pivot][col].is_zero() {
            return Float::new(bits);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for row in col + 1..n {
            let f = Float::with_val(bits, &m[row][col] / &p);
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let t = Float::with_val(bits, &f * &m[col][c]);
                m[row][c] -= t;
            }
        }
    }
    det
}

/// Complex counterpart of [`det_real`].
pub fn det_complex(mut m: Vec<Vec<HPComplex>>) -> HPComplex {
    let n = m.len();
    let bits = m.first().and_then(|r| r.first()).map_or(64, |x| x.prec());
    let mut det = HPComplex::one(bits);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| {
                m[a][col]
                    .norm_sqr()
                    .partial_cmp(&m[b][col].norm_sqr())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[pivot][col].is_zero() {
            return HPComplex::zero(bits);
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -&det;
        }
        let p = m[col][col].clone();
        det = &det * &p;
        let pinv = p.recip();
        for row in col + 1..n {
            let f = &m[row][col] * &pinv;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let t = &f * &m[col][c];
                m[row][c] = &m[row][c] - &t;
            }
        }
    }
    det
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub type GaussRule = Arc<Vec<(Float, Float)>>;

pub fn gauss_legendre(n: usize, bits: u32) -> GaussRule {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), GaussRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&(n, bits)) {
        return rule.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n, bits));
    cache.lock().unwrap().insert((n, bits), rule.clone());
    rule
}

fn legendre_with_derivative(n: usize, x: &Float) -> (Float, Float) {
    let bits = x.prec();
    let mut p0 = Float::with_val(bits, 1);
    let mut p1 = x.clone();
    for j in 2..=n {
        // j P_j = (2j-1) x P_{j-1} - (j-1) P_{j-2}
        let a = Float::with_val(bits, x * &p1) * (2 * j - 1) as u32;
        let b = Float::with_val(bits, &p0 * (j - 1) as u32);
        let p2 = (a - b) / j as u32;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let x2m1 = Float::with_val(bits, x.square_ref()) - 1u32;
    let dp = Float::with_val(bits, x * &p1) - &p0;
    let dp = dp * n as u32 / x2m1;
    (p1, dp)
}

fn compute_gauss_legendre(n: usize, bits: u32) -> Vec<(Float, Float)> {
    let work = bits + 32;
    let tol = Float::with_val(work, Float::i_exp(1, -(bits as i32) - 4));
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let guess = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut x = Float::with_val(work, guess);
        for _ in 0..200 {
            let (p, dp) = legendre_with_derivative(n, &x);
            let dx = Float::with_val(work, &p / &dp);
            x -= &dx;
            if dx.as_abs().le(&*tol.as_abs()) {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, &x);
        let one_m_x2 = Float::with_val(work, 1) - Float::with_val(work, x.square_ref());
        let w = Float::with_val(work, 2) / (one_m_x2 * Float::with_val(work, dp.square_ref()));
        out.push((Float::with_val(bits, &x), Float::with_val(bits, &w)));
    }
    out
}

/// Gauss–Legendre integral of `f` over `[a, b]` split into `panels` equal panels.
pub fn integrate_panels<F>(a: &Float, b: &Float, panels: usize, rule: &GaussRule, mut f: F) -> Float
where
    F: FnMut(&Float) -> Float,
{
    let bits = a.prec();
    let width = Float::with_val(bits, b - a) / panels as u32;
    let half = Float::with_val(bits, &width / 2u32);
    let mut total = Float::new(bits);
    for p in 0..panels {
        let mid = Float::with_val(bits, &width * p as u32) + a + &half;
        let mut acc = Float::new(bits);
        for (x, w) in rule.iter() {
            let node = Float::with_val(bits, &half * x) + &mid;
            acc += Float::with_val(bits, w * &f(&node));
        }
        total += acc * &half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8, 300);
        let a = Float::with_val(300, 0);
        let b = Float::with_val(300, 1);
        // x^15 on [0,1] -> 1/16
        let v = integrate_panels(&a, &b, 1, &rule, |x| Float::with_val(300, x.pow(15u32)));
        let err = (v - Float::with_val(300, 0.0625)).abs();
        assert!(log10_abs(&err) < -85.0, "{}", err.to_f64());
    }

    #[test]
    fn complex_exp_of_i_pi_is_minus_one() {
        let bits = 200;
        let z = HPComplex::from_imag(pi(bits)).exp();
        assert!(log10_abs(&(z.re.clone() + 1u32)) < -55.0);
        assert!(log10_abs(&z.im) < -55.0);
    }

    #[test]
    fn determinant_of_hilbert_3() {
        let bits = 200;
        let m: Vec<Vec<Float>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| Float::with_val(bits, 1) / (i + j + 1) as u32)
                    .collect()
            })
            .collect();
        let d = det_real(m);
        let err = d - Float::with_val(bits, 1) / 2160u32;
        assert!(log10_abs(&err) < -55.0);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("0.3").unwrap(), Rational::from((3, 10)));
        assert_eq!(parse_rational("-7/4").unwrap(), Rational::from((-7, 4)));
        assert_eq!(parse_rational("1e-3").unwrap(), Rational::from((1, 1000)));
        assert_eq!(parse_rational("5").unwrap(), Rational::from(5));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn decimal_rendering() {
        let x = Float::with_val(200, 4) / 3u32;
        assert_eq!(to_decimal(&x, 10), "1.333333333");
        assert_eq!(to_decimal(&Float::with_val(200, 0), 10), "0");
        assert_eq!(to_decimal(&Float::with_val(200, -2.5), 10), "-2.5");
    }

    #[test]
    fn context_rejects_few_digits() {
        assert!(PrecisionContext::new(9).is_err());
        assert!(PrecisionContext::new(10).is_ok());
    }
}
