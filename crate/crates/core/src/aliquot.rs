//! The one-dimensional Bessel integrals `I(d) = ∫_R (J_1(2πy)/(2y))^d dy`, their
//! remainder-free Riemann sums, large-`d` asymptotics, continued fractions, and the
//! truncated `GL_2(Z/ℓ)` Euler product.
//!
//! `J_1(2πy)/(2y)` is the Fourier transform of `√(1-t²)` on `[-1,1]`, so its d-th power
//! is the transform of a function supported in `[-d, d]` and the sum with spacing
//! `Δ <= 1/d` equals the integral exactly. Far terms of that sum use the Hankel
//! expansion of `J_1`, which turns their total into Hurwitz zeta values.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::hp::{self, HPComplex, PrecisionContext};
use crate::special::{bernoulli, binomial, factorial, is_prime};

/// `J_1(y)` by its Maclaurin series with `~0.434|y|` guard digits.
pub fn bessel_j1(y: &Float, ctx: &PrecisionContext) -> Float {
    j1_series(y, ctx.bits())
}

fn j1_series(y: &Float, bits: u32) -> Float {
    let ay = y.to_f64().abs();
    let work = bits + hp::digits_to_bits((std::f64::consts::LOG10_E * ay).ceil() as u32 + 10);
    let y = Float::with_val(work, y);
    let half = Float::with_val(work, &y / 2u32);
    let q = Float::with_val(work, half.square_ref());
    let mut term = half; // (y/2)^{2m+1} / (m!(m+1)!)
    let mut sum = term.clone();
    let tiny = Float::with_val(work, Float::i_exp(1, -(work as i32) - 8));
    let mut m = 0u32;
    loop {
        m += 1;
        term *= &q;
        term /= m * (m + 1);
        term = -term;
        sum += &term;
        if m as f64 > ay && term.as_abs().lt(&tiny) {
            break;
        }
    }
    Float::with_val(bits, sum)
}

/// `J_1(2πy)/(2y)`, with the limit `π/2` at `y = 0`.
pub fn bessel_j1_over_x(y: &Float, bits: u32) -> Float {
    if y.is_zero() {
        return Float::with_val(bits, hp::pi(bits) / 2u32);
    }
    let z = Float::with_val(bits, hp::pi(bits) * y) * 2u32;
    j1_series(&z, bits) / Float::with_val(bits, y * 2u32)
}

/// Envelope `(2π)^{-d} (n/d)^{-3d/2}` of the n-th Poisson term.
#[derive(Clone, Debug)]
pub struct BesselTermBound {
    pub n: u64,
    pub bound: Float,
}

pub fn bessel_term_bound(d: u32, n: u64, bits: u32) -> BesselTermBound {
    let two_pi = Float::with_val(bits, hp::pi(bits) * 2u32);
    let ratio = Float::with_val(bits, n) / d;
    let e = Float::with_val(bits, -(3.0 * d as f64) / 2.0);
    let bound = Float::with_val(bits, (&two_pi).pow(-(d as i32))) * ratio.pow(&e);
    BesselTermBound { n, bound }
}

/// Number of plain terms for which the envelope tail `Σ_{m>n}` stays above `10^-digits`,
/// i.e. how long an unaccelerated sum would have to run.
pub fn plain_sum_terms_needed(d: u32, digits: u32) -> f64 {
    // tail ≈ (2π)^{-d} d^{3d/2} n^{1-3d/2} / (3d/2 - 1)
    let s = 1.5 * d as f64;
    if s <= 1.0 {
        return f64::INFINITY;
    }
    let log_c = -(d as f64) * (2.0 * std::f64::consts::PI).log10() + s * (d as f64).log10()
        - (s - 1.0).log10();
    10f64.powf((log_c + digits as f64) / (s - 1.0))
}

/// `a_k(1)` of the Hankel expansion: `Π_{j=1}^k (4 - (2j-1)²) / (k! 8^k)`.
fn hankel_a(k: u32) -> Rational {
    let mut num = Integer::from(1);
    for j in 1..=k {
        let t = 2 * j as i64 - 1;
        num *= 4 - t * t;
    }
    let den = factorial(k) * Integer::from(Integer::u_pow_u(8, k));
    Rational::from((num, den))
}

fn poly_mul_trunc(a: &[HPComplex], b: &[HPComplex], len: usize) -> Vec<HPComplex> {
    let bits = a[0].prec();
    let mut out = vec![HPComplex::zero(bits); len];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

/// `ζ(s + k, a)` for `k = 0..=kmax`, `s > 1`, by direct summation to a shifted point
/// followed by Euler–Maclaurin.
fn hurwitz_family(s: &Float, kmax: usize, a: &Float, bits: u32) -> Vec<Float> {
    let digits = (bits as f64 / 3.32) as u32;
    let s_top = s.to_f64() + kmax as f64;
    let target = (s_top + digits as f64 + 10.0).ceil();
    let shift = (target - a.to_f64()).max(0.0).ceil() as u64;
    let mut out: Vec<Float> = vec![Float::new(bits); kmax + 1];
    for j in 0..shift {
        let x = Float::with_val(bits, a + j);
        let inv = Float::with_val(bits, 1) / &x;
        let mut p = Float::with_val(bits, x.pow(&Float::with_val(bits, -s)));
        for v in out.iter_mut() {
            *v += &p;
            p *= &inv;
        }
    }
    let b = Float::with_val(bits, a + shift);
    let inv_b = Float::with_val(bits, 1) / &b;
    let inv_b2 = Float::with_val(bits, inv_b.square_ref());
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32) - 8));
    let bern = bernoulli(2 * digits as usize + 40);
    let mut bpow = Float::with_val(bits, (&b).pow(&Float::with_val(bits, -s))); // b^{-(s+k)}
    for (k, v) in out.iter_mut().enumerate() {
        let sk = Float::with_val(bits, s + k as u32);
        let mut acc = Float::with_val(bits, &bpow * &b) / Float::with_val(bits, &sk - 1u32);
        acc += Float::with_val(bits, &bpow / 2u32);
        // B_{2l}/(2l)! · s(s+1)...(s+2l-2) · b^{-s-2l+1}
        let mut rising = sk.clone(); // (s)_{2l-1}
        let mut pw = Float::with_val(bits, &bpow * &inv_b); // b^{-s-1}
        let mut fact = Float::with_val(bits, 2); // (2l)!
        let mut l = 1usize;
        loop {
            let t = hp::from_rational(&bern[2 * l], bits) / &fact * &rising * &pw;
            acc += &t;
            if t.as_abs()
                .lt(&*(Float::with_val(bits, acc.abs_ref()) * &eps).as_abs())
                || 2 * l + 2 >= bern.len()
            {
                break;
            }
            rising *= Float::with_val(bits, &sk + (2 * l - 1) as u32)
                * Float::with_val(bits, &sk + (2 * l) as u32);
            pw *= &inv_b2;
            fact *= ((2 * l + 1) * (2 * l + 2)) as u32;
            l += 1;
        }
        *v += acc;
        bpow *= &inv_b;
    }
    out
}

/// `Δ Σ_{n∈Z} F(nΔ)` with `F(y) = (J_1(2πy)/(2y))^d` and `Δ = 1/(q d)`.
pub fn i_d_riemann_sum(d: u32, q: u32, ctx: &PrecisionContext) -> Result<Float> {
    if d == 0 || q == 0 {
        return Err(Error::invalid("d and q must be positive"));
    }
    let bits = ctx.bits();
    let w = ctx.working_digits() as f64;
    let pi = hp::pi(bits);
    let period = (q * d) as u64;
    // direct terms up to z_N ≈ 1.2 · w ln10 / 2, where the Hankel expansion reaches 10^{-w}
    let z_max = (1.2 * w * std::f64::consts::LN_10 / 2.0).max(20.0);
    let n_direct = (z_max * period as f64 / (2.0 * std::f64::consts::PI)).ceil() as u64;
    let delta = Float::with_val(bits, 1) / period as u32;

    let direct: Vec<Float> = (1..=n_direct)
        .into_par_iter()
        .map(|n| {
            let y = Float::with_val(bits, &delta * n);
            Float::with_val(bits, bessel_j1_over_x(&y, bits).pow(d))
        })
        .collect();
    let mut sum = Float::new(bits);
    for t in &direct {
        sum += t;
    }

    let tail = poisson_tail(d, period, n_direct, ctx)?;
    let f0 = Float::with_val(bits, Float::with_val(bits, &pi / 2u32).pow(d));
    let total = f0 + Float::with_val(bits, (sum + tail) * 2u32);
    Ok(total / period as u32)
}

/// Asymptotic-series coefficients `b_{m,k}` of `A^m Ā^{d-m}` together with `K`.
fn tail_series(d: u32, z_min: f64, bits: u32) -> (Vec<Vec<HPComplex>>, usize) {
    let eps = -((bits + 8) as f64) * std::f64::consts::LOG10_2;
    // number of Hankel terms: stop once |a_k| z^{-k} < eps, never past the smallest term
    let mut kmax = 1usize;
    loop {
        let a = hankel_a(kmax as u32).to_f64().abs();
        let lg = a.log10() - kmax as f64 * z_min.log10();
        if lg < eps || kmax as f64 > 2.0 * z_min {
            break;
        }
        kmax += 1;
    }
    let len = kmax + 1;
    let a: Vec<HPComplex> = (0..len)
        .map(|k| {
            HPComplex::from_real(hp::from_rational(&hankel_a(k as u32), bits)).mul_i_pow(k as i64)
        })
        .collect();
    let abar: Vec<HPComplex> = a.iter().map(HPComplex::conj).collect();
    let mut pow_a = vec![{
        let mut one = vec![HPComplex::zero(bits); len];
        one[0] = HPComplex::one(bits);
        one
    }];
    let mut pow_abar = pow_a.clone();
    for _ in 0..d {
        pow_a.push(poly_mul_trunc(pow_a.last().unwrap(), &a, len));
        pow_abar.push(poly_mul_trunc(pow_abar.last().unwrap(), &abar, len));
    }
    let b = (0..=d as usize)
        .map(|m| poly_mul_trunc(&pow_a[m], &pow_abar[d as usize - m], len))
        .collect();
    (b, len)
}

/// `Σ_{n > N} F(n/P)` from the Hankel expansion of `J_1`.
fn poisson_tail(d: u32, period: u64, n_direct: u64, ctx: &PrecisionContext) -> Result<Float> {
    let bits = ctx.bits();
    let pi = hp::pi(bits);
    let two_pi = Float::with_val(bits, &pi * 2u32);
    let z_min = 2.0 * std::f64::consts::PI * (n_direct + 1) as f64 / period as f64;
    let (b, len) = tail_series(d, z_min, bits);
    // F = π^{d/2} 2^{-d/2} z^{-3d/2} Σ_m C(d,m) e^{i(2m-d)(z-3π/4)} B_m(1/z)
    let pref = Float::with_val(
        bits,
        Float::with_val(bits, &pi / 2u32).pow(&Float::with_val(bits, d as f64 / 2.0)),
    );
    let s0 = Float::with_val(bits, 1.5 * d as f64);
    let eps_log = -(ctx.working_digits() as f64) - 10.0;

    // Hurwitz values per residue: Σ_{n>N, n≡r (P)} n^{-(s0+k)} = P^{-(s0+k)} ζ(s0+k, n0/P)
    let residues: Vec<Vec<Float>> = (0..period)
        .into_par_iter()
        .map(|r| {
            let start = n_direct + 1;
            let n0 = start + (r + period - start % period) % period;
            let a = Float::with_val(bits, n0) / period as u32;
            hurwitz_family(&s0, len - 1, &a, bits)
        })
        .collect();
    // multiply by P^{-(s0+k)} (2π/P)^{-(s0+k)} = (2π)^{-(s0+k)}
    let base = Float::with_val(bits, (&two_pi).pow(&Float::with_val(bits, -&s0)));
    let inv_two_pi = Float::with_val(bits, 1) / &two_pi;

    let mut total = HPComplex::zero(bits);
    for m in 0..=d {
        let h = 2 * m as i64 - d as i64;
        let coef_m = hp::from_integer(&binomial(d, m), bits);
        // e^{-i h 3π/4}
        let phase0 = HPComplex::cis(&Float::with_val(
            bits,
            Float::with_val(bits, &pi * (-3 * h) as i32) / 4u32,
        ));
        // Lerch-type sums L_k = Σ_r e^{2πi h r / P} Σ_{n≡r} n^{-(s0+k)}
        let mut scale = base.clone();
        for k in 0..len {
            let bmk = &b[m as usize][k];
            if bmk.is_zero() {
                scale *= &inv_two_pi;
                continue;
            }
            let bound = hp::log10_abs(&bmk.abs())
                + hp::log10_abs(&scale)
                + hp::log10_abs(&residues[0][k])
                + (period as f64).log10();
            if bound < eps_log + hp::log10_abs(&pref).min(0.0) {
                scale *= &inv_two_pi;
                continue;
            }
            let mut lerch = HPComplex::zero(bits);
            for (r, vals) in residues.iter().enumerate() {
                let ang = Float::with_val(
                    bits,
                    Float::with_val(bits, &two_pi * (h * r as i64) as i32) / period as u32,
                );
                lerch = &lerch + &HPComplex::cis(&ang).scale(&vals[k]);
            }
            let term = &(bmk * &lerch) * &phase0;
            total = &total + &term.scale(&Float::with_val(bits, &scale * &coef_m));
            scale *= &inv_two_pi;
        }
    }
    let _ = &total.im;
    Ok(Float::with_val(bits, &total.re * &pref))
}

/// `I(d)` by the remainder-free sum with spacing `1/d`.
pub fn i_d_poisson(d: u32, ctx: &PrecisionContext) -> Result<Float> {
    i_d_riemann_sum(d, 1, ctx)
}

/// `I(d)` by Gauss–Legendre panels on `[0, Y]` plus the closed-form tail from the Hankel expansion.
pub fn i_d_quadrature(d: u32, ctx: &PrecisionContext) -> Result<Float> {
    if d == 0 {
        return Err(Error::invalid("d must be positive"));
    }
    let bits = ctx.bits();
    let w = ctx.working_digits() as f64;
    let pi = hp::pi(bits);
    let two_pi = Float::with_val(bits, &pi * 2u32);
    let z_max = (1.2 * w * std::f64::consts::LN_10 / 2.0).max(20.0);
    let y_max = (z_max / (2.0 * std::f64::consts::PI)).ceil() as u32;
    let big_y = Float::with_val(bits, y_max);

    // frequencies up to d per unit y
    let panels = (y_max * 2 * d.max(2)) as usize;
    let rule = hp::gauss_legendre(40, bits);
    let width = Float::with_val(bits, &big_y / panels as u32);
    let half = Float::with_val(bits, &width / 2u32);
    let parts: Vec<Float> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let mid = Float::with_val(bits, &width * p as u32) + &half;
            let mut acc = Float::new(bits);
            for (x, wt) in rule.iter() {
                let y = Float::with_val(bits, &half * x) + &mid;
                let f = Float::with_val(bits, bessel_j1_over_x(&y, bits).pow(d));
                acc += f * wt;
            }
            acc * &half
        })
        .collect();
    let mut near = Float::new(bits);
    for p in &parts {
        near += p;
    }

    // tail: π^{d/2}2^{-d/2} Σ_m C(d,m) e^{-ih3π/4} Σ_k b_{m,k} (2π)^{-s} ∫_Y^∞ e^{i 2π h y} y^{-s} dy
    let (b, len) = tail_series(d, z_max, bits);
    let pref = Float::with_val(
        bits,
        Float::with_val(bits, &pi / 2u32).pow(&Float::with_val(bits, d as f64 / 2.0)),
    );
    let mut tail = HPComplex::zero(bits);
    for m in 0..=d {
        let h = 2 * m as i64 - d as i64;
        let coef_m = hp::from_integer(&binomial(d, m), bits);
        let phase0 = HPComplex::cis(&Float::with_val(
            bits,
            Float::with_val(bits, &pi * (-3 * h) as i32) / 4u32,
        ));
        let theta = Float::with_val(bits, &two_pi * h as i32);
        for k in 0..len {
            let bmk = &b[m as usize][k];
            if bmk.is_zero() {
                continue;
            }
            let s = Float::with_val(bits, 1.5 * d as f64 + k as f64);
            let integral = oscillatory_power_tail(&theta, &s, &big_y, bits)?;
            let scale = Float::with_val(bits, (&two_pi).pow(&Float::with_val(bits, -&s))) * &coef_m;
            tail = &tail + &(&(bmk * &integral) * &phase0).scale(&scale);
        }
    }
    let total = near + Float::with_val(bits, &tail.re * &pref);
    Ok(total * 2u32)
}

/// `∫_Y^∞ e^{iθy} y^{-s} dy = Y^{1-s} E_s(-iθY)` for real `s > 1`.
fn oscillatory_power_tail(theta: &Float, s: &Float, big_y: &Float, bits: u32) -> Result<HPComplex> {
    let y_pow = Float::with_val(
        bits,
        big_y.pow(&Float::with_val(bits, 1u32 - Float::with_val(bits, s))),
    );
    if theta.is_zero() {
        return Ok(HPComplex::from_real(
            y_pow / Float::with_val(bits, s - 1u32),
        ));
    }
    let z = HPComplex::from_imag(Float::with_val(
        bits,
        -(Float::with_val(bits, theta * big_y)),
    ));
    // continued fraction E_s(z) = e^{-z} / (z + s - 1·s/(z + s + 2 - 2(s+1)/(z + s + 4 - ...)))
    let work = bits + 32;
    let z = HPComplex::new(Float::with_val(work, &z.re), Float::with_val(work, &z.im));
    let s = Float::with_val(work, s);
    let one = HPComplex::one(work);
    let eps = Float::with_val(work, Float::i_exp(1, -(bits as i32) - 4));
    let mut b = &z + &HPComplex::from_real(s.clone());
    let mut c = HPComplex::from_real(Float::with_val(work, Float::i_exp(1, work as i32)));
    let mut d = b.recip();
    let mut h = d.clone();
    for i in 1..100_000u32 {
        let an = Float::with_val(work, Float::with_val(work, &s + (i - 1)) * i);
        let an = HPComplex::from_real(-an);
        b = &b + &HPComplex::from_real(Float::with_val(work, 2));
        d = (&(&an * &d) + &b).recip();
        c = &b + &(&an * &c.recip());
        let del = &c * &d;
        h = &h * &del;
        if (&del - &one).abs() < eps {
            let e = &h * &(-&z).exp();
            return Ok(
                HPComplex::new(Float::with_val(bits, &e.re), Float::with_val(bits, &e.im))
                    .scale(&y_pow),
            );
        }
    }
    Err(Error::Precision(
        "oscillatory tail continued fraction did not converge".into(),
    ))
}

/// `(π/2)^{d-1/2} d^{-1/2} (1 - 1/(8d) - 5/(384d²) + 7/(3072d³) + 3829/(491520d⁴))`, first `terms` terms.
pub fn i_d_asymptotic(d: u32, terms: u32, ctx: &PrecisionContext) -> Result<Float> {
    if d < 3 || !(1..=5).contains(&terms) {
        return Err(Error::invalid(
            "i_d_asymptotic needs d >= 3 and 1 <= terms <= 5",
        ));
    }
    let bits = ctx.bits();
    let coeffs = [(1i64, 1i64), (-1, 8), (-5, 384), (7, 3072), (3829, 491520)];
    let mut series = Rational::new();
    for (j, (n, den)) in coeffs.iter().take(terms as usize).enumerate() {
        series += Rational::from((*n, *den)) / Integer::from(Integer::u_pow_u(d, j as u32));
    }
    let pi = hp::pi(bits);
    let lead = Float::with_val(
        bits,
        Float::with_val(bits, &pi / 2u32).pow(&Float::with_val(bits, d as f64 - 0.5)),
    );
    let root = Float::with_val(bits, d).sqrt();
    Ok(lead / root * hp::from_rational(&series, bits))
}

/// Continued-fraction expansion truncated where the input precision stops certifying it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentList {
    pub partial_quotients: Vec<Integer>,
    /// `(A_n, B_n)` for `n = 0, 1, ...`
    pub convergents: Vec<(Integer, Integer)>,
    /// Number of leading convergents with `B_n² <= 10^digits`.
    pub reliable_count: usize,
    /// The expansion terminated, i.e. the input is exactly the last convergent.
    pub terminated: bool,
}

impl ConvergentList {
    /// `A_n / B_n`.
    pub fn convergent(&self, n: usize) -> Option<&(Integer, Integer)> {
        self.convergents.get(n)
    }

    /// Any rational equal to the input has denominator larger than this, when the
    /// expansion did not terminate within the reliable range.
    pub fn denominator_lower_bound(&self) -> Option<&Integer> {
        if self.terminated || self.reliable_count == 0 {
            return None;
        }
        Some(&self.convergents[self.reliable_count - 1].1)
    }
}

/// Euclidean expansion of an exact rational, keeping convergents with `B_n² <= 10^digits`.
pub fn continued_fraction_rational(x: &Rational, digits: u32) -> ConvergentList {
    let limit = Integer::from(Integer::u_pow_u(10, digits));
    let mut quotients = Vec::new();
    let mut convergents = Vec::new();
    let (mut num, mut den) = x.clone().into_numer_denom();
    let (mut a_prev, mut a_cur) = (Integer::from(0), Integer::from(1));
    let (mut b_prev, mut b_cur) = (Integer::from(1), Integer::from(0));
    let mut terminated = false;
    loop {
        if den == 0 {
            terminated = true;
            break;
        }
        let (q, r) = num.clone().div_rem_floor(den.clone());
        let a_next = Integer::from(&q * &a_cur) + &a_prev;
        let b_next = Integer::from(&q * &b_cur) + &b_prev;
        if Integer::from(b_next.square_ref()) > limit {
            break;
        }
        quotients.push(q);
        convergents.push((a_next.clone(), b_next.clone()));
        a_prev = std::mem::replace(&mut a_cur, a_next);
        b_prev = std::mem::replace(&mut b_cur, b_next);
        num = den;
        den = r;
    }
    let reliable_count = convergents.len();
    ConvergentList {
        partial_quotients: quotients,
        convergents,
        reliable_count,
        terminated,
    }
}

/// Continued fraction of a float known to `digits` digits.
pub fn continued_fraction(x: &Float, digits: u32) -> Result<ConvergentList> {
    let q = x
        .to_rational()
        .ok_or_else(|| Error::invalid("continued_fraction needs a finite input"))?;
    if q <= 0 {
        return Err(Error::invalid("continued_fraction needs x > 0"));
    }
    Ok(continued_fraction_rational(&q, digits))
}

/// `|GL_2(Z/ℓ)| = (ℓ²-1)(ℓ²-ℓ)`.
pub fn gl2_order(ell: u64) -> u64 {
    (ell * ell - 1) * (ell * ell - ell)
}

/// `(det, tr)` of every invertible 2×2 matrix over `Z/ℓ`.
pub fn gl2_det_trace(ell: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for a in 0..ell {
        for b in 0..ell {
            for c in 0..ell {
                for d in 0..ell {
                    let det = (a * d + ell * ell - b * c) % ell;
                    if det != 0 {
                        out.push((det, (a + d) % ell));
                    }
                }
            }
        }
    }
    out
}

/// Feasibility guard for [`gl2_local_factor`].
pub const GL2_ENUMERATION_LIMIT: u128 = 1_000_000_000;

/// `ℓ^d · #{σ ∈ GL_2(Z/ℓ)^d : det σ_j + 1 - tr σ_j ≡ det σ_{j+1}} / |GL_2(Z/ℓ)|^d`, indices cyclic.
pub fn gl2_local_factor(ell: u64, d: u32) -> Result<Rational> {
    if !is_prime(ell) || d == 0 {
        return Err(Error::invalid(format!(
            "need prime ell and d >= 1, got ell={ell}, d={d}"
        )));
    }
    let size = (ell as u128).pow(4).checked_pow(d).unwrap_or(u128::MAX);
    if size > GL2_ENUMERATION_LIMIT {
        return Err(Error::Infeasible {
            size,
            limit: GL2_ENUMERATION_LIMIT,
        });
    }
    let mats = gl2_det_trace(ell);
    let next_det = |(det, tr): (u64, u64)| (det + 1 + ell - tr) % ell;
    fn walk(
        depth: u32,
        first: (u64, u64),
        prev: (u64, u64),
        mats: &[(u64, u64)],
        step: &dyn Fn((u64, u64)) -> u64,
    ) -> u64 {
        let want = step(prev);
        if depth == 0 {
            return u64::from(want == first.0);
        }
        mats.iter()
            .filter(|m| m.0 == want)
            .map(|m| walk(depth - 1, first, *m, mats, step))
            .sum()
    }
    let count: u64 = mats
        .par_iter()
        .map(|m| walk(d - 1, *m, *m, &mats, &next_det))
        .sum();
    let num = Integer::from(Integer::u_pow_u(ell as u32, d)) * count;
    let den = Integer::from(Integer::u_pow_u(gl2_order(ell) as u32, d));
    Ok(Rational::from((num, den)))
}

/// `(2/π)^d I(d) Π_{ℓ <= ell_max} local factor`, with the factors listed.
#[derive(Clone, Debug)]
pub struct AliquotConstant {
    pub d: u32,
    pub i_d: Float,
    /// `(2/π)^d I(d)`
    pub i_aliquot: Float,
    pub local_factors: Vec<(u64, Rational)>,
    pub value: Float,
}

pub fn c_aliquot_truncated(
    d: u32,
    ell_max: u64,
    ctx: &PrecisionContext,
) -> Result<AliquotConstant> {
    let bits = ctx.bits();
    let i_d = i_d_poisson(d, ctx)?;
    let two_over_pi = Float::with_val(bits, 2u32) / hp::pi(bits);
    let i_aliquot = Float::with_val(bits, two_over_pi.pow(d)) * &i_d;
    let mut local_factors = Vec::new();
    let mut value = i_aliquot.clone();
    for ell in (2..=ell_max).filter(|&l| is_prime(l)) {
        let f = gl2_local_factor(ell, d)?;
        value *= hp::from_rational(&f, bits);
        local_factors.push((ell, f));
    }
    Ok(AliquotConstant {
        d,
        i_d,
        i_aliquot,
        local_factors,
        value,
    })
}
