//! Fourier inversion of the sinc-Hankel determinant `I_k(u)` back to γ_k(c), and the
//! interpolation of each unit-interval piece from numeric values.
//!
//! `I_k(u) = det(m_{i+j-2}(u))` with `m_n(u) = ∫_{-1/2}^{1/2} x^n e^{-2πiux} dx`, which
//! equals `det(h^{(i+j-2)}(u)) / (2πi)^{k(k-1)}`. Writing `a = -2πiu`, `v = 1/a`, every
//! `m_n` is `e^{a/2}·P(v) + e^{-a/2}·Q(v)` with rational polynomials, so `I_k` is an exact
//! finite sum `Σ_p e^{p a/2} R_p(v)`. That decomposition ([`IkExpansion`]) gives the
//! large-`u` behaviour exactly and lets the quadrature tail `∫_U^∞` be summed in closed
//! form with exponential integrals.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::exactpoly::{laplace_det, Polynomial, RingElem};
use crate::hp::{self, det_complex, GaussRule, HPComplex, PrecisionContext};
use crate::special::{barnes_g_int, factorial};

/// Quadrature settings for [`gamma_numeric`].
#[derive(Clone, Debug)]
pub struct QuadratureConfig {
    /// Split point between Gauss–Legendre quadrature and the closed-form tail.
    pub truncation_u: Rational,
    /// Panels per unit `1/k` of `u`.
    pub panels_per_period: u32,
    pub nodes_per_panel: usize,
    pub ctx: PrecisionContext,
}

impl QuadratureConfig {
    pub fn new(ctx: PrecisionContext) -> Self {
        QuadratureConfig {
            truncation_u: Rational::from(4),
            panels_per_period: 8,
            nodes_per_panel: 32,
            ctx,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.truncation_u <= 0 || self.panels_per_period == 0 || self.nodes_per_panel == 0 {
            return Err(Error::invalid("quadrature settings must be positive"));
        }
        Ok(())
    }
}

/// `ν(c,k) = c² + (k-c)²`.
pub fn nu(c: u32, k: u32) -> u32 {
    c * c + (k - c) * (k - c)
}

pub fn nu_min(k: u32) -> u32 {
    nu(k.div_ceil(2), k)
}

/// Decay exponent and leading coefficient of the `e^{iπu(k-2c)}` component of `I_k`.
#[derive(Clone, Debug)]
pub struct NuA {
    pub c: u32,
    pub nu: u32,
    /// `(-1)^c (2πi)^{-ν} G(c+1)² G(k-c+1)²`
    pub a: HPComplex,
}

pub fn nu_a(k: u32, ctx: &PrecisionContext) -> Vec<NuA> {
    let bits = ctx.bits();
    (0..=k)
        .map(|c| {
            let n = nu(c, k);
            let g = barnes_g_int(c + 1) * barnes_g_int(k - c + 1);
            let mag = hp::from_integer(&g.square(), bits);
            let two_pi = Float::with_val(bits, hp::pi(bits) * 2u32);
            // (2πi)^{-ν} = (2π)^{-ν} i^{-ν}
            let scale = mag / Float::with_val(bits, rug::ops::Pow::pow(&two_pi, n));
            let mut a = HPComplex::from_real(scale).mul_i_pow(-(n as i64));
            if c % 2 == 1 {
                a = -&a;
            }
            NuA { c, nu: n, a }
        })
        .collect()
}

/// `∫_{-1/2}^{1/2} x^m dx`.
fn centred_moment(m: u32, bits: u32) -> Float {
    if m % 2 == 1 {
        return Float::new(bits);
    }
    Float::with_val(bits, Float::i_exp(1, -(m as i32))) / (m + 1)
}

/// `m_n(u)` for `n = 0..=nmax` at precision `bits`.
fn moments(nmax: u32, u: &Float, bits: u32) -> Vec<HPComplex> {
    let pi = hp::pi(bits);
    let u = Float::with_val(bits, u);
    if u.as_abs().le(&Float::with_val(bits, 1)) {
        // m_n = Σ_q (-2πiu)^q / q! ∫ x^{n+q}; only even n+q survive
        let a = Float::with_val(bits, &pi * &u) * 2u32;
        let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32) - 10));
        (0..=nmax)
            .map(|n| {
                let mut acc = HPComplex::zero(bits);
                let mut term = Float::with_val(bits, 1); // a^q / q!
                let mut q = 0u32;
                loop {
                    if (n + q).is_multiple_of(2) {
                        let v = Float::with_val(bits, &term * &centred_moment(n + q, bits));
                        let z = HPComplex::from_real(v).mul_i_pow(-(q as i64));
                        acc = &acc + &z;
                    }
                    q += 1;
                    term *= &a;
                    term /= q;
                    if q > 8 && term.as_abs().lt(&tiny) {
                        break;
                    }
                }
                acc
            })
            .collect()
    } else {
        // antiderivative e^{ax} Σ_j (-1)^j n!/(n-j)! x^{n-j} a^{-(j+1)}
        let a = HPComplex::from_imag(Float::with_val(
            bits,
            -(Float::with_val(bits, &pi * &u) * 2u32),
        ));
        let v = a.recip();
        let half_a = a.scale(&Float::with_val(bits, 0.5));
        let ep = half_a.exp();
        let em = (-&half_a).exp();
        let mut vpow = vec![v.clone()];
        for _ in 0..nmax {
            let next = vpow.last().unwrap() * &v;
            vpow.push(next);
        }
        (0..=nmax)
            .map(|n| {
                let mut acc = HPComplex::zero(bits);
                let mut falling = Float::with_val(bits, 1); // n!/(n-j)!
                for j in 0..=n {
                    let e = n - j;
                    let half_pow = Float::with_val(bits, Float::i_exp(1, -(e as i32)));
                    let bracket = if e % 2 == 0 { &ep - &em } else { &ep + &em };
                    let mut term = (&vpow[j as usize] * &bracket)
                        .scale(&Float::with_val(bits, &half_pow * &falling));
                    if j % 2 == 1 {
                        term = -&term;
                    }
                    acc = &acc + &term;
                    falling *= n - j;
                }
                acc
            })
            .collect()
    }
}

/// `h^{(n)}(u)` for `h(u) = sin(πu)/(πu)`. Always real; `(-1)^n` parity in `u`.
pub fn h_deriv(n: u32, u: &Float, ctx: &PrecisionContext) -> HPComplex {
    let bits = ctx.boosted(n + 10).bits();
    let m = moments(n, u, bits).pop().unwrap();
    let two_pi = Float::with_val(bits, hp::pi(bits) * 2u32);
    let scale = Float::with_val(bits, rug::ops::Pow::pow(&two_pi, n));
    let z = m.scale(&scale).mul_i_pow(-(n as i64));
    HPComplex::new(Float::with_val(ctx.bits(), &z.re), Float::new(ctx.bits()))
}

fn ik_bits(k: u32, u: &Float, ctx: &PrecisionContext) -> u32 {
    let ulog = (u.to_f64().abs() + 1.0).log10();
    let extra = (nu_min(k) as f64 * ulog).ceil() as u32 + 2 * k + 10;
    ctx.boosted(extra).bits()
}

/// `I_k(u)`, real and even in `u`.
pub fn ik_eval(k: u32, u: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(1..=8).contains(&k) {
        return Err(Error::invalid(format!("k must lie in 1..=8, got {k}")));
    }
    let bits = ik_bits(k, u, ctx);
    let m = moments(2 * k - 2, u, bits);
    let ku = k as usize;
    let mat = (0..ku)
        .map(|i| (0..ku).map(|j| m[i + j].clone()).collect())
        .collect();
    let d = det_complex(mat);
    // scale floor keeps the check meaningful near zeros of I_k
    let floor = Float::with_val(
        bits,
        rug::ops::Pow::pow(
            &Float::with_val(bits, u.to_f64().abs() * 10.0 + 10.0),
            -((k * k) as i32),
        ),
    );
    let tol = hp::pow10(-(ctx.digits as i64 - 10), bits)
        * Float::with_val(bits, d.re.abs_ref()).max(&floor);
    if d.im.as_abs().gt(&*tol.as_abs()) {
        return Err(Error::Precision(format!(
            "I_{k}({}) has imaginary part {}",
            u.to_f64(),
            d.im.to_f64()
        )));
    }
    Ok(Float::with_val(ctx.bits(), &d.re))
}

/// Sum of `e^{p a/2}` times a rational polynomial in `v`, keyed by `p`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct ExpPoly(BTreeMap<i32, Polynomial>);

impl RingElem for ExpPoly {
    fn ring_add(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        for (p, poly) in &other.0 {
            let e = out.entry(*p).or_default();
            *e = e.add(poly);
        }
        out.retain(|_, v| !v.is_zero());
        ExpPoly(out)
    }

    fn ring_neg(&self) -> Self {
        ExpPoly(
            self.0
                .iter()
                .map(|(p, v)| (*p, v.scale(&Rational::from(-1))))
                .collect(),
        )
    }

    fn ring_mul(&self, other: &Self) -> Self {
        let mut out: BTreeMap<i32, Polynomial> = BTreeMap::new();
        for (p, a) in &self.0 {
            for (q, b) in &other.0 {
                let e = out.entry(p + q).or_default();
                *e = e.add(&a.mul(b));
            }
        }
        out.retain(|_, v| !v.is_zero());
        ExpPoly(out)
    }
}

/// `m_n` as an [`ExpPoly`].
fn moment_exppoly(n: u32) -> ExpPoly {
    let mut plus = vec![Rational::new(); n as usize + 2];
    let mut minus = vec![Rational::new(); n as usize + 2];
    let nf = factorial(n);
    for j in 0..=n {
        let e = n - j;
        let coef = Rational::from((nf.clone(), factorial(e))) * if j % 2 == 0 { 1 } else { -1 };
        let half = Rational::from((1, Integer::from(1) << e));
        plus[j as usize + 1] = Rational::from(&coef * &half);
        let sign = if e.is_multiple_of(2) { -1 } else { 1 };
        minus[j as usize + 1] = coef * half * sign;
    }
    let mut m = BTreeMap::new();
    m.insert(1, Polynomial::new(plus));
    m.insert(-1, Polynomial::new(minus));
    ExpPoly(m)
}

/// Exact `I_k(u) = Σ_p e^{p a/2} R_p(v)`, `a = -2πiu`, `v = 1/a`.
#[derive(Clone, Debug)]
pub struct IkExpansion {
    k: u32,
    terms: BTreeMap<i32, Polynomial>,
}

impl IkExpansion {
    pub fn new(k: u32) -> Result<Self> {
        if !(1..=8).contains(&k) {
            return Err(Error::invalid(format!("k must lie in 1..=8, got {k}")));
        }
        let ku = k as usize;
        let entries: Vec<ExpPoly> = (0..2 * k - 1).map(moment_exppoly).collect();
        let mat: Vec<Vec<ExpPoly>> = (0..ku)
            .map(|i| (0..ku).map(|j| entries[i + j].clone()).collect())
            .collect();
        Ok(IkExpansion {
            k,
            terms: laplace_det(&mat).0,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `R_p` for each `p` (with `p = 2c - k`).
    pub fn terms(&self) -> &BTreeMap<i32, Polynomial> {
        &self.terms
    }

    /// Lowest power of `v` in `R_p` and its coefficient.
    pub fn leading(&self, p: i32) -> Option<(usize, Rational)> {
        let poly = self.terms.get(&p)?;
        poly.coeffs()
            .iter()
            .enumerate()
            .find(|(_, c)| **c != 0)
            .map(|(i, c)| (i, c.clone()))
    }

    /// True when every component starts at `v^{ν(c,k)}` with coefficient
    /// `(-1)^{c+ν} G(c+1)² G(k-c+1)²`, i.e. the leading term is `a(c,k) u^{-ν}`.
    pub fn matches_leading_terms(&self) -> bool {
        let k = self.k;
        (0..=k).all(|c| {
            let p = 2 * c as i32 - k as i32;
            let n = nu(c, k);
            let g = (barnes_g_int(c + 1) * barnes_g_int(k - c + 1)).square();
            let expect = if (c + n).is_multiple_of(2) {
                Rational::from(g)
            } else {
                -Rational::from(g)
            };
            self.leading(p) == Some((n as usize, expect))
        }) && self
            .terms
            .keys()
            .all(|p| (p + k as i32) % 2 == 0 && p.abs() <= k as i32)
    }

    /// Complex coefficients `r_{p,n} (-2πi)^{-n}` of `e^{-iπpu} u^{-n}`.
    fn u_coefficients(&self, bits: u32) -> Vec<(i32, usize, HPComplex)> {
        let two_pi = Float::with_val(bits, hp::pi(bits) * 2u32);
        let mut out = Vec::new();
        for (p, poly) in &self.terms {
            for (n, r) in poly.coeffs().iter().enumerate() {
                if *r == 0 {
                    continue;
                }
                // (-2πi)^{-n} = (2π)^{-n} i^{n}
                let mag = hp::from_rational(r, bits)
                    / Float::with_val(bits, rug::ops::Pow::pow(&two_pi, n as u32));
                out.push((*p, n, HPComplex::from_real(mag).mul_i_pow(n as i64)));
            }
        }
        out
    }

    /// Direct evaluation; accurate for `|u|` bounded away from 0.
    pub fn eval(&self, u: &Float, ctx: &PrecisionContext) -> Float {
        let bits = ctx.boosted(20).bits();
        let u = Float::with_val(bits, u);
        let pi = hp::pi(bits);
        let inv_u = Float::with_val(bits, 1) / &u;
        let mut acc = HPComplex::zero(bits);
        for (p, n, c) in self.u_coefficients(bits) {
            let phase = HPComplex::cis(&Float::with_val(
                bits,
                -(Float::with_val(bits, &pi * &u) * p),
            ));
            let upow = Float::with_val(bits, rug::ops::Pow::pow(&inv_u, n as u32));
            acc = &acc + &(&c * &phase).scale(&upow);
        }
        Float::with_val(ctx.bits(), &acc.re)
    }
}

/// `|I_k(u) - Σ_c e^{iπu(k-2c)} a(c,k) u^{-ν(c,k)}| · u^{ν_min+1}`.
pub fn ik_asymptotic_check(k: u32, u: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if u.to_f64() < 5.0 {
        return Err(Error::invalid("ik_asymptotic_check needs u >= 5"));
    }
    let bits = ctx.bits();
    let exact = ik_eval(k, u, ctx)?;
    let pi = hp::pi(bits);
    let uu = Float::with_val(bits, u);
    let mut lead = HPComplex::zero(bits);
    for t in nu_a(k, ctx) {
        let phase = HPComplex::cis(&Float::with_val(
            bits,
            Float::with_val(bits, &pi * &uu) * (k as i32 - 2 * t.c as i32),
        ));
        let upow = Float::with_val(bits, rug::ops::Pow::pow(&uu, -(t.nu as i32)));
        lead = &lead + &(&phase * &t.a).scale(&upow);
    }
    let rem = (exact - &lead.re).abs();
    let scale = Float::with_val(bits, rug::ops::Pow::pow(&uu, nu_min(k) + 1));
    Ok(Float::with_val(ctx.bits(), rem * scale))
}

/// `E_n(z) = ∫_1^∞ e^{-zt} t^{-n} dt` for `n = 1..=nmax` (index 0 unused), `z ≠ 0`.
fn expint_family(nmax: usize, z: &HPComplex, bits: u32) -> Result<Vec<HPComplex>> {
    let az = z.abs().to_f64();
    let work = bits + hp::digits_to_bits(az.min(60.0) as u32 / 2 + 20);
    let z = HPComplex::new(Float::with_val(work, &z.re), Float::with_val(work, &z.im));
    let e1 = if az <= 40.0 {
        // E_1(z) = -γ - ln z - Σ_{m≥1} (-z)^m / (m·m!)
        let tiny = Float::with_val(work, Float::i_exp(1, -(work as i32) - 8));
        let neg_z = -&z;
        let mut term = HPComplex::one(work);
        let mut sum = HPComplex::zero(work);
        let mut m = 0u32;
        loop {
            m += 1;
            term = (&term * &neg_z).scale(&(Float::with_val(work, 1) / m));
            sum = &sum + &term.scale(&(Float::with_val(work, 1) / m));
            if m as f64 > az && term.abs() < tiny {
                break;
            }
        }
        let gamma = HPComplex::from_real(hp::euler_gamma(work));
        -&(&(&gamma + &z.ln()) + &sum)
    } else {
        // modified Lentz on e^{-z}/(z+1- 1/(z+3- 4/(z+5- ...)))
        let eps = Float::with_val(work, Float::i_exp(1, -(work as i32) + 4));
        let one = HPComplex::one(work);
        let big = HPComplex::from_real(Float::with_val(work, Float::i_exp(1, work as i32)));
        let mut b = &z + &one;
        let mut c = big;
        let mut d = b.recip();
        let mut h = d.clone();
        let mut converged = false;
        for i in 1..200_000u64 {
            let an = HPComplex::from_real(Float::with_val(work, -((i * i) as f64)));
            b = &b + &HPComplex::from_real(Float::with_val(work, 2));
            d = (&(&an * &d) + &b).recip();
            c = &b + &(&an * &c.recip());
            let del = &c * &d;
            h = &h * &del;
            if (&del - &one).abs() < eps {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Precision(
                "exponential-integral continued fraction did not converge".into(),
            ));
        }
        &h * &(-&z).exp()
    };
    let ez = (-&z).exp();
    let mut out = vec![HPComplex::zero(bits), e1.clone()];
    let mut prev = e1;
    for n in 1..nmax {
        // E_{n+1} = (e^{-z} - z E_n) / n
        let next = (&ez - &(&z * &prev)).scale(&(Float::with_val(work, 1) / n as u32));
        out.push(next.clone());
        prev = next;
    }
    Ok(out
        .into_iter()
        .map(|w| HPComplex::new(Float::with_val(bits, &w.re), Float::with_val(bits, &w.im)))
        .collect())
}

/// `T_n(β, U) = ∫_U^∞ e^{iβu} u^{-n} du` for `n = 1..=nmax`.
fn tail_integrals(beta: &Float, big_u: &Float, nmax: usize, bits: u32) -> Result<Vec<HPComplex>> {
    if beta.is_zero() {
        let mut out = vec![HPComplex::zero(bits), HPComplex::zero(bits)];
        for n in 2..=nmax {
            let v = Float::with_val(bits, rug::ops::Pow::pow(big_u, 1 - n as i32)) / (n as u32 - 1);
            out.push(HPComplex::from_real(v));
        }
        return Ok(out);
    }
    let z = HPComplex::from_imag(Float::with_val(
        bits,
        -(Float::with_val(bits, beta * big_u)),
    ));
    let e = expint_family(nmax, &z, bits)?;
    Ok(e.into_iter()
        .enumerate()
        .map(|(n, en)| {
            if n == 0 {
                return en;
            }
            en.scale(&Float::with_val(
                bits,
                rug::ops::Pow::pow(big_u, 1 - n as i32),
            ))
        })
        .collect())
}

/// γ_k(c) by quadrature of the cached samples `w_i I_k(u_i)` on `[0, U]` plus the exact tail.
#[derive(Clone, Debug)]
pub struct GammaInverter {
    k: u32,
    cfg: QuadratureConfig,
    big_u: Float,
    samples: Vec<(Float, Float)>,
    tail_coeffs: Vec<(i32, usize, HPComplex)>,
    max_n: usize,
    norm: Float,
}

impl GammaInverter {
    pub fn new(k: u32, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        if !(1..=7).contains(&k) {
            return Err(Error::invalid(format!("k must lie in 1..=7, got {k}")));
        }
        let ctx = cfg.ctx;
        let bits = ctx.bits();
        let expansion = IkExpansion::new(k)?;
        let big_u = hp::from_rational(&cfg.truncation_u, bits);
        let panels = {
            let p = Rational::from(&cfg.truncation_u * (cfg.panels_per_period * k));
            Integer::from(p.ceil_ref()).to_u32().unwrap_or(1).max(1) as usize
        };
        let rule: GaussRule = hp::gauss_legendre(cfg.nodes_per_panel, bits);
        let width = Float::with_val(bits, &big_u / panels as u32);
        let half = Float::with_val(bits, &width / 2u32);
        let mut nodes = Vec::with_capacity(panels * rule.len());
        for p in 0..panels {
            let mid = Float::with_val(bits, &width * p as u32) + &half;
            for (x, w) in rule.iter() {
                let u = Float::with_val(bits, &half * x) + &mid;
                nodes.push((u, Float::with_val(bits, &half * w)));
            }
        }
        let samples = nodes
            .into_par_iter()
            .map(|(u, w)| {
                let ik = ik_eval(k, &u, &ctx)?;
                Ok((u, w * ik))
            })
            .collect::<Result<Vec<_>>>()?;
        let tail_coeffs = expansion.u_coefficients(bits);
        let max_n = tail_coeffs.iter().map(|t| t.1).max().unwrap_or(1);
        let g = hp::from_integer(&barnes_g_int(k + 1), bits);
        let norm = Float::with_val(bits, 1) / Float::with_val(bits, g.square_ref());
        Ok(GammaInverter {
            k,
            cfg: cfg.clone(),
            big_u,
            samples,
            tail_coeffs,
            max_n,
            norm,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    /// Number of `I_k` samples in the finite part.
    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn gamma(&self, c: &Rational) -> Result<Float> {
        let bits = self.cfg.ctx.bits();
        let k = self.k;
        if *c < 0 || *c > k {
            return Ok(Float::new(bits));
        }
        let x = c - Rational::from((k, 2u32));
        let two_pi = Float::with_val(bits, hp::pi(bits) * 2u32);
        let omega = Float::with_val(bits, &two_pi * &hp::from_rational(&x, bits));
        let mut near = Float::new(bits);
        for (u, s) in &self.samples {
            let arg = Float::with_val(bits, &omega * u);
            near += arg.cos() * s;
        }
        near *= 2u32;

        let mut tail = HPComplex::zero(bits);
        let mut by_p: BTreeMap<i32, Vec<HPComplex>> = BTreeMap::new();
        for (p, n, coef) in &self.tail_coeffs {
            if !by_p.contains_key(p) {
                // β = 2π(c - (k+p)/2)
                let shift = c - Rational::from((k as i32 + p, 2));
                if shift == 0 && self.tail_coeffs.iter().any(|t| t.0 == *p && t.1 <= 1) {
                    return Err(Error::invalid(format!(
                        "c = {c} is a knot of γ_{k}; the transform does not converge there"
                    )));
                }
                let beta = Float::with_val(bits, &two_pi * &hp::from_rational(&shift, bits));
                by_p.insert(*p, tail_integrals(&beta, &self.big_u, self.max_n, bits)?);
            }
            let t = &by_p[p][*n];
            tail = &tail + &(coef * t);
        }
        let total = near + Float::with_val(bits, &tail.re * 2u32);
        Ok(total * &self.norm)
    }

    /// Interpolate piece `j` from `k²` numeric values; see [`interpolate_piece`].
    pub fn interpolate_piece(&self, j: u32) -> Result<InterpolatedPiece> {
        let k = self.k;
        if j >= k {
            return Err(Error::invalid(format!(
                "piece index j must be < k = {k}, got {j}"
            )));
        }
        let bits = self.cfg.ctx.bits();
        let nodes = interpolation_nodes(k, j);
        let values = nodes
            .par_iter()
            .map(|c| self.gamma(c))
            .collect::<Result<Vec<_>>>()?;
        let jq = Rational::from(j);
        let xs: Vec<Float> = nodes
            .iter()
            .map(|c| hp::from_rational(&Rational::from(c - &jq), bits))
            .collect();

        // Newton divided differences in the local variable s = c - j
        let n = xs.len();
        let mut dd = values;
        for level in 1..n {
            for i in (level..n).rev() {
                let num = Float::with_val(bits, &dd[i] - &dd[i - 1]);
                let den = Float::with_val(bits, &xs[i] - &xs[i - level]);
                dd[i] = num / den;
            }
        }
        // Horner expansion of the Newton form into monomials
        let mut coeffs = vec![Float::new(bits); n];
        for i in (0..n).rev() {
            // coeffs <- coeffs * (s - x_i) + dd_i
            let mut next = vec![Float::new(bits); n];
            for d in (0..n).rev() {
                let mut v = Float::with_val(bits, -(Float::with_val(bits, &coeffs[d] * &xs[i])));
                if d > 0 {
                    v += &coeffs[d - 1];
                }
                next[d] = v;
            }
            next[0] += &dd[i];
            coeffs = next;
        }

        let scale = hp::from_integer(&factorial(k * k - 1), bits);
        let limit = hp::pow10(-(self.cfg.ctx.digits as i64) / 4, bits);
        let mut worst = Float::new(bits);
        let mut worst_index = 0;
        let mut local = Vec::with_capacity(n);
        for (i, c) in coeffs.iter().enumerate() {
            let v = Float::with_val(bits, c * &scale);
            let r = Float::with_val(bits, v.round_ref());
            let dist = Float::with_val(bits, &v - &r).abs();
            if dist > worst {
                worst = dist.clone();
                worst_index = i;
            }
            local.push(
                r.to_integer_round(Round::Nearest)
                    .map(|(z, _)| z)
                    .unwrap_or_default(),
            );
        }
        if worst >= limit {
            return Err(Error::Precision(format!(
                "piece j={j} of k={k}: local coefficient {worst_index} is {} from an integer (limit {})",
                hp::to_decimal(&worst, 6),
                hp::to_decimal(&limit, 6)
            )));
        }
        let local_poly = Polynomial::new(local.into_iter().map(Rational::from).collect());
        let absolute = local_poly.compose_linear(&Rational::from(-(j as i64)), &Rational::from(1));
        let coeffs_scaled = (0..n).map(|i| absolute.coeff(i).numer().clone()).collect();
        Ok(InterpolatedPiece {
            k,
            j,
            nodes,
            coeffs_scaled,
            worst_rounding: Float::with_val(bits, worst),
        })
    }
}

/// γ_k(c) by Fourier inversion of `I_k`.
pub fn gamma_numeric(k: u32, c: &Rational, cfg: &QuadratureConfig) -> Result<Float> {
    GammaInverter::new(k, cfg)?.gamma(c)
}

/// Result of [`interpolate_piece`]: integer coefficients of `(k²-1)!·γ_k` on `[j, j+1)`.
#[derive(Clone, Debug)]
pub struct InterpolatedPiece {
    pub k: u32,
    pub j: u32,
    pub nodes: Vec<Rational>,
    /// Ascending powers of `c`.
    pub coeffs_scaled: Vec<Integer>,
    /// Largest distance to the nearest integer before rounding.
    pub worst_rounding: Float,
}

/// `k²` Chebyshev points of `(j, j+1)` rounded to denominator `4k²`, doubled until distinct and interior.
pub fn interpolation_nodes(k: u32, j: u32) -> Vec<Rational> {
    let n = (k * k) as usize;
    let mut den: u64 = 4 * k as u64 * k as u64;
    loop {
        let mut nums: Vec<i64> = (0..n)
            .map(|i| {
                let x = 0.5
                    * (1.0 + ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos());
                (x * den as f64).round() as i64
            })
            .collect();
        nums.sort_unstable();
        let distinct = nums.windows(2).all(|w| w[0] != w[1]);
        let interior = nums.iter().all(|&m| m > 0 && m < den as i64);
        if distinct && interior {
            return nums
                .into_iter()
                .map(|m| Rational::from((m, den)) + j)
                .collect();
        }
        den *= 2;
    }
}

/// Interpolated integer coefficients of piece `j`, with precision boosted by `k² + 10` digits.
pub fn interpolate_piece(k: u32, j: u32, cfg: &QuadratureConfig) -> Result<InterpolatedPiece> {
    let mut boosted = cfg.clone();
    boosted.ctx = cfg.ctx.boosted(k * k + 10);
    GammaInverter::new(k, &boosted)?.interpolate_piece(j)
}
