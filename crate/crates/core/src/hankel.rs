//! `D_k(t) = det(g^{(i+j-2)}(t))` with `g(t) = ∫_0^1 e^{-tx} dx`, its t-derivatives,
//! and residuals of the Painlevé V (σ-form) and Toda identities built from it.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::hp::{self, det_complex, HPComplex, PrecisionContext};
use crate::toda::dk_at_zero;

/// Series/recurrence switch point for [`g_deriv`].
pub const SERIES_CUTOFF: f64 = 30.0;

/// Row `i` holds `g^{(offsets[i] + j)}`, `j = 0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowOffsetMatrix {
    pub offsets: Vec<u32>,
}

impl RowOffsetMatrix {
    /// Offsets `0, 1, ..., k-1`.
    pub fn initial(k: u32) -> Self {
        RowOffsetMatrix {
            offsets: (0..k).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.offsets.len()
    }

    pub fn has_collision(&self) -> bool {
        let mut o = self.offsets.clone();
        o.sort_unstable();
        o.windows(2).any(|w| w[0] == w[1])
    }

    fn max_order(&self) -> u32 {
        self.offsets.iter().max().copied().unwrap_or(0) + self.k() as u32 - 1
    }
}

fn extra_digits(t: &HPComplex) -> u32 {
    (t.abs().to_f64() / std::f64::consts::LN_10).ceil() as u32 + 10
}

/// `g^{(n)}(t)` for `n = 0..=nmax` at precision `bits`.
fn g_values(nmax: u32, t: &HPComplex, bits: u32) -> Vec<HPComplex> {
    let work = bits + hp::digits_to_bits(extra_digits(t));
    let t = HPComplex::new(Float::with_val(work, &t.re), Float::with_val(work, &t.im));
    let abs_t = t.abs().to_f64();
    let sign = |n: u32, z: HPComplex| if n.is_multiple_of(2) { z } else { -&z };
    let out: Vec<HPComplex> = if abs_t <= SERIES_CUTOFF {
        // g^{(n)}(t) = (-1)^n Σ_m (-t)^m / (m! (n+m+1))
        let neg_t = -&t;
        let tiny = Float::with_val(work, Float::i_exp(1, -(work as i32) - 8));
        let mut powers = vec![HPComplex::one(work)];
        let mut m = 0u32;
        loop {
            let last = powers.last().unwrap();
            if m as f64 > abs_t && last.abs() < tiny {
                break;
            }
            m += 1;
            let next = (last * &neg_t).scale(&(Float::with_val(work, 1) / m));
            powers.push(next);
        }
        (0..=nmax)
            .map(|n| {
                let mut acc = HPComplex::zero(work);
                for (mm, p) in powers.iter().enumerate() {
                    let d = Float::with_val(work, 1) / (n + mm as u32 + 1);
                    acc = &acc + &p.scale(&d);
                }
                sign(n, acc)
            })
            .collect()
    } else {
        // I_n = ∫_0^1 x^n e^{-tx} dx, I_n = (n I_{n-1} - e^{-t}) / t
        let e = (-&t).exp();
        let inv_t = t.recip();
        let one = HPComplex::one(work);
        let mut i_prev = &(&one - &e) * &inv_t;
        let mut out = vec![i_prev.clone()];
        for n in 1..=nmax {
            let i_n = &(&i_prev.scale(&Float::with_val(work, n)) - &e) * &inv_t;
            out.push(sign(n, i_n.clone()));
            i_prev = i_n;
        }
        out
    };
    out.into_iter()
        .map(|z| HPComplex::new(Float::with_val(bits, &z.re), Float::with_val(bits, &z.im)))
        .collect()
}

/// `g^{(n)}(t) = ∫_0^1 (-x)^n e^{-tx} dx`.
pub fn g_deriv(n: u32, t: &HPComplex, ctx: &PrecisionContext) -> HPComplex {
    g_values(n, t, ctx.bits()).pop().unwrap()
}

/// Working precision for Hankel determinants of size `k`: the moment matrix is
/// Hilbert-like, so cancellation costs roughly `1.5 k` digits.
fn det_bits(k: usize, ctx: &PrecisionContext) -> u32 {
    ctx.boosted(2 * k as u32 + 5).bits()
}

fn det_from_values(m: &RowOffsetMatrix, g: &[HPComplex]) -> HPComplex {
    let bits = g[0].prec();
    if m.has_collision() {
        return HPComplex::zero(bits);
    }
    let k = m.k();
    let rows = m
        .offsets
        .iter()
        .map(|&o| (0..k).map(|j| g[o as usize + j].clone()).collect())
        .collect();
    det_complex(rows)
}

/// Determinant of the row-offset matrix; exactly zero when two offsets coincide.
pub fn det_row_offsets(
    m: &RowOffsetMatrix,
    t: &HPComplex,
    ctx: &PrecisionContext,
) -> Result<HPComplex> {
    if m.k() == 0 || m.k() > 12 {
        return Err(Error::invalid(format!(
            "determinant size must be 1..=12, got {}",
            m.k()
        )));
    }
    if m.has_collision() {
        return Ok(HPComplex::zero(ctx.bits()));
    }
    let g = g_values(m.max_order(), t, det_bits(m.k(), ctx));
    Ok(round_c(det_from_values(m, &g), ctx.bits()))
}

fn round_c(z: HPComplex, bits: u32) -> HPComplex {
    HPComplex::new(Float::with_val(bits, &z.re), Float::with_val(bits, &z.im))
}

fn check_k(k: u32) -> Result<()> {
    if !(1..=10).contains(&k) {
        return Err(Error::invalid(format!("k must lie in 1..=10, got {k}")));
    }
    Ok(())
}

/// All compositions of `total` into `parts` nonnegative integers, with their multinomial weights.
fn compositions(total: u32, parts: usize) -> Vec<(Vec<u32>, u64)> {
    fn rec(rem: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=rem {
            cur.push(a);
            rec(rem - a, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut raw);
    let fact = |n: u32| -> u64 { (1..=n as u64).product() };
    raw.into_iter()
        .map(|a| {
            let w = fact(total) / a.iter().map(|&x| fact(x)).product::<u64>();
            (a, w)
        })
        .collect()
}

/// `D_k^{(m)}(t)` for `m = 0..=order` at working precision (not rounded).
fn dk_derivs_work(k: u32, t: &HPComplex, order: u32, ctx: &PrecisionContext) -> Vec<HPComplex> {
    let base = RowOffsetMatrix::initial(k);
    let g = g_values(base.max_order() + order, t, det_bits(k as usize, ctx));
    (0..=order)
        .map(|m| {
            let mut acc = HPComplex::zero(g[0].prec());
            for (incr, w) in compositions(m, k as usize) {
                let offsets = base.offsets.iter().zip(&incr).map(|(o, a)| o + a).collect();
                let mat = RowOffsetMatrix { offsets };
                if mat.has_collision() {
                    continue;
                }
                let d = det_from_values(&mat, &g);
                acc = &acc + &d.scale(&Float::with_val(g[0].prec(), w));
            }
            acc
        })
        .collect()
}

pub fn dk_eval(k: u32, t: &HPComplex, ctx: &PrecisionContext) -> Result<HPComplex> {
    check_k(k)?;
    det_row_offsets(&RowOffsetMatrix::initial(k), t, ctx)
}

/// `d^m/dt^m D_k(t)` for `m <= 3`, summed over the ways of adding `m` to the row offsets.
pub fn dk_deriv(k: u32, t: &HPComplex, order: u32, ctx: &PrecisionContext) -> Result<HPComplex> {
    check_k(k)?;
    if order > 3 {
        return Err(Error::invalid(format!(
            "derivative order must be <= 3, got {order}"
        )));
    }
    let v = dk_derivs_work(k, t, order, ctx);
    Ok(round_c(v[order as usize].clone(), ctx.bits()))
}

/// Central finite-difference derivative of [`dk_eval`] with step `10^{-digits/3}`.
pub fn dk_deriv_finite_difference(
    k: u32,
    t: &Float,
    order: u32,
    ctx: &PrecisionContext,
) -> Result<Float> {
    check_k(k)?;
    let bits = ctx.bits();
    let h = hp::pow10(-(ctx.digits as i64) / 3, bits);
    let at = |s: i32| -> Result<Float> {
        let x = Float::with_val(bits, t + Float::with_val(bits, &h * s));
        Ok(dk_eval(k, &HPComplex::from_real(x), ctx)?.re)
    };
    // stencils with O(h²) error
    let v = match order {
        0 => at(0)?,
        1 => (at(1)? - at(-1)?) / (Float::with_val(bits, &h * 2u32)),
        2 => {
            (at(1)? - Float::with_val(bits, at(0)? * 2u32) + at(-1)?)
                / Float::with_val(bits, h.square_ref())
        }
        3 => {
            let num = at(2)? - Float::with_val(bits, at(1)? * 2u32)
                + Float::with_val(bits, at(-1)? * 2u32)
                - at(-2)?;
            num / (Float::with_val(bits, (&h).pow(3u32)) * 2u32)
        }
        _ => return Err(Error::invalid("finite-difference order must be <= 3")),
    };
    Ok(v)
}

/// `H_k`, `H_k'`, `H_k''` at a real point.
#[derive(Clone, Debug)]
pub struct HkValues {
    pub h: Float,
    pub h1: Float,
    pub h2: Float,
}

struct LogDerivs {
    d: Float,
    l1: Float,
    l2: Float,
    l3: Float,
}

fn log_derivs(k: u32, t: &Float, ctx: &PrecisionContext) -> Result<LogDerivs> {
    check_k(k)?;
    let v = dk_derivs_work(k, &HPComplex::from_real(t.clone()), 3, ctx);
    let bits = v[0].prec();
    let d = v[0].re.clone();
    let threshold =
        hp::pow10(-(ctx.digits as i64) / 2, bits) * hp::from_rational(&dk_at_zero(k), bits);
    if d.as_abs().lt(&*threshold.as_abs()) {
        return Err(Error::NearZeroDeterminant {
            k,
            t: hp::to_decimal(t, 20),
        });
    }
    let r1 = Float::with_val(bits, &v[1].re / &d);
    let r2 = Float::with_val(bits, &v[2].re / &d);
    let r3 = Float::with_val(bits, &v[3].re / &d);
    let r1sq = Float::with_val(bits, r1.square_ref());
    let l2 = Float::with_val(bits, &r2 - &r1sq);
    // (log D)''' = D'''/D - 3 D''D'/D² + 2 (D'/D)³
    let l3 =
        r3 - Float::with_val(bits, &r2 * &r1) * 3u32 + Float::with_val(bits, &r1sq * &r1) * 2u32;
    Ok(LogDerivs { d, l1: r1, l2, l3 })
}

fn hk_work(k: u32, t: &Float, ctx: &PrecisionContext) -> Result<(HkValues, LogDerivs)> {
    let ld = log_derivs(k, t, ctx)?;
    let bits = ld.d.prec();
    let t = Float::with_val(bits, t);
    let h = Float::with_val(bits, &t * &ld.l1) + k * k;
    let h1 = Float::with_val(bits, &ld.l1 + Float::with_val(bits, &t * &ld.l2));
    let h2 = Float::with_val(bits, &ld.l2 * 2u32) + Float::with_val(bits, &t * &ld.l3);
    Ok((HkValues { h, h1, h2 }, ld))
}

/// `H_k(t) = t D_k'/D_k + k²`.
pub fn hk_eval(k: u32, t: &Float, ctx: &PrecisionContext) -> Result<Float> {
    hk_deriv(k, t, 0, ctx)
}

pub fn hk_deriv(k: u32, t: &Float, order: u32, ctx: &PrecisionContext) -> Result<Float> {
    if order > 2 {
        return Err(Error::invalid(format!(
            "H_k derivative order must be <= 2, got {order}"
        )));
    }
    let (v, _) = hk_work(k, t, ctx)?;
    let x = match order {
        0 => v.h,
        1 => v.h1,
        _ => v.h2,
    };
    Ok(Float::with_val(ctx.bits(), x))
}

/// `H_k`, `H_k'`, `H_k''` in one pass.
pub fn hk_values(k: u32, t: &Float, ctx: &PrecisionContext) -> Result<HkValues> {
    let (v, _) = hk_work(k, t, ctx)?;
    let b = ctx.bits();
    Ok(HkValues {
        h: Float::with_val(b, v.h),
        h1: Float::with_val(b, v.h1),
        h2: Float::with_val(b, v.h2),
    })
}

/// Both sides of an identity, their difference, and the scaled pass/fail verdict.
#[derive(Clone, Debug)]
pub struct Residual {
    pub lhs: Float,
    pub rhs: Float,
    pub residual: Float,
    /// `10^{-(digits-15)} · max(|lhs|, |rhs|, 1)`
    pub tolerance: Float,
}

impl Residual {
    fn new(lhs: Float, rhs: Float, ctx: &PrecisionContext) -> Self {
        let bits = ctx.bits();
        let residual = Float::with_val(bits, &lhs - &rhs);
        let mut scale = Float::with_val(bits, 1);
        for x in [&lhs, &rhs] {
            let a = Float::with_val(bits, x.abs_ref());
            if a > scale {
                scale = a;
            }
        }
        let tolerance = hp::pow10(-(ctx.digits as i64 - 15), bits) * scale;
        Residual {
            lhs: Float::with_val(bits, lhs),
            rhs: Float::with_val(bits, rhs),
            residual,
            tolerance,
        }
    }

    pub fn pass(&self) -> bool {
        self.residual.as_abs().le(&*self.tolerance.as_abs())
    }
}

/// `(tH'')²` against `(H + (2k-t)H')² - 4H'²(k² - H + tH')`.
pub fn painleve_residual(k: u32, t: &Float, ctx: &PrecisionContext) -> Result<Residual> {
    let (v, _) = hk_work(k, t, ctx)?;
    let bits = v.h.prec();
    let t = Float::with_val(bits, t);
    let lhs = Float::with_val(bits, &t * &v.h2).square();
    let two_k_minus_t = Float::with_val(bits, 2 * k) - &t;
    let a = Float::with_val(bits, &v.h + Float::with_val(bits, &two_k_minus_t * &v.h1)).square();
    let inner = Float::with_val(bits, k * k) - &v.h + Float::with_val(bits, &t * &v.h1);
    let b = Float::with_val(bits, v.h1.square_ref()) * 4u32 * inner;
    Ok(Residual::new(lhs, a - b, ctx))
}

/// `D_{k-1} D_{k+1} / D_k²` against `(log D_k)''`, with `D_0 ≡ 1`.
pub fn toda_residual(k: u32, t: &Float, ctx: &PrecisionContext) -> Result<Residual> {
    if k < 2 {
        return Err(Error::invalid("toda_residual needs k >= 2"));
    }
    let ld = log_derivs(k, t, ctx)?;
    let bits = ld.d.prec();
    let tc = HPComplex::from_real(t.clone());
    let inner = ctx.boosted(4);
    let below = dk_derivs_work(k - 1, &tc, 0, &inner).remove(0).re;
    let above = dk_derivs_work(k + 1, &tc, 0, &inner).remove(0).re;
    let lhs = Float::with_val(bits, &below * &above) / Float::with_val(bits, ld.d.square_ref());
    Ok(Residual::new(lhs, ld.l2, ctx))
}
