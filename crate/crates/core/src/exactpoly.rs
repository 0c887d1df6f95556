//! Exact-rational engine: univariate polynomials, piecewise polynomials on unit
//! integer intervals, their convolution, and the exact γ_k(c).
//!
//! γ_k is obtained from the Hankel determinant `det(c^{i+j-2}·1_(0,1))` where the
//! ring product is convolution: expanding the determinant over permutations gives
//! `G(1+k)^{-2} Σ_σ sign(σ) Conv_i[c^{i+σ(i)-2} 1_(0,1)]`. The permutation sum is
//! evaluated by Laplace expansion along rows with subset memoisation, which groups
//! the k! terms so each partial convolution is formed once.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{barnes_g_int, factorial};

pub type BigRational = Rational;

/// Dense polynomial with rational coefficients in ascending degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_integers<I: IntoIterator<Item = i64>>(coeffs: I) -> Self {
        Self::new(coeffs.into_iter().map(Rational::from).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `coef · x^deg`.
    pub fn monomial(deg: usize, coef: Rational) -> Self {
        let mut v = vec![Rational::new(); deg + 1];
        v[deg] = coef;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Polynomial::new(v)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Polynomial::new(v)
    }

    pub fn add_assign(&mut self, other: &Polynomial) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Rational::new());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        while self.coeffs.last().is_some_and(|c| *c == 0) {
            self.coeffs.pop();
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut v = vec![Rational::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] += Rational::from(a * b);
            }
        }
        Polynomial::new(v)
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| Rational::from(c * s)).collect())
    }

    pub fn derivative(&self) -> Polynomial {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| Rational::from(c * i as u32))
            .collect();
        Polynomial::new(v)
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Polynomial {
        let mut v = Vec::with_capacity(self.coeffs.len() + 1);
        v.push(Rational::new());
        for (i, c) in self.coeffs.iter().enumerate() {
            v.push(Rational::from(c / (i as u32 + 1)));
        }
        Polynomial::new(v)
    }

    /// `∫_lo^hi p(x) dx`.
    pub fn integrate(&self, lo: &Rational, hi: &Rational) -> Rational {
        let a = self.antiderivative();
        a.eval(hi) - a.eval(lo)
    }

    /// `p(a + b·x)`.
    pub fn compose_linear(&self, a: &Rational, b: &Rational) -> Polynomial {
        let lin = Polynomial::new(vec![a.clone(), b.clone()]);
        let mut acc = Polynomial::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin);
            acc.add_assign(&Polynomial::constant(c.clone()));
        }
        acc
    }

    /// Multiplicity of `x0` as a root; `None` for the zero polynomial.
    pub fn root_multiplicity(&self, x0: &Rational) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let shifted = self.compose_linear(x0, &Rational::from(1));
        shifted.coeffs.iter().position(|c| *c != 0)
    }
}

/// Piecewise polynomial on consecutive unit intervals `[left_knot + i, left_knot + i + 1)`,
/// zero outside. Pieces are stored in the absolute variable `c`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PiecewisePolynomial {
    left_knot: i64,
    pieces: Vec<Polynomial>,
}

impl PiecewisePolynomial {
    pub fn new(left_knot: i64, pieces: Vec<Polynomial>) -> Self {
        PiecewisePolynomial { left_knot, pieces }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `p(c)` on `[knot, knot+1)`, zero elsewhere.
    pub fn single(knot: i64, p: Polynomial) -> Self {
        Self::new(knot, vec![p])
    }

    pub fn left_knot(&self) -> i64 {
        self.left_knot
    }

    pub fn right_knot(&self) -> i64 {
        self.left_knot + self.pieces.len() as i64
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(Polynomial::is_zero)
    }

    /// Piece for `[knot, knot+1)`; zero outside the stored range.
    pub fn piece_at(&self, knot: i64) -> Polynomial {
        let i = knot - self.left_knot;
        if i < 0 || i >= self.pieces.len() as i64 {
            Polynomial::zero()
        } else {
            self.pieces[i as usize].clone()
        }
    }

    /// Exact value. Pieces are closed on the left and open on the right; at an interior
    /// knot both neighbours must agree.
    pub fn eval(&self, c: &Rational) -> Result<Rational> {
        if self.pieces.is_empty() {
            return Ok(Rational::new());
        }
        let lo = Rational::from(self.left_knot);
        let hi = Rational::from(self.right_knot());
        if *c < lo || *c >= hi {
            return Ok(Rational::new());
        }
        let offset = Rational::from(c - &lo);
        let idx = offset.floor_ref();
        let idx = Integer::from(idx).to_i64().unwrap_or(0) as usize;
        let value = self.pieces[idx].eval(c);
        if c.denom() == &1u32 && idx > 0 {
            let left = self.pieces[idx - 1].eval(c);
            if left != value {
                return Err(Error::KnotMismatch {
                    knot: self.left_knot + idx as i64,
                });
            }
        }
        Ok(value)
    }

    pub fn add(&self, other: &PiecewisePolynomial) -> PiecewisePolynomial {
        if other.pieces.is_empty() {
            return self.clone();
        }
        if self.pieces.is_empty() {
            return other.clone();
        }
        let lo = self.left_knot.min(other.left_knot);
        let hi = self.right_knot().max(other.right_knot());
        let pieces = (lo..hi)
            .map(|kn| self.piece_at(kn).add(&other.piece_at(kn)))
            .collect();
        PiecewisePolynomial::new(lo, pieces)
    }

    pub fn scale(&self, s: &Rational) -> PiecewisePolynomial {
        PiecewisePolynomial::new(
            self.left_knot,
            self.pieces.iter().map(|p| p.scale(s)).collect(),
        )
    }

    pub fn neg(&self) -> PiecewisePolynomial {
        self.scale(&Rational::from(-1))
    }

    /// Piecewise derivative (ignores the distributional part at knots).
    pub fn derivative(&self) -> PiecewisePolynomial {
        PiecewisePolynomial::new(
            self.left_knot,
            self.pieces.iter().map(Polynomial::derivative).collect(),
        )
    }

    /// `∫` over the whole support.
    pub fn integrate(&self) -> Rational {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let a = Rational::from(self.left_knot + i as i64);
                let b = Rational::from(self.left_knot + i as i64 + 1);
                p.integrate(&a, &b)
            })
            .sum()
    }

    /// Exact convolution `(f*g)(c) = ∫ f(t) g(c-t) dt`.
    pub fn convolve(&self, other: &PiecewisePolynomial) -> PiecewisePolynomial {
        if self.is_zero() || other.is_zero() {
            return PiecewisePolynomial::zero();
        }
        let one = Rational::from(1);
        let minus_one = Rational::from(-1);
        // local variable x in [0,1] for each piece, and its reflection x -> 1-x
        let localize = |pp: &PiecewisePolynomial| -> Vec<(Polynomial, Polynomial)> {
            pp.pieces
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let local = p.compose_linear(&Rational::from(pp.left_knot + i as i64), &one);
                    let refl = local.compose_linear(&one, &minus_one);
                    (local, refl)
                })
                .collect()
        };
        let lf = localize(self);
        let lg = localize(other);
        let max_deg = lf
            .iter()
            .chain(lg.iter())
            .filter_map(|(p, _)| p.degree())
            .max()
            .unwrap_or(0);
        let facts: Vec<Integer> = (0..=(2 * max_deg + 2) as u32).map(factorial).collect();

        let n_out = self.pieces.len() + other.pieces.len();
        let mut rising = vec![Polynomial::zero(); n_out];
        let mut falling = vec![Polynomial::zero(); n_out];
        for (i, (fi, fi_r)) in lf.iter().enumerate() {
            for (j, (gj, gj_r)) in lg.iter().enumerate() {
                rising[i + j].add_assign(&beta_convolution(fi, gj, &facts));
                falling[i + j + 1].add_assign(&beta_convolution(fi_r, gj_r, &facts));
            }
        }
        let base = self.left_knot + other.left_knot;
        let pieces = rising
            .into_iter()
            .zip(falling)
            .enumerate()
            .map(|(kidx, (r, f))| {
                // falling part lives on s in [1,2] of its pair, i.e. local t as (1 - t)
                let local = r.add(&f.compose_linear(&one, &minus_one));
                local.compose_linear(&Rational::from(-(base + kidx as i64)), &one)
            })
            .collect();
        PiecewisePolynomial::new(base, pieces)
    }
}

/// `∫_0^s f(x) g(s-x) dx` for `s ∈ [0,1]`, via `∫_0^s x^p (s-x)^q dx = p! q! s^{p+q+1} / (p+q+1)!`.
fn beta_convolution(f: &Polynomial, g: &Polynomial, facts: &[Integer]) -> Polynomial {
    if f.is_zero() || g.is_zero() {
        return Polynomial::zero();
    }
    let mut v = vec![Rational::new(); f.coeffs.len() + g.coeffs.len()];
    for (p, a) in f.coeffs.iter().enumerate() {
        if *a == 0 {
            continue;
        }
        for (q, b) in g.coeffs.iter().enumerate() {
            if *b == 0 {
                continue;
            }
            let num = Integer::from(&facts[p] * &facts[q]);
            let w = Rational::from((num, facts[p + q + 1].clone()));
            v[p + q + 1] += Rational::from(a * b) * w;
        }
    }
    Polynomial::new(v)
}

/// Minimal commutative-ring interface for [`laplace_det`].
pub(crate) trait RingElem: Clone + Send + Sync {
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_neg(&self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
}

impl RingElem for PiecewisePolynomial {
    fn ring_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn ring_neg(&self) -> Self {
        self.neg()
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self.convolve(other)
    }
}

/// Determinant over a commutative ring by row-wise Laplace expansion, memoised on the
/// set of columns used by the leading rows. `2^k · k` ring products instead of `k!·k`.
pub(crate) fn laplace_det<R: RingElem>(m: &[Vec<R>]) -> R {
    let k = m.len();
    assert!((1..=20).contains(&k));
    let mut layer: HashMap<u32, R> = (0..k).map(|j| (1u32 << j, m[0][j].clone())).collect();
    for row in 1..k {
        let masks: Vec<u32> = (0u32..(1 << k))
            .filter(|s| s.count_ones() as usize == row + 1)
            .collect();
        let next: Vec<(u32, R)> = masks
            .par_iter()
            .map(|&mask| {
                let mut acc: Option<R> = None;
                for (pos, j) in (0..k).filter(|j| mask & (1 << j) != 0).enumerate() {
                    let minor = &layer[&(mask & !(1 << j))];
                    let mut term = m[row][j].ring_mul(minor);
                    if (row + pos) % 2 == 1 {
                        term = term.ring_neg();
                    }
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.ring_add(&term),
                    });
                }
                (mask, acc.expect("non-empty mask"))
            })
            .collect();
        layer = next.into_iter().collect();
    }
    layer.remove(&((1u32 << k) - 1)).expect("full mask")
}

/// Default cost guard for [`gamma_exact`].
pub const DEFAULT_MAX_K: u32 = 7;

/// γ_k as an exact piecewise polynomial on `[0, k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaPolySet {
    k: u32,
    pp: PiecewisePolynomial,
}

pub fn gamma_exact(k: u32) -> Result<GammaPolySet> {
    gamma_exact_with_limit(k, DEFAULT_MAX_K)
}

/// Like [`gamma_exact`] with an explicit cap on `k`.
pub fn gamma_exact_with_limit(k: u32, max_k: u32) -> Result<GammaPolySet> {
    if k == 0 || k > max_k {
        return Err(Error::invalid(format!(
            "k must lie in 1..={max_k}, got {k}"
        )));
    }
    let ku = k as usize;
    let entry =
        |e: usize| PiecewisePolynomial::single(0, Polynomial::monomial(e, Rational::from(1)));
    let matrix: Vec<Vec<PiecewisePolynomial>> = (0..ku)
        .map(|i| (0..ku).map(|j| entry(i + j)).collect())
        .collect();
    let det = laplace_det(&matrix);
    let g = barnes_g_int(k + 1);
    let norm = Rational::from((Integer::from(1), Integer::from(g.square_ref())));
    let pp = det.scale(&norm);
    let pp = PiecewisePolynomial::new(0, (0..k as i64).map(|j| pp.piece_at(j)).collect());
    Ok(GammaPolySet { k, pp })
}

impl GammaPolySet {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn pp(&self) -> &PiecewisePolynomial {
        &self.pp
    }

    pub fn piece(&self, j: u32) -> &Polynomial {
        &self.pp.pieces[j as usize]
    }

    pub fn eval(&self, c: &Rational) -> Result<Rational> {
        eval_pp(&self.pp, c)
    }

    /// Rebuild from `(k²-1)!`-scaled integer pieces (ascending powers of `c`).
    pub fn from_scaled_pieces(k: u32, pieces: &[Vec<Integer>]) -> Result<Self> {
        if k == 0 || pieces.len() != k as usize {
            return Err(Error::invalid(format!(
                "expected {k} pieces, got {}",
                pieces.len()
            )));
        }
        let s = factorial(k * k - 1);
        let pieces = pieces
            .iter()
            .map(|p| {
                Polynomial::new(
                    p.iter()
                        .map(|c| Rational::from((c.clone(), s.clone())))
                        .collect(),
                )
            })
            .collect();
        Ok(GammaPolySet {
            k,
            pp: PiecewisePolynomial::new(0, pieces),
        })
    }

    /// `(k²-1)!`, the scale that makes every coefficient an integer.
    pub fn scale_factor(&self) -> Integer {
        factorial(self.k * self.k - 1)
    }

    /// Piece coefficients multiplied by `(k²-1)!`, ascending degree.
    pub fn scaled_pieces(&self) -> Result<Vec<Vec<Integer>>> {
        let s = Rational::from(self.scale_factor());
        self.pp
            .pieces
            .iter()
            .map(|p| {
                p.coeffs
                    .iter()
                    .map(|c| {
                        let v = Rational::from(c * &s);
                        if v.denom() == &1u32 {
                            Ok(v.numer().clone())
                        } else {
                            Err(Error::Precision(format!(
                                "non-integral scaled coefficient {v}"
                            )))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Largest `n` with matching derivatives of order `0..=n` at knot `j`; see [`smoothness_order`].
    pub fn smoothness_order(&self, j: u32) -> Result<Option<i64>> {
        smoothness_order(self, j)
    }

    pub fn to_json(&self) -> Result<GammaJson> {
        let scaled = self.scaled_pieces()?;
        Ok(GammaJson {
            k: self.k,
            pieces: scaled
                .into_iter()
                .enumerate()
                .map(|(j, coeffs)| GammaPieceJson {
                    interval: [j as i64, j as i64 + 1],
                    coeffs_scaled: coeffs.iter().map(Integer::to_string).collect(),
                    scale: "(k^2-1)!".to_string(),
                })
                .collect(),
        })
    }

    /// LaTeX `tabular` rows of `(k²-1)!·γ_k(c)` per unit interval.
    pub fn to_latex(&self) -> Result<String> {
        latex_table(&[self])
    }
}

/// JSON form: `{k, pieces:[{interval:[j,j+1], coeffs_scaled:[..], scale:"(k^2-1)!"}]}`.
/// Coefficients are decimal strings, ascending degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaJson {
    pub k: u32,
    pub pieces: Vec<GammaPieceJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaPieceJson {
    pub interval: [i64; 2],
    pub coeffs_scaled: Vec<String>,
    pub scale: String,
}

fn is_pure_power(coeffs: &[Integer], root: i64) -> Option<(usize, i64)> {
    // coeffs == sign * (c - root)^n ?
    let n = coeffs.len().checked_sub(1)?;
    let lead = coeffs[n].clone();
    if lead != 1 && lead != -1 {
        return None;
    }
    let sign = if lead == 1 { 1i64 } else { -1 };
    for (i, c) in coeffs.iter().enumerate() {
        let b = Integer::from(Integer::binomial_u(n as u32, i as u32));
        let expect = b * Integer::from(Integer::i_pow_u(-root as i32, (n - i) as u32)) * sign;
        if *c != expect {
            return None;
        }
    }
    Some((n, sign))
}

fn latex_poly(coeffs: &[Integer], j: usize, k: u32) -> String {
    if let Some((n, _)) = is_pure_power(coeffs, 0) {
        return format!("c^{{{n}}}");
    }
    if let Some((n, sign)) = is_pure_power(coeffs, k as i64) {
        // (k-c)^n = (-1)^n (c-k)^n
        let parity = if n % 2 == 0 { 1 } else { -1 };
        if sign * parity == 1 {
            return format!("({k}-c)^{{{n}}}");
        }
    }
    let _ = j;
    let mut s = String::new();
    for (i, c) in coeffs.iter().enumerate().rev() {
        if *c == 0 {
            continue;
        }
        let neg = *c < 0;
        let mag = Integer::from(c.abs_ref());
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { "-" } else { "+" });
        }
        let show_mag = mag != 1 || i == 0;
        if show_mag {
            write!(s, "{mag}").unwrap();
        }
        match i {
            0 => {}
            1 => s.push_str(if show_mag { " c" } else { "c" }),
            _ => {
                if show_mag {
                    s.push(' ');
                }
                write!(s, "c^{{{i}}}").unwrap();
            }
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// LaTeX table in the `k | j | (k²-1)!γ_k(c)` layout for several k.
pub fn latex_table(sets: &[&GammaPolySet]) -> Result<String> {
    let mut out = String::new();
    out.push_str("\\begin{tabular}{|c|c|l|}\n\\hline\n");
    out.push_str("$k$ & $ j$ & $ (k^2-1)!\\gamma_k(c)$ \\\\\n\\hline\n");
    for (si, g) in sets.iter().enumerate() {
        if si > 0 {
            out.push_str("\\hline\n");
        }
        for (j, coeffs) in g.scaled_pieces()?.iter().enumerate() {
            let kcol = if j == 0 {
                format!("${}$", g.k)
            } else {
                String::new()
            };
            writeln!(
                out,
                "{kcol} & $ {j}$ & $ {}$ \\\\",
                latex_poly(coeffs, j, g.k)
            )
            .unwrap();
            out.push_str("\\hline\n");
        }
    }
    out.push_str("\\end{tabular}\n");
    Ok(out)
}

/// Exact value of a piecewise polynomial; errors if neighbouring pieces disagree at `c`.
pub fn eval_pp(pp: &PiecewisePolynomial, c: &Rational) -> Result<Rational> {
    pp.eval(c)
}

/// Exact integral over the full support.
pub fn integrate_pp(pp: &PiecewisePolynomial) -> Rational {
    pp.integrate()
}

/// Convolution of two piecewise polynomials.
pub fn convolve(f: &PiecewisePolynomial, g: &PiecewisePolynomial) -> PiecewisePolynomial {
    f.convolve(g)
}

/// Largest `n` such that derivatives of orders `0..=n` of the two pieces adjacent to
/// knot `j` agree at `c = j`. `Some(-1)` when the pieces disagree in value, `None`
/// when the pieces are identical polynomials.
pub fn smoothness_order(g: &GammaPolySet, j: u32) -> Result<Option<i64>> {
    if j == 0 || j >= g.k {
        return Err(Error::invalid(format!(
            "knot j must satisfy 0 < j < k = {}, got {j}",
            g.k
        )));
    }
    let diff = g.piece(j).sub(g.piece(j - 1));
    Ok(diff
        .root_multiplicity(&Rational::from(j))
        .map(|m| m as i64 - 1))
}

/// `ν(j,k) = j² + (k-j)²`.
pub fn nu(j: u32, k: u32) -> u32 {
    j * j + (k - j) * (k - j)
}

/// Both sides of Andreief's identity for monomial families on `[0,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AndreiefSides {
    /// `(1/N!) ∫_{[0,1]^N} Π r(t_j) det(t_j^{a_i}) det(t_j^{b_i}) dt`
    pub multi_integral: Rational,
    /// `det(∫ r(t) t^{a_i} t^{b_j} dt)`
    pub moment_det: Rational,
}

impl AndreiefSides {
    pub fn holds(&self) -> bool {
        self.multi_integral == self.moment_det
    }
}

pub fn andreief_sides(
    n: usize,
    a_degrees: &[u32],
    b_degrees: &[u32],
    r: &Polynomial,
) -> Result<AndreiefSides> {
    if !(1..=6).contains(&n) || a_degrees.len() != n || b_degrees.len() != n {
        return Err(Error::invalid(
            "andreief needs 1 <= N <= 6 and N degrees per family",
        ));
    }
    // ∫_0^1 r(t) t^e dt
    let moment = |e: u32| -> Rational {
        r.coeffs()
            .iter()
            .enumerate()
            .map(|(p, c)| Rational::from(c / (e + p as u32 + 1)))
            .sum()
    };
    let perms = permutations(n);
    let mut lhs = Rational::new();
    for (sigma, s_sign) in &perms {
        for (tau, t_sign) in &perms {
            let mut term = Rational::from(s_sign * t_sign);
            for j in 0..n {
                term *= moment(a_degrees[sigma[j]] + b_degrees[tau[j]]);
            }
            lhs += term;
        }
    }
    lhs /= factorial(n as u32);
    let m: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| moment(a_degrees[i] + b_degrees[j]))
                .collect()
        })
        .collect();
    Ok(AndreiefSides {
        multi_integral: lhs,
        moment_det: rational_det(m),
    })
}

/// Exact-rational check of Andreief's identity; both sides are expanded independently.
pub fn andreief_check(
    n: usize,
    a_degrees: &[u32],
    b_degrees: &[u32],
    r: &Polynomial,
) -> Result<bool> {
    Ok(andreief_sides(n, a_degrees, b_degrees, r)?.holds())
}

/// All permutations of `0..n` with their signs.
pub(crate) fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(
        prefix: &mut Vec<usize>,
        used: &mut Vec<bool>,
        n: usize,
        out: &mut Vec<(Vec<usize>, i64)>,
    ) {
        if prefix.len() == n {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if prefix[i] > prefix[j] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, n, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], n, &mut out);
    out
}

/// Exact determinant by Gaussian elimination over the rationals.
pub fn rational_det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::from(1);
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| m[r][col] != 0) else {
            return Rational::new();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for row in col + 1..n {
            if m[row][col] == 0 {
                continue;
            }
            let f = Rational::from(&m[row][col] / &pivot);
            for c in col..n {
                let t = Rational::from(&f * &m[col][c]);
                m[row][c] -= t;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn indicator() -> PiecewisePolynomial {
        PiecewisePolynomial::single(0, Polynomial::one())
    }

    #[test]
    fn indicator_self_convolution_is_tent() {
        let tent = indicator().convolve(&indicator());
        assert_eq!(tent.left_knot(), 0);
        assert_eq!(tent.pieces()[0], Polynomial::from_integers([0, 1]));
        assert_eq!(tent.pieces()[1], Polynomial::from_integers([2, -1]));
        assert_eq!(tent.integrate(), 1);
    }

    #[test]
    fn linear_times_indicator() {
        // ∫_0^c t dt = c²/2 on [0,1]; ∫_{c-1}^1 t dt = (1-(c-1)²)/2 = -c²/2 + c on [1,2]
        let f = PiecewisePolynomial::single(0, Polynomial::from_integers([0, 1]));
        let h = f.convolve(&indicator());
        assert_eq!(
            h.pieces()[0],
            Polynomial::new(vec![q(0, 1), q(0, 1), q(1, 2)])
        );
        assert_eq!(
            h.pieces()[1],
            Polynomial::new(vec![q(0, 1), q(1, 1), q(-1, 2)])
        );
    }

    #[test]
    fn convolution_with_zero_is_zero() {
        assert!(PiecewisePolynomial::zero().convolve(&indicator()).is_zero());
        assert!(indicator()
            .convolve(&PiecewisePolynomial::single(0, Polynomial::zero()))
            .is_zero());
    }

    #[test]
    fn shifted_supports_add() {
        let f = PiecewisePolynomial::single(2, Polynomial::one());
        let g = PiecewisePolynomial::single(-1, Polynomial::one());
        let h = f.convolve(&g);
        assert_eq!(h.left_knot(), 1);
        assert_eq!(h.right_knot(), 3);
        assert_eq!(h.eval(&q(2, 1)).unwrap(), 1);
    }

    #[test]
    fn eval_detects_corrupt_knot() {
        let pp =
            PiecewisePolynomial::new(0, vec![Polynomial::one(), Polynomial::from_integers([2])]);
        assert!(matches!(
            pp.eval(&q(1, 1)),
            Err(Error::KnotMismatch { knot: 1 })
        ));
        assert_eq!(pp.eval(&q(1, 2)).unwrap(), 1);
    }

    #[test]
    fn indicator_is_closed_left_open_right() {
        assert_eq!(indicator().eval(&q(0, 1)).unwrap(), 1);
        assert_eq!(indicator().eval(&q(1, 1)).unwrap(), 0);
    }

    #[test]
    fn gamma_1_and_2() {
        let g1 = gamma_exact(1).unwrap();
        assert_eq!(g1.piece(0), &Polynomial::one());
        let g2 = gamma_exact(2).unwrap();
        assert_eq!(
            g2.piece(0),
            &Polynomial::new(vec![q(0, 1), q(0, 1), q(0, 1), q(1, 6)])
        );
        assert_eq!(
            g2.piece(1),
            &Polynomial::new(vec![q(8, 6), q(-12, 6), q(6, 6), q(-1, 6)])
        );
        assert_eq!(g2.eval(&q(1, 1)).unwrap(), q(1, 6));
        assert_eq!(g2.eval(&q(-1, 1)).unwrap(), 0);
        assert_eq!(g2.pp().integrate(), q(1, 12));
    }

    #[test]
    fn gamma_3_middle_piece() {
        let g3 = gamma_exact(3).unwrap();
        let expect =
            Polynomial::from_integers([-927, 4392, -8484, 8568, -4830, 1512, -252, 24, -2])
                .scale(&Rational::from((1, 40320)));
        assert_eq!(g3.piece(1), &expect);
        assert_eq!(g3.eval(&q(3, 2)).unwrap(), expect.eval(&q(3, 2)));
    }

    #[test]
    fn smoothness_examples() {
        assert_eq!(
            gamma_exact(2).unwrap().smoothness_order(1).unwrap(),
            Some(0)
        );
        assert_eq!(
            gamma_exact(3).unwrap().smoothness_order(1).unwrap(),
            Some(3)
        );
        assert!(gamma_exact(3).unwrap().smoothness_order(0).is_err());
    }

    #[test]
    fn k_cap_is_enforced() {
        assert!(gamma_exact(0).is_err());
        assert!(gamma_exact(8).is_err());
        assert!(gamma_exact_with_limit(3, 2).is_err());
    }

    #[test]
    fn andreief_small_cases() {
        let s = andreief_sides(2, &[0, 1], &[0, 1], &Polynomial::one()).unwrap();
        assert_eq!(s.moment_det, q(1, 12));
        assert!(s.holds());
        let s0 = andreief_sides(2, &[0, 1], &[0, 1], &Polynomial::zero()).unwrap();
        assert_eq!(s0.moment_det, 0);
        assert!(s0.holds());
        assert!(andreief_check(3, &[0, 1, 2], &[0, 1, 2], &Polynomial::one()).unwrap());
    }

    #[test]
    fn compose_linear_shift() {
        // (x)^2 at x = 1 + 2y -> 1 + 4y + 4y^2
        let p = Polynomial::from_integers([0, 0, 1]);
        assert_eq!(
            p.compose_linear(&q(1, 1), &q(2, 1)),
            Polynomial::from_integers([1, 4, 4])
        );
    }

    #[test]
    fn latex_compact_forms() {
        let g = gamma_exact(2).unwrap();
        let t = g.to_latex().unwrap();
        assert!(t.contains("c^{3}"), "{t}");
        assert!(t.contains("(2-c)^{3}"), "{t}");
    }
}
