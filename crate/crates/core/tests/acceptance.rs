//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, exits non-zero if
//! any failed. Pass criterion numbers as arguments to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use gammak::aliquot::{self, continued_fraction, continued_fraction_rational};
use gammak::divisor::{self, main_term, sieve_dk};
use gammak::exactpoly::{self, andreief_sides, gamma_exact, integrate_pp, Polynomial};
use gammak::gammaft::{self, GammaInverter, QuadratureConfig};
use gammak::hankel;
use gammak::hp::{self, parse_rational, to_decimal, HPComplex, PrecisionContext};
use gammak::toda::{self, CoeffTable};
use rug::{Float, Integer, Rational};

type Check = fn() -> Result<String, String>;

const CRITERIA: &[(u32, &str, Check)] = &[
    (1, "table fidelity", c01_tables),
    (2, "smoothness orders", c02_smoothness),
    (3, "interpolation pipeline", c03_pipeline),
    (4, "Painleve/Toda residuals", c04_residuals),
    (5, "coefficient identities", c05_coefficients),
    (6, "series consistency", c06_series),
    (7, "Gaussian centre", c07_gaussian),
    (8, "aliquot constants", c08_aliquot),
    (9, "continued fraction of I(3)", c09_continued_fraction),
    (10, "asymptotic I(d)", c10_asymptotic),
    (11, "I_k decay", c11_ik_decay),
    (12, "divisor harness", c12_divisor),
    (13, "Andreief identity", c13_andreief),
    (14, "mass invariant", c14_mass),
];

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for &(n, name, check) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {n:>2} {name} ({secs:.1} s): {detail}"),
            Err(detail) => {
                println!("FAIL criterion {n:>2} {name} ({secs:.1} s): {detail}");
                failed.push(n);
            }
        }
    }
    println!(
        "acceptance: {} passed, {} failed {:?}",
        ran - failed.len(),
        failed.len(),
        failed
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

fn ctx(digits: u32) -> PrecisionContext {
    PrecisionContext::new(digits).unwrap()
}

fn ints(v: &[String]) -> Vec<Integer> {
    v.iter().map(|s| s.parse().unwrap()).collect()
}

/// `(k, j) -> coefficients` of the reference integer tables.
fn reference_tables() -> Vec<(u32, u32, Vec<Integer>)> {
    let text = include_str!("data/gamma_tables.json");
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    v.as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let coeffs: Vec<String> = serde_json::from_value(e["coeffs_scaled"].clone()).unwrap();
            (
                e["k"].as_u64().unwrap() as u32,
                e["j"].as_u64().unwrap() as u32,
                ints(&coeffs),
            )
        })
        .collect()
}

fn rel_err(a: &Float, b: &Float) -> Float {
    let d = Float::with_val(a.prec(), a - b).abs();
    d / Float::with_val(b.prec(), b.abs_ref())
}

fn c01_tables() -> Result<String, String> {
    let tables = reference_tables();
    let mut checked = 0;
    let mut k6_time = Duration::ZERO;
    for k in 2..=6u32 {
        let start = Instant::now();
        let g = gamma_exact(k).map_err(|e| e.to_string())?;
        let pieces = g.scaled_pieces().map_err(|e| e.to_string())?;
        if k == 6 {
            k6_time = start.elapsed();
        }
        for (tk, tj, coeffs) in tables.iter().filter(|t| t.0 == k) {
            ensure!(
                pieces[*tj as usize] == *coeffs,
                "k={tk} j={tj} differs from the table"
            );
            checked += 1;
        }
        if k == 6 {
            // remaining pieces by γ_k(c) = γ_k(k - c)
            for j in 3..6u32 {
                let (_, _, src) = tables.iter().find(|t| t.0 == 6 && t.1 == 5 - j).unwrap();
                let p = Polynomial::new(src.iter().map(|c| Rational::from(c.clone())).collect());
                let mirrored = p.compose_linear(&Rational::from(6), &Rational::from(-1));
                let want: Vec<Integer> = mirrored
                    .coeffs()
                    .iter()
                    .map(|c| c.numer().clone())
                    .collect();
                ensure!(
                    pieces[j as usize] == want,
                    "k=6 j={j} differs from the reflected table"
                );
                checked += 1;
            }
        }
    }
    ensure!(k6_time < Duration::from_secs(120), "k=6 took {k6_time:?}");
    Ok(format!(
        "{checked} pieces match, k=6 in {:.2} s",
        k6_time.as_secs_f64()
    ))
}

fn c02_smoothness() -> Result<String, String> {
    let mut n = 0;
    for k in 2..=6u32 {
        let g = gamma_exact(k).map_err(|e| e.to_string())?;
        for j in 1..k {
            let nu = exactpoly::nu(j, k) as i64;
            let got = g.smoothness_order(j).map_err(|e| e.to_string())?;
            ensure!(
                got == Some(nu - 2),
                "k={k} j={j}: smoothness {got:?}, want {}",
                nu - 2
            );
            // independent derivative comparison at the knot
            let (mut l, mut r) = (g.piece(j - 1).clone(), g.piece(j).clone());
            let at = Rational::from(j);
            for order in 0..nu {
                let same = l.eval(&at) == r.eval(&at);
                ensure!(
                    same == (order <= nu - 2),
                    "k={k} j={j}: derivative {order} {}",
                    if same { "agrees" } else { "differs" }
                );
                l = l.derivative();
                r = r.derivative();
            }
            n += 1;
        }
    }
    Ok(format!(
        "{n} knots have order ν-2 exactly; k=2 knot 1 has order 0"
    ))
}

fn c03_pipeline() -> Result<String, String> {
    let tables = reference_tables();
    let start = Instant::now();
    let mut worst = Float::with_val(64, 0);
    let mut n = 0;
    for k in 2..=5u32 {
        let cfg = QuadratureConfig::new(ctx(60).boosted(k * k + 10));
        let inv = GammaInverter::new(k, &cfg).map_err(|e| e.to_string())?;
        for j in 0..k {
            let p = inv
                .interpolate_piece(j)
                .map_err(|e| format!("k={k} j={j}: {e}"))?;
            let (_, _, want) = tables.iter().find(|t| t.0 == k && t.1 == j).unwrap();
            ensure!(
                p.coeffs_scaled == *want,
                "k={k} j={j}: interpolated coefficients differ"
            );
            ensure!(
                p.worst_rounding < 1e-15,
                "k={k} j={j}: rounding distance {}",
                to_decimal(&p.worst_rounding, 3)
            );
            if p.worst_rounding > worst {
                worst = Float::with_val(64, &p.worst_rounding);
            }
            n += 1;
        }
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(600), "took {t:?}");
    Ok(format!(
        "{n} pieces, worst rounding {}",
        to_decimal(&worst, 2)
    ))
}

fn grid() -> Vec<Rational> {
    ["1/4", "1/2", "1", "2", "5", "10"]
        .iter()
        .map(|s| parse_rational(s).unwrap())
        .collect()
}

fn c04_residuals() -> Result<String, String> {
    let c = ctx(50);
    let mut worst = f64::NEG_INFINITY;
    let mut n = 0;
    for k in 1..=6u32 {
        for t in grid() {
            let tf = Float::with_val(c.bits(), &t);
            let mut rs = vec![("painleve", hankel::painleve_residual(k, &tf, &c))];
            if k >= 2 {
                rs.push(("toda", hankel::toda_residual(k, &tf, &c)));
            }
            for (name, r) in rs {
                let r = r.map_err(|e| format!("{name} k={k} t={t}: {e}"))?;
                ensure!(
                    r.pass(),
                    "{name} k={k} t={t}: residual {} > {}",
                    to_decimal(&r.residual, 3),
                    to_decimal(&r.tolerance, 3)
                );
                let scaled = hp::log10_abs(&r.residual) - hp::log10_abs(&r.tolerance);
                worst = worst.max(scaled);
                n += 1;
            }
        }
    }
    Ok(format!(
        "{n} residuals within tolerance, worst at 10^{worst:.1} of it"
    ))
}

fn c05_coefficients() -> Result<String, String> {
    let c = ctx(50);
    let zero = HPComplex::zero(c.bits());
    let tol = hp::pow10(-(50 - 5), c.bits());
    for k in 1..=10u32 {
        let d = hankel::dk_eval(k, &zero, &c).map_err(|e| e.to_string())?;
        let d1 = hankel::dk_deriv(k, &zero, 1, &c).map_err(|e| e.to_string())?;
        let c1 = Float::with_val(c.bits(), &d1.re / &d.re);
        let want = Float::with_val(c.bits(), -(k as i32)) / 2u32;
        let err = Float::with_val(c.bits(), &c1 - &want).abs();
        ensure!(
            err <= tol,
            "k={k}: D'(0)/D(0) = {} differs from -k/2",
            to_decimal(&c1, 20)
        );
    }
    let table = CoeffTable::new(4, 12).map_err(|e| e.to_string())?;
    for k in 1..=12u32 {
        let kq = Rational::from(k);
        ensure!(
            *table.get(1, k).unwrap() == (-kq.clone() / 2u32),
            "c_1({k})"
        );
        ensure!(
            *table.get(3, k).unwrap() == 0,
            "c_3({k}) = {}",
            table.get(3, k).unwrap()
        );
        // k² / (16 (4k²-1)² (4k²-9))
        let k2 = Rational::from(k * k);
        let a = Rational::from(&k2 * 4u32) - 1u32;
        let b = Rational::from(&k2 * 4u32) - 9u32;
        let want = &k2 / (Rational::from(16u32) * a.square() * b);
        ensure!(
            *table.get(4, k).unwrap() == want,
            "c_4({k}) = {}, want {want}",
            table.get(4, k).unwrap()
        );
    }
    Ok("c_1 numerically for k<=10; c_3, c_4 exactly for k<=12".into())
}

fn c06_series() -> Result<String, String> {
    let c = ctx(50);
    let mut worst = f64::NEG_INFINITY;
    for k in 1..=4u32 {
        for t in ["-1/2", "-1/3", "-1/8", "1/10", "1/4", "1/2"] {
            let q = parse_rational(t).unwrap();
            let tf = Float::with_val(c.bits(), &q);
            let s =
                toda::dk_series_eval(k, &tf, 30, &c).map_err(|e| format!("k={k} t={t}: {e}"))?;
            let d = hankel::dk_eval(k, &HPComplex::from_real(tf.clone()), &c)
                .map_err(|e| e.to_string())?;
            let err = hp::log10_abs(&rel_err(&s.value, &d.re));
            ensure!(err <= -25.0, "k={k} t={t}: agreement only 10^{err:.1}");
            worst = worst.max(err);
        }
    }
    Ok(format!("worst relative difference 10^{worst:.1}"))
}

fn c07_gaussian() -> Result<String, String> {
    let c = ctx(30);
    let bits = c.bits();
    let mut errs = Vec::new();
    let mut lines = Vec::new();
    for k in 3..=6u32 {
        let centre = Rational::from((k, 2u32));
        let exact = gamma_exact(k)
            .and_then(|g| g.eval(&centre))
            .map_err(|e| e.to_string())?;
        let approx = toda::gaussian_gamma(k, &Float::with_val(bits, &centre), &c)
            .map_err(|e| e.to_string())?;
        let err = rel_err(&approx, &Float::with_val(bits, &exact)).to_f64();
        let env = toda::next_order_envelope(k, &c)
            .map_err(|e| e.to_string())?
            .to_f64();
        if k >= 4 {
            ensure!(
                err <= 5.0 * env,
                "k={k}: error {err:.3e} exceeds 5 x envelope {env:.3e}"
            );
        }
        lines.push(format!("k={k} err {err:.2e} env {env:.2e}"));
        errs.push(err);
    }
    ensure!(
        errs.windows(2).all(|w| w[1] < w[0]),
        "errors not decreasing: {errs:?}"
    );
    Ok(lines.join("; "))
}

const I3_REFERENCE: &str =
    "1.70535704219150383549859568728989967913313869097890590667136169819331192007797559594679011";

fn c08_aliquot() -> Result<String, String> {
    let c40 = ctx(40);
    let tol40 = hp::pow10(-40, c40.bits());
    for (d, want) in [(1u32, Rational::from(1)), (2, Rational::from((4, 3)))] {
        let v = aliquot::i_d_poisson(d, &c40).map_err(|e| e.to_string())?;
        let err = Float::with_val(c40.bits(), &v - &want).abs();
        ensure!(err <= tol40, "I({d}) off by {}", to_decimal(&err, 3));
    }
    let start = Instant::now();
    let i3 = aliquot::i_d_poisson(3, &ctx(100)).map_err(|e| e.to_string())?;
    let t3 = start.elapsed();
    let s = to_decimal(&i3, 100);
    ensure!(s.starts_with(I3_REFERENCE), "I(3) = {s}");
    ensure!(t3 < Duration::from_secs(300), "I(3) took {t3:?}");
    let c60 = ctx(60);
    let tol = hp::pow10(-(60 - 8), c60.bits());
    let mut worst = f64::NEG_INFINITY;
    for d in 1..=8 {
        let p = aliquot::i_d_poisson(d, &c60).map_err(|e| e.to_string())?;
        let q = aliquot::i_d_quadrature(d, &c60).map_err(|e| e.to_string())?;
        let diff = Float::with_val(c60.bits(), &p - &q).abs();
        ensure!(
            diff <= tol,
            "d={d}: Poisson and quadrature differ by {}",
            to_decimal(&diff, 3)
        );
        worst = worst.max(hp::log10_abs(&diff));
    }
    Ok(format!(
        "I(3) matches all 90 reference digits in {:.2} s; methods agree to 10^{worst:.0}",
        t3.as_secs_f64()
    ))
}

const REFERENCE_A85: &str = "14703927951211792459205597491632973549428444428";
const REFERENCE_B85: &str = "8622199098152613288048825699460716423721576467";

fn c09_continued_fraction() -> Result<String, String> {
    let digits = 100;
    let i3 = aliquot::i_d_poisson(3, &ctx(digits)).map_err(|e| e.to_string())?;
    let cf = continued_fraction(&i3, digits).map_err(|e| e.to_string())?;
    let bound = cf.denominator_lower_bound().cloned().unwrap_or_default();
    let bound_ok = bound >= Integer::from(Integer::u_pow_u(10, 45));
    let (a, b) = cf
        .convergent(85)
        .cloned()
        .ok_or("fewer than 86 reliable convergents")?;
    let reference = (
        REFERENCE_A85.parse::<Integer>().unwrap(),
        REFERENCE_B85.parse::<Integer>().unwrap(),
    );
    let matches = (a.clone(), b.clone()) == reference;

    // where the reference fraction comes from: the same expansion of the 90-digit reference decimal
    let truncated = continued_fraction_rational(&parse_rational(I3_REFERENCE).unwrap(), 200);
    let from_truncation = truncated.convergent(85).cloned() == Some(reference.clone());
    let split = cf
        .partial_quotients
        .iter()
        .zip(&truncated.partial_quotients)
        .position(|(x, y)| x != y)
        .unwrap_or(cf.partial_quotients.len());
    let detail = format!(
        "reliable convergents {} (bound {} digits, certified: {bound_ok}); A_85/B_85 = {a}/{b}; \
         reference fraction equals convergent 85 of the 90-digit truncation: {from_truncation}; \
         expansions diverge at index {split}",
        cf.reliable_count,
        bound.to_string().len(),
    );
    ensure!(bound_ok, "{detail}");
    ensure!(matches, "reference convergent not reproduced: {detail}");
    Ok(detail)
}

fn c10_asymptotic() -> Result<String, String> {
    let c = ctx(30);
    let mut lines = Vec::new();
    for d in [20u32, 50] {
        let exact = aliquot::i_d_poisson(d, &c).map_err(|e| e.to_string())?;
        let approx = aliquot::i_d_asymptotic(d, 5, &c).map_err(|e| e.to_string())?;
        let err = rel_err(&approx, &exact).to_f64();
        let bound = 10.0 * (1.0 / d as f64).powi(5);
        ensure!(
            err <= bound,
            "d={d}: relative error {err:.3e} > {bound:.3e}"
        );
        lines.push(format!("d={d} err {err:.2e} <= {bound:.2e}"));
    }
    Ok(lines.join("; "))
}

fn c11_ik_decay() -> Result<String, String> {
    let c = ctx(30);
    let bits = c.bits();
    let mut lines = Vec::new();
    for k in [2u32, 3] {
        let vals: Vec<f64> = [5, 10, 20, 40]
            .iter()
            .map(|&u| {
                gammaft::ik_asymptotic_check(k, &Float::with_val(bits, u), &c).map(|v| v.to_f64())
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure!(
            vals.iter().all(|v| v.is_finite() && *v < 1e-3),
            "k={k}: scaled remainders {vals:?}"
        );
        ensure!(
            vals[3] <= 2.0 * vals[0],
            "k={k}: scaled remainder grows {vals:?}"
        );
        lines.push(format!(
            "k={k} max {:.2e}",
            vals.iter().cloned().fold(0.0, f64::max)
        ));
    }
    let pi = hp::pi(bits);
    let tol = hp::pow10(-(30 - 5), bits);
    for u in ["1/3", "5/2", "29/4", "13.3"] {
        let uq = parse_rational(u).unwrap();
        let uf = Float::with_val(bits, &uq);
        let ik = gammaft::ik_eval(1, &uf, &c).map_err(|e| e.to_string())?;
        let piu = Float::with_val(bits, &pi * &uf);
        let sinc = Float::with_val(bits, piu.sin_ref()) / &piu;
        let err = Float::with_val(bits, &ik - &sinc).abs();
        ensure!(
            err <= tol,
            "k=1 u={u}: I_1 differs from sinc by {}",
            to_decimal(&err, 3)
        );
    }
    Ok(format!("{}; I_1 = sin(πu)/(πu)", lines.join("; ")))
}

/// Ordered factorizations of `n` into `k` factors by recursion over divisors.
fn ordered_factorizations(n: u64, k: u32) -> u64 {
    if k == 1 {
        return 1;
    }
    (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| ordered_factorizations(n / d, k - 1))
        .sum()
}

fn c12_divisor() -> Result<String, String> {
    for k in 1..=4u32 {
        let s = sieve_dk(k, 1000).map_err(|e| e.to_string())?;
        for n in 1..=1000u64 {
            ensure!(
                s.get(n).unwrap() as u64 == ordered_factorizations(n, k),
                "d_{k}({n}) wrong"
            );
        }
    }
    let c = ctx(30);
    let bits = c.bits();
    let gamma = hp::euler_gamma(bits);
    for x in ["10", "1000", "1000000", "12345.678"] {
        let xf = Float::with_val(bits, &parse_rational(x).unwrap());
        let got = main_term(2, &xf, &c).map_err(|e| e.to_string())?;
        let lx = Float::with_val(bits, xf.ln_ref());
        let want = Float::with_val(bits, &xf * lx)
            + Float::with_val(bits, Float::with_val(bits, &gamma * 2u32) - 1u32) * &xf;
        ensure!(rel_err(&got, &want) < 1e-28, "main term at X={x}");
    }
    let a2 = divisor::a_k_constant(2, 100_000, &c).map_err(|e| e.to_string())?;
    let six_over_pi2 = Float::with_val(bits, 6u32) / hp::pi(bits).square();
    let gap = Float::with_val(bits, &a2.value - &six_over_pi2).abs();
    ensure!(
        gap <= a2.tail_bound,
        "a_2 off 6/π² by {} > tail {}",
        to_decimal(&gap, 3),
        to_decimal(&a2.tail_bound, 3)
    );

    let r = divisor::variance_experiment(2, 1_000_000, &Rational::from((3, 10)), None, &ctx(20))
        .map_err(|e| e.to_string())?;
    let detail = format!(
        "sieve, main term and a_2 ok; variance k=2 X=10^6 α=3/10: empirical {} predicted {} ratio {} (band [0.5, 2])",
        to_decimal(&r.empirical, 8),
        to_decimal(&r.predicted, 8),
        to_decimal(&r.ratio, 6)
    );
    ensure!(r.within_band(), "{detail}");
    Ok(detail)
}

fn c13_andreief() -> Result<String, String> {
    let weights = [
        Polynomial::one(),
        Polynomial::from_integers([0, 1]),
        Polynomial::from_integers([0, 0, 1]),
    ];
    let mut cases = 0;
    for n in 1..=3usize {
        let tuples: Vec<Vec<u32>> = (0..5u32.pow(n as u32))
            .map(|mut i| {
                (0..n)
                    .map(|_| {
                        let d = i % 5;
                        i /= 5;
                        d
                    })
                    .collect()
            })
            .collect();
        for r in &weights {
            for a in &tuples {
                for b in &tuples {
                    let s = andreief_sides(n, a, b, r).map_err(|e| e.to_string())?;
                    ensure!(
                        s.holds(),
                        "N={n} a={a:?} b={b:?}: {} != {}",
                        s.multi_integral,
                        s.moment_det
                    );
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} cases, weights 1, t, t²"))
}

fn factorial(n: u32) -> Integer {
    (1..=n).fold(Integer::from(1), |acc, i| acc * i)
}

fn c14_mass() -> Result<String, String> {
    let mut lines = Vec::new();
    for k in 1..=6u32 {
        let g = gamma_exact(k).map_err(|e| e.to_string())?;
        let mass = integrate_pp(g.pp());
        // Selberg: ∫_{[0,1]^k} Π_{i<j} (t_i - t_j)² = Π_j (j!)² (j+1)! / (k+j)!, and γ_k carries
        // 1 / (k! G(k+1)²) in front of it.
        let mut selberg = Rational::from(1);
        for j in 0..k {
            selberg *= Rational::from((factorial(j).square() * factorial(j + 1), factorial(k + j)));
        }
        let g_k1: Integer = (0..k).map(factorial).product();
        let g_2k1: Integer = (0..2 * k).map(factorial).product();
        let oracle = selberg / Rational::from(factorial(k) * Integer::from(g_k1.square_ref()));
        ensure!(
            mass == oracle,
            "k={k}: mass {mass} differs from the Selberg value {oracle}"
        );
        let closed = Rational::from((Integer::from(g_k1.square_ref()), g_2k1.clone()));
        ensure!(
            mass == closed,
            "k={k}: mass {mass} != G(k+1)²/G(2k+1) = {closed}"
        );
        let single = Rational::from((g_k1, g_2k1));
        if single != mass {
            lines.push(format!("k={k}"));
        }
    }
    Ok(format!(
        "mass = G(k+1)²/G(2k+1) for k<=6 (the unsquared G(k+1)/G(2k+1) differs at {})",
        lines.join(",")
    ))
}
