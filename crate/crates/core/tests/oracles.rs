//! Values frozen from an independent arbitrary-precision implementation (mpmath 50 dps:
//! adaptive quadrature, its own Bessel and Stieltjes routines).

use gammak::aliquot::{bessel_j1, i_d_poisson, i_d_quadrature};
use gammak::divisor::stieltjes_constants;
use gammak::gammaft::ik_eval;
use gammak::hankel::dk_eval;
use gammak::hp::{parse_rational, HPComplex, PrecisionContext};
use rug::Float;

fn ctx(d: u32) -> PrecisionContext {
    PrecisionContext::new(d).unwrap()
}

fn close(got: &Float, want: &str, rel: f64) {
    let w = Float::with_val(got.prec(), Float::parse(want).unwrap());
    let err =
        Float::with_val(got.prec(), got - &w).abs() / Float::with_val(got.prec(), w.abs_ref());
    assert!(
        err < rel,
        "got {got}, want {want}, relative error {}",
        err.to_f64()
    );
}

fn at(c: &PrecisionContext, s: &str) -> Float {
    Float::with_val(c.bits(), &parse_rational(s).unwrap())
}

#[test]
fn stieltjes() {
    let want = [
        "0.57721566490153286060651209008240243104215933593992",
        "-0.072815845483676724860586375874901319137736338334338",
        "-0.0096903631928723184845303860352125293590658061013408",
        "0.0020538344203033458661600465427533842857158044454106",
        "0.0023253700654673000574681701775260680009044694137848",
        "0.00079332381730106270175333487744444483073153940458489",
    ];
    let got = stieltjes_constants(6, &ctx(45));
    for (g, w) in got.iter().zip(want) {
        close(g, w, 1e-40);
    }
}

#[test]
fn hankel_determinants() {
    let c = ctx(30);
    for (k, t, want) in [
        (2, "1/2", "0.05096730908827389579159706290087755522393"),
        (2, "3", "0.005615074075681024514200970312100458332627"),
        (2, "-2", "0.7039883399725211071704810274631769702318"),
        (3, "1", "0.0001066757900235395026165182111223759324827"),
        (3, "35", "5.075134918090915345906478880221101691032e-14"),
        (
            4,
            "-3/4",
            "0.0000007543716463508198730352815636668093004797",
        ),
    ] {
        let d = dk_eval(k, &HPComplex::from_real(at(&c, t)), &c).unwrap();
        close(&d.re, want, 1e-30);
    }
}

#[test]
fn bessel() {
    let c = ctx(40);
    for (x, want) in [
        ("0.5", "0.2422684576748738863839545761415316408006"),
        ("10", "0.04347274616886143666974876802585928830627"),
        ("123.456", "-0.01083958485652043097044367952469988030095"),
    ] {
        close(&bessel_j1(&at(&c, x), &c), want, 1e-36);
    }
}

#[test]
fn fourier_determinants() {
    let c = ctx(30);
    for (k, u, want) in [
        (3, "5/2", "-0.0000019902063838333432935991997956329295"),
        (3, "7/10", "0.00024883064691512973066227815974470936"),
        (4, "3/2", "0.000000010021413275616572311678159476000411"),
    ] {
        close(&ik_eval(k, &at(&c, u), &c).unwrap(), want, 1e-28);
    }
}

#[test]
fn aliquot_integrals() {
    let c = ctx(30);
    close(
        &i_d_poisson(3, &c).unwrap(),
        "1.705357042191503835498596",
        1e-24,
    );
    close(
        &i_d_poisson(4, &c).unwrap(),
        "2.351836312459867368910103",
        1e-24,
    );
    close(
        &i_d_quadrature(4, &c).unwrap(),
        "2.351836312459867368910103",
        1e-24,
    );
}
