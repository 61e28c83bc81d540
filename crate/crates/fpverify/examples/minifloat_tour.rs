//! A tour of the softfloat oracle: exact arithmetic with one rounding,
//! signed zeros, and the fmod/remainder distinction, shown on fp8 so
//! every value is easy to see.

use fpverify::oracle::minifloat::{from_rational, mf_add, mf_div, mf_rem, mf_remainder_ieee};
use fpverify::oracle::MiniFloat;
use fpverify::typer::FPFormat;
use num_rational::BigRational;

fn fp8(v: f64) -> MiniFloat {
    from_rational(FPFormat::FP8, &BigRational::from_float(v).unwrap(), v.is_sign_negative())
}

fn show(label: &str, v: MiniFloat) {
    println!("{label:28} = {} ({})", v.to_decimal_string(), v.to_bits_string());
}

fn main() {
    let f = FPFormat::FP8;

    println!("-- rounding to nearest, ties to even");
    // 1.0 + 1/16 is exactly halfway between 1.0 and 1.125 in fp8
    show("fp8(1.0625)", fp8(1.0625));
    show("fp8(1.1875)", fp8(1.1875));
    show("fp8(1000.0) overflows", fp8(1000.0));

    println!("-- signed zeros");
    show("-0.0 + 0.0", mf_add(&fp8(-0.0), &fp8(0.0)));
    show("-0.0 + -0.0", mf_add(&fp8(-0.0), &fp8(-0.0)));
    show("1.0 / -inf", mf_div(&fp8(1.0), &MiniFloat::infinity(f, true)));

    println!("-- fmod rounds toward zero, remainder to nearest");
    let x = fp8(5.5);
    let y = fp8(2.0);
    show("fmod(5.5, 2.0)", mf_rem(&x, &y));
    show("remainder(5.5, 2.0)", mf_remainder_ieee(&x, &y));
    show("fmod(-5.5, 2.0)", mf_rem(&fp8(-5.5), &y));
    show("remainder(-5.5, 2.0)", mf_remainder_ieee(&fp8(-5.5), &y));

    println!("-- division by zero");
    show("1.0 / 0.0", mf_div(&fp8(1.0), &fp8(0.0)));
    show("0.0 / 0.0", mf_div(&fp8(0.0), &fp8(0.0)));
    show("fmod(1.0, 0.0)", mf_rem(&fp8(1.0), &fp8(0.0)));
}
