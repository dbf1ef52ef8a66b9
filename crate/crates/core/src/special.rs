//! Scalar special functions used by the sampling, moment, and oracle code.
//!
//! Everything here is pure arithmetic on `f64` with no table lookups at
//! runtime beyond the fixed coefficient arrays, so results are reproducible
//! across runs on a given target.

use std::f64::consts::PI;

/// sqrt(2*pi) to double precision.
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Positive root of the digamma function, the unique minimum of ln(Gamma) on
/// the positive axis. Gamma is increasing to the right of this point, which
/// is what the moment-ratio certification relies on.
pub(crate) const DIGAMMA_POSITIVE_ROOT: f64 = 1.461_632_144_968_362_3;

/// Lanczos parameter g = 607/128 for the 15-term Godfrey coefficient set.
const LANCZOS_G: f64 = 4.742_187_5;

const LANCZOS_C: [f64; 15] = [
    0.999_999_999_999_997_091_82,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

/// Natural log of the gamma function for positive arguments.
///
/// Lanczos approximation with Godfrey's 15-term coefficient set (relative
/// error below 1e-13 over the positive axis), with the reflection formula
/// covering x < 0.5.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite(), "ln_gamma domain is x > 0, got {x}");
    if x < 0.5 {
        // Gamma(x) * Gamma(1 - x) = pi / sin(pi x)
        PI.ln() - (PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut a = LANCZOS_C[0];
        for (k, &c) in LANCZOS_C.iter().enumerate().skip(1) {
            a += c / (z + k as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (z + 0.5) * t.ln() - t + (SQRT_2PI * a).ln()
    }
}

/// Double factorial n!! as an f64 product. `n <= 1` (including -1 and 0)
/// yields 1. Overflows to infinity for n beyond roughly 300; callers that
/// need large orders use [`ln_double_factorial`] instead.
pub(crate) fn double_factorial(n: i64) -> f64 {
    debug_assert!(n >= -1);
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// ln(n!!) for n >= -1, computed through ln_gamma so it stays finite for
/// orders far past the f64 overflow point of the direct product.
pub(crate) fn ln_double_factorial(n: i64) -> f64 {
    debug_assert!(n >= -1);
    if n <= 1 {
        return 0.0;
    }
    let ln2 = std::f64::consts::LN_2;
    if n % 2 == 0 {
        // (2k)!! = 2^k * k!
        let k = (n / 2) as f64;
        k * ln2 + ln_gamma(k + 1.0)
    } else {
        // (2k+1)!! = (2k+1)! / (2^k * k!)
        let k = ((n - 1) / 2) as f64;
        ln_gamma(n as f64 + 1.0) - k * ln2 - ln_gamma(k + 1.0)
    }
}

/// Inverse of the standard normal CDF.
///
/// Wichura's algorithm AS 241, the PPND16 variant, accurate to about 1e-15
/// over p in (0, 1). The central rational approximation covers
/// |p - 0.5| <= 0.425; the two tail branches switch on sqrt(-ln(min(p, 1-p))).
pub(crate) fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "inverse_normal_cdf domain is (0,1), got {p}");
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        133.141_667_891_784_377_45,
        1_971.590_950_306_551_442_7,
        13_731.693_765_509_461_125,
        45_921.953_931_549_871_457,
        67_265.770_927_008_700_853,
        33_430.575_583_588_128_105,
        2_509.080_928_730_122_672_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_911_252,
        687.187_007_492_057_908_3,
        5_394.196_021_424_751_107_7,
        21_213.794_301_586_595_867,
        39_307.895_800_092_710_61,
        28_729.085_735_721_942_674,
        5_226.495_278_852_854_561,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        0.241_780_725_177_450_611_77,
        0.022_723_844_989_269_184_583_3,
        0.000_774_545_014_278_341_407_64,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        0.689_767_334_985_100_004_55,
        0.148_103_976_427_480_074_59,
        0.015_198_666_563_616_457_196_6,
        0.000_547_593_808_499_534_494_6,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        0.296_560_571_828_504_891_23,
        0.026_532_189_526_576_123_093,
        0.001_242_660_947_388_078_438_6,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_937_69,
        0.136_929_880_922_735_805_31,
        0.014_875_361_290_850_614_852_5,
        0.000_786_869_131_145_613_259_1,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    fn horner(coef: &[f64; 8], r: f64) -> f64 {
        coef.iter().rev().fold(0.0, |acc, &c| acc * r + c)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * horner(&A, r) / horner(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - 5.0;
        horner(&E, r) / horner(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Probabilists' Hermite polynomial He_n(u), satisfying
/// He_{n+1}(u) = u He_n(u) - n He_{n-1}(u) with He_0 = 1, He_1 = u.
pub(crate) fn hermite_prob(n: u32, u: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => u,
        _ => {
            let mut prev = 1.0;
            let mut cur = u;
            for k in 1..n {
                let next = u * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
