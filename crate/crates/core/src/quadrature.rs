//! Adaptive numerical integration on finite intervals.
//!
//! The panel rule is the 21-point Kronrod extension of 10-point Gauss
//! (QUADPACK's QK21 nodes and weights); the driver bisects whichever panel
//! carries the largest error estimate until the summed estimate meets the
//! requested absolute tolerance.

use crate::error::{Error, Result};

/// Abscissae of the 21-point Kronrod rule on [-1, 1]: odd-indexed entries are
/// the embedded 10-point Gauss nodes, the final entry is the midpoint.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

/// Weights of the embedded 10-point Gauss rule.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Weights of the 21-point Kronrod rule, aligned with XGK.
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const MAX_PANELS: usize = 2_048;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// QUADPACK's error rescaling: trust the raw Gauss/Kronrod difference only
/// once it is small relative to the variation resasc, and never report below
/// 50 ulps of the absolute integral resabs.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let err = err.abs();
    let mut scaled = err;
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        scaled = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * resabs);
    }
    scaled
}

fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut fv1 = [0.0f64; 10];
    let mut fv2 = [0.0f64; 10];

    let mut resg = 0.0;
    let mut resk = WGK[10] * fc;
    let mut resabs = resk.abs();

    for (j, &wg) in WG.iter().enumerate() {
        let jtw = 2 * j + 1;
        let absc = half * XGK[jtw];
        let f1 = f(center - absc);
        let f2 = f(center + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        let fsum = f1 + f2;
        resg += wg * fsum;
        resk += WGK[jtw] * fsum;
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let absc = half * XGK[jtwm1];
        let f1 = f(center - absc);
        let f2 = f(center + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        let fsum = f1 + f2;
        resk += WGK[jtwm1] * fsum;
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let error = rescale_error((resk - resg) * half, resabs, resasc);
    Panel { a, b, value, error }
}

/// Integrates f over [a, b] to the requested absolute tolerance.
///
/// Deterministic: the bisection order depends only on (f, a, b, abs_tol).
/// Fails with `NumericFailure` when the panel budget is exhausted or a panel
/// shrinks to floating-point resolution before the tolerance is met, and when
/// the integrand produces non-finite values.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidArgument(format!(
            "integration interval must be finite with a <= b, got [{a}, {b}]"
        )));
    }
    if abs_tol.is_nan() || abs_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "integration tolerance must be positive, got {abs_tol}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }

    let mut panels = vec![qk21(&f, a, b)];
    loop {
        let mut total_err = 0.0;
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if !p.value.is_finite() {
                return Err(Error::NumericFailure(format!(
                    "integrand is not finite on [{}, {}]",
                    p.a, p.b
                )));
            }
            total_err += p.error;
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        if total_err <= abs_tol {
            return Ok(panels.iter().map(|p| p.value).sum());
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::NumericFailure(format!(
                "integral over [{a}, {b}] did not reach tolerance {abs_tol} \
                 within {MAX_PANELS} panels (error estimate {total_err:e})"
            )));
        }
        let Panel { a: pa, b: pb, .. } = panels[worst];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Err(Error::NumericFailure(format!(
                "panel [{pa}, {pb}] is at floating-point resolution but the \
                 error estimate still exceeds {abs_tol}"
            )));
        }
        panels[worst] = qk21(&f, pa, mid);
        panels.push(qk21(&f, mid, pb));
    }
}
