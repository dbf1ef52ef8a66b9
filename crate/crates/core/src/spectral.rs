//! Spectral measures of shift-invariant kernels: product distributions on
//! R^d, seeded frequency sampling, absolute-moment arithmetic, and the
//! moment-growth (Bernstein-condition) certification machinery.
//!
//! Two marginal families are supported. `Gaussian { sigma }` has density
//! proportional to exp(-w^2 / (2 sigma^2)) and is the spectral measure of the
//! Gaussian kernel with inverse bandwidth sigma. `GeneralizedGaussian { ell }`
//! has density c_ell * exp(-w^(2 ell)) with c_ell = ell / Gamma(1/(2 ell)); its
//! heavier-than-Gaussian tail decay certifies a moment-growth constant for
//! derivative orders up to 2*ell where the Gaussian family stops at 2.

use crate::error::{Error, Result};
use crate::special;
use ndarray::{Array2, ArrayView2};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

/// sqrt(2/pi), the odd-moment correction for Gaussian absolute moments.
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// A multi-index in N^d: one derivative order per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(orders: Vec<u32>) -> Self {
        MultiIndex(orders)
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// Number of coordinates d.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total order |p| = sum of the coordinate orders.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    /// Coordinate-wise sum, used to form p + q.
    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    /// Parses a comma-separated list of nonnegative orders, e.g. "1,0,2".
    fn from_str(s: &str) -> Result<Self> {
        let orders = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("multi-index entry {tok:?}: {e}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        if orders.is_empty() {
            return Err(Error::Parse("multi-index must have at least one entry".into()));
        }
        Ok(MultiIndex(orders))
    }
}

/// One coordinate's distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Marginal {
    /// Centered normal with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// Density c_ell * exp(-w^(2 ell)) on R, with ell a positive integer.
    #[serde(rename = "gengauss")]
    GeneralizedGaussian { ell: u32 },
}

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Marginal::Gaussian { sigma } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "gaussian marginal needs sigma > 0, got {sigma}"
                    )));
                }
            }
            Marginal::GeneralizedGaussian { ell } => {
                if ell == 0 {
                    return Err(Error::InvalidArgument(
                        "generalized gaussian marginal needs ell >= 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// E|w|^n. Falls back to the log-space form when the direct product
    /// overflows, so the value is +inf only when the moment itself is.
    pub fn abs_moment(&self, n: u32) -> f64 {
        match *self {
            Marginal::Gaussian { sigma } => {
                let odd = if n % 2 == 1 { SQRT_2_OVER_PI } else { 1.0 };
                let direct =
                    special::double_factorial(n as i64 - 1) * sigma.powi(n as i32) * odd;
                if direct.is_finite() {
                    direct
                } else {
                    self.ln_abs_moment(n).exp()
                }
            }
            Marginal::GeneralizedGaussian { .. } => self.ln_abs_moment(n).exp(),
        }
    }

    /// ln E|w|^n, exact in the sense that no intermediate overflows:
    /// Gaussian moments are sigma^n (n-1)!! (times sqrt(2/pi) for odd n),
    /// generalized Gaussian moments are Gamma((n+1)/(2 ell)) / Gamma(1/(2 ell)).
    pub fn ln_abs_moment(&self, n: u32) -> f64 {
        let nf = f64::from(n);
        match *self {
            Marginal::Gaussian { sigma } => {
                let odd = if n % 2 == 1 { SQRT_2_OVER_PI.ln() } else { 0.0 };
                special::ln_double_factorial(n as i64 - 1) + nf * sigma.ln() + odd
            }
            Marginal::GeneralizedGaussian { ell } => {
                let h = 1.0 / (2.0 * f64::from(ell));
                special::ln_gamma((nf + 1.0) * h) - special::ln_gamma(h)
            }
        }
    }

    /// Probability density at w.
    pub fn density(&self, w: f64) -> f64 {
        match *self {
            Marginal::Gaussian { sigma } => {
                let u = w / sigma;
                (-0.5 * u * u).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
            }
            Marginal::GeneralizedGaussian { ell } => {
                let h = 1.0 / (2.0 * f64::from(ell));
                let c = f64::from(ell) / special::ln_gamma(h).exp();
                c * (-w.abs().powi(2 * ell as i32)).exp()
            }
        }
    }

    /// One draw from the marginal, consuming a fixed number-of-uniforms
    /// pattern from the stream: one uniform for Gaussian; for the generalized
    /// Gaussian, the gamma rejection draws (normal, uniform) pairs until
    /// acceptance, then one boosting uniform, then one sign uniform.
    pub(crate) fn sample_one(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Marginal::Gaussian { sigma } => {
                sigma * special::inverse_normal_cdf(uniform_open01(rng))
            }
            Marginal::GeneralizedGaussian { ell } => {
                // |w|^(2 ell) ~ Gamma(1/(2 ell), 1), so |w| = Y^(1/(2 ell)).
                let h = 1.0 / (2.0 * f64::from(ell));
                let y = sample_gamma(rng, h);
                let mag = y.powf(h);
                if uniform_open01(rng) < 0.5 {
                    -mag
                } else {
                    mag
                }
            }
        }
    }

    /// Smallest searched U such that the one-sided weighted tail
    /// int_U^inf w^n density(w) dw is provably below eps.
    ///
    /// Both families reduce by substitution to an upper incomplete gamma
    /// integral, bounded by 2 T^(a-1) e^(-T) once T >= max(2(a-1), 1); the
    /// search starts above that threshold so the bound is always valid.
    pub(crate) fn tail_cutoff(&self, n: u32, eps: f64) -> f64 {
        debug_assert!(eps > 0.0);
        let nf = f64::from(n);
        // Tail = exp(ln_pref) * int_T^inf t^(a-1) e^(-t) dt in the variable
        // t = T(w); u_of_t maps back to the cutoff in w.
        let (a, ln_pref, u_of_t): (f64, f64, Box<dyn Fn(f64) -> f64>) = match *self {
            Marginal::Gaussian { sigma } => (
                (nf + 1.0) / 2.0,
                nf * sigma.ln() + (nf - 1.0) / 2.0 * LN_2
                    - 0.5 * (2.0 * std::f64::consts::PI).ln(),
                Box::new(move |t: f64| sigma * (2.0 * t).sqrt()),
            ),
            Marginal::GeneralizedGaussian { ell } => {
                let h = 1.0 / (2.0 * f64::from(ell));
                (
                    (nf + 1.0) * h,
                    -LN_2 - special::ln_gamma(h),
                    Box::new(move |t: f64| t.powf(h)),
                )
            }
        };
        let ln_eps = eps.ln();
        let mut t = (2.0 * (a - 1.0)).max(4.0);
        for _ in 0..2_000 {
            let ln_tail = ln_pref + LN_2 + (a - 1.0) * t.ln() - t;
            if ln_tail < ln_eps {
                break;
            }
            t *= 1.25;
        }
        u_of_t(t)
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Marginal::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
            Marginal::GeneralizedGaussian { ell } => write!(f, "gengauss(ell={ell})"),
        }
    }
}

/// Product measure on R^d described by one marginal per coordinate.
///
/// Serializes as `{"d":2,"marginals":[{"kind":"gaussian","sigma":1.0},
/// {"kind":"gengauss","ell":2}]}`; deserialization re-validates every field
/// and checks d against the marginal count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureDescriptor", into = "MeasureDescriptor")]
pub struct SpectralMeasure {
    marginals: Vec<Marginal>,
}

#[derive(Serialize, Deserialize)]
struct MeasureDescriptor {
    d: usize,
    marginals: Vec<Marginal>,
}

impl TryFrom<MeasureDescriptor> for SpectralMeasure {
    type Error = Error;
    fn try_from(desc: MeasureDescriptor) -> Result<Self> {
        if desc.d != desc.marginals.len() {
            return Err(Error::Parse(format!(
                "descriptor says d={} but lists {} marginals",
                desc.d,
                desc.marginals.len()
            )));
        }
        SpectralMeasure::new(desc.marginals)
    }
}

impl From<SpectralMeasure> for MeasureDescriptor {
    fn from(m: SpectralMeasure) -> Self {
        MeasureDescriptor {
            d: m.marginals.len(),
            marginals: m.marginals,
        }
    }
}

impl SpectralMeasure {
    pub fn new(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidArgument(
                "a spectral measure needs at least one marginal".into(),
            ));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(SpectralMeasure { marginals })
    }

    pub fn iid(marginal: Marginal, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be >= 1".into()));
        }
        Self::new(vec![marginal; d])
    }

    pub fn gaussian(sigma: f64, d: usize) -> Result<Self> {
        Self::iid(Marginal::Gaussian { sigma }, d)
    }

    pub fn generalized_gaussian(ell: u32, d: usize) -> Result<Self> {
        Self::iid(Marginal::GeneralizedGaussian { ell }, d)
    }

    pub fn d(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn to_descriptor_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serialization cannot fail")
    }

    pub fn from_descriptor_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("measure descriptor: {e}")))
    }

    /// Draws m frequencies omega_1..omega_m.
    ///
    /// One ChaCha8 stream is seeded with `seed`; draws proceed frequency by
    /// frequency, coordinate by coordinate within a frequency, so the result
    /// is a pure function of (measure, m, seed) and is bit-identical across
    /// runs. The uniform stream itself is platform-independent; the Gaussian
    /// and gamma transforms are fixed algorithms (inverse normal CDF, and
    /// Marsaglia-Tsang rejection with the shape<1 power boost) on top of it.
    pub fn sample(&self, m: usize, seed: u64) -> FrequencySample {
        let d = self.d();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut freqs = Array2::zeros((m, d));
        for j in 0..m {
            for (k, marg) in self.marginals.iter().enumerate() {
                freqs[(j, k)] = marg.sample_one(&mut rng);
            }
        }
        FrequencySample {
            freqs,
            seed,
            measure: self.clone(),
        }
    }

    fn check_index(&self, a: &MultiIndex) -> Result<()> {
        if a.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: a.len(),
            });
        }
        Ok(())
    }

    /// E prod_k |w_k|^(a_k), the product of per-coordinate absolute moments.
    pub fn abs_moment(&self, a: &MultiIndex) -> Result<f64> {
        self.check_index(a)?;
        Ok(self
            .marginals
            .iter()
            .zip(a.orders())
            .map(|(m, &n)| m.abs_moment(n))
            .product())
    }

    /// sigma_{p,q} = sqrt(E w^(2(p+q))), the natural scale of the estimator's
    /// variance for the (p,q) derivative.
    pub fn sigma_pq(&self, p: &MultiIndex, q: &MultiIndex) -> Result<f64> {
        self.check_index(p)?;
        self.check_index(q)?;
        let doubled: Vec<u32> = p
            .orders()
            .iter()
            .zip(q.orders())
            .map(|(&a, &b)| 2 * (a + b))
            .collect();
        Ok(self.abs_moment(&MultiIndex(doubled))?.sqrt())
    }

    /// C_{p,q} = sqrt(sum_j E w^(2(p+q) + 2 e_j)) / sigma_{p,q}, the
    /// gradient-scale constant entering the covering-number term of the
    /// uniform error bound.
    pub fn c_pq(&self, p: &MultiIndex, q: &MultiIndex) -> Result<f64> {
        self.check_index(p)?;
        self.check_index(q)?;
        let base: Vec<u32> = p
            .orders()
            .iter()
            .zip(q.orders())
            .map(|(&a, &b)| 2 * (a + b))
            .collect();
        let mut num = 0.0;
        for j in 0..self.d() {
            let mut bumped = base.clone();
            bumped[j] += 2;
            num += self.abs_moment(&MultiIndex(bumped))?;
        }
        Ok(num.sqrt() / self.sigma_pq(p, q)?)
    }

    /// Normalized absolute-moment ratio A_{r,n} = E|w|^(rn) / (E|w|^(2r))^(n/2)
    /// in log space. Defined for one-dimensional measures only.
    pub fn bernstein_ratio(&self, r: u32, n: u32) -> Result<MomentRatio> {
        if self.d() != 1 {
            return Err(Error::UnsupportedDimension(format!(
                "moment ratios are one-dimensional; this measure has d={}",
                self.d()
            )));
        }
        if r < 1 || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "moment ratio needs r >= 1 and n >= 2, got r={r}, n={n}"
            )));
        }
        let rn = r.checked_mul(n).ok_or_else(|| {
            Error::InvalidArgument(format!("moment order r*n overflows: r={r}, n={n}"))
        })?;
        let marg = &self.marginals[0];
        let ln_value =
            marg.ln_abs_moment(rn) - f64::from(n) / 2.0 * marg.ln_abs_moment(2 * r);
        Ok(MomentRatio { r, n, ln_value })
    }

    /// Checks A_{r,n} <= (n!/2) K^(n-2) for every n in 2..=n_max, entirely in
    /// log space so orders in the hundreds cannot overflow.
    pub fn bernstein_check(&self, r: u32, k: f64, n_max: u32) -> Result<BernsteinReport> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "the moment-growth constant must satisfy K >= 1, got {k}"
            )));
        }
        if n_max < 2 {
            return Err(Error::InvalidArgument(format!(
                "n_max must be at least 2, got {n_max}"
            )));
        }
        let ln_k = k.ln();
        let mut ln_ratios = Vec::with_capacity(n_max as usize - 1);
        let mut first_violating_n = None;
        let mut violation_ratio = None;
        for n in 2..=n_max {
            let lhs = self.bernstein_ratio(r, n)?.ln_value;
            ln_ratios.push(lhs);
            let rhs = special::ln_gamma(f64::from(n) + 1.0) - LN_2 + f64::from(n - 2) * ln_k;
            if first_violating_n.is_none() && lhs > rhs {
                first_violating_n = Some(n);
                violation_ratio = Some((lhs - rhs).exp());
            }
        }
        Ok(BernsteinReport {
            r,
            k,
            n_max,
            verdict: if first_violating_n.is_some() {
                Verdict::Fail
            } else {
                Verdict::Pass
            },
            first_violating_n,
            violation_ratio,
            ln_ratios,
        })
    }

    /// Moment-growth constant for the derivative order r = |p+q| of this
    /// measure, valid for all n (not just a checked window), or an error when
    /// no such constant exists.
    ///
    /// r = 0 always admits K = 1 (the ratio is identically 1). Beyond that
    /// the certificates are one-dimensional: Gaussian admits K = 1 at r = 1
    /// and K = 2 at r = 2 but nothing at r >= 3, where E|w|^(rn) outgrows
    /// (n!/2) K^(n-2) for every K; the generalized Gaussian family is covered
    /// by [`appendix_k`] up to r = 2 ell.
    pub fn certified_k(&self, p: &MultiIndex, q: &MultiIndex) -> Result<f64> {
        self.check_index(p)?;
        self.check_index(q)?;
        let r = p.order() + q.order();
        if r == 0 {
            return Ok(1.0);
        }
        if self.d() != 1 {
            return Err(Error::NoCertifiedConstant(format!(
                "certificates cover one-dimensional measures only (d={}, r={r})",
                self.d()
            )));
        }
        match self.marginals[0] {
            // Scale-free: sigma cancels between numerator and denominator of
            // every ratio, so the constants hold for all sigma.
            Marginal::Gaussian { .. } => match r {
                1 => Ok(1.0),
                2 => Ok(2.0),
                _ => Err(Error::NoCertifiedConstant(format!(
                    "gaussian moment ratios at order r={r} >= 3 outgrow (n!/2) K^(n-2) for every K"
                ))),
            },
            Marginal::GeneralizedGaussian { ell } => {
                if r <= 2 * ell {
                    Ok(appendix_k(ell, r)?.k)
                } else {
                    Err(Error::NoCertifiedConstant(format!(
                        "gengauss(ell={ell}) certifies orders r <= {}, got r={r}",
                        2 * ell
                    )))
                }
            }
        }
    }
}

/// A_{r,n} in log space. `ln_value` is always finite; exponentiate only when
/// the magnitude is representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRatio {
    pub r: u32,
    pub n: u32,
    pub ln_value: f64,
}

impl MomentRatio {
    /// exp(ln_value); +inf when the ratio exceeds f64 range, in which case
    /// `ln_value` is the faithful report.
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    pub fn is_representable(&self) -> bool {
        self.ln_value < f64::MAX.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of sweeping the growth inequality A_{r,n} <= (n!/2) K^(n-2) over
/// n = 2..=n_max. `ln_ratios` records ln A_{r,n} for the whole sweep (these
/// do not depend on K); on failure the first violating n and the factor by
/// which the inequality missed are reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub r: u32,
    #[serde(rename = "K")]
    pub k: f64,
    pub n_max: u32,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violating_n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation_ratio: Option<f64>,
    pub ln_ratios: Vec<f64>,
}

impl BernsteinReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Certified constant for the generalized Gaussian family together with the
/// quantities the construction is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedK {
    pub k: f64,
    /// Threshold index: gamma-term candidates are checked for n below n_s;
    /// from n_s on the underlying gamma ratio is monotone and needs no check.
    pub n_s: u32,
    /// c_r = Gamma((2r+1)/(2 ell)) / Gamma(1/(2 ell)) = E|w|^(2r).
    pub c_r: f64,
}

/// Moment-growth constant for `GeneralizedGaussian { ell }` at derivative
/// order r, valid for 1 <= r <= 2*ell:
///
///   K_r = max( D_{r,2}/sqrt(c_r), ..., D_{r,n_s - 1}/sqrt(c_r),
///              1/sqrt(c_r), 1 )
///
/// with D_{r,n} = Gamma(a+1)/Gamma(a + r/(2 ell)) at a = (rn+1)/(2 ell), and
/// n_s = ceil(2 ell z - 2) where z is the positive digamma root: to the right
/// of z the log-gamma function increases, which makes the D terms monotone
/// and the finite candidate list sufficient for every n.
pub fn appendix_k(ell: u32, r: u32) -> Result<CertifiedK> {
    if ell == 0 || r == 0 {
        return Err(Error::InvalidArgument(format!(
            "certification needs ell >= 1 and r >= 1, got ell={ell}, r={r}"
        )));
    }
    if r > 2 * ell {
        return Err(Error::OutOfScopeOrder { ell, r });
    }
    let h = 1.0 / (2.0 * f64::from(ell));
    let n_s = (2.0 * f64::from(ell) * special::DIGAMMA_POSITIVE_ROOT - 2.0).ceil() as u32;
    let c_r = (special::ln_gamma((2.0 * f64::from(r) + 1.0) * h) - special::ln_gamma(h)).exp();
    let inv_sqrt_c = 1.0 / c_r.sqrt();
    let mut k = inv_sqrt_c.max(1.0);
    for n in 2..n_s {
        let a = (f64::from(r) * f64::from(n) + 1.0) * h;
        let d_rn = (special::ln_gamma(a + 1.0) - special::ln_gamma(a + f64::from(r) * h)).exp();
        k = k.max(d_rn * inv_sqrt_c);
    }
    Ok(CertifiedK { k, n_s, c_r })
}

/// m frequencies drawn from a spectral measure, with the provenance needed to
/// reproduce them exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySample {
    freqs: Array2<f64>,
    seed: u64,
    measure: SpectralMeasure,
}

impl FrequencySample {
    pub fn m(&self) -> usize {
        self.freqs.nrows()
    }

    pub fn d(&self) -> usize {
        self.freqs.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }

    /// The m x d frequency matrix, one frequency per row.
    pub fn frequencies(&self) -> ArrayView2<'_, f64> {
        self.freqs.view()
    }
}

/// Uniform on (0,1), strictly excluding both endpoints: the top 53 bits of
/// the generator word, offset by half a grid step.
fn uniform_open01(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Gamma(shape, 1) via Marsaglia-Tsang squeeze-rejection. Shapes below one
/// use the boost Gamma(shape) = Gamma(shape+1) * U^(1/shape) so the rejection
/// core always runs at shape >= 1.
fn sample_gamma(rng: &mut ChaCha8Rng, shape: f64) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let g = sample_gamma_core(rng, shape + 1.0);
        let u = uniform_open01(rng);
        return g * u.powf(1.0 / shape);
    }
    sample_gamma_core(rng, shape)
}

fn sample_gamma_core(rng: &mut ChaCha8Rng, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (3.0 * d.sqrt());
    loop {
        let x = special::inverse_normal_cdf(uniform_open01(rng));
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = uniform_open01(rng);
        if u < 1.0 - 0.0331 * x.powi(4) {
            return d * v;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
