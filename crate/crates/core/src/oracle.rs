//! Exact values of shift-invariant kernels and their mixed derivatives, used
//! as ground truth when measuring feature-map approximation error.
//!
//! The kernel of a product spectral measure factorizes over coordinates,
//! k(z) = prod_j k_j(z_j), and so does every mixed derivative. All-Gaussian
//! measures have the closed form
//!
//!   d^n/dz^n exp(-s^2 z^2 / 2) = (-s)^n He_n(s z) exp(-s^2 z^2 / 2)
//!
//! with He_n the probabilists' Hermite polynomial. Everything else is
//! evaluated by quadrature of the cosine transform, one coordinate at a time:
//! for derivative order n_j the factor is int w^{n_j} trig(w z_j) dmu_j(w)
//! with trig = cos for even n_j and sin for odd n_j, an even integrand either
//! way, integrated over [0, U] with U chosen so the dropped tail is provably
//! negligible and the [U, 2U] extension checked to be consistent with that.

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special;
use crate::spectral::{Marginal, MultiIndex, SpectralMeasure};

/// Evaluation strategy. `Auto` takes the closed form when every marginal is
/// Gaussian and quadrature otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    ClosedForm,
    Quadrature,
}

/// Relative accuracy asked of each coordinate integral, measured against the
/// coordinate's absolute moment (an upper bound on the integral's magnitude).
const QUAD_REL: f64 = 1e-11;
/// Relative tail mass allowed beyond the cutoff.
const TAIL_REL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct KernelOracle {
    measure: SpectralMeasure,
    method: Method,
}

impl KernelOracle {
    pub fn new(measure: SpectralMeasure) -> Self {
        KernelOracle {
            measure,
            method: Method::Auto,
        }
    }

    pub fn with_method(measure: SpectralMeasure, method: Method) -> Self {
        KernelOracle { measure, method }
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }

    /// The method actually used for this measure.
    pub fn resolved_method(&self) -> Method {
        match self.method {
            Method::Auto => {
                if self.all_gaussian() {
                    Method::ClosedForm
                } else {
                    Method::Quadrature
                }
            }
            other => other,
        }
    }

    fn all_gaussian(&self) -> bool {
        self.measure
            .marginals()
            .iter()
            .all(|m| matches!(m, Marginal::Gaussian { .. }))
    }

    /// k(x, y) = k(x - y), the kernel value itself.
    pub fn exact_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d = self.measure.d();
        let zero = MultiIndex::zeros(d);
        self.exact_derivative(&zero, &zero, x, y)
    }

    /// d^p_x d^q_y k(x, y).
    pub fn exact_derivative(
        &self,
        p: &MultiIndex,
        q: &MultiIndex,
        x: &[f64],
        y: &[f64],
    ) -> Result<f64> {
        let d = self.measure.d();
        if x.len() != d || y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if x.len() != d { x.len() } else { y.len() },
            });
        }
        let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.exact_derivative_at(p, q, &z)
    }

    /// d^p_x d^q_y k evaluated at the difference z = x - y. Derivatives in y
    /// flip sign once per order: the result is (-1)^{|q|} times the |p+q|-th
    /// derivative of k with respect to z.
    pub fn exact_derivative_at(&self, p: &MultiIndex, q: &MultiIndex, z: &[f64]) -> Result<f64> {
        let d = self.measure.d();
        if p.len() != d || q.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if p.len() != d { p.len() } else { q.len() },
            });
        }
        if z.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: z.len(),
            });
        }
        match self.resolved_method() {
            Method::ClosedForm => {
                if !self.all_gaussian() {
                    return Err(Error::InvalidArgument(
                        "closed-form evaluation requires an all-Gaussian measure".into(),
                    ));
                }
                Ok(self.closed_form(p, q, z))
            }
            Method::Quadrature => self.by_quadrature(p, q, z),
            Method::Auto => unreachable!("resolved_method never returns Auto"),
        }
    }

    fn closed_form(&self, p: &MultiIndex, q: &MultiIndex, z: &[f64]) -> f64 {
        let sign = if q.order() % 2 == 1 { -1.0 } else { 1.0 };
        let mut prod = sign;
        for (k, marg) in self.measure.marginals().iter().enumerate() {
            let Marginal::Gaussian { sigma } = *marg else {
                unreachable!("caller checked all marginals are Gaussian")
            };
            let n = p[k] + q[k];
            let u = sigma * z[k];
            prod *= (-sigma).powi(n as i32)
                * special::hermite_prob(n, u)
                * (-0.5 * u * u).exp();
        }
        prod
    }

    /// Quadrature path. Writing k as the real part of the characteristic
    /// function and differentiating under the integral, the derivative
    /// factorizes into per-coordinate real integrals I_j (cos for even
    /// order, sin for odd); the collected powers of i contribute
    /// Re[i^(N + #odd)] = +-1, which is folded into the overall sign.
    fn by_quadrature(&self, p: &MultiIndex, q: &MultiIndex, z: &[f64]) -> Result<f64> {
        let sign_q = if q.order() % 2 == 1 { -1.0 } else { 1.0 };
        let total = p.add(q)?;
        let n_total = total.order();
        let odd_count = (0..self.measure.d())
            .filter(|&k| total[k] % 2 == 1)
            .count() as u32;
        // N + #odd is even; i^(N + #odd) is +1 or -1.
        let sign_i = if (n_total + odd_count).is_multiple_of(4) { 1.0 } else { -1.0 };
        let mut prod = sign_q * sign_i;
        for (k, marg) in self.measure.marginals().iter().enumerate() {
            prod *= coordinate_integral(marg, total[k], z[k])?;
        }
        Ok(prod)
    }

    /// Central finite differences applied recursively, one derivative order
    /// at a time, to the kernel itself: an implementation-independent
    /// cross-check of the analytic paths. Each order costs a factor of two
    /// in kernel evaluations and O(h^2) truncation, so total orders above 4
    /// are refused (the rounding error h^(-|p+q|) eats the answer).
    ///
    /// `step` of None uses h = 1e-4 * max(1, |x - y|).
    pub fn finite_difference_derivative(
        &self,
        p: &MultiIndex,
        q: &MultiIndex,
        x: &[f64],
        y: &[f64],
        step: Option<f64>,
    ) -> Result<f64> {
        let d = self.measure.d();
        if p.len() != d || q.len() != d || x.len() != d || y.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len().max(q.len()).max(x.len()).max(y.len()),
            });
        }
        let order = p.order() + q.order();
        if order > 4 {
            return Err(Error::InvalidArgument(format!(
                "finite differences are unreliable beyond total order 4, got |p+q| = {order}"
            )));
        }
        let h = match step {
            Some(h) if h > 0.0 && h.is_finite() => h,
            Some(h) => {
                return Err(Error::InvalidArgument(format!(
                    "finite-difference step must be positive and finite, got {h}"
                )))
            }
            None => {
                let z_norm = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                1e-4 * z_norm.max(1.0)
            }
        };
        self.fd_recurse(p.orders(), q.orders(), &mut x.to_vec(), &mut y.to_vec(), h)
    }

    fn fd_recurse(
        &self,
        p: &[u32],
        q: &[u32],
        x: &mut Vec<f64>,
        y: &mut Vec<f64>,
        h: f64,
    ) -> Result<f64> {
        if let Some(k) = p.iter().position(|&n| n > 0) {
            let mut p_less = p.to_vec();
            p_less[k] -= 1;
            x[k] += h;
            let plus = self.fd_recurse(&p_less, q, x, y, h)?;
            x[k] -= 2.0 * h;
            let minus = self.fd_recurse(&p_less, q, x, y, h)?;
            x[k] += h;
            return Ok((plus - minus) / (2.0 * h));
        }
        if let Some(k) = q.iter().position(|&n| n > 0) {
            let mut q_less = q.to_vec();
            q_less[k] -= 1;
            y[k] += h;
            let plus = self.fd_recurse(p, &q_less, x, y, h)?;
            y[k] -= 2.0 * h;
            let minus = self.fd_recurse(p, &q_less, x, y, h)?;
            y[k] += h;
            return Ok((plus - minus) / (2.0 * h));
        }
        self.exact_kernel(x, y)
    }
}

/// int_R w^n trig(w z) dmu(w) for one marginal, trig = cos (n even) or sin
/// (n odd). The integrand is even in w either way, so the value is twice the
/// integral over [0, U] plus the checked extension over [U, 2U].
fn coordinate_integral(marg: &Marginal, n: u32, z: f64) -> Result<f64> {
    let scale = marg.abs_moment(n).max(f64::MIN_POSITIVE);
    let tol = QUAD_REL * scale;
    let cut = marg.tail_cutoff(n, TAIL_REL * scale);
    let even = n.is_multiple_of(2);
    let f = |w: f64| {
        let trig = if even { (w * z).cos() } else { (w * z).sin() };
        w.powi(n as i32) * trig * marg.density(w)
    };
    let main = quadrature::integrate(f, 0.0, cut, 0.5 * tol)?;
    let ext = quadrature::integrate(f, cut, 2.0 * cut, 0.5 * tol)?;
    if ext.abs() > tol {
        // The analytic tail bound promised less mass than the extension
        // found; the cutoff reasoning does not hold numerically.
        return Err(Error::NumericFailure(format!(
            "tail extension of the {marg} order-{n} integral is {ext:e}, \
             exceeding the tolerance {tol:e}"
        )));
    }
    Ok(2.0 * (main + ext))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got}, want {want} (diff {})",
            (got - want).abs()
        );
    }

    fn gauss_oracle(sigma: f64, d: usize) -> KernelOracle {
        KernelOracle::new(SpectralMeasure::gaussian(sigma, d).unwrap())
    }

    fn gg_oracle(ell: u32, d: usize) -> KernelOracle {
        KernelOracle::new(SpectralMeasure::generalized_gaussian(ell, d).unwrap())
    }

    #[test]
    fn gaussian_kernel_values() {
        let o = gauss_oracle(1.0, 1);
        assert_eq!(o.resolved_method(), Method::ClosedForm);
        assert_close(o.exact_kernel(&[1.0], &[0.0]).unwrap(), 0.606_530_659_712_633_42, 1e-14);
        assert_close(o.exact_kernel(&[0.3], &[0.3]).unwrap(), 1.0, 1e-15);
        // d = 2 factorizes.
        let o2 = gauss_oracle(1.0, 2);
        let v = o2.exact_kernel(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_close(v, (0.606_530_659_712_633_42f64).powi(2), 1e-14);
    }

    #[test]
    fn gaussian_derivative_values() {
        let o = gauss_oracle(1.0, 1);
        let p1 = MultiIndex::new(vec![1]);
        let p2 = MultiIndex::new(vec![2]);
        let zero = MultiIndex::zeros(1);
        // At z = 0: d^{1,1} k = E w^2 = 1, d^{2,0} k = -E w^2 = -1.
        assert_close(o.exact_derivative(&p1, &p1, &[0.4], &[0.4]).unwrap(), 1.0, 1e-14);
        assert_close(o.exact_derivative(&p2, &zero, &[0.4], &[0.4]).unwrap(), -1.0, 1e-14);
        assert_close(
            o.exact_derivative_at(&p1, &p1, &[0.7]).unwrap(),
            0.399_179_314_503_352_77,
            1e-14,
        );
        assert_close(
            o.exact_derivative_at(&p2, &p1, &[0.7]).unwrap(),
            -1.375_211_873_690_962_4,
            1e-14,
        );
        assert_close(
            o.exact_derivative_at(&p2, &p2, &[1.3]).unwrap(),
            -1.840_180_766_838_985_4,
            1e-13,
        );
        assert_close(
            o.exact_derivative_at(&p1, &zero, &[0.7]).unwrap(),
            -0.547_893_176_769_307_72,
            1e-14,
        );
        assert_close(
            o.exact_derivative_at(&zero, &MultiIndex::new(vec![4]), &[-1.1]).unwrap(),
            -1.526_769_489_441_963_5,
            1e-13,
        );
    }

    #[test]
    fn gaussian_derivative_multidimensional() {
        let o = KernelOracle::new(SpectralMeasure::gaussian(0.8, 2).unwrap());
        let v = o
            .exact_derivative_at(
                &MultiIndex::new(vec![1, 0]),
                &MultiIndex::new(vec![1, 2]),
                &[0.4, -0.9],
            )
            .unwrap();
        assert_close(v, -0.129_814_816_250_528_47, 1e-14);
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let measure = SpectralMeasure::gaussian(1.0, 1).unwrap();
        let closed = KernelOracle::new(measure.clone());
        let quad = KernelOracle::with_method(measure, Method::Quadrature);
        let pairs = [
            (MultiIndex::zeros(1), MultiIndex::zeros(1)),
            (MultiIndex::new(vec![1]), MultiIndex::zeros(1)),
            (MultiIndex::new(vec![1]), MultiIndex::new(vec![1])),
            (MultiIndex::new(vec![2]), MultiIndex::new(vec![1])),
            (MultiIndex::new(vec![2]), MultiIndex::new(vec![2])),
        ];
        for (p, q) in &pairs {
            for &z in &[-2.3, -0.7, 0.0, 0.5, 1.9] {
                let a = closed.exact_derivative_at(p, q, &[z]).unwrap();
                let b = quad.exact_derivative_at(p, q, &[z]).unwrap();
                assert_close(b, a, 1e-10);
            }
        }
    }

    #[test]
    fn generalized_gaussian_kernel_values() {
        // ell = 1 is the Gaussian with sigma = 1/sqrt(2): k(z) = exp(-z^2/4).
        let o1 = gg_oracle(1, 1);
        assert_eq!(o1.resolved_method(), Method::Quadrature);
        assert_close(o1.exact_kernel(&[1.0], &[0.0]).unwrap(), 0.778_800_783_071_404_87, 1e-10);

        let o2 = gg_oracle(2, 1);
        assert_close(o2.exact_kernel(&[1.0], &[0.0]).unwrap(), 0.841_077_664_352_631_93, 1e-10);
        assert_close(o2.exact_kernel(&[0.3], &[0.0]).unwrap(), 0.984_874_608_445_787_03, 1e-10);
        assert_close(
            gg_oracle(3, 1).exact_kernel(&[1.0], &[0.0]).unwrap(),
            0.849_009_486_977_333_45,
            1e-10,
        );
    }

    #[test]
    fn generalized_gaussian_derivative_values() {
        let o = gg_oracle(2, 1);
        let one = MultiIndex::new(vec![1]);
        let two = MultiIndex::new(vec![2]);
        assert_close(
            o.exact_derivative_at(&one, &one, &[0.5]).unwrap(),
            0.307_392_516_138_618_45,
            1e-10,
        );
        assert_close(
            o.exact_derivative_at(&one, &one, &[0.0]).unwrap(),
            0.337_989_120_033_642_36,
            1e-10,
        );
        assert_close(
            o.exact_derivative_at(&two, &one, &[0.7]).unwrap(),
            -0.160_939_227_698_796_14,
            1e-10,
        );
    }

    #[test]
    fn derivative_symmetry_under_swapping_p_and_q() {
        // Kernel symmetry: swapping p with q while swapping x with y leaves
        // the derivative unchanged.
        let o = gg_oracle(2, 1);
        let p = MultiIndex::new(vec![2]);
        let q = MultiIndex::new(vec![1]);
        let a = o.exact_derivative(&p, &q, &[0.9], &[0.2]).unwrap();
        let b = o.exact_derivative(&q, &p, &[0.2], &[0.9]).unwrap();
        assert_close(a, b, 1e-12);
        // Swapping only p and q at the same points flips the sign once per
        // derivative moved across the two slots (odd total order here).
        let c = o.exact_derivative(&q, &p, &[0.9], &[0.2]).unwrap();
        assert_close(a, -c, 1e-12);
    }

    #[test]
    fn finite_difference_matches_analytic() {
        let o = gauss_oracle(1.0, 1);
        let one = MultiIndex::new(vec![1]);
        let exact = o.exact_derivative_at(&one, &one, &[0.7]).unwrap();
        let fd = o
            .finite_difference_derivative(&one, &one, &[0.7], &[0.0], Some(1e-4))
            .unwrap();
        assert_close(fd, exact, 1e-6);
        // Default step behaves the same at this scale.
        let fd = o
            .finite_difference_derivative(&one, &one, &[0.7], &[0.0], None)
            .unwrap();
        assert_close(fd, exact, 1e-6);
    }

    #[test]
    fn finite_difference_step_scaling() {
        // Central differences are O(h^2): shrinking h by 10 should cut the
        // error by about 100 while rounding noise stays far below it.
        let o = gauss_oracle(1.0, 1);
        let p = MultiIndex::new(vec![2]);
        let q = MultiIndex::zeros(1);
        let exact = o.exact_derivative_at(&p, &q, &[0.6]).unwrap();
        let coarse = (o
            .finite_difference_derivative(&p, &q, &[0.6], &[0.0], Some(1e-2))
            .unwrap()
            - exact)
            .abs();
        let fine = (o
            .finite_difference_derivative(&p, &q, &[0.6], &[0.0], Some(1e-3))
            .unwrap()
            - exact)
            .abs();
        assert!(fine < coarse / 30.0, "coarse {coarse:e}, fine {fine:e}");
    }

    #[test]
    fn finite_difference_order_cap() {
        let o = gauss_oracle(1.0, 1);
        let p = MultiIndex::new(vec![3]);
        let q = MultiIndex::new(vec![2]);
        assert!(matches!(
            o.finite_difference_derivative(&p, &q, &[0.1], &[0.0], None),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn closed_form_rejects_non_gaussian() {
        let m = SpectralMeasure::generalized_gaussian(2, 1).unwrap();
        let o = KernelOracle::with_method(m, Method::ClosedForm);
        assert!(o.exact_kernel(&[0.5], &[0.0]).is_err());
    }

    #[test]
    fn mixed_measure_factorizes() {
        // gaussian x gengauss: the kernel is the product of the 1-d kernels.
        let m = SpectralMeasure::new(vec![
            Marginal::Gaussian { sigma: 1.0 },
            Marginal::GeneralizedGaussian { ell: 2 },
        ])
        .unwrap();
        let o = KernelOracle::new(m);
        let v = o.exact_kernel(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        let want = 0.606_530_659_712_633_42 * 0.841_077_664_352_631_93;
        assert_close(v, want, 1e-9);
    }
}
