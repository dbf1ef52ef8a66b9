//! Random Fourier feature maps for kernel derivatives.
//!
//! For a frequency sample omega_1..omega_m and a multi-index p, the map is
//!
//!   phi_p(x) = (1/sqrt(m)) ( omega_j^p [ c_{|p|}(omega_j.x) ;
//!                                        c_{3+|p|}(omega_j.x) ] )_{j=1..m}
//!
//! where c_n(u) = cos(pi n / 2 + u) and omega^p is the multi-index power.
//! The inner product <phi_p(x), phi_q(y)> telescopes, pair by pair, to
//! (1/m) sum_j omega_j^p (-omega_j)^q c_{|p+q|}(omega_j.(x - y)): an unbiased
//! Monte-Carlo estimate of the mixed derivative d^p_x d^q_y k(x, y) of the
//! kernel whose spectral measure the frequencies were drawn from. With p = 0
//! the map is the classical cos/sin random Fourier feature map.

use crate::error::{Error, Result};
use crate::spectral::{FrequencySample, MultiIndex};
use ndarray::{Array1, Array2, ArrayView2};
use std::io::Write;

/// The n-th derivative of cosine as a phase shift: c_n(u) = cos(pi n/2 + u).
///
/// Evaluated through the period-4 table cos, -sin, -cos, sin rather than by
/// adding pi n/2 to the argument, so large n costs nothing in accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseDerivative {
    n: u32,
}

impl PhaseDerivative {
    pub fn new(n: u32) -> Self {
        PhaseDerivative { n }
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.n % 4 {
            0 => u.cos(),
            1 => -u.sin(),
            2 => -u.cos(),
            _ => u.sin(),
        }
    }
}

/// Feature map phi_p for one frequency sample. Borrows the sample; the
/// per-frequency powers omega_j^p are precomputed at construction.
#[derive(Debug, Clone)]
pub struct FeatureMap<'a> {
    sample: &'a FrequencySample,
    p: MultiIndex,
    weights: Vec<f64>,
}

impl<'a> FeatureMap<'a> {
    pub fn new(sample: &'a FrequencySample, p: MultiIndex) -> Result<Self> {
        if p.len() != sample.d() {
            return Err(Error::DimensionMismatch {
                expected: sample.d(),
                got: p.len(),
            });
        }
        if sample.m() == 0 {
            return Err(Error::InvalidArgument(
                "feature map needs at least one frequency".into(),
            ));
        }
        let weights = multi_index_powers(sample, &p);
        Ok(FeatureMap { sample, p, weights })
    }

    pub fn sample(&self) -> &FrequencySample {
        self.sample
    }

    pub fn p(&self) -> &MultiIndex {
        &self.p
    }

    /// Output dimension 2m: each frequency contributes an adjacent
    /// (cos-branch, sin-branch) pair at positions (2j, 2j+1).
    pub fn output_dim(&self) -> usize {
        2 * self.sample.m()
    }

    /// Evaluates phi_p(x).
    pub fn phi(&self, x: &[f64]) -> Result<Array1<f64>> {
        let d = self.sample.d();
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        let m = self.sample.m();
        let freqs = self.sample.frequencies();
        let ca = PhaseDerivative::new(self.p.order());
        let cb = PhaseDerivative::new(3 + self.p.order());
        let inv_sqrt_m = 1.0 / (m as f64).sqrt();
        let mut out = Array1::zeros(2 * m);
        for j in 0..m {
            let mut u = 0.0;
            for k in 0..d {
                u += freqs[(j, k)] * x[k];
            }
            let w = self.weights[j] * inv_sqrt_m;
            out[2 * j] = w * ca.eval(u);
            out[2 * j + 1] = w * cb.eval(u);
        }
        Ok(out)
    }

    /// Stacks phi_p over the rows of `points` (one point per row) into an
    /// n x 2m matrix.
    pub fn feature_matrix(&self, points: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if points.ncols() != self.sample.d() {
            return Err(Error::DimensionMismatch {
                expected: self.sample.d(),
                got: points.ncols(),
            });
        }
        let mut out = Array2::zeros((points.nrows(), self.output_dim()));
        for (i, row) in points.rows().into_iter().enumerate() {
            let phi = self.phi(row.as_slice().expect("points matrix is row-major"))?;
            out.row_mut(i).assign(&phi);
        }
        Ok(out)
    }

    /// Writes the feature matrix as delimited text: a single `#`-prefixed
    /// header line carrying the reproduction metadata (schema version, m, d,
    /// p, seed, measure descriptor), then one comma-separated row per point.
    pub fn export_feature_matrix<W: Write>(
        &self,
        points: ArrayView2<'_, f64>,
        writer: &mut W,
    ) -> Result<()> {
        let matrix = self.feature_matrix(points)?;
        let header = serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "m": self.sample.m(),
            "d": self.sample.d(),
            "p": self.p,
            "seed": self.sample.seed(),
            "measure": self.sample.measure(),
        });
        writeln!(writer, "# {header}")?;
        for row in matrix.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    write!(writer, ",")?;
                }
                write!(writer, "{v}")?;
                first = false;
            }
            writeln!(writer)?;
        }
        Ok(())
    }
}

/// omega_j^p for every j, with 0^0 = 1.
fn multi_index_powers(sample: &FrequencySample, p: &MultiIndex) -> Vec<f64> {
    let freqs = sample.frequencies();
    (0..sample.m())
        .map(|j| {
            let mut w = 1.0;
            for k in 0..sample.d() {
                w *= freqs[(j, k)].powi(p[k] as i32);
            }
            w
        })
        .collect()
}

/// Monte-Carlo estimate of d^p_x d^q_y k(x, y) as the finite-dimensional
/// inner product <phi_p(x), phi_q(y)>.
pub fn approx_derivative(
    sample: &FrequencySample,
    p: &MultiIndex,
    q: &MultiIndex,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    let fx = FeatureMap::new(sample, p.clone())?.phi(x)?;
    let fy = FeatureMap::new(sample, q.clone())?.phi(y)?;
    Ok(fx.dot(&fy))
}

/// The same estimator in its collapsed single-phase form, as a function of
/// the difference z = x - y:
///
///   (1/m) sum_j omega_j^(p+q) (-1)^{|q|} c_{|p+q|}(omega_j.z)
///
/// Mathematically identical to [`approx_derivative`]; numerically they agree
/// to roundoff. This form is what the experiment harness sweeps over grids.
pub fn approx_derivative_at_difference(
    sample: &FrequencySample,
    p: &MultiIndex,
    q: &MultiIndex,
    z: &[f64],
) -> Result<f64> {
    let d = sample.d();
    if z.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: z.len() });
    }
    let total = p.add(q)?;
    if total.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: total.len() });
    }
    if sample.m() == 0 {
        return Err(Error::InvalidArgument(
            "estimator needs at least one frequency".into(),
        ));
    }
    let sign = if q.order() % 2 == 1 { -1.0 } else { 1.0 };
    let c = PhaseDerivative::new(total.order());
    let freqs = sample.frequencies();
    let weights = multi_index_powers(sample, &total);
    let mut acc = 0.0;
    for j in 0..sample.m() {
        let mut u = 0.0;
        for k in 0..d {
            u += freqs[(j, k)] * z[k];
        }
        acc += weights[j] * c.eval(u);
    }
    Ok(sign * acc / sample.m() as f64)
}

/// Gram matrix of estimates: entry (i, j) approximates
/// d^p_x d^q_y k(xs_i, ys_j). Computed as the product of the two feature
/// matrices, so a batch of n x n evaluations costs two feature sweeps and one
/// matrix multiply instead of n^2 scalar estimates.
pub fn approx_gram(
    sample: &FrequencySample,
    p: &MultiIndex,
    q: &MultiIndex,
    xs: ArrayView2<'_, f64>,
    ys: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    let fx = FeatureMap::new(sample, p.clone())?.feature_matrix(xs)?;
    let fy = FeatureMap::new(sample, q.clone())?.feature_matrix(ys)?;
    Ok(fx.dot(&fy.t()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralMeasure;
    use ndarray::array;

    fn sample_1d(m: usize, seed: u64) -> FrequencySample {
        SpectralMeasure::gaussian(1.0, 1).unwrap().sample(m, seed)
    }

    #[test]
    fn phase_derivative_table() {
        for &u in &[-1.3, 0.0, 0.4, 2.9] {
            assert_eq!(PhaseDerivative::new(0).eval(u), u.cos());
            assert_eq!(PhaseDerivative::new(1).eval(u), -u.sin());
            assert_eq!(PhaseDerivative::new(2).eval(u), -u.cos());
            assert_eq!(PhaseDerivative::new(3).eval(u), u.sin());
            // Period four in the order.
            for n in 0..8 {
                assert_eq!(
                    PhaseDerivative::new(n).eval(u),
                    PhaseDerivative::new(n + 4).eval(u)
                );
            }
        }
    }

    #[test]
    fn phi_at_origin_is_interleaved_cos_sin() {
        let s = sample_1d(5, 3);
        let map = FeatureMap::new(&s, MultiIndex::zeros(1)).unwrap();
        assert_eq!(map.output_dim(), 10);
        let v = map.phi(&[0.0]).unwrap();
        let inv = 1.0 / 5f64.sqrt();
        for j in 0..5 {
            assert_eq!(v[2 * j], inv);
            assert_eq!(v[2 * j + 1], 0.0);
        }
        // Classical RFF map has unit squared norm at every point.
        let v = map.phi(&[0.73]).unwrap();
        assert!((v.dot(&v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_frequency_first_order_map() {
        let s = sample_1d(1, 11);
        let w = s.frequencies()[(0, 0)];
        let map = FeatureMap::new(&s, MultiIndex::new(vec![1])).unwrap();
        let x = 0.37;
        let v = map.phi(&[x]).unwrap();
        // c_1 = -sin, c_4 = cos.
        assert!((v[0] - w * -(w * x).sin()).abs() < 1e-15);
        assert!((v[1] - w * (w * x).cos()).abs() < 1e-15);
    }

    #[test]
    fn inner_product_matches_phase_form() {
        let m = SpectralMeasure::gaussian(0.9, 2).unwrap();
        let s = m.sample(32, 5);
        let p = MultiIndex::new(vec![1, 0]);
        let q = MultiIndex::new(vec![0, 2]);
        let x = [0.3, -1.1];
        let y = [-0.4, 0.25];
        let z = [x[0] - y[0], x[1] - y[1]];
        let a = approx_derivative(&s, &p, &q, &x, &y).unwrap();
        let b = approx_derivative_at_difference(&s, &p, &q, &z).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn zeroth_order_estimate_at_coincident_points_is_one() {
        let s = sample_1d(100, 1);
        let z = MultiIndex::zeros(1);
        let v = approx_derivative(&s, &z, &z, &[0.6], &[0.6]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimator_mean_converges_for_second_mixed_derivative() {
        // At x = y, the (1,1) estimator is (1/m) sum omega_j^2 with mean 1.
        let s = sample_1d(1_000_000, 42);
        let one = MultiIndex::new(vec![1]);
        let v = approx_derivative_at_difference(&s, &one, &one, &[0.0]).unwrap();
        // Var((1/m) sum w^2) = 2/m for a standard normal.
        let se = (2.0f64 / 1e6).sqrt();
        assert!((v - 1.0).abs() < 3.0 * se, "estimate {v}");
    }

    #[test]
    fn gram_matches_scalar_estimates() {
        let m = SpectralMeasure::generalized_gaussian(2, 2).unwrap();
        let s = m.sample(16, 9);
        let p = MultiIndex::new(vec![1, 0]);
        let q = MultiIndex::new(vec![1, 1]);
        let xs = array![[0.1, 0.2], [-0.5, 0.9], [1.4, -0.3]];
        let ys = array![[0.0, 0.0], [0.6, -0.6]];
        let g = approx_gram(&s, &p, &q, xs.view(), ys.view()).unwrap();
        assert_eq!(g.shape(), &[3, 2]);
        for i in 0..3 {
            for j in 0..2 {
                let scalar = approx_derivative(
                    &s,
                    &p,
                    &q,
                    xs.row(i).as_slice().unwrap(),
                    ys.row(j).as_slice().unwrap(),
                )
                .unwrap();
                assert!((g[(i, j)] - scalar).abs() <= 1e-12 * scalar.abs().max(1.0));
            }
        }
    }

    #[test]
    fn export_has_header_and_rows() {
        let s = sample_1d(2, 7);
        let map = FeatureMap::new(&s, MultiIndex::zeros(1)).unwrap();
        let pts = array![[0.0], [0.5]];
        let mut buf = Vec::new();
        map.export_feature_matrix(pts.view(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("# {"));
        assert!(lines[0].contains("\"seed\":7"));
        assert!(lines[0].contains("\"schema_version\":1"));
        assert_eq!(lines[1].split(',').count(), 4);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let s = sample_1d(4, 2);
        assert!(FeatureMap::new(&s, MultiIndex::zeros(2)).is_err());
        let map = FeatureMap::new(&s, MultiIndex::zeros(1)).unwrap();
        assert!(map.phi(&[0.0, 0.0]).is_err());
        let z = MultiIndex::zeros(1);
        assert!(approx_derivative(&s, &z, &z, &[0.0], &[0.0, 1.0]).is_err());
        assert!(approx_derivative_at_difference(&s, &z, &z, &[0.0, 1.0]).is_err());
    }
}
