//! Large-regularization limit machinery: the linear pairwise map, the cone
//! of squared Euclidean distance matrices, eigencosts built from principal
//! components, and classical multidimensional scaling.

use nalgebra::{Complex, DMatrix, DVector};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::simplex::Dataset;

/// Maps a correlation kernel to squared distances:
/// `Delta(K) = -(K + K^T) + diag(K) 1^T + 1 diag(K)^T`.
/// The output is symmetric with zero diagonal, and
/// `Delta(u u^T)_ij = (u_i - u_j)^2` for real `u`.
pub fn delta_operator(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if k.nrows() != k.ncols() {
        return Err(Error::DimensionMismatch {
            context: "delta_operator",
            left: k.nrows(),
            right: k.ncols(),
        });
    }
    let n = k.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = -(k[(i, j)] + k[(j, i)]) + k[(i, i)] + k[(j, j)];
        }
    }
    Ok(out)
}

/// Large-regularization limit of the pairwise distance map:
/// entry `(i, j)` is `<-C (a_i - a_j), a_i - a_j> / 2`.
///
/// Linear in the cost, so the image may leave the non-negative cone when the
/// input is not conditionally negative; the result is built unchecked.
pub fn phi_infty(a: &Dataset, c: &CostMatrix) -> Result<CostMatrix> {
    if c.n() != a.dim() {
        return Err(Error::DimensionMismatch {
            context: "phi_infty",
            left: c.n(),
            right: a.dim(),
        });
    }
    let m = a.len();
    let amat = a.to_matrix();
    let gram = amat.transpose() * c.to_dense() * &amat;
    let mut upper = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            upper.push(gram[(i, j)] - 0.5 * (gram[(i, i)] + gram[(j, j)]));
        }
    }
    CostMatrix::from_upper_signed(m, upper)
}

/// Relative eigenvalue threshold for cone decisions.
const CONE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum ConeMembership {
    /// Squared Euclidean distance matrix with embedding dimension `dim`.
    InCone { dim: usize },
    /// A direction `z` orthogonal to the all-ones vector with
    /// `<C z, z> > 0`, certifying the matrix embeds in no Euclidean space.
    NotInCone {
        witness: DVector<f64>,
        quadratic_form: f64,
    },
}

impl ConeMembership {
    pub fn is_in_cone(&self) -> bool {
        matches!(self, ConeMembership::InCone { .. })
    }
}

/// Decides membership in the cone of squared Euclidean distance matrices by
/// the spectrum of the double-centered matrix `-J C J / 2`.
pub fn cone_membership(c: &CostMatrix) -> ConeMembership {
    let n = c.n();
    let scale = c.linf_norm();
    if scale == 0.0 {
        return ConeMembership::InCone { dim: 0 };
    }
    let b = double_center(&c.to_dense());
    let eigen = b.symmetric_eigen();
    let threshold = CONE_TOLERANCE * scale;

    let mut min_value = f64::INFINITY;
    let mut min_index = 0;
    let mut dim = 0;
    for (idx, &value) in eigen.eigenvalues.iter().enumerate() {
        if value > threshold {
            dim += 1;
        }
        if value < min_value {
            min_value = value;
            min_index = idx;
        }
    }
    if min_value >= -threshold {
        return ConeMembership::InCone { dim };
    }
    // Negative eigenvalue of -JCJ/2 along z means <Cz, z> > 0 with z
    // centered; project to be safe against round-off.
    let mut z = eigen.eigenvectors.column(min_index).clone_owned();
    let mean = z.sum() / n as f64;
    z.iter_mut().for_each(|v| *v -= mean);
    let cz = c.to_dense() * &z;
    let quadratic_form = z.dot(&cz);
    ConeMembership::NotInCone {
        witness: z,
        quadratic_form,
    }
}

/// `-J M J / 2` with `J` the centering projector.
fn double_center(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).sum() / n as f64).collect();
    let col_means: Vec<f64> = (0..n).map(|j| m.column(j).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (m[(i, j)] - row_means[i] - col_means[j] + grand)
    })
}

/// An eigenpair of the centered dataset together with the squared-distance
/// cost it induces.
///
/// `lambda` is the dataset eigenvalue. The induced cost `(|u_i - u_j|^2)` is
/// an eigenvector of the pairwise limit map with eigenvalue `|lambda|^2`
/// under the halved convention of [`phi_infty`], equivalently `2 |lambda|^2`
/// under the kernel-difference operator `-Delta(A^T C A)`.
#[derive(Debug, Clone)]
pub struct PcaEigenpair {
    pub vector: DVector<Complex<f64>>,
    pub lambda: Complex<f64>,
    pub induced_cost: CostMatrix,
    /// `||A~^T u - lambda u||_inf`, relative to the eigenvalue scale.
    pub dataset_residual: f64,
    /// `||phi_infty(C_u) - |lambda|^2 C_u||_inf`.
    pub phi_residual: f64,
}

impl PcaEigenpair {
    /// Eigenvalue of the induced cost under [`phi_infty`].
    pub fn phi_eigenvalue(&self) -> f64 {
        self.lambda.norm_sqr()
    }

    /// True when the merged pair came from a genuinely complex eigenvalue,
    /// giving a two-dimensional embedding.
    pub fn is_complex(&self) -> bool {
        self.lambda.im != 0.0
    }
}

/// Builds eigencosts from the top `k` eigenpairs (by modulus) of the
/// transposed centered dataset. Complex-conjugate pairs merge into a single
/// two-dimensional cost. Requires a square dataset.
pub fn pca_eigencosts(a: &Dataset, k: usize) -> Result<Vec<PcaEigenpair>> {
    let n = a.dim();
    let m = a.len();
    if n != m {
        return Err(Error::DimensionMismatch {
            context: "pca_eigencosts requires a square dataset",
            left: n,
            right: m,
        });
    }
    if k > n {
        return Err(Error::InvalidConfig(format!(
            "requested {k} eigenpairs from a dataset of size {n}"
        )));
    }
    let amat = a.to_matrix();
    let mean = amat.column_mean();
    let mut centered = amat.clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let target = centered.transpose();

    let mut eigenvalues = bounded_complex_eigenvalues(&target)?;
    eigenvalues.sort_by(|x, y| {
        y.norm()
            .partial_cmp(&x.norm())
            .unwrap()
            .then(y.im.partial_cmp(&x.im).unwrap())
            .then(y.re.partial_cmp(&x.re).unwrap())
    });

    let scale = target.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let imag_threshold = 1e-9 * scale;
    let mut consumed = vec![false; eigenvalues.len()];
    let mut out = Vec::with_capacity(k);
    for idx in 0..eigenvalues.len() {
        if out.len() == k {
            break;
        }
        if consumed[idx] {
            continue;
        }
        consumed[idx] = true;
        let mut lambda = eigenvalues[idx];
        if lambda.im.abs() <= imag_threshold {
            lambda.im = 0.0;
        } else {
            // Mark the conjugate partner as used and keep one representative.
            let partner = eigenvalues.iter().enumerate().position(|(j, v)| {
                !consumed[j] && (v - lambda.conj()).norm() <= 1e-7 * (1.0 + lambda.norm())
            });
            if let Some(j) = partner {
                consumed[j] = true;
            }
            if lambda.im < 0.0 {
                lambda = lambda.conj();
            }
        }
        out.push(build_eigenpair(a, &target, lambda, scale)?);
    }
    Ok(out)
}

/// Complex spectrum through a Schur decomposition with a hard iteration cap;
/// the unbounded variant can spin forever on rank-deficient inputs.
fn bounded_complex_eigenvalues(target: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = target.nrows();
    let scale = target.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return Ok(vec![Complex::new(0.0, 0.0); n]);
    }
    let schur = nalgebra::linalg::Schur::try_new(target.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| {
            Error::EigenFailure("schur iteration failed to converge".into())
        })?;
    Ok(schur.complex_eigenvalues().iter().cloned().collect())
}

fn build_eigenpair(
    a: &Dataset,
    target: &DMatrix<f64>,
    lambda: Complex<f64>,
    scale: f64,
) -> Result<PcaEigenpair> {
    let n = target.nrows();
    let vector = inverse_iteration(target, lambda, scale)?;
    let dataset_residual = {
        let complex_target = target.map(|v| Complex::new(v, 0.0));
        let image = &complex_target * &vector;
        let mut worst = 0.0_f64;
        for i in 0..n {
            worst = worst.max((image[i] - lambda * vector[i]).norm());
        }
        worst / (scale + lambda.norm())
    };
    if dataset_residual > 1e-8 {
        return Err(Error::EigenFailure(format!(
            "inverse iteration residual {dataset_residual:.3e} for eigenvalue {lambda}"
        )));
    }
    let m = a.len();
    let mut upper = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            upper.push((vector[i] - vector[j]).norm_sqr());
        }
    }
    let induced_cost = CostMatrix::from_upper(m, upper)?;
    let image = phi_infty(a, &induced_cost)?;
    let expected = induced_cost.scaled(lambda.norm_sqr());
    let phi_residual = image.linf_distance(&expected).expect("same size");
    // The absolute floor covers zero modes whose induced cost vanishes.
    let cost_scale = induced_cost.linf_norm();
    let threshold = (1e-8 * cost_scale * (1.0 + lambda.norm_sqr())).max(1e-14);
    if phi_residual > threshold {
        return Err(Error::EigenFailure(format!(
            "induced cost fails the eigen relation: residual {phi_residual:.3e}"
        )));
    }
    Ok(PcaEigenpair {
        vector,
        lambda,
        induced_cost,
        dataset_residual,
        phi_residual,
    })
}

/// Shifted inverse iteration for the eigenvector of a (possibly defective)
/// real matrix at a known complex eigenvalue.
fn inverse_iteration(
    target: &DMatrix<f64>,
    lambda: Complex<f64>,
    scale: f64,
) -> Result<DVector<Complex<f64>>> {
    let n = target.nrows();
    // Slightly off-axis shift keeps the factorization nonsingular even when
    // lambda is computed to machine precision; the +1 floor covers the
    // all-zero matrix, where any direction is an eigenvector.
    let shift_scale = 1e-11 * (scale + lambda.norm() + 1.0);
    let shift = lambda + Complex::new(shift_scale, 3.0 * shift_scale);
    let mut shifted = target.map(|v| Complex::new(v, 0.0));
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let lu = shifted.lu();
    // Deterministic, dense starting vector with no special alignment.
    let mut z = DVector::from_fn(n, |i, _| {
        Complex::new((0.37 + 0.61 * i as f64).sin(), (1.13 + 0.29 * i as f64).cos())
    });
    normalize(&mut z);
    let complex_target = target.map(|v| Complex::new(v, 0.0));
    for _ in 0..12 {
        let Some(next) = lu.solve(&z) else {
            return Err(Error::EigenFailure(
                "singular shifted system in inverse iteration".into(),
            ));
        };
        z = next;
        normalize(&mut z);
        let image = &complex_target * &z;
        let mut residual = 0.0_f64;
        for i in 0..n {
            residual = residual.max((image[i] - lambda * z[i]).norm());
        }
        if residual <= 1e-13 * (scale + lambda.norm()) {
            break;
        }
    }
    // Scale the first dominant component to exactly one. Using "first at
    // least half the max" rather than the argmax keeps the choice stable
    // when two components tie in modulus up to round-off.
    let best = z.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    if best == 0.0 {
        return Err(Error::EigenFailure("inverse iteration produced zero".into()));
    }
    let p = (0..n)
        .find(|&i| z[i].norm() >= 0.5 * best)
        .expect("a dominant component exists");
    let pivot = z[p];
    for v in z.iter_mut() {
        *v /= pivot;
    }
    Ok(z)
}

fn normalize(z: &mut DVector<Complex<f64>>) {
    let norm = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in z.iter_mut() {
            *v /= norm;
        }
    }
}

#[derive(Debug, Clone)]
pub struct MdsEmbedding {
    /// One row of coordinates per object (n x dims).
    pub coordinates: DMatrix<f64>,
    /// The eigenvalues backing each coordinate axis.
    pub eigenvalues: Vec<f64>,
    /// True when no positive eigenvalue existed: the input carries no
    /// Euclidean structure and the coordinates are all zero.
    pub degenerate: bool,
}

/// Classical multidimensional scaling of a squared-distance matrix.
pub fn classical_mds(d: &CostMatrix, dims: usize) -> Result<MdsEmbedding> {
    if !(1..=3).contains(&dims) {
        return Err(Error::InvalidConfig(format!(
            "mds supports 1 to 3 dimensions, got {dims}"
        )));
    }
    let n = d.n();
    let b = double_center(&d.to_dense());
    let eigen = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| {
        eigen.eigenvalues[y]
            .partial_cmp(&eigen.eigenvalues[x])
            .unwrap()
    });

    let mut coordinates = DMatrix::zeros(n, dims);
    let mut eigenvalues = Vec::with_capacity(dims);
    let mut degenerate = true;
    // Eigenvalues at round-off scale relative to the leading one are noise
    // from exactly rank-deficient configurations; their axes stay zero.
    let leading = order
        .first()
        .map(|&idx| eigen.eigenvalues[idx].max(0.0))
        .unwrap_or(0.0);
    let positive_threshold = leading * 1e-12;
    for (axis, &idx) in order.iter().take(dims).enumerate() {
        let value = eigen.eigenvalues[idx];
        eigenvalues.push(value);
        if value <= positive_threshold {
            continue;
        }
        degenerate = false;
        let mut column = eigen.eigenvectors.column(idx).clone_owned();
        // Deterministic sign: largest-magnitude component positive.
        let mut p = 0;
        let mut best = 0.0;
        for (i, v) in column.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                p = i;
            }
        }
        if column[p] < 0.0 {
            column.neg_mut();
        }
        let factor = value.sqrt();
        for i in 0..n {
            coordinates[(i, axis)] = factor * column[i];
        }
    }
    Ok(MdsEmbedding {
        coordinates,
        eigenvalues,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::Histogram;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_histogram(n: usize, rng: &mut ChaCha8Rng) -> Histogram {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        Histogram::normalized(&raw).unwrap()
    }

    fn random_dataset(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Dataset {
        Dataset::new((0..m).map(|_| random_histogram(n, rng)).collect(), None).unwrap()
    }

    #[test]
    fn delta_of_zero_is_zero() {
        let k = DMatrix::zeros(3, 3);
        assert_eq!(delta_operator(&k).unwrap(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn delta_of_rank_one_gives_squared_differences() {
        let u = DVector::from_vec(vec![1.0, 0.0]);
        let k = &u * u.transpose();
        let d = delta_operator(&k).unwrap();
        assert_eq!(d[(0, 0)], 0.0);
        assert_eq!(d[(1, 1)], 0.0);
        assert_eq!(d[(0, 1)], 1.0);
        assert_eq!(d[(1, 0)], 1.0);
    }

    #[test]
    fn delta_ignores_asymmetry_and_centering() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let n = 4;
        let k = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let d = delta_operator(&k).unwrap();
        for i in 0..n {
            assert_eq!(d[(i, i)], 0.0);
            for j in 0..n {
                assert!((d[(i, j)] - d[(j, i)]).abs() <= 1e-15);
            }
        }
        let sym = (&k + k.transpose()) * 0.5;
        let d_sym = delta_operator(&sym).unwrap();
        assert!((&d - &d_sym).abs().max() <= 1e-12);

        // Row/column centering leaves the image unchanged.
        let ones = DMatrix::from_element(n, n, 1.0 / n as f64);
        let j = DMatrix::identity(n, n) - ones;
        let centered = &j * &k * &j;
        let d_centered = delta_operator(&centered).unwrap();
        assert!((&d - &d_centered).abs().max() <= 1e-12);
    }

    #[test]
    fn phi_infty_trivial_cases() {
        let h = Histogram::new(vec![0.3, 0.7]).unwrap();
        let same = Dataset::new(vec![h.clone(), h], None).unwrap();
        let c = CostMatrix::from_upper(2, vec![1.0]).unwrap();
        assert_eq!(phi_infty(&same, &c).unwrap().linf_norm(), 0.0);

        let diracs =
            Dataset::new(vec![Histogram::dirac(2, 0), Histogram::dirac(2, 1)], None).unwrap();
        let image = phi_infty(&diracs, &c).unwrap();
        assert!((image.get(0, 1) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn phi_infty_agrees_with_kernel_difference_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..20 {
            let n = rng.gen_range(2..6);
            let m = rng.gen_range(2..6);
            let a = random_dataset(n, m, &mut rng);
            let c = CostMatrix::from_fn(n, |_, _| rng.gen_range(0.0..2.0)).unwrap();
            let direct = phi_infty(&a, &c).unwrap();
            // Independent route: half the kernel-to-distance image of the
            // Gram matrix, with the opposite sign.
            let amat = a.to_matrix();
            let gram = amat.transpose() * c.to_dense() * &amat;
            let delta = delta_operator(&gram).unwrap();
            for i in 0..m {
                for j in 0..m {
                    let expected = -0.5 * delta[(i, j)];
                    assert!((direct.get(i, j) - expected).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn phi_infty_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let a = random_dataset(4, 5, &mut rng);
        let c1 = CostMatrix::from_fn(4, |_, _| rng.gen_range(0.0..2.0)).unwrap();
        let c2 = CostMatrix::from_fn(4, |_, _| rng.gen_range(0.0..2.0)).unwrap();
        let (alpha, beta) = (0.7, 1.9);
        let combo = c1.linear_combination(alpha, &c2, beta).unwrap();
        let lhs = phi_infty(&a, &combo).unwrap();
        let rhs = phi_infty(&a, &c1)
            .unwrap()
            .linear_combination(alpha, &phi_infty(&a, &c2).unwrap(), beta)
            .unwrap();
        assert!(lhs.linf_distance(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn phi_infty_preserves_the_cone() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..10 {
            let n = rng.gen_range(3..6);
            let m = rng.gen_range(3..6);
            // Squared distances of random points are exactly the cone members.
            let points: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let c = CostMatrix::from_fn(n, |i, j| {
                let dx = points[i].0 - points[j].0;
                let dy = points[i].1 - points[j].1;
                dx * dx + dy * dy
            })
            .unwrap();
            assert!(cone_membership(&c).is_in_cone());
            let a = random_dataset(n, m, &mut rng);
            let image = phi_infty(&a, &c).unwrap();
            assert!(
                cone_membership(&image).is_in_cone(),
                "cone member mapped outside the cone"
            );
        }
    }

    #[test]
    fn cone_membership_detects_dimension() {
        let two_points = CostMatrix::from_upper(2, vec![1.0]).unwrap();
        match cone_membership(&two_points) {
            ConeMembership::InCone { dim } => assert_eq!(dim, 1),
            other => panic!("expected in-cone, got {other:?}"),
        }

        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let points: Vec<(f64, f64)> = (0..4)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let planar = CostMatrix::from_fn(4, |i, j| {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            dx * dx + dy * dy
        })
        .unwrap();
        match cone_membership(&planar) {
            ConeMembership::InCone { dim } => assert_eq!(dim, 2),
            other => panic!("expected planar embedding, got {other:?}"),
        }
    }

    #[test]
    fn cone_membership_produces_a_witness() {
        // Triangle-inequality violation: distances 1, 1, 9 cannot embed.
        let c = CostMatrix::from_upper(3, vec![1.0, 1.0, 9.0]).unwrap();
        match cone_membership(&c) {
            ConeMembership::NotInCone {
                witness,
                quadratic_form,
            } => {
                assert!(quadratic_form > 0.0);
                assert!(witness.sum().abs() <= 1e-9);
                let cz = c.to_dense() * &witness;
                assert!((witness.dot(&cz) - quadratic_form).abs() <= 1e-12);
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn pca_hand_example() {
        let a = Dataset::new(vec![Histogram::dirac(2, 0), Histogram::dirac(2, 1)], None).unwrap();
        let pairs = pca_eigencosts(&a, 1).unwrap();
        assert_eq!(pairs.len(), 1);
        let pair = &pairs[0];
        assert!((pair.lambda.re - 1.0).abs() <= 1e-10);
        assert_eq!(pair.lambda.im, 0.0);
        // Eigenvector scaled to unit leading component is (1, -1).
        assert!((pair.vector[0].re - 1.0).abs() <= 1e-10);
        assert!((pair.vector[1].re + 1.0).abs() <= 1e-10);
        assert!((pair.induced_cost.get(0, 1) - 4.0).abs() <= 1e-9);
        // Under the kernel-difference operator the image doubles.
        let amat = a.to_matrix();
        let gram = amat.transpose() * pair.induced_cost.to_dense() * &amat;
        let doubled = -delta_operator(&gram).unwrap();
        assert!((doubled[(0, 1)] - 8.0).abs() <= 1e-9);
        assert!((doubled[(0, 1)] - 2.0 * pair.phi_eigenvalue() * 4.0).abs() <= 1e-9);
    }

    #[test]
    fn pca_identical_histograms_are_all_zero_modes() {
        let h = Histogram::uniform(3);
        let a = Dataset::new(vec![h.clone(), h.clone(), h], None).unwrap();
        let pairs = pca_eigencosts(&a, 2).unwrap();
        for pair in &pairs {
            assert_eq!(pair.lambda.norm(), 0.0);
            assert!(pair.phi_residual <= 1e-12);
        }
    }

    #[test]
    fn pca_random_datasets_satisfy_the_eigen_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        for _ in 0..10 {
            let n = rng.gen_range(3..7);
            let a = random_dataset(n, n, &mut rng);
            let pairs = pca_eigencosts(&a, 3.min(n)).unwrap();
            assert!(!pairs.is_empty());
            for pair in &pairs {
                let scale = pair.induced_cost.linf_norm();
                let threshold = (1e-8 * scale * (1.0 + pair.phi_eigenvalue())).max(1e-14);
                assert!(pair.phi_residual <= threshold);
                let membership = cone_membership(&pair.induced_cost);
                match membership {
                    ConeMembership::InCone { dim } => assert!(dim <= 2),
                    other => panic!("induced cost left the cone: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn mds_two_points() {
        let d = CostMatrix::from_upper(2, vec![4.0]).unwrap();
        let embedding = classical_mds(&d, 1).unwrap();
        assert!(!embedding.degenerate);
        let x0 = embedding.coordinates[(0, 0)];
        let x1 = embedding.coordinates[(1, 0)];
        assert!((x0.abs() - 1.0).abs() <= 1e-10);
        assert!((x1.abs() - 1.0).abs() <= 1e-10);
        assert!((x0 + x1).abs() <= 1e-10);
    }

    #[test]
    fn mds_collinear_points_have_flat_second_axis() {
        // Squared distances of points 0, 1, 2 on a line.
        let d = CostMatrix::from_fn(3, |i, j| {
            let diff = i as f64 - j as f64;
            diff * diff
        })
        .unwrap();
        let embedding = classical_mds(&d, 2).unwrap();
        for i in 0..3 {
            assert!(embedding.coordinates[(i, 1)].abs() <= 1e-8);
        }
    }

    #[test]
    fn mds_recovers_planar_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let points: Vec<(f64, f64)> = (0..4)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let d = CostMatrix::from_fn(4, |i, j| {
            let dx = points[i].0 - points[j].0;
            let dy = points[i].1 - points[j].1;
            dx * dx + dy * dy
        })
        .unwrap();
        let embedding = classical_mds(&d, 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let dx = embedding.coordinates[(i, 0)] - embedding.coordinates[(j, 0)];
                let dy = embedding.coordinates[(i, 1)] - embedding.coordinates[(j, 1)];
                assert!((dx * dx + dy * dy - d.get(i, j)).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn mds_degenerate_input_warns_with_zero_coordinates() {
        // Any nonzero non-negative cost centers to a matrix with positive
        // trace, so only the zero matrix hits the no-structure branch.
        let zero = CostMatrix::zeros(3);
        let embedding = classical_mds(&zero, 2).unwrap();
        assert!(embedding.degenerate);
        assert!(embedding.coordinates.iter().all(|&v| v == 0.0));

        let equal = CostMatrix::from_upper(3, vec![1.0, 1.0, 1.0]).unwrap();
        assert!(!classical_mds(&equal, 2).unwrap().degenerate);
        assert!(classical_mds(&equal, 0).is_err());
        assert!(classical_mds(&equal, 4).is_err());
    }
}

