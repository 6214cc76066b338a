//! Entropically regularized optimal transport.
//!
//! The regularization strength is relative: the effective regularizer is
//! `epsilon * ||C||_inf`, so runs are invariant under rescaling of the cost.
//! Costs come from the dual potentials; the debiased divergence subtracts the
//! self-transport bias so that identical histograms sit at distance zero.

use nalgebra::DMatrix;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::simplex::Histogram;

/// Raw divergences below this trigger the clamp-with-warning path.
pub const NEGATIVE_DIVERGENCE_WARN: f64 = -1e-8;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SinkhornConfig {
    /// Relative regularization; the effective regularizer is `epsilon * ||C||_inf`.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// l1 budget for the marginal violation of the implied plan.
    pub marginal_tolerance: f64,
    /// Run the scaling in the log domain. Defaults to true below epsilon 0.05,
    /// where the kernel starts to underflow.
    pub log_domain: bool,
}

impl SinkhornConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_iterations: 10_000,
            marginal_tolerance: 1e-9,
            log_domain: epsilon < 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                value: self.epsilon,
            });
        }
        if !(self.marginal_tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "marginal_tolerance",
                value: self.marginal_tolerance,
            });
        }
        Ok(())
    }
}

/// Regularized transport cost between `a` and `b`.
pub fn sinkhorn_cost(
    c: &CostMatrix,
    a: &Histogram,
    b: &Histogram,
    cfg: &SinkhornConfig,
) -> Result<f64> {
    SinkhornKernel::new(c, cfg)?.cost(a, b)
}

/// Debiased divergence; negative round-off is clamped to zero.
pub fn sinkhorn_divergence(
    c: &CostMatrix,
    a: &Histogram,
    b: &Histogram,
    cfg: &SinkhornConfig,
) -> Result<f64> {
    let kernel = SinkhornKernel::new(c, cfg)?;
    let raw = kernel.divergence_raw(a, b)?;
    Ok(raw.max(0.0))
}

/// Shared per-cost state for a batch of pairwise solves: the Gibbs kernel
/// (or its log) is computed once and then read concurrently.
pub struct SinkhornKernel {
    n: usize,
    /// Effective regularizer `epsilon * ||C||_inf`; zero for the zero cost.
    eta: f64,
    cfg: SinkhornConfig,
    domain: Domain,
}

enum Domain {
    /// Gibbs kernel `exp(-C / eta)`, row-major.
    Standard(Vec<f64>),
    /// `-C / eta`, row-major.
    Log(Vec<f64>),
    /// The zero cost: every plan costs zero by convention.
    Degenerate,
}

impl SinkhornKernel {
    pub fn new(c: &CostMatrix, cfg: &SinkhornConfig) -> Result<Self> {
        cfg.validate()?;
        let n = c.n();
        let linf = c.linf_norm();
        if linf == 0.0 {
            return Ok(Self {
                n,
                eta: 0.0,
                cfg: cfg.clone(),
                domain: Domain::Degenerate,
            });
        }
        let eta = cfg.epsilon * linf;
        let mut data = c.to_row_major();
        let domain = if cfg.log_domain {
            for v in &mut data {
                *v = -*v / eta;
            }
            Domain::Log(data)
        } else {
            for v in &mut data {
                *v = (-*v / eta).exp();
            }
            Domain::Standard(data)
        };
        Ok(Self {
            n,
            eta,
            cfg: cfg.clone(),
            domain,
        })
    }

    pub fn cost(&self, a: &Histogram, b: &Histogram) -> Result<f64> {
        self.cost_traced(a, b, None)
    }

    pub(crate) fn cost_traced(
        &self,
        a: &Histogram,
        b: &Histogram,
        trace: Option<&mut Vec<f64>>,
    ) -> Result<f64> {
        if a.len() != self.n || b.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "sinkhorn marginals",
                left: self.n,
                right: a.len().max(b.len()),
            });
        }
        // The alternating update nearly stalls on symmetric problems (the
        // reflection mode decays arbitrarily slowly); self-transport terms
        // instead use the damped symmetric iteration with the same fixed
        // point and dual value.
        let symmetric = a.as_slice() == b.as_slice();
        match &self.domain {
            Domain::Degenerate => Ok(0.0),
            Domain::Standard(k) if symmetric => {
                self.solve_standard_symmetric(k, a.as_slice(), trace)
            }
            Domain::Standard(k) => self.solve_standard(k, a.as_slice(), b.as_slice(), trace),
            Domain::Log(m) if symmetric => self.solve_log_symmetric(m, a.as_slice(), trace),
            Domain::Log(m) => self.solve_log(m, a.as_slice(), b.as_slice(), trace),
        }
    }

    /// `W(a,b) - W(a,a)/2 - W(b,b)/2`, unclamped.
    pub(crate) fn divergence_raw(&self, a: &Histogram, b: &Histogram) -> Result<f64> {
        let cross = self.cost(a, b)?;
        let self_a = self.cost(a, a)?;
        let self_b = self.cost(b, b)?;
        Ok(cross - 0.5 * (self_a + self_b))
    }

    fn solve_standard(
        &self,
        kernel: &[f64],
        a: &[f64],
        b: &[f64],
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<f64> {
        let n = self.n;
        let tol = self.cfg.marginal_tolerance;
        let mut u = vec![1.0 / n as f64; n];
        let mut v = vec![1.0 / n as f64; n];
        let mut kv = vec![0.0; n];
        let mut ktu = vec![0.0; n];
        mat_vec(kernel, n, &v, &mut kv);

        let mut converged = false;
        let mut violation = f64::INFINITY;
        for _ in 0..self.cfg.max_iterations {
            for i in 0..n {
                u[i] = if a[i] == 0.0 { 0.0 } else { a[i] / kv[i] };
                if !u[i].is_finite() {
                    return Err(Error::ScalingOverflow);
                }
            }
            mat_vec_transposed(kernel, n, &u, &mut ktu);
            for j in 0..n {
                v[j] = if b[j] == 0.0 { 0.0 } else { b[j] / ktu[j] };
                if !v[j].is_finite() {
                    return Err(Error::ScalingOverflow);
                }
            }
            mat_vec(kernel, n, &v, &mut kv);
            violation = (0..n).map(|i| (u[i] * kv[i] - a[i]).abs()).sum();
            if let Some(t) = trace.as_deref_mut() {
                t.push(violation);
            }
            if violation <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ScalingCap {
                iterations: self.cfg.max_iterations,
                violation,
                tolerance: tol,
            });
        }

        let mut dual = 0.0;
        for i in 0..n {
            if a[i] > 0.0 {
                dual += a[i] * u[i].ln();
            }
        }
        for j in 0..n {
            if b[j] > 0.0 {
                dual += b[j] * v[j].ln();
            }
        }
        let mass: f64 = (0..n).map(|i| u[i] * kv[i]).sum();
        Ok(self.eta * (dual - mass))
    }

    fn solve_log(
        &self,
        m: &[f64],
        a: &[f64],
        b: &[f64],
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<f64> {
        let n = self.n;
        let tol = self.cfg.marginal_tolerance;
        let ln_a: Vec<f64> = a.iter().map(|&x| x.ln()).collect();
        let ln_b: Vec<f64> = b.iter().map(|&x| x.ln()).collect();
        // Scaled potentials phi = f / eta, psi = g / eta.
        let mut phi = vec![0.0; n];
        let mut psi = vec![0.0; n];
        let mut scratch = vec![0.0; n];

        let mut converged = false;
        let mut row_violation = f64::INFINITY;
        for sweep in 0..self.cfg.max_iterations {
            // phi update; the displaced row marginal comes for free.
            row_violation = 0.0;
            for i in 0..n {
                for (j, s) in scratch.iter_mut().enumerate() {
                    *s = psi[j] + m[i * n + j];
                }
                let lse = log_sum_exp(&scratch);
                let next = ln_a[i] - lse;
                if a[i] > 0.0 {
                    row_violation += (a[i] * (phi[i] - next).exp() - a[i]).abs();
                }
                phi[i] = next;
            }
            for j in 0..n {
                for (i, s) in scratch.iter_mut().enumerate() {
                    *s = phi[i] + m[i * n + j];
                }
                let lse = log_sum_exp(&scratch);
                psi[j] = ln_b[j] - lse;
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(row_violation);
            }
            // After the psi update columns are exact; the row violation is
            // measured one half-sweep behind, so require it twice.
            if sweep > 0 && row_violation <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ScalingCap {
                iterations: self.cfg.max_iterations,
                violation: row_violation,
                tolerance: tol,
            });
        }

        let mut dual = 0.0;
        for i in 0..n {
            if a[i] > 0.0 {
                dual += a[i] * phi[i];
            }
        }
        for j in 0..n {
            if b[j] > 0.0 {
                dual += b[j] * psi[j];
            }
        }
        let mut mass = 0.0;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if b[j] > 0.0 {
                    mass += (phi[i] + psi[j] + m[i * n + j]).exp();
                }
            }
        }
        Ok(self.eta * (dual - mass))
    }
}

impl SinkhornKernel {
    /// Self-transport in the plain domain: geometric-mean damped scaling
    /// `u <- sqrt(u * a / (K u))`.
    fn solve_standard_symmetric(
        &self,
        kernel: &[f64],
        a: &[f64],
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<f64> {
        let n = self.n;
        let tol = self.cfg.marginal_tolerance;
        let mut u = vec![1.0 / n as f64; n];
        let mut ku = vec![0.0; n];

        let mut converged = false;
        let mut violation = f64::INFINITY;
        for _ in 0..self.cfg.max_iterations {
            mat_vec(kernel, n, &u, &mut ku);
            violation = (0..n).map(|i| (u[i] * ku[i] - a[i]).abs()).sum();
            if let Some(t) = trace.as_deref_mut() {
                t.push(violation);
            }
            if violation <= tol {
                converged = true;
                break;
            }
            for i in 0..n {
                u[i] = if a[i] == 0.0 {
                    0.0
                } else {
                    (u[i] * a[i] / ku[i]).sqrt()
                };
                if !u[i].is_finite() {
                    return Err(Error::ScalingOverflow);
                }
            }
        }
        if !converged {
            return Err(Error::ScalingCap {
                iterations: self.cfg.max_iterations,
                violation,
                tolerance: tol,
            });
        }
        let mut dual = 0.0;
        for i in 0..n {
            if a[i] > 0.0 {
                dual += 2.0 * a[i] * u[i].ln();
            }
        }
        let mass: f64 = (0..n).map(|i| u[i] * ku[i]).sum();
        Ok(self.eta * (dual - mass))
    }

    /// Self-transport in the log domain: `w <- (w + target) / 2`.
    fn solve_log_symmetric(
        &self,
        m: &[f64],
        a: &[f64],
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<f64> {
        let n = self.n;
        let tol = self.cfg.marginal_tolerance;
        let ln_a: Vec<f64> = a.iter().map(|&x| x.ln()).collect();
        let mut w = vec![0.0; n];
        let mut target = vec![0.0; n];
        let mut scratch = vec![0.0; n];

        let mut converged = false;
        let mut violation = f64::INFINITY;
        for _ in 0..self.cfg.max_iterations {
            violation = 0.0;
            for i in 0..n {
                for (j, s) in scratch.iter_mut().enumerate() {
                    *s = w[j] + m[i * n + j];
                }
                target[i] = ln_a[i] - log_sum_exp(&scratch);
                if a[i] > 0.0 {
                    violation += (a[i] * (w[i] - target[i]).exp() - a[i]).abs();
                }
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(violation);
            }
            if violation <= tol {
                converged = true;
                break;
            }
            for i in 0..n {
                w[i] = if a[i] == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.5 * (w[i] + target[i])
                };
            }
        }
        if !converged {
            return Err(Error::ScalingCap {
                iterations: self.cfg.max_iterations,
                violation,
                tolerance: tol,
            });
        }
        let mut dual = 0.0;
        for i in 0..n {
            if a[i] > 0.0 {
                dual += 2.0 * a[i] * w[i];
            }
        }
        let mut mass = 0.0;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if a[j] > 0.0 {
                    mass += (w[i] + w[j] + m[i * n + j]).exp();
                }
            }
        }
        Ok(self.eta * (dual - mass))
    }
}

fn mat_vec(k: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let row = &k[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(kij, xj)| kij * xj).sum();
    }
}

fn mat_vec_transposed(k: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &k[i * n..(i + 1) * n];
        for (j, kij) in row.iter().enumerate() {
            out[j] += kij * xi;
        }
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Smallest eigenvalue of the Gibbs kernel `exp(-C / (||C||_inf * epsilon))`.
/// Diagnostic only; nothing enforces positivity.
pub fn kernel_min_eigenvalue(c: &CostMatrix, epsilon: f64) -> f64 {
    let linf = c.linf_norm();
    if linf == 0.0 {
        return 0.0;
    }
    let eta = epsilon * linf;
    let n = c.n();
    let dense = DMatrix::from_fn(n, n, |i, j| (-c.get(i, j) / eta).exp());
    dense
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
}

/// Diagonal rescaling of a non-negative matrix to uniform row and column
/// sums (total mass one): row sums `1/n_rows`, column sums `1/n_cols`.
pub fn bistochastic_scaling(u: &DMatrix<f64>, cfg: &SinkhornConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let (n_r, n_c) = u.shape();
    for i in 0..n_r {
        if u.row(i).iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroMarginal {
                which: "row",
                index: i,
            });
        }
    }
    for j in 0..n_c {
        if u.column(j).iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroMarginal {
                which: "column",
                index: j,
            });
        }
    }
    for (k, &x) in u.iter().enumerate() {
        if !(x >= 0.0) {
            return Err(Error::NegativeEntry { index: k, value: x });
        }
    }

    let row_target = 1.0 / n_r as f64;
    let col_target = 1.0 / n_c as f64;
    let mut s = u.clone();
    let mut violation = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        for i in 0..n_r {
            let sum = s.row(i).sum();
            let scale = row_target / sum;
            if !scale.is_finite() {
                return Err(Error::ScalingOverflow);
            }
            s.row_mut(i).iter_mut().for_each(|x| *x *= scale);
        }
        for j in 0..n_c {
            let sum = s.column(j).sum();
            let scale = col_target / sum;
            if !scale.is_finite() {
                return Err(Error::ScalingOverflow);
            }
            s.column_mut(j).iter_mut().for_each(|x| *x *= scale);
        }
        violation = (0..n_r).map(|i| (s.row(i).sum() - row_target).abs()).sum();
        if violation <= cfg.marginal_tolerance {
            return Ok(s);
        }
    }
    Err(Error::ScalingCap {
        iterations: cfg.max_iterations,
        violation,
        tolerance: cfg.marginal_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_exact;
    use nalgebra::dmatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_histogram(n: usize, rng: &mut ChaCha8Rng) -> Histogram {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        Histogram::normalized(&raw).unwrap()
    }

    fn random_cost(n: usize, rng: &mut ChaCha8Rng) -> CostMatrix {
        CostMatrix::from_fn(n, |_, _| rng.gen_range(0.1..2.0)).unwrap()
    }

    #[test]
    fn dirac_pair_close_to_exact() {
        let c = CostMatrix::from_upper(2, vec![1.0]).unwrap();
        let a = Histogram::dirac(2, 0);
        let b = Histogram::dirac(2, 1);
        let cfg = SinkhornConfig::new(0.01);
        let w = sinkhorn_cost(&c, &a, &b, &cfg).unwrap();
        // The only feasible plan costs exactly 1; the regularized value may
        // drift by an eps*log(eps)-order term.
        assert!((w - 1.0).abs() <= (0.01f64 * 0.01f64.ln()).abs());
    }

    #[test]
    fn smaller_epsilon_refines_toward_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let c = random_cost(5, &mut rng);
            let a = random_histogram(5, &mut rng);
            let b = random_histogram(5, &mut rng);
            let exact = solve_exact(&c, &a, &b).unwrap().value;
            let gap = |eps: f64| {
                let w = sinkhorn_cost(&c, &a, &b, &SinkhornConfig::new(eps)).unwrap();
                (w - exact).abs()
            };
            let coarse = gap(0.1);
            let fine = gap(0.001);
            assert!(fine < coarse, "fine {fine} coarse {coarse}");
        }
    }

    #[test]
    fn cost_is_one_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = random_cost(4, &mut rng);
        let a = random_histogram(4, &mut rng);
        let b = random_histogram(4, &mut rng);
        let cfg = SinkhornConfig::new(0.1);
        let base = sinkhorn_cost(&c, &a, &b, &cfg).unwrap();
        let scaled = sinkhorn_cost(&c.scaled(3.0), &a, &b, &cfg).unwrap();
        assert!((scaled - 3.0 * base).abs() <= 1e-12 * scaled.abs().max(1.0));
    }

    #[test]
    fn zero_cost_returns_zero() {
        let c = CostMatrix::zeros(3);
        let u = Histogram::uniform(3);
        let cfg = SinkhornConfig::new(0.5);
        assert_eq!(sinkhorn_cost(&c, &u, &u, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn divergence_vanishes_on_the_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c = random_cost(4, &mut rng);
        let a = random_histogram(4, &mut rng);
        for eps in [0.01, 0.5, 10.0] {
            let mut cfg = SinkhornConfig::new(eps);
            cfg.max_iterations = 300_000; // small epsilon converges slowly
            assert_eq!(sinkhorn_divergence(&c, &a, &a, &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn divergence_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..5 {
            let c = random_cost(4, &mut rng);
            let a = random_histogram(4, &mut rng);
            let b = random_histogram(4, &mut rng);
            let mut cfg = SinkhornConfig::new(0.05);
            cfg.max_iterations = 100_000;
            let ab = sinkhorn_divergence(&c, &a, &b, &cfg).unwrap();
            let ba = sinkhorn_divergence(&c, &b, &a, &cfg).unwrap();
            assert!((ab - ba).abs() <= 1e-9);
        }
    }

    #[test]
    fn divergence_approaches_exact_for_small_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..5 {
            let c = random_cost(5, &mut rng);
            let a = random_histogram(5, &mut rng);
            let b = random_histogram(5, &mut rng);
            let exact = solve_exact(&c, &a, &b).unwrap().value;
            let cfg = SinkhornConfig::new(0.001);
            let div = sinkhorn_divergence(&c, &a, &b, &cfg).unwrap();
            assert!((div - exact).abs() <= 0.05 * c.linf_norm());
        }
    }

    #[test]
    fn large_epsilon_matches_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let c = random_cost(3, &mut rng);
        let a = random_histogram(3, &mut rng);
        let b = random_histogram(3, &mut rng);
        let cfg = SinkhornConfig::new(100.0);
        let div = sinkhorn_divergence(&c, &a, &b, &cfg).unwrap();
        let d: Vec<f64> = a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| x - y)
            .collect();
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += -c.get(i, j) * d[i] * d[j];
            }
        }
        let mmd = 0.5 * quad;
        assert!(mmd > 0.0, "seeded instance must have positive limit");
        assert!((div - mmd).abs() <= 1e-3 * mmd.abs());
    }

    #[test]
    fn log_and_standard_domains_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for eps in [0.05, 0.3] {
            let c = random_cost(4, &mut rng);
            let a = random_histogram(4, &mut rng);
            let b = random_histogram(4, &mut rng);
            let mut std_cfg = SinkhornConfig::new(eps);
            std_cfg.log_domain = false;
            let mut log_cfg = SinkhornConfig::new(eps);
            log_cfg.log_domain = true;
            let ws = sinkhorn_cost(&c, &a, &b, &std_cfg).unwrap();
            let wl = sinkhorn_cost(&c, &a, &b, &log_cfg).unwrap();
            assert!((ws - wl).abs() <= 1e-8, "std {ws} log {wl}");
        }
    }

    #[test]
    fn marginal_violation_decreases_across_sweeps() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..5 {
            let c = random_cost(6, &mut rng);
            let a = random_histogram(6, &mut rng);
            let b = random_histogram(6, &mut rng);
            let mut cfg = SinkhornConfig::new(0.2);
            cfg.marginal_tolerance = 1e-13;
            cfg.max_iterations = 400;
            let kernel = SinkhornKernel::new(&c, &cfg).unwrap();
            let mut trace = Vec::new();
            // The cap error is fine; only the recorded sweeps matter.
            let _ = kernel.cost_traced(&a, &b, Some(&mut trace));
            assert!(trace.len() >= 20);
            for w in trace.windows(2).take(60) {
                assert!(w[1] <= w[0] + 1e-12, "violation rose: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn underflow_reports_overflow_error_without_log_domain() {
        let c = CostMatrix::from_upper(2, vec![1.0]).unwrap();
        let a = Histogram::new(vec![0.4, 0.6]).unwrap();
        let b = Histogram::new(vec![0.7, 0.3]).unwrap();
        let mut cfg = SinkhornConfig::new(1e-4);
        cfg.log_domain = false;
        let result = sinkhorn_cost(&c, &a, &b, &cfg);
        assert!(
            matches!(result, Err(Error::ScalingOverflow) | Err(Error::ScalingCap { .. })),
            "tiny epsilon without log domain must fail loudly: {result:?}"
        );
        cfg.log_domain = true;
        assert!(sinkhorn_cost(&c, &a, &b, &cfg).is_ok());
    }

    #[test]
    fn bistochastic_fixed_point_is_preserved() {
        let u = dmatrix![0.25, 0.25; 0.25, 0.25];
        let cfg = SinkhornConfig::new(1.0);
        let s = bistochastic_scaling(&u, &cfg).unwrap();
        for (got, want) in s.iter().zip(u.iter()) {
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn bistochastic_matches_direct_iteration_oracle() {
        let u = dmatrix![1.0, 1.0; 1.0, 3.0];
        let cfg = SinkhornConfig::new(1.0);
        let s = bistochastic_scaling(&u, &cfg).unwrap();

        // Independent oracle: fifty direct row/column normalization rounds.
        let mut o = u.clone();
        for _ in 0..50 {
            for i in 0..2 {
                let sum = o.row(i).sum();
                o.row_mut(i).iter_mut().for_each(|x| *x *= 0.5 / sum);
            }
            for j in 0..2 {
                let sum = o.column(j).sum();
                o.column_mut(j).iter_mut().for_each(|x| *x *= 0.5 / sum);
            }
        }
        for (got, want) in s.iter().zip(o.iter()) {
            assert!((got - want).abs() <= 1e-8);
        }
        for i in 0..2 {
            assert!((s.row(i).sum() - 0.5).abs() <= 1e-9);
        }
        for j in 0..2 {
            assert!((s.column(j).sum() - 0.5).abs() <= 1e-9);
        }
    }

    #[test]
    fn bistochastic_rejects_zero_lines() {
        let cfg = SinkhornConfig::new(1.0);
        let zero_row = dmatrix![0.0, 0.0; 1.0, 2.0];
        assert!(matches!(
            bistochastic_scaling(&zero_row, &cfg),
            Err(Error::ZeroMarginal { which: "row", index: 0 })
        ));
        let zero_col = dmatrix![0.0, 1.0; 0.0, 2.0];
        assert!(matches!(
            bistochastic_scaling(&zero_col, &cfg),
            Err(Error::ZeroMarginal { which: "column", index: 0 })
        ));
    }

    #[test]
    fn bistochastic_permutation_scales_to_uniform() {
        // A permutation pattern admits the uniform scaling but nothing
        // strictly positive; the scaling itself still converges.
        let perm = dmatrix![0.0, 1.0; 1.0, 0.0];
        let cfg = SinkhornConfig::new(1.0);
        let s = bistochastic_scaling(&perm, &cfg).unwrap();
        assert!((s[(0, 1)] - 0.5).abs() <= 1e-12);
        assert!((s[(1, 0)] - 0.5).abs() <= 1e-12);
        assert_eq!(s[(0, 0)], 0.0);
    }
}

