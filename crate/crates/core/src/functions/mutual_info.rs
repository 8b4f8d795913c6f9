use crate::submodular::SetFunction;
use crate::{ElementSet, Error, Result};

/// A dense symmetric positive-definite matrix, row-major, jitter already on
/// the diagonal.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    n: usize,
    data: Vec<f64>,
    jitter: f64,
}

impl KernelMatrix {
    /// Adds `jitter` to the diagonal and checks symmetry and definiteness.
    pub fn new(n: usize, mut data: Vec<f64>, jitter: f64) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::PreconditionViolated(format!(
                        "kernel not symmetric at ({i}, {j})"
                    )));
                }
            }
            data[i * n + i] += jitter;
        }
        let k = Self { n, data, jitter };
        let mut chol = Cholesky::new(&k);
        for i in 0..n {
            if !chol.push(i) {
                return Err(Error::FactorizationFailure(i));
            }
        }
        Ok(k)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// The same matrix with rows and columns permuted: `out[a][b] = self[perm[a]][perm[b]]`.
    pub fn permuted(&self, perm: &[usize]) -> KernelMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                data[a * n + b] = self.get(perm[a], perm[b]);
            }
        }
        KernelMatrix {
            n,
            data,
            jitter: self.jitter,
        }
    }
}

/// `k(x, y) = exp(-alpha |x - y|^2)` with diagonal jitter `1e-8 * mean diagonal`.
pub fn gaussian_kernel(points: &[Vec<f64>], alpha: f64) -> Result<KernelMatrix> {
    let n = points.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let d2: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = (-alpha * d2).exp();
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    let mean_diag = if n == 0 {
        0.0
    } else {
        (0..n).map(|i| data[i * n + i]).sum::<f64>() / n as f64
    };
    KernelMatrix::new(n, data, 1e-8 * mean_diag)
}

/// Class prior: `eta_j` in {0, 1} for labeled elements, 1/2 otherwise.
#[derive(Clone, Debug)]
pub struct LabelPrior {
    eta: Vec<f64>,
    clamp: f64,
}

impl LabelPrior {
    pub const DEFAULT_CLAMP: f64 = 1e-9;

    pub fn uniform(p: usize) -> Self {
        Self {
            eta: vec![0.5; p],
            clamp: Self::DEFAULT_CLAMP,
        }
    }

    /// `true` labels are positive (pulled into the minimizer).
    pub fn from_labels(p: usize, labels: &[(usize, bool)], clamp: f64) -> Result<Self> {
        if !(clamp > 0.0 && clamp < 0.5) {
            return Err(Error::PreconditionViolated(format!(
                "label clamp {clamp} not in (0, 1/2)"
            )));
        }
        let mut eta = vec![0.5; p];
        for &(j, positive) in labels {
            if j >= p {
                return Err(Error::InvalidCounts(format!("label index {j} >= {p}")));
            }
            eta[j] = if positive { 1.0 } else { 0.0 };
        }
        Ok(Self { eta, clamp })
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn clamp(&self) -> f64 {
        self.clamp
    }

    fn clamped(&self, j: usize) -> f64 {
        self.eta[j].clamp(self.clamp, 1.0 - self.clamp)
    }
}

/// Incremental Cholesky factor of principal submatrices of a kernel.
struct Cholesky<'a> {
    k: &'a KernelMatrix,
    members: Vec<usize>,
    /// Packed lower-triangular rows; row `a` starts at `a (a + 1) / 2`.
    l: Vec<f64>,
    logdet: f64,
    scratch: Vec<f64>,
}

impl<'a> Cholesky<'a> {
    fn new(k: &'a KernelMatrix) -> Self {
        Self {
            k,
            members: Vec::new(),
            l: Vec::new(),
            logdet: 0.0,
            scratch: Vec::new(),
        }
    }

    fn with_members(k: &'a KernelMatrix, members: impl IntoIterator<Item = usize>) -> Self {
        let mut c = Self::new(k);
        for e in members {
            c.push(e);
        }
        c
    }

    /// Extends the factor by element `e`; returns false if the new pivot is
    /// not positive (the pivot is then floored to keep the factor usable).
    fn push(&mut self, e: usize) -> bool {
        let m = self.members.len();
        let n = self.k.n;
        let krow = &self.k.data[e * n..(e + 1) * n];
        self.scratch.clear();
        let mut sq = 0.0;
        for a in 0..m {
            let start = a * (a + 1) / 2;
            let ra = &self.l[start..start + a];
            let dotp: f64 = ra.iter().zip(&self.scratch).map(|(x, y)| x * y).sum();
            let v = (krow[self.members[a]] - dotp) / self.l[start + a];
            sq += v * v;
            self.scratch.push(v);
        }
        let mut d = krow[e] - sq;
        let ok = d > 0.0;
        if !ok {
            d = f64::MIN_POSITIVE;
        }
        self.l.extend_from_slice(&self.scratch);
        self.l.push(d.sqrt());
        self.members.push(e);
        self.logdet += d.ln();
        ok
    }
}

/// `F(A) = I(f_A; f_{V\A}) - sum_{A} log eta_j - sum_{V\A} log(1 - eta_j)` for a
/// Gaussian process with covariance `K`, where
/// `I = 1/2 (log det K_AA + log det K_{V\A,V\A} - log det K)`.
#[derive(Clone, Debug)]
pub struct MutualInformation {
    kernel: KernelMatrix,
    /// `log(1 - eta_j) - log(eta_j)`, the modular prior term.
    prior: Vec<f64>,
    prior_const: f64,
    logdet_full: f64,
}

impl MutualInformation {
    pub fn new(kernel: KernelMatrix, prior: LabelPrior) -> Result<Self> {
        let n = kernel.size();
        if prior.eta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: prior.eta.len(),
            });
        }
        let terms: Vec<f64> = (0..n)
            .map(|j| {
                let eta = prior.clamped(j);
                (1.0 - eta).ln() - eta.ln()
            })
            .collect();
        let prior_const = -(0..n).map(|j| (1.0 - prior.clamped(j)).ln()).sum::<f64>();
        let logdet_full = Cholesky::with_members(&kernel, 0..n).logdet;
        Ok(Self {
            kernel,
            prior: terms,
            prior_const,
            logdet_full,
        })
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }
}

impl SetFunction for MutualInformation {
    fn ground_size(&self) -> usize {
        self.kernel.size()
    }

    fn value(&self, set: &ElementSet) -> f64 {
        let inside = Cholesky::with_members(&self.kernel, set.iter()).logdet;
        let outside = Cholesky::with_members(&self.kernel, set.complement().iter()).logdet;
        let prior: f64 = set.iter().map(|j| self.prior[j]).sum();
        0.5 * (inside + outside - self.logdet_full) + prior + self.prior_const
    }

    fn chain_values(&self, head: &[usize], order: &[usize]) -> Vec<f64> {
        let n = self.ground_size();
        let len = order.len();
        let mut in_chain = vec![false; n];
        for &j in head.iter().chain(order) {
            in_chain[j] = true;
        }

        let mut forward = Cholesky::with_members(&self.kernel, head.iter().copied());
        let mut fwd = Vec::with_capacity(len + 1);
        fwd.push(forward.logdet);
        for &j in order {
            forward.push(j);
            fwd.push(forward.logdet);
        }

        // complement of head ∪ order[..k] is excluded ∪ order[k..]
        let mut backward = Cholesky::with_members(&self.kernel, (0..n).filter(|&j| !in_chain[j]));
        let mut bwd = vec![0.0; len + 1];
        bwd[len] = backward.logdet;
        for k in (0..len).rev() {
            backward.push(order[k]);
            bwd[k] = backward.logdet;
        }

        let mut prior: f64 = head.iter().map(|&j| self.prior[j]).sum();
        let mut out = Vec::with_capacity(len + 1);
        for k in 0..=len {
            if k > 0 {
                prior += self.prior[order[k - 1]];
            }
            out.push(0.5 * (fwd[k] + bwd[k] - self.logdet_full) + prior + self.prior_const);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodular::{submodularity_violation, value_table, Oracle};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| vec![rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)])
            .collect()
    }

    #[test]
    fn identity_kernel_uniform_prior_is_zero() {
        let n = 4;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        let k = KernelMatrix::new(n, data, 0.0).unwrap();
        let f = Oracle::new(MutualInformation::new(k, LabelPrior::uniform(n)).unwrap());
        for v in value_table(&f).unwrap() {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn two_by_two_hand_value() {
        let k = KernelMatrix::new(2, vec![1.0, 0.5, 0.5, 1.0], 0.0).unwrap();
        let f = Oracle::new(MutualInformation::new(k, LabelPrior::uniform(2)).unwrap());
        let v = f.evaluate(&ElementSet::from_indices(2, [0]));
        assert!((v - (-0.5 * 0.75f64.ln())).abs() < 1e-14);
        assert!((v - 0.1438).abs() < 1e-4);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        assert!(matches!(
            KernelMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0], 0.0),
            Err(Error::FactorizationFailure(1))
        ));
        assert!(KernelMatrix::new(2, vec![1.0, 0.1, 0.2, 1.0], 0.0).is_err());
    }

    #[test]
    fn random_kernels_are_submodular() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for trial in 0..20 {
            let n = 2 + trial % 7;
            let pts = random_points(&mut rng, n);
            let k = gaussian_kernel(&pts, 1.5).unwrap();
            let f = Oracle::new(MutualInformation::new(k, LabelPrior::uniform(n)).unwrap());
            assert!(submodularity_violation(&f, 1e-9).unwrap().is_none());
        }
    }

    #[test]
    fn labels_penalize_misassignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = random_points(&mut rng, 5);
        let k = gaussian_kernel(&pts, 1.5).unwrap();
        let prior = LabelPrior::from_labels(5, &[(0, true), (1, false)], 1e-9).unwrap();
        let f = Oracle::new(MutualInformation::new(k, prior).unwrap());
        let with_neg = f.evaluate(&ElementSet::from_indices(5, [0, 1]));
        let without = f.evaluate(&ElementSet::from_indices(5, [0]));
        // pulling the negative label in costs about -log(1e-9)
        assert!((with_neg - without) > 15.0);
        assert!(submodularity_violation(&f, 1e-8).unwrap().is_none());
    }

    #[test]
    fn chain_matches_value_with_head() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pts = random_points(&mut rng, 9);
        let prior = LabelPrior::from_labels(9, &[(2, true), (7, false)], 1e-9).unwrap();
        let f = MutualInformation::new(gaussian_kernel(&pts, 1.5).unwrap(), prior).unwrap();
        let head = [4, 1];
        let order = [8, 0, 3, 2];
        let chain = f.chain_values(&head, &order);
        let mut set = ElementSet::from_indices(9, head);
        assert!((chain[0] - f.value(&set)).abs() < 1e-9);
        for (k, &j) in order.iter().enumerate() {
            set.insert(j);
            assert!((chain[k + 1] - f.value(&set)).abs() < 1e-9);
        }
    }

    #[test]
    fn relabeling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 7;
        let pts = random_points(&mut rng, n);
        let k = gaussian_kernel(&pts, 1.5).unwrap();
        let labels = [(1, true), (5, false)];
        let f =
            Oracle::new(MutualInformation::new(k.clone(), LabelPrior::from_labels(n, &labels, 1e-9).unwrap()).unwrap());
        let perm = [3, 6, 0, 5, 1, 4, 2];
        let mut inv = [0; 7];
        for (a, &pa) in perm.iter().enumerate() {
            inv[pa] = a;
        }
        let plabels: Vec<(usize, bool)> = labels.iter().map(|&(j, s)| (inv[j], s)).collect();
        let g = Oracle::new(
            MutualInformation::new(k.permuted(&perm), LabelPrior::from_labels(n, &plabels, 1e-9).unwrap()).unwrap(),
        );
        for mask in 0..(1u64 << n) {
            let a = ElementSet::from_mask(n, mask);
            let pa = ElementSet::from_indices(n, a.iter().map(|j| inv[j]));
            assert!((f.evaluate(&a) - g.evaluate(&pa)).abs() < 1e-9);
        }
    }
}
