//! Structural checks for linear storage codes given as nodal generator
//! matrices: MSR parameter arithmetic, the cut-set bound, exhaustive (or
//! sampled) MDS verification, component non-singularity, interference
//! alignment of repair kernels and independence of passed vectors.

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dk1::Dk1Code;
use crate::linalg::Matrix;
use crate::miser::MiserCode;
use crate::params::ParamsError;

/// Largest number of `k`-subsets [`verify_mds`] will enumerate.
pub const MDS_SUBSET_BUDGET: u128 = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{total} subsets exceed the exhaustive budget of {budget}")]
    BudgetExceeded { total: u128, budget: u128 },
    #[error("generator {node} has shape {got:?}, expected {expected:?}")]
    Shape {
        node: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("expected {expected} kernels, got {got}")]
    KernelCount { expected: usize, got: usize },
    #[error("kernel has length {got}, expected {expected}")]
    KernelLength { expected: usize, got: usize },
    #[error("index {index} out of range (< {bound})")]
    Index { index: usize, bound: usize },
}

/// `(α, B) = (β(d - k + 1), kβ(d - k + 1))` at the MSR point.
pub fn msr_params(
    n: usize,
    k: usize,
    d: usize,
    beta: usize,
) -> Result<(usize, usize), ParamsError> {
    if k == 0 || d < k || d + 1 > n {
        return Err(ParamsError::Range { n, k, d });
    }
    if beta == 0 {
        return Err(ParamsError::Unsupported("β must be positive".into()));
    }
    let alpha = beta * (d - k + 1);
    Ok((alpha, k * alpha))
}

/// `B <= Σ_{i<k} min(α, (d - i)β)`.
pub fn cutset_bound_ok(b: usize, k: usize, d: usize, alpha: usize, beta: usize) -> bool {
    let cap: usize = (0..k).map(|i| alpha.min(d.saturating_sub(i) * beta)).sum();
    b <= cap
}

/// A linear code as `n` generator matrices of shape `B × α`, the first `k`
/// nodes being systematic when the code is in systematic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearCodeView {
    pub n: usize,
    pub k: usize,
    pub alpha: usize,
    pub generators: Vec<Matrix>,
}

impl LinearCodeView {
    pub fn new(k: usize, alpha: usize, generators: Vec<Matrix>) -> Result<Self, VerifyError> {
        let expected = (k * alpha, alpha);
        for (node, g) in generators.iter().enumerate() {
            if g.shape() != expected {
                return Err(VerifyError::Shape {
                    node,
                    expected,
                    got: g.shape(),
                });
            }
        }
        Ok(Self {
            n: generators.len(),
            k,
            alpha,
            generators,
        })
    }

    pub fn file_size(&self) -> usize {
        self.k * self.alpha
    }

    /// `B × kα` concatenation of the listed nodes' generators.
    pub fn stacked(&self, nodes: &[usize]) -> Matrix {
        let parts: Vec<&Matrix> = nodes.iter().map(|&m| &self.generators[m]).collect();
        Matrix::hstack(&parts).expect("generators share row count")
    }

    /// Component `i` (rows `iα..(i+1)α`) of node `m`.
    pub fn component(&self, node: usize, i: usize) -> Matrix {
        let a = self.alpha;
        let rows: Vec<usize> = (i * a..(i + 1) * a).collect();
        let cols: Vec<usize> = (0..a).collect();
        self.generators[node]
            .submatrix(&rows, &cols)
            .expect("component in range")
    }
}

impl From<&MiserCode> for LinearCodeView {
    fn from(code: &MiserCode) -> Self {
        let p = code.params();
        Self {
            n: p.n,
            k: p.k,
            alpha: p.alpha,
            generators: code.generators().to_vec(),
        }
    }
}

impl From<&Dk1Code> for LinearCodeView {
    fn from(code: &Dk1Code) -> Self {
        let p = code.params();
        Self {
            n: p.n,
            k: p.k,
            alpha: p.alpha,
            generators: code.generators(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsReport {
    /// Number of subsets examined.
    pub checked: usize,
    /// `C(n, k)`, saturating.
    pub total: u128,
    pub exhaustive: bool,
    pub first_failure: Option<Vec<usize>>,
}

impl MdsReport {
    pub fn is_mds(&self) -> bool {
        self.first_failure.is_none()
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn full_rank(view: &LinearCodeView, nodes: &[usize]) -> bool {
    view.stacked(nodes).rank() == view.file_size()
}

/// Check every `k`-subset of nodes for a nonsingular `B × B` generator.
/// Subsets are visited in lexicographic order; the first failure is kept.
pub fn verify_mds(view: &LinearCodeView) -> Result<MdsReport, VerifyError> {
    let total = binomial(view.n, view.k);
    if total > MDS_SUBSET_BUDGET {
        return Err(VerifyError::BudgetExceeded {
            total,
            budget: MDS_SUBSET_BUDGET,
        });
    }
    let mut checked = 0;
    let first_failure = (0..view.n).combinations(view.k).find(|set| {
        checked += 1;
        !full_rank(view, set)
    });
    Ok(MdsReport {
        checked,
        total,
        exhaustive: true,
        first_failure,
    })
}

/// Seeded random sample of `samples` subsets, for codes beyond the budget.
pub fn verify_mds_sampled(view: &LinearCodeView, samples: usize, seed: u64) -> MdsReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first_failure = None;
    let mut checked = 0;
    for _ in 0..samples {
        let mut set = sample(&mut rng, view.n, view.k).into_vec();
        set.sort_unstable();
        checked += 1;
        if !full_rank(view, &set) {
            first_failure = Some(set);
            break;
        }
    }
    MdsReport {
        checked,
        total: binomial(view.n, view.k),
        exhaustive: false,
        first_failure,
    }
}

/// `(node, component)` pairs of parity nodes whose `α × α` component is
/// singular.
pub fn singular_components(view: &LinearCodeView) -> Vec<(usize, usize)> {
    (view.k..view.n)
        .flat_map(|m| (0..view.k).map(move |i| (m, i)))
        .filter(|&(m, i)| view.component(m, i).rank() < view.alpha)
        .collect()
}

/// Every component of every parity generator is invertible.
pub fn check_component_nonsingular(view: &LinearCodeView) -> bool {
    singular_components(view).is_empty()
}

/// Per-component ranks of the parity kernels passed during one repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentReport {
    pub failed: usize,
    pub alpha: usize,
    /// Rank of component `i` of the passed kernels, for each `i < k`.
    pub component_ranks: Vec<usize>,
}

impl AlignmentReport {
    pub fn desired_rank(&self) -> usize {
        self.component_ranks[self.failed]
    }

    /// Largest interference rank (0 when `k = 1`).
    pub fn max_interference_rank(&self) -> usize {
        self.component_ranks
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.failed)
            .map(|(_, &r)| r)
            .max()
            .unwrap_or(0)
    }

    pub fn passes(&self) -> bool {
        self.desired_rank() == self.alpha && self.max_interference_rank() <= 1
    }
}

fn kernels_matrix(view: &LinearCodeView, kernels: &[Vec<u32>]) -> Result<Matrix, VerifyError> {
    let b = view.file_size();
    if let Some(k) = kernels.iter().find(|k| k.len() != b) {
        return Err(VerifyError::KernelLength {
            expected: b,
            got: k.len(),
        });
    }
    let field = view.generators[0].field();
    Ok(Matrix::from_fn(field, b, kernels.len(), |r, c| {
        kernels[c][r]
    }))
}

/// Ranks of each component of the `α` parity kernels passed toward the
/// repair of systematic node `failed`.
pub fn check_alignment(
    view: &LinearCodeView,
    failed: usize,
    kernels: &[Vec<u32>],
) -> Result<AlignmentReport, VerifyError> {
    if failed >= view.k {
        return Err(VerifyError::Index {
            index: failed,
            bound: view.k,
        });
    }
    if kernels.len() != view.alpha {
        return Err(VerifyError::KernelCount {
            expected: view.alpha,
            got: kernels.len(),
        });
    }
    let m = kernels_matrix(view, kernels)?;
    let a = view.alpha;
    let cols: Vec<usize> = (0..kernels.len()).collect();
    let component_ranks = (0..view.k)
        .map(|i| {
            let rows: Vec<usize> = (i * a..(i + 1) * a).collect();
            m.submatrix(&rows, &cols).expect("in range").rank()
        })
        .collect();
    Ok(AlignmentReport {
        failed,
        alpha: a,
        component_ranks,
    })
}

/// Every `α`-subset of the given kernels is linearly independent. With
/// fewer than `α` kernels the whole set must be independent.
pub fn check_passed_vector_independence(
    view: &LinearCodeView,
    kernels: &[Vec<u32>],
) -> Result<bool, VerifyError> {
    let m = kernels_matrix(view, kernels)?;
    let size = view.alpha.min(kernels.len());
    Ok((0..kernels.len())
        .combinations(size)
        .all(|set| m.select_columns(&set).expect("in range").rank() == size))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::CauchySpec;
    use crate::gf::PrimeField;
    use crate::miser::Sigma;

    fn f(q: u32) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    fn golden_miser() -> MiserCode {
        let f7 = f(7);
        let spec = CauchySpec::new(f7, vec![4, 5, 6], vec![1, 2, 3]).unwrap();
        MiserCode::with_cauchy(3, spec, Sigma::uniform(f7, 3, 2).unwrap()).unwrap()
    }

    #[test]
    fn msr_examples() {
        assert_eq!(msr_params(4, 2, 3, 1), Ok((2, 4)));
        assert_eq!(msr_params(6, 3, 5, 1), Ok((3, 9)));
        assert_eq!(msr_params(7, 4, 4, 1), Ok((1, 4)));
        assert_eq!(msr_params(6, 3, 5, 2), Ok((6, 18)));
        assert!(matches!(
            msr_params(6, 3, 2, 1),
            Err(ParamsError::Range { .. })
        ));
        assert!(matches!(
            msr_params(6, 3, 6, 1),
            Err(ParamsError::Range { .. })
        ));
    }

    #[test]
    fn cutset_examples() {
        for (n, k, d) in [(4, 2, 3), (6, 3, 5), (8, 5, 6), (10, 3, 9)] {
            let (a, b) = msr_params(n, k, d, 1).unwrap();
            assert!(cutset_bound_ok(b, k, d, a, 1));
            assert!(!cutset_bound_ok(b + 1, k, d, a, 1));
        }
        assert!(!cutset_bound_ok(5, 2, 3, 2, 1));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(8, 5), 56);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }

    #[test]
    fn mds_of_golden_code() {
        let view = LinearCodeView::from(&golden_miser());
        let report = verify_mds(&view).unwrap();
        assert!(report.is_mds());
        assert_eq!((report.checked, report.total), (20, 20));
    }

    #[test]
    fn duplicated_generator_breaks_mds() {
        let mut view = LinearCodeView::from(&golden_miser());
        view.generators[1] = view.generators[0].clone();
        let report = verify_mds(&view).unwrap();
        assert_eq!(report.first_failure, Some(vec![0, 1, 2]));
        assert_eq!(report.checked, 1);
    }

    #[test]
    fn budget_and_sampling() {
        let f = f(7);
        let g = vec![Matrix::zeros(f, 10, 1); 30];
        let view = LinearCodeView::new(10, 1, g).unwrap();
        assert!(matches!(
            verify_mds(&view),
            Err(VerifyError::BudgetExceeded { .. })
        ));
        let report = verify_mds_sampled(&view, 5, 1);
        assert!(!report.is_mds());
        assert!(!report.exhaustive);
        let good = LinearCodeView::from(&golden_miser());
        let a = verify_mds_sampled(&good, 50, 9);
        assert!(a.is_mds());
        assert_eq!(a.checked, 50);
    }

    #[test]
    fn view_shape_checked() {
        let f = f(7);
        assert!(matches!(
            LinearCodeView::new(2, 2, vec![Matrix::zeros(f, 4, 2), Matrix::zeros(f, 3, 2)]),
            Err(VerifyError::Shape { node: 1, .. })
        ));
    }

    #[test]
    fn components() {
        let mut view = LinearCodeView::from(&golden_miser());
        assert!(check_component_nonsingular(&view));
        let mut g = view.generators[4].clone();
        for r in 3..6 {
            for c in 0..3 {
                g.set(r, c, 0);
            }
        }
        view.generators[4] = g;
        assert_eq!(singular_components(&view), vec![(4, 1)]);
        assert!(!check_component_nonsingular(&view));
    }

    #[test]
    fn alignment_for_golden_code() {
        let code = golden_miser();
        let view = LinearCodeView::from(&code);
        for failed in 0..3 {
            let kernels: Vec<Vec<u32>> = (3..6).map(|m| code.kernel(m, failed)).collect();
            let report = check_alignment(&view, failed, &kernels).unwrap();
            assert!(report.passes(), "{report:?}");
            assert_eq!(report.desired_rank(), 3);
        }
    }

    #[test]
    fn misaligned_kernels_fail() {
        let view = LinearCodeView::from(&golden_miser());
        // Component 1 of these kernels has rank 2.
        let kernels = vec![
            vec![1, 0, 0, 1, 0, 0, 0, 0, 0],
            vec![0, 1, 0, 0, 1, 0, 0, 0, 0],
            vec![0, 0, 1, 0, 0, 0, 0, 0, 0],
        ];
        let report = check_alignment(&view, 0, &kernels).unwrap();
        assert_eq!(report.component_ranks, vec![3, 2, 0]);
        assert!(!report.passes());
        assert!(matches!(
            check_alignment(&view, 0, &kernels[..2]),
            Err(VerifyError::KernelCount {
                expected: 3,
                got: 2
            })
        ));
        assert!(check_alignment(&view, 3, &kernels).is_err());
    }

    #[test]
    fn alignment_alpha_one() {
        let f = f(5);
        let g = vec![
            Matrix::from_rows(f, &[[1], [0]]).unwrap(),
            Matrix::from_rows(f, &[[0], [1]]).unwrap(),
            Matrix::from_rows(f, &[[1], [1]]).unwrap(),
        ];
        let view = LinearCodeView::new(2, 1, g).unwrap();
        let report = check_alignment(&view, 0, &[vec![1, 1]]).unwrap();
        assert!(report.passes());
    }

    #[test]
    fn passed_vector_independence() {
        let code = golden_miser();
        let view = LinearCodeView::from(&code);
        for m in 3..6 {
            let kernels: Vec<Vec<u32>> = (0..3).map(|l| code.kernel(m, l)).collect();
            assert!(check_passed_vector_independence(&view, &kernels).unwrap());
            let mut dup = kernels.clone();
            dup[2] = dup[0].clone();
            assert!(!check_passed_vector_independence(&view, &dup).unwrap());
        }
    }
}
