//! MSR code for `d = k + 1` (`α = 2`, `B = 2k`).
//!
//! The message is split into halves `u1`, `u2` of length `k`. Node `i` stores
//! `(p_iᵗ u1, p_iᵗ u2 + r_iᵗ u1)`, where any `k` of the vectors `p_i` are
//! independent. The first symbol and the `p_iᵗ u2` part are repaired exactly;
//! the auxiliary vector `r_i` may change on every repair and plays no role in
//! reconstruction, so it is kept as mutable code state.

use std::collections::HashSet;

use itertools::Itertools;
use thiserror::Error;

use crate::cauchy::{CauchyError, CauchySpec};
use crate::gf::PrimeField;
use crate::linalg::{LinalgError, Matrix};
use crate::params::{CodeParams, ParamsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Dk1Error {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("field too small: need q >= {needed}, got {q}")]
    FieldTooSmall { needed: usize, q: u32 },
    #[error(transparent)]
    Cauchy(#[from] CauchyError),
    #[error("expected {expected} symbols, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("symbol {value} is not a residue of GF({q})")]
    SymbolOutOfField { value: u32, q: u32 },
    #[error("vectors p at nodes {0:?} are linearly dependent")]
    NotIndependent(Vec<usize>),
    #[error("node {node} out of range for n = {n}")]
    NodeIndex { node: usize, n: usize },
    #[error("node {0} listed more than once")]
    DuplicateNode(usize),
    #[error("expected {expected} nodes, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("invalid helper set: {0}")]
    HelperSet(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, Dk1Error>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dk1Code {
    params: CodeParams,
    field: PrimeField,
    p: Vec<Vec<u32>>,
    r: Vec<Vec<u32>>,
}

/// Coefficients for one repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dk1RepairPlan {
    pub failed: usize,
    /// Helpers in ascending order; the last one has `λ = 0`.
    pub helpers: Vec<usize>,
    /// Helper `i` sends `λ_i · c0 + c1`.
    pub lambdas: Vec<u32>,
    /// First replacement symbol is `ρᵗ z` for the received vector `z`.
    pub rho: Vec<u32>,
    /// Second replacement symbol is `δᵗ z`.
    pub delta: Vec<u32>,
    /// Auxiliary vector of the replacement node.
    pub new_r: Vec<u32>,
}

impl Dk1Code {
    /// Vandermonde rows `p_i = (1, i, i², …)`, `r_i = 0`. Needs `q >= n`.
    pub fn new(n: usize, k: usize, field: PrimeField) -> Result<Self> {
        let params = CodeParams::new(n, k, k + 1)?;
        if field.size() < n {
            return Err(Dk1Error::FieldTooSmall {
                needed: n,
                q: field.modulus(),
            });
        }
        let p = (0..n)
            .map(|i| (0..k).map(|j| field.pow(i as u32, j as u64)).collect())
            .collect();
        Ok(Self {
            params,
            field,
            p,
            r: vec![vec![0; k]; n],
        })
    }

    /// Rows of an `n × k` Cauchy matrix, `r_i = 0`. Needs `q >= n + k`.
    pub fn with_cauchy_rows(n: usize, k: usize, field: PrimeField) -> Result<Self> {
        let params = CodeParams::new(n, k, k + 1)?;
        let m = CauchySpec::default_for(n, k, field)?.build();
        Ok(Self {
            params,
            field,
            p: m.to_rows(),
            r: vec![vec![0; k]; n],
        })
    }

    /// Caller-supplied vectors. Every `k`-subset of `p` is checked.
    pub fn with_vectors(field: PrimeField, p: Vec<Vec<u32>>, r: Vec<Vec<u32>>) -> Result<Self> {
        let code = Self::with_vectors_unchecked(field, p, r)?;
        let (n, k) = (code.params.n, code.params.k);
        let bad = (0..n)
            .combinations(k)
            .find(|set| code.p_matrix(set).rank() < k);
        match bad {
            Some(set) => Err(Dk1Error::NotIndependent(set)),
            None => Ok(code),
        }
    }

    /// Caller-supplied vectors with shapes and residues checked but not
    /// `k`-independence. Reconstruction from a dependent subset and repair
    /// through a dependent helper set fail with an error.
    pub fn with_vectors_unchecked(
        field: PrimeField,
        p: Vec<Vec<u32>>,
        r: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let n = p.len();
        let k = p.first().map_or(0, Vec::len);
        let params = CodeParams::new(n, k, k + 1)?;
        if r.len() != n {
            return Err(Dk1Error::Shape {
                expected: n,
                got: r.len(),
            });
        }
        let code = Self {
            params,
            field,
            p,
            r,
        };
        for v in code.p.iter().chain(&code.r) {
            code.check_symbols(v, k)?;
        }
        Ok(code)
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p_vector(&self, node: usize) -> &[u32] {
        &self.p[node]
    }

    pub fn r_vector(&self, node: usize) -> &[u32] {
        &self.r[node]
    }

    /// `B × 2` generator of `node`: columns `(p; 0)` and `(r; p)`.
    pub fn generator(&self, node: usize) -> Matrix {
        let k = self.params.k;
        Matrix::from_fn(self.field, 2 * k, 2, |row, col| match (col, row < k) {
            (0, true) => self.p[node][row],
            (0, false) => 0,
            (_, true) => self.r[node][row],
            (_, false) => self.p[node][row - k],
        })
    }

    pub fn generators(&self) -> Vec<Matrix> {
        (0..self.params.n).map(|m| self.generator(m)).collect()
    }

    fn p_matrix(&self, nodes: &[usize]) -> Matrix {
        Matrix::from_rows(
            self.field,
            &nodes.iter().map(|&m| &self.p[m]).collect::<Vec<_>>(),
        )
        .expect("p vectors share length k")
    }

    fn r_matrix(&self, nodes: &[usize]) -> Matrix {
        Matrix::from_rows(
            self.field,
            &nodes.iter().map(|&m| &self.r[m]).collect::<Vec<_>>(),
        )
        .expect("r vectors share length k")
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.params.n {
            return Err(Dk1Error::NodeIndex {
                node,
                n: self.params.n,
            });
        }
        Ok(())
    }

    fn check_symbols(&self, symbols: &[u32], expected: usize) -> Result<()> {
        if symbols.len() != expected {
            return Err(Dk1Error::Shape {
                expected,
                got: symbols.len(),
            });
        }
        if let Some(&v) = symbols.iter().find(|&&v| !self.field.contains(v)) {
            return Err(Dk1Error::SymbolOutOfField {
                value: v,
                q: self.field.modulus(),
            });
        }
        Ok(())
    }

    fn check_distinct(&self, nodes: &[usize]) -> Result<()> {
        let mut seen = HashSet::new();
        for &m in nodes {
            self.check_node(m)?;
            if !seen.insert(m) {
                return Err(Dk1Error::DuplicateNode(m));
            }
        }
        Ok(())
    }

    pub fn encode_node(&self, message: &[u32], node: usize) -> Result<Vec<u32>> {
        self.check_node(node)?;
        self.check_symbols(message, self.params.file_size)?;
        let f = self.field;
        let k = self.params.k;
        let (u1, u2) = message.split_at(k);
        let p = &self.p[node];
        Ok(vec![
            f.dot(p, u1),
            f.add(f.dot(p, u2), f.dot(&self.r[node], u1)),
        ])
    }

    pub fn encode(&self, message: &[u32]) -> Result<Vec<Vec<u32>>> {
        (0..self.params.n)
            .map(|m| self.encode_node(message, m))
            .collect()
    }

    /// Recover `(u1, u2)` from any `k` nodes.
    pub fn reconstruct(&self, nodes: &[usize], contents: &[Vec<u32>]) -> Result<Vec<u32>> {
        let k = self.params.k;
        if nodes.len() != k {
            return Err(Dk1Error::Arity {
                expected: k,
                got: nodes.len(),
            });
        }
        if contents.len() != k {
            return Err(Dk1Error::Shape {
                expected: k,
                got: contents.len(),
            });
        }
        self.check_distinct(nodes)?;
        for c in contents {
            self.check_symbols(c, 2)?;
        }
        let f = self.field;
        let p_inv = self.p_matrix(nodes).invert()?;
        let c0: Vec<u32> = contents.iter().map(|c| c[0]).collect();
        let u1 = p_inv.mul_vec(&c0)?;
        let aux = self.r_matrix(nodes).mul_vec(&u1)?;
        let c1: Vec<u32> = contents
            .iter()
            .zip(&aux)
            .map(|(c, &a)| f.sub(c[1], a))
            .collect();
        let u2 = p_inv.mul_vec(&c1)?;
        Ok([u1, u2].concat())
    }

    /// Compute the repair coefficients for `failed` using `k + 1` helpers.
    pub fn plan_repair(&self, failed: usize, helpers: &[usize]) -> Result<Dk1RepairPlan> {
        let k = self.params.k;
        self.check_node(failed)?;
        if helpers.len() != k + 1 {
            return Err(Dk1Error::Arity {
                expected: k + 1,
                got: helpers.len(),
            });
        }
        self.check_distinct(helpers)?;
        if helpers.contains(&failed) {
            return Err(Dk1Error::HelperSet(format!(
                "node {failed} cannot help repair itself"
            )));
        }
        let f = self.field;
        let mut helpers = helpers.to_vec();
        helpers.sort_unstable();
        let first = &helpers[..k];
        let last = helpers[k];

        let p_k = self.p_matrix(first);
        let r_k = self.r_matrix(first);
        let p_inv = p_k.invert()?;
        let rho1 = p_inv.left_mul_vec(&self.p[last])?;
        if let Some(i) = rho1.iter().position(|&v| v == 0) {
            return Err(Dk1Error::NotIndependent(
                helpers.iter().copied().filter(|&h| h != first[i]).collect(),
            ));
        }
        // λ_i ρ1_i = w_i with wᵗ P_k = p_f + r_last - ρ1ᵗ R_k.
        let rho_r = r_k.left_mul_vec(&rho1)?;
        let target: Vec<u32> = (0..k)
            .map(|j| f.sub(f.add(self.p[failed][j], self.r[last][j]), rho_r[j]))
            .collect();
        let w = p_inv.left_mul_vec(&target)?;
        let mut lambdas: Vec<u32> = w
            .iter()
            .zip(&rho1)
            .map(|(&wi, &ri)| f.div(wi, ri).expect("ρ1 has no zeros"))
            .collect();
        lambdas.push(0);

        let delta1 = p_inv.left_mul_vec(&self.p[failed])?;
        let lambda_p = Matrix::from_fn(f, k, k, |i, j| f.mul(lambdas[i], p_k.get(i, j)));
        let new_r = lambda_p.add(&r_k)?.left_mul_vec(&delta1)?;

        let mut rho = rho1;
        rho.push(f.neg(1));
        let mut delta = delta1;
        delta.push(0);
        Ok(Dk1RepairPlan {
            failed,
            helpers,
            lambdas,
            rho,
            delta,
            new_r,
        })
    }

    /// The symbol sent by `helper` under `plan`.
    pub fn helper_symbol(
        &self,
        plan: &Dk1RepairPlan,
        helper: usize,
        contents: &[u32],
    ) -> Result<u32> {
        self.check_symbols(contents, 2)?;
        let pos = plan
            .helpers
            .iter()
            .position(|&h| h == helper)
            .ok_or_else(|| Dk1Error::HelperSet(format!("node {helper} is not in the plan")))?;
        Ok(self
            .field
            .mul_add(contents[1], plan.lambdas[pos], contents[0]))
    }

    /// Combine received symbols (in `plan.helpers` order) into the new
    /// contents and install the new auxiliary vector.
    pub fn apply_repair(&mut self, plan: &Dk1RepairPlan, received: &[u32]) -> Result<Vec<u32>> {
        self.check_node(plan.failed)?;
        self.check_symbols(received, self.params.k + 1)?;
        self.check_symbols(&plan.new_r, self.params.k)?;
        let f = self.field;
        let out = vec![f.dot(&plan.rho, received), f.dot(&plan.delta, received)];
        self.r[plan.failed] = plan.new_r.clone();
        Ok(out)
    }

    /// Full repair from helper contents. Helpers may be given in any order;
    /// `contents[i]` belongs to `helpers[i]`.
    pub fn repair(
        &mut self,
        failed: usize,
        helpers: &[usize],
        contents: &[Vec<u32>],
    ) -> Result<Vec<u32>> {
        if contents.len() != helpers.len() {
            return Err(Dk1Error::Shape {
                expected: helpers.len(),
                got: contents.len(),
            });
        }
        let plan = self.plan_repair(failed, helpers)?;
        let received = plan
            .helpers
            .iter()
            .map(|&h| {
                let i = helpers.iter().position(|&x| x == h).expect("same set");
                self.helper_symbol(&plan, h, &contents[i])
            })
            .collect::<Result<Vec<_>>>()?;
        self.apply_repair(&plan, &received)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    pub(crate) fn golden_fixture() -> Dk1Code {
        let p = vec![
            vec![1, 0, 0, 0, 0],
            vec![0, 1, 0, 0, 0],
            vec![0, 0, 1, 0, 0],
            vec![0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 1],
            vec![4, 5, 3, 1, 1],
            vec![3, 6, 1, 1, 7],
            vec![3, 7, 8, 3, 4],
        ];
        let r = vec![
            vec![0, 0, 1, 2, 2],
            vec![2, 0, 1, 1, 1],
            vec![0, 0, 0, 10, 0],
            vec![1, 2, 1, 0, 1],
            vec![1, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 0],
            vec![0, 0, 0, 1, 0],
            vec![1, 0, 4, 0, 0],
        ];
        Dk1Code::with_vectors_unchecked(f(11), p, r).unwrap()
    }

    #[test]
    fn golden_vectors_have_one_dependent_subset() {
        let code = golden_fixture();
        let p = (0..8).map(|m| code.p_vector(m).to_vec()).collect();
        let r = (0..8).map(|m| code.r_vector(m).to_vec()).collect();
        assert_eq!(
            Dk1Code::with_vectors(f(11), p, r),
            Err(Dk1Error::NotIndependent(vec![0, 2, 4, 6, 7]))
        );
        assert!(matches!(
            code.reconstruct(&[0, 2, 4, 6, 7], &vec![vec![0, 0]; 5]),
            Err(Dk1Error::Linalg(LinalgError::Singular))
        ));
    }

    #[test]
    fn encode_unit_message_with_golden_vectors() {
        let code = golden_fixture();
        let mut u = vec![0; 10];
        u[0] = 1;
        assert_eq!(code.encode_node(&u, 5).unwrap(), vec![4, 0]);
        assert_eq!(code.encode_node(&u, 7).unwrap(), vec![3, 1]);
        assert!(code
            .encode(&[0; 10])
            .unwrap()
            .iter()
            .flatten()
            .all(|&v| v == 0));
    }

    #[test]
    fn golden_example_coefficients() {
        let code = golden_fixture();
        let plan = code.plan_repair(7, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(plan.lambdas, vec![6, 1, 3, 3, 1, 0]);
        assert_eq!(plan.new_r, vec![6, 2, 4, 7, 9]);
    }

    #[test]
    fn golden_example_repair_and_reconstruct() {
        let mut code = golden_fixture();
        let u: Vec<u32> = (0..10).map(|i| (i * 4 + 3) % 11).collect();
        let table = code.encode(&u).unwrap();
        let helpers = [5, 0, 1, 2, 3, 4];
        let contents: Vec<_> = helpers.iter().map(|&h| table[h].clone()).collect();
        let fresh = code.repair(7, &helpers, &contents).unwrap();
        assert_eq!(fresh[0], table[7][0]);
        assert_eq!(code.r_vector(7), &[6, 2, 4, 7, 9]);
        assert_eq!(fresh, code.encode_node(&u, 7).unwrap());
        let nodes = [7, 6, 5, 1, 0];
        let mut now = table.clone();
        now[7] = fresh;
        let got: Vec<_> = nodes.iter().map(|&m| now[m].clone()).collect();
        assert_eq!(code.reconstruct(&nodes, &got).unwrap(), u);
    }

    #[test]
    fn constructors() {
        let v = Dk1Code::new(8, 5, f(11)).unwrap();
        assert_eq!(v.p_vector(3), &[1, 3, 9, 5, 4]);
        assert!(v.r_vector(3).iter().all(|&x| x == 0));
        assert!(matches!(
            Dk1Code::new(8, 5, f(7)),
            Err(Dk1Error::FieldTooSmall { needed: 8, q: 7 })
        ));
        assert!(Dk1Code::with_cauchy_rows(8, 5, f(13)).is_ok());
        assert!(Dk1Code::with_cauchy_rows(8, 5, f(11)).is_err());
        assert!(matches!(
            Dk1Code::new(5, 5, f(11)),
            Err(Dk1Error::Params(_))
        ));
    }

    #[test]
    fn tiny_vectors() {
        // Pairwise independent, but n = 3 leaves only two helpers for d = 3.
        let p = vec![vec![1, 0], vec![0, 1], vec![1, 1]];
        assert!(matches!(
            Dk1Code::with_vectors(f(3), p, vec![vec![0, 0]; 3]),
            Err(Dk1Error::Params(ParamsError::Range { .. }))
        ));
        let p = vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2]];
        assert!(Dk1Code::with_vectors(f(3), p, vec![vec![0, 0]; 4]).is_ok());
        let p = vec![vec![1, 0], vec![1, 0], vec![1, 1], vec![1, 2]];
        assert_eq!(
            Dk1Code::with_vectors(f(3), p, vec![vec![0, 0]; 4]),
            Err(Dk1Error::NotIndependent(vec![0, 1]))
        );
    }

    #[test]
    fn dependent_vectors_rejected() {
        let p = vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 2]];
        let r = vec![vec![0, 0]; 4];
        assert_eq!(
            Dk1Code::with_vectors(f(5), p, r),
            Err(Dk1Error::NotIndependent(vec![2, 3]))
        );
    }

    #[test]
    fn generator_matches_encoding() {
        let code = golden_fixture();
        let u: Vec<u32> = (0..10).map(|i| (i * 7 + 2) % 11).collect();
        for m in 0..8 {
            assert_eq!(
                code.generator(m).left_mul_vec(&u).unwrap(),
                code.encode_node(&u, m).unwrap()
            );
        }
    }

    #[test]
    fn repeated_repairs_keep_code_decodable() {
        let mut code = Dk1Code::new(7, 3, f(13)).unwrap();
        let u: Vec<u32> = (0..6).map(|i| (i * 5 + 1) % 13).collect();
        let mut table = code.encode(&u).unwrap();
        for (round, failed) in [0usize, 3, 6, 0, 2, 5, 1].into_iter().enumerate() {
            let helpers: Vec<usize> = (0..7)
                .filter(|&h| h != failed)
                .cycle()
                .skip(round)
                .take(4)
                .collect();
            let contents: Vec<_> = helpers.iter().map(|&h| table[h].clone()).collect();
            table[failed] = code.repair(failed, &helpers, &contents).unwrap();
            assert_eq!(table[failed], code.encode_node(&u, failed).unwrap());
        }
        for nodes in [[0, 1, 2], [4, 5, 6], [0, 3, 6]] {
            let c: Vec<_> = nodes.iter().map(|&m| table[m].clone()).collect();
            assert_eq!(code.reconstruct(&nodes, &c).unwrap(), u);
        }
    }

    #[test]
    fn repair_errors() {
        let code = golden_fixture();
        assert!(matches!(
            code.plan_repair(7, &[0, 1, 2, 3, 4]),
            Err(Dk1Error::Arity {
                expected: 6,
                got: 5
            })
        ));
        assert!(matches!(
            code.plan_repair(7, &[0, 1, 2, 3, 4, 7]),
            Err(Dk1Error::HelperSet(_))
        ));
        assert_eq!(
            code.plan_repair(7, &[0, 1, 2, 3, 4, 4]),
            Err(Dk1Error::DuplicateNode(4))
        );
        assert!(matches!(
            code.reconstruct(&[0, 1, 2, 3, 3], &vec![vec![0, 0]; 5]),
            Err(Dk1Error::DuplicateNode(3))
        ));
    }
}
