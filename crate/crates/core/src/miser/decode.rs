//! Reconstruction from any `k` nodes.
//!
//! The decoder keeps a tableau `(D, y)` with `uᵗ D = y` restricted to the
//! still-unknown message symbols and transforms it in stages:
//!
//! 1. `D1`: generators of the connected nodes, systematic ones first.
//!    Their columns are unit vectors and are peeled off, leaving `D2`.
//! 2. `D3`: columns of the parity nodes regrouped so that block `i` holds
//!    column `Ω_i` (then `ω_i`) of every parity node, where `Ω` are the
//!    disconnected systematic nodes and `ω` the connected ones.
//! 3. `D4`: the trailing `|ω|` blocks are multiplied by `S̃⁻¹`, where
//!    `S̃[i][j] = ψ_{Ω_i}^{(δ_j)}`. Every column becomes a singleton, which
//!    yields `u_{Ω_b}[ω_c]`. Peeling leaves the `p² × p²` matrix `D5`.
//! 4. `D6`: every block multiplied by `S̃⁻¹`. Diagonal blocks become
//!    diagonal, so the symbols `u_{Ω_c}[Ω_c]` are peeled.
//! 5. `D7`: the remaining unknowns pair up as `{u_{Ω_b}[Ω_c], u_{Ω_c}[Ω_b]}`
//!    with 2×2 systems `[[ε_bc, 1], [1, ε_cb]]`.
//!
//! Any departure from the expected sparsity is reported as
//! [`MiserError::Corruption`].

use std::collections::HashSet;

use super::{MiserCode, MiserError, Result};
use crate::gf::PrimeField;
use crate::linalg::{Matrix, Permutation};

/// Intermediate matrices recorded by [`MiserCode::reconstruct_traced`].
/// Stages that do not occur (no parity nodes connected) are `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecodeTrace {
    pub d1: Option<Matrix>,
    pub d2: Option<Matrix>,
    pub d3: Option<Matrix>,
    pub d4: Option<Matrix>,
    pub d5: Option<Matrix>,
    pub d6: Option<Matrix>,
    /// `D6` with the diagonal singleton columns and solved rows removed.
    pub d6_peeled: Option<Matrix>,
    pub d7: Option<Matrix>,
}

fn corruption(msg: impl Into<String>) -> MiserError {
    MiserError::Corruption(msg.into())
}

struct Tableau {
    field: PrimeField,
    d: Matrix,
    y: Vec<u32>,
    /// Message index of each row.
    rows: Vec<usize>,
    /// Stable column labels.
    tags: Vec<usize>,
}

impl Tableau {
    fn col_of_tag(&self, tag: usize) -> Result<usize> {
        self.tags
            .iter()
            .position(|&t| t == tag)
            .ok_or_else(|| corruption(format!("column {tag} missing")))
    }

    fn row_of_label(&self, label: usize) -> Result<usize> {
        self.rows
            .iter()
            .position(|&r| r == label)
            .ok_or_else(|| corruption(format!("row for symbol {label} missing")))
    }

    fn permute_columns(&mut self, perm: &Permutation) -> Result<()> {
        self.d = self.d.permute_columns(perm)?;
        self.y = perm.apply(&self.y);
        self.tags = perm.apply(&self.tags);
        Ok(())
    }

    fn permute_rows(&mut self, perm: &Permutation) -> Result<()> {
        self.d = self.d.permute_rows(perm)?;
        self.rows = perm.apply(&self.rows);
        Ok(())
    }

    /// Right-multiply the listed `width`-wide column blocks by `m`.
    fn mul_blocks(&mut self, width: usize, blocks: std::ops::Range<usize>, m: &Matrix) {
        let f = self.field;
        let rows = self.d.rows();
        for b in blocks {
            let base = b * width;
            for r in 0..rows {
                let old: Vec<u32> = (0..width).map(|i| self.d.get(r, base + i)).collect();
                for j in 0..width {
                    let v = (0..width).fold(0, |acc, i| f.mul_add(acc, old[i], m.get(i, j)));
                    self.d.set(r, base + j, v);
                }
            }
            let old: Vec<u32> = self.y[base..base + width].to_vec();
            for j in 0..width {
                self.y[base + j] = (0..width).fold(0, |acc, i| f.mul_add(acc, old[i], m.get(i, j)));
            }
        }
    }

    /// Solve every listed column, which must have exactly one nonzero entry,
    /// then drop those columns and the rows they determine.
    fn peel(&mut self, cols: &[usize], solved: &mut [Option<u32>]) -> Result<()> {
        let f = self.field;
        let mut found: Vec<(usize, u32)> = Vec::with_capacity(cols.len());
        for &c in cols {
            let mut nz = (0..self.d.rows()).filter(|&r| self.d.get(r, c) != 0);
            let (Some(r), None) = (nz.next(), nz.next()) else {
                return Err(corruption(format!(
                    "column {} is not a singleton",
                    self.tags[c]
                )));
            };
            let value = f.div(self.y[c], self.d.get(r, c)).expect("nonzero pivot");
            match found.iter().find(|&&(fr, _)| fr == r) {
                Some(&(_, v)) if v != value => {
                    return Err(corruption(format!(
                        "inconsistent values for symbol {}",
                        self.rows[r]
                    )))
                }
                Some(_) => {}
                None => found.push((r, value)),
            }
        }
        let drop_cols: HashSet<usize> = cols.iter().copied().collect();
        let drop_rows: HashSet<usize> = found.iter().map(|&(r, _)| r).collect();
        let keep_cols: Vec<usize> = (0..self.d.cols())
            .filter(|c| !drop_cols.contains(c))
            .collect();
        let keep_rows: Vec<usize> = (0..self.d.rows())
            .filter(|r| !drop_rows.contains(r))
            .collect();
        for &c in &keep_cols {
            let mut acc = self.y[c];
            for &(r, v) in &found {
                acc = f.sub(acc, f.mul(self.d.get(r, c), v));
            }
            self.y[c] = acc;
        }
        for &(r, v) in &found {
            solved[self.rows[r]] = Some(v);
        }
        self.d = self.d.submatrix(&keep_rows, &keep_cols)?;
        self.y = keep_cols.iter().map(|&c| self.y[c]).collect();
        self.tags = keep_cols.iter().map(|&c| self.tags[c]).collect();
        self.rows = keep_rows.iter().map(|&r| self.rows[r]).collect();
        Ok(())
    }
}

impl MiserCode {
    /// Recover the message from the contents of any `k` distinct nodes.
    pub fn reconstruct(&self, nodes: &[usize], contents: &[Vec<u32>]) -> Result<Vec<u32>> {
        self.decode(nodes, contents, None)
    }

    /// [`reconstruct`](Self::reconstruct) that also returns the
    /// intermediate matrices of the unshortened code.
    pub fn reconstruct_traced(
        &self,
        nodes: &[usize],
        contents: &[Vec<u32>],
    ) -> Result<(Vec<u32>, DecodeTrace)> {
        let mut trace = DecodeTrace::default();
        let message = self.decode(nodes, contents, Some(&mut trace))?;
        Ok((message, trace))
    }

    fn decode(
        &self,
        nodes: &[usize],
        contents: &[Vec<u32>],
        mut trace: Option<&mut DecodeTrace>,
    ) -> Result<Vec<u32>> {
        let params = self.params;
        if nodes.len() != params.k {
            return Err(MiserError::Arity {
                expected: params.k,
                got: nodes.len(),
            });
        }
        if contents.len() != nodes.len() {
            return Err(MiserError::Shape {
                expected: nodes.len(),
                got: contents.len(),
            });
        }
        let mut seen = HashSet::new();
        for (&m, c) in nodes.iter().zip(contents) {
            self.check_node(m)?;
            if !seen.insert(m) {
                return Err(MiserError::DuplicateNode(m));
            }
            self.check_symbols(c, params.alpha)?;
        }

        let root = self.root();
        let s = self.shortened_by;
        let alpha = params.alpha;
        let kr = root.params.k;
        let f = self.field;

        // Pinned blocks act as connected systematic nodes holding zeros.
        let zeros = vec![0u32; alpha];
        let mut connected: Vec<(usize, &[u32])> = (0..s).map(|m| (m, zeros.as_slice())).collect();
        connected.extend(
            nodes
                .iter()
                .zip(contents)
                .map(|(&m, c)| (m + s, c.as_slice())),
        );
        connected.sort_by_key(|&(m, _)| m);

        let omega: Vec<usize> = connected
            .iter()
            .map(|&(m, _)| m)
            .filter(|&m| m < kr)
            .collect();
        let delta: Vec<usize> = connected
            .iter()
            .map(|&(m, _)| m)
            .filter(|&m| m >= kr)
            .map(|m| m - kr)
            .collect();
        let big_omega: Vec<usize> = (0..kr).filter(|i| !omega.contains(i)).collect();
        let p = delta.len();
        debug_assert_eq!(big_omega.len(), p);

        let gens: Vec<&Matrix> = connected
            .iter()
            .map(|&(m, _)| &root.generators[m])
            .collect();
        let mut tab = Tableau {
            field: f,
            d: Matrix::hstack(&gens)?,
            y: connected
                .iter()
                .flat_map(|&(_, c)| c.iter().copied())
                .collect(),
            rows: (0..root.params.file_size).collect(),
            tags: (0..kr * alpha).collect(),
        };
        if let Some(t) = trace.as_deref_mut() {
            t.d1 = Some(tab.d.clone());
        }
        let mut solved: Vec<Option<u32>> = vec![None; root.params.file_size];
        let sys_cols: Vec<usize> = (0..omega.len() * alpha).collect();
        tab.peel(&sys_cols, &mut solved)?;

        if p > 0 {
            self.decode_parity(&mut tab, &mut solved, &omega, &big_omega, &delta, trace)?;
        }

        solved[s * alpha..]
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| corruption(format!("symbol {} unresolved", s * alpha + i)))
            })
            .collect()
    }

    fn decode_parity(
        &self,
        tab: &mut Tableau,
        solved: &mut [Option<u32>],
        omega: &[usize],
        big_omega: &[usize],
        delta: &[usize],
        mut trace: Option<&mut DecodeTrace>,
    ) -> Result<()> {
        let alpha = self.params.alpha;
        let p = delta.len();
        let mut record = |slot: fn(&mut DecodeTrace) -> &mut Option<Matrix>, m: &Matrix| {
            if let Some(t) = trace.as_deref_mut() {
                *slot(t) = Some(m.clone());
            }
        };
        record(|t| &mut t.d2, &tab.d);

        // D3: block i gathers column Ω_i (then ω_i) of every parity node.
        let order: Vec<usize> = big_omega
            .iter()
            .chain(omega)
            .flat_map(|&col| (0..p).map(move |m| m * alpha + col))
            .collect();
        tab.permute_columns(&Permutation::new(order)?)?;
        tab.tags = (0..p * alpha).collect();
        record(|t| &mut t.d3, &tab.d);

        let s_tilde = Matrix::from_fn(self.field, p, p, |i, j| {
            self.psi.get(big_omega[i], delta[j])
        });
        let s_inv = s_tilde
            .invert()
            .map_err(|_| corruption("parity submatrix of Ψ is singular"))?;

        // D4: clear the trailing blocks, each column now isolates u_{Ω_b}[ω_c].
        tab.mul_blocks(p, p..alpha, &s_inv);
        record(|t| &mut t.d4, &tab.d);
        let trailing: Vec<usize> = (p * p..p * alpha).collect();
        tab.peel(&trailing, solved)?;
        record(|t| &mut t.d5, &tab.d);

        // D6: diagonal blocks become diagonal.
        tab.mul_blocks(p, 0..p, &s_inv);
        record(|t| &mut t.d6, &tab.d);
        let diagonal = (0..p)
            .map(|c| tab.col_of_tag(c * p + c))
            .collect::<Result<Vec<_>>>()?;
        tab.peel(&diagonal, solved)?;
        record(|t| &mut t.d6_peeled, &tab.d);

        // D7: pair u_{Ω_b}[Ω_c] with u_{Ω_c}[Ω_b].
        let mut row_order = Vec::with_capacity(tab.rows.len());
        let mut col_order = Vec::with_capacity(tab.tags.len());
        for b in 0..p {
            for c in (b + 1)..p {
                row_order.push(tab.row_of_label(big_omega[b] * alpha + big_omega[c])?);
                row_order.push(tab.row_of_label(big_omega[c] * alpha + big_omega[b])?);
                col_order.push(tab.col_of_tag(b * p + c)?);
                col_order.push(tab.col_of_tag(c * p + b)?);
            }
        }
        tab.permute_rows(&Permutation::new(row_order)?)?;
        tab.permute_columns(&Permutation::new(col_order)?)?;
        record(|t| &mut t.d7, &tab.d);

        let n = tab.d.rows();
        for r in 0..n {
            for c in 0..n {
                if r / 2 != c / 2 && tab.d.get(r, c) != 0 {
                    return Err(corruption("pair system is not block diagonal"));
                }
            }
        }
        for pair in 0..n / 2 {
            let idx = [2 * pair, 2 * pair + 1];
            let block = tab.d.submatrix(&idx, &idx)?;
            let inv = block
                .invert()
                .map_err(|_| corruption("singular pair system"))?;
            let y = [tab.y[idx[0]], tab.y[idx[1]]];
            let u = inv.left_mul_vec(&y)?;
            for (k, &r) in idx.iter().enumerate() {
                solved[tab.rows[r]] = Some(u[k]);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::golden_code;
    use super::*;
    use crate::params::CodeParams;

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        go(0, n, k, &mut cur, &mut out);
        out
    }

    fn roundtrip_all(code: &MiserCode, seed: u32) {
        let p = *code.params();
        let q = code.field().modulus();
        let u: Vec<u32> = (0..p.file_size as u32)
            .map(|i| (i * 7 + seed) % q)
            .collect();
        let table = code.encode(&u).unwrap();
        for set in subsets(p.n, p.k) {
            let contents: Vec<_> = set.iter().map(|&m| table[m].clone()).collect();
            assert_eq!(
                code.reconstruct(&set, &contents).unwrap(),
                u,
                "nodes {set:?}"
            );
        }
    }

    #[test]
    fn every_subset_decodes_golden_code() {
        roundtrip_all(&golden_code(), 3);
    }

    #[test]
    fn every_subset_decodes_shortened_and_extended() {
        let f11 = PrimeField::new(11).unwrap();
        for (n, k, d) in [(5, 2, 4), (6, 2, 5), (7, 3, 5), (8, 4, 7)] {
            let code =
                MiserCode::construct_general(CodeParams::new(n, k, d).unwrap(), f11).unwrap();
            roundtrip_all(&code, 1);
        }
    }

    #[test]
    fn order_of_nodes_is_irrelevant() {
        let code = golden_code();
        let u: Vec<u32> = (0..9).map(|i| (i * 2 + 1) % 7).collect();
        let table = code.encode(&u).unwrap();
        let nodes = [5, 0, 3];
        let contents: Vec<_> = nodes.iter().map(|&m| table[m].clone()).collect();
        assert_eq!(code.reconstruct(&nodes, &contents).unwrap(), u);
    }

    #[test]
    fn input_errors() {
        let code = golden_code();
        let c = vec![vec![0u32; 3]; 3];
        assert_eq!(
            code.reconstruct(&[1, 1, 2], &c),
            Err(MiserError::DuplicateNode(1))
        );
        assert!(matches!(
            code.reconstruct(&[1, 2], &c[..2]),
            Err(MiserError::Arity {
                expected: 3,
                got: 2
            })
        ));
        assert!(matches!(
            code.reconstruct(&[1, 2, 6], &c),
            Err(MiserError::NodeIndex { node: 6, .. })
        ));
        assert!(matches!(
            code.reconstruct(&[0, 1, 2], &[vec![0; 3], vec![0; 2], vec![0; 3]]),
            Err(MiserError::Shape { .. })
        ));
    }

    #[test]
    fn corrupted_tableau_is_detected() {
        let mut tab = Tableau {
            field: PrimeField::new(7).unwrap(),
            d: Matrix::from_rows(PrimeField::new(7).unwrap(), &[[1, 0], [1, 1]]).unwrap(),
            y: vec![1, 2],
            rows: vec![0, 1],
            tags: vec![0, 1],
        };
        let mut solved = vec![None; 2];
        assert!(matches!(
            tab.peel(&[0], &mut solved),
            Err(MiserError::Corruption(_))
        ));
    }

    #[test]
    fn trace_stage_shapes() {
        let code = golden_code();
        let u = vec![0u32; 9];
        let table = code.encode(&u).unwrap();
        let nodes = [0, 3, 4];
        let contents: Vec<_> = nodes.iter().map(|&m| table[m].clone()).collect();
        let (_, t) = code.reconstruct_traced(&nodes, &contents).unwrap();
        assert_eq!(t.d1.unwrap().shape(), (9, 9));
        assert_eq!(t.d2.unwrap().shape(), (6, 6));
        assert_eq!(t.d3.unwrap().shape(), (6, 6));
        assert_eq!(t.d5.unwrap().shape(), (4, 4));
        assert_eq!(t.d6_peeled.unwrap().shape(), (2, 2));
        assert_eq!(t.d7.unwrap().shape(), (2, 2));

        let nodes = [0, 1, 2];
        let contents: Vec<_> = nodes.iter().map(|&m| table[m].clone()).collect();
        let (_, t) = code.reconstruct_traced(&nodes, &contents).unwrap();
        assert!(t.d1.is_some() && t.d2.is_none());
    }
}
