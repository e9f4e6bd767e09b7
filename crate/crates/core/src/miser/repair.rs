//! Exact repair.
//!
//! To rebuild systematic node `ℓ` every helper sends the single stored symbol
//! whose index is `ℓ`'s position in the unshortened code. In each parity
//! symbol the desired block `u_ℓ` appears through `Σ_ℓ ψ^(m)` while every
//! other block `u_i` contributes only `ψ_i^(m) u_i[ℓ]`. Those interference
//! terms are cancelled with the symbols sent by the other systematic nodes,
//! leaving `α` independent equations in `u_ℓ`.

use std::collections::HashSet;

use super::{MiserCode, MiserError, Result};

/// One repair symbol sent by `from` toward the rebuild of `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RepairSymbol {
    pub from: usize,
    pub to: usize,
    pub value: u32,
}

impl MiserCode {
    /// Index into the unshortened code.
    fn root_node(&self, node: usize) -> usize {
        node + self.shortened_by
    }

    /// Which of its `α` symbols a helper sends when `failed` is repaired.
    pub fn repair_symbol_index(&self, failed: usize) -> Result<usize> {
        self.check_node(failed)?;
        if !self.is_systematic(failed) {
            return Err(MiserError::UnsupportedParityRepair(failed));
        }
        Ok(self.root_node(failed))
    }

    /// The symbol `helper` sends for the repair of `failed`, computed from
    /// the helper's stored contents.
    pub fn repair_symbol(
        &self,
        helper: usize,
        failed: usize,
        helper_contents: &[u32],
    ) -> Result<RepairSymbol> {
        self.check_node(helper)?;
        let idx = self.repair_symbol_index(failed)?;
        if helper == failed {
            return Err(MiserError::HelperSet(format!(
                "node {failed} cannot help repair itself"
            )));
        }
        self.check_symbols(helper_contents, self.params.alpha)?;
        Ok(RepairSymbol {
            from: helper,
            to: failed,
            value: helper_contents[idx],
        })
    }

    /// Check that `helpers` is a valid repair set for `failed`: `d` distinct
    /// live nodes including every other systematic node.
    pub fn validate_helpers(&self, failed: usize, helpers: &[usize]) -> Result<()> {
        self.repair_symbol_index(failed)?;
        let p = &self.params;
        if helpers.len() != p.d {
            return Err(MiserError::Arity {
                expected: p.d,
                got: helpers.len(),
            });
        }
        let mut seen = HashSet::with_capacity(helpers.len());
        for &h in helpers {
            self.check_node(h)?;
            if h == failed {
                return Err(MiserError::HelperSet(format!(
                    "node {failed} cannot help repair itself"
                )));
            }
            if !seen.insert(h) {
                return Err(MiserError::DuplicateNode(h));
            }
        }
        if let Some(missing) = (0..p.k).find(|&j| j != failed && !seen.contains(&j)) {
            return Err(MiserError::HelperSet(format!(
                "systematic node {missing} must be among the helpers"
            )));
        }
        Ok(())
    }

    /// Rebuild systematic node `failed` from one symbol per helper.
    pub fn repair_systematic(&self, failed: usize, symbols: &[RepairSymbol]) -> Result<Vec<u32>> {
        if let Some(s) = symbols.iter().find(|s| s.to != failed) {
            return Err(MiserError::HelperSet(format!(
                "symbol from node {} targets node {}, not {failed}",
                s.from, s.to
            )));
        }
        let helpers: Vec<usize> = symbols.iter().map(|s| s.from).collect();
        self.validate_helpers(failed, &helpers)?;
        let values: Vec<u32> = symbols.iter().map(|s| s.value).collect();
        self.check_symbols(&values, values.len())?;

        let f = self.field;
        let alpha = self.params.alpha;
        let k = self.params.k;
        let p = self.root_node(failed);

        // u_i[p] for every block of the unshortened code; pinned blocks stay 0.
        let mut interference = vec![0u32; alpha];
        let mut parity = Vec::with_capacity(alpha);
        for s in symbols {
            if s.from < k {
                interference[self.root_node(s.from)] = s.value;
            } else {
                parity.push((s.from - k, s.value));
            }
        }
        parity.sort_unstable();

        let cols: Vec<usize> = parity.iter().map(|&(c, _)| c).collect();
        let y: Vec<u32> = parity
            .iter()
            .map(|&(c, v)| {
                (0..alpha).filter(|&i| i != p).fold(v, |acc, i| {
                    f.sub(acc, f.mul(self.psi.get(i, c), interference[i]))
                })
            })
            .collect();
        let sub = self.psi.select_columns(&cols)?;
        let w = sub.solve_left(&y)?;
        Ok(w.iter()
            .enumerate()
            .map(|(r, &wr)| f.div(wr, self.sigma.get(p, r)).expect("ε is nonzero"))
            .collect())
    }

    /// Convenience wrapper: gather symbols from full helper contents.
    pub fn repair_from_contents(
        &self,
        failed: usize,
        helpers: &[usize],
        contents: &[Vec<u32>],
    ) -> Result<Vec<u32>> {
        if helpers.len() != contents.len() {
            return Err(MiserError::Shape {
                expected: helpers.len(),
                got: contents.len(),
            });
        }
        let symbols = helpers
            .iter()
            .zip(contents)
            .map(|(&h, c)| self.repair_symbol(h, failed, c))
            .collect::<Result<Vec<_>>>()?;
        self.repair_systematic(failed, &symbols)
    }

    /// Rebuild any node by decoding the whole file from `k` nodes and
    /// re-encoding. Downloads `kα` symbols instead of `d`.
    pub fn repair_by_reconstruction(
        &self,
        failed: usize,
        nodes: &[usize],
        contents: &[Vec<u32>],
    ) -> Result<Vec<u32>> {
        self.check_node(failed)?;
        if nodes.contains(&failed) {
            return Err(MiserError::HelperSet(format!(
                "node {failed} cannot help repair itself"
            )));
        }
        let message = self.reconstruct(nodes, contents)?;
        self.encode_node(&message, failed)
    }
}
