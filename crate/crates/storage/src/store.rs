//! Store operations on a directory holding a manifest, chunks and a ledger.

use std::fs;
use std::path::{Path, PathBuf};

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regen_core::{verifier, MdsReport, MiserError, RepairSymbol};
use serde::Serialize;

use crate::chunks::{payload_to_symbols, read_chunk, symbols_to_payload, write_chunk};
use crate::codec::Codec;
use crate::error::{IoContext, Result, StoreError};
use crate::ledger::{self, EventKind, LedgerEvent, RepairMode, Stats};
use crate::lock::DirLock;
use crate::manifest::{Family, InputMode, Manifest, FORMAT_VERSION, MANIFEST_FILE};

/// Subset decodes run by [`Store::check_subsets`] before switching to sampling.
pub const SUBSET_CHECK_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub q: u32,
    pub input_mode: InputMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairOutcome {
    pub node: usize,
    pub helpers: Vec<usize>,
    pub mode: RepairMode,
    pub symbols_per_stripe: usize,
    pub symbols_downloaded: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetCheck {
    pub subsets_checked: usize,
    pub subsets_total: u128,
    pub exhaustive: bool,
    /// Live nodes whose chunk differs from re-encoding the decoded file.
    pub inconsistent_nodes: Vec<usize>,
    /// First subset that failed to decode or decoded to a different file.
    pub first_bad_subset: Option<Vec<usize>>,
}

impl SubsetCheck {
    pub fn passes(&self) -> bool {
        self.inconsistent_nodes.is_empty() && self.first_bad_subset.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MdsSummary {
    pub checked: usize,
    pub total: u128,
    pub exhaustive: bool,
    pub first_failure: Option<Vec<usize>>,
}

impl From<MdsReport> for MdsSummary {
    fn from(r: MdsReport) -> Self {
        Self {
            checked: r.checked,
            total: r.total,
            exhaustive: r.exhaustive,
            first_failure: r.first_failure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub mds: MdsSummary,
    pub live_nodes: Vec<usize>,
    pub subsets: Option<SubsetCheck>,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        self.mds.first_failure.is_none() && self.subsets.as_ref().is_none_or(SubsetCheck::passes)
    }
}

/// An open store. Holds the directory lock for its lifetime.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    manifest: Manifest,
    codec: Codec,
    _lock: DirLock,
}

/// Stripe a payload, encode it and write chunks plus a manifest into `dir`.
pub fn encode_bytes(payload: &[u8], dir: &Path, opts: EncodeOptions) -> Result<Manifest> {
    if opts.q > u16::MAX as u32 + 1 {
        return Err(StoreError::FieldTooLarge(opts.q));
    }
    if opts.input_mode == InputMode::Bytes && opts.q < 257 {
        return Err(StoreError::FieldTooSmallForBytes(opts.q));
    }
    let codec = Codec::build(opts.family, opts.n, opts.k, opts.q)?;
    let symbols = payload_to_symbols(payload, opts.input_mode, opts.q)?;

    fs::create_dir_all(dir).at(dir)?;
    let _lock = DirLock::acquire(dir)?;
    if dir.join(MANIFEST_FILE).exists() {
        return Err(StoreError::AlreadyEncoded(dir.into()));
    }

    let p = *codec.params();
    let b = p.file_size;
    let stripes = symbols.len().div_ceil(b);
    let mut chunks = vec![Vec::with_capacity(stripes * p.alpha); p.n];
    for s in 0..stripes {
        let mut stripe = vec![0u32; b];
        let end = ((s + 1) * b).min(symbols.len());
        stripe[..end - s * b].copy_from_slice(&symbols[s * b..end]);
        for (chunk, node) in chunks.iter_mut().zip(codec.encode(&stripe)?) {
            chunk.extend(node);
        }
    }

    let mut manifest = Manifest {
        format_version: FORMAT_VERSION,
        family: opts.family,
        n: 0,
        k: 0,
        d: 0,
        q: opts.q,
        alpha: 0,
        stripe_symbols: 0,
        input_mode: opts.input_mode,
        cauchy: None,
        epsilon: None,
        shortened_by: None,
        p_vectors: None,
        r_vectors: None,
        stripes,
        original_len: symbols.len() as u64,
        chunks: (0..p.n).map(Manifest::chunk_name).collect(),
    };
    codec.record(&mut manifest);
    manifest.validate()?;

    for (name, chunk) in manifest.chunks.iter().zip(&chunks) {
        write_chunk(&dir.join(name), chunk)?;
    }
    manifest.save(dir)?;
    ledger::append(
        dir,
        &LedgerEvent {
            event: EventKind::Encode,
            node: None,
            helpers: vec![],
            mode: None,
            stripes,
            symbols_per_stripe: 0,
            symbols_downloaded: 0,
            baseline_per_stripe: b,
        },
    )?;
    Ok(manifest)
}

pub fn encode_file(input: &Path, dir: &Path, opts: EncodeOptions) -> Result<Manifest> {
    let payload = fs::read(input).at(input)?;
    encode_bytes(&payload, dir, opts)
}

/// Ledger totals. Does not take the lock.
pub fn stats(dir: &Path) -> Result<Stats> {
    Ok(Stats::from_events(&ledger::read(dir)?))
}

impl Store {
    pub fn open(dir: &Path) -> Result<Self> {
        let lock = DirLock::acquire(dir)?;
        let manifest = Manifest::load(dir)?;
        let codec = Codec::from_manifest(&manifest)?;
        Ok(Self {
            dir: dir.into(),
            manifest,
            codec,
            _lock: lock,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn codec(&self) -> &Codec {
        &self.codec
    }

    fn chunk_path(&self, node: usize) -> PathBuf {
        self.dir.join(&self.manifest.chunks[node])
    }

    fn chunk_len(&self) -> usize {
        self.manifest.stripes * self.manifest.alpha
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.manifest.n {
            return Err(StoreError::NodeIndex {
                node,
                n: self.manifest.n,
            });
        }
        Ok(())
    }

    pub fn read_node(&self, node: usize) -> Result<Option<Vec<u32>>> {
        self.check_node(node)?;
        read_chunk(&self.chunk_path(node), self.chunk_len(), self.manifest.q)
    }

    fn require_node(&self, node: usize) -> Result<Vec<u32>> {
        self.read_node(node)?.ok_or(StoreError::MissingChunk(node))
    }

    /// Nodes with a chunk file present, ascending.
    pub fn live_nodes(&self) -> Vec<usize> {
        (0..self.manifest.n)
            .filter(|&i| self.chunk_path(i).exists())
            .collect()
    }

    fn log(&self, event: LedgerEvent) -> Result<()> {
        ledger::append(&self.dir, &event)
    }

    /// Delete a node's chunk.
    pub fn fail(&mut self, node: usize) -> Result<()> {
        self.check_node(node)?;
        let path = self.chunk_path(node);
        if !path.exists() {
            return Err(StoreError::MissingChunk(node));
        }
        fs::remove_file(&path).at(&path)?;
        self.log(LedgerEvent {
            event: EventKind::Fail,
            node: Some(node),
            helpers: vec![],
            mode: None,
            stripes: self.manifest.stripes,
            symbols_per_stripe: 0,
            symbols_downloaded: 0,
            baseline_per_stripe: self.manifest.stripe_symbols,
        })
    }

    fn stripe_of(chunk: &[u32], alpha: usize, s: usize) -> Vec<u32> {
        chunk[s * alpha..(s + 1) * alpha].to_vec()
    }

    fn decode_symbols(&self, nodes: &[usize], chunks: &[Vec<u32>]) -> Result<Vec<u32>> {
        let m = &self.manifest;
        let mut out = Vec::with_capacity(m.stripes * m.stripe_symbols);
        for s in 0..m.stripes {
            let contents: Vec<Vec<u32>> = chunks
                .iter()
                .map(|c| Self::stripe_of(c, m.alpha, s))
                .collect();
            out.extend(self.codec.reconstruct(nodes, &contents)?);
        }
        Ok(out)
    }

    fn check_distinct_live(&self, nodes: &[usize], failed: Option<usize>) -> Result<()> {
        for (i, &h) in nodes.iter().enumerate() {
            self.check_node(h)?;
            if Some(h) == failed {
                return Err(StoreError::HelperSet(format!(
                    "node {h} cannot help repair itself"
                )));
            }
            if nodes[..i].contains(&h) {
                return Err(StoreError::HelperSet(format!("node {h} listed twice")));
            }
            if !self.chunk_path(h).exists() {
                return Err(StoreError::MissingChunk(h));
            }
        }
        Ok(())
    }

    /// Decode the stored file from exactly `k` nodes (default: the `k`
    /// lowest live nodes).
    pub fn reconstruct(&self, nodes: Option<&[usize]>) -> Result<Vec<u8>> {
        let m = &self.manifest;
        let nodes: Vec<usize> = match nodes {
            Some(ns) => {
                if ns.len() != m.k {
                    return Err(StoreError::InvalidArgs(format!(
                        "reconstruction takes exactly k = {} nodes, got {}",
                        m.k,
                        ns.len()
                    )));
                }
                ns.to_vec()
            }
            None => {
                let live = self.live_nodes();
                if live.len() < m.k {
                    return Err(StoreError::InsufficientNodes {
                        needed: m.k,
                        available: live.len(),
                    });
                }
                live[..m.k].to_vec()
            }
        };
        let available = nodes
            .iter()
            .filter(|&&i| i < m.n && self.chunk_path(i).exists())
            .count();
        if available < m.k {
            return Err(StoreError::InsufficientNodes {
                needed: m.k,
                available,
            });
        }
        self.check_distinct_live(&nodes, None)?;
        let chunks = nodes
            .iter()
            .map(|&i| self.require_node(i))
            .collect::<Result<Vec<_>>>()?;
        let mut symbols = self.decode_symbols(&nodes, &chunks)?;
        symbols.truncate(m.original_len as usize);
        let payload = symbols_to_payload(&symbols, m.input_mode)?;
        self.log(LedgerEvent {
            event: EventKind::Reconstruct,
            node: None,
            helpers: nodes,
            mode: None,
            stripes: m.stripes,
            symbols_per_stripe: m.stripe_symbols,
            symbols_downloaded: (m.stripes * m.stripe_symbols) as u64,
            baseline_per_stripe: m.stripe_symbols,
        })?;
        Ok(payload)
    }

    /// Choose the repair mode and helper set for `failed`.
    fn plan_helpers(
        &self,
        failed: usize,
        helpers: Option<&[usize]>,
    ) -> Result<(RepairMode, Vec<usize>)> {
        let m = &self.manifest;
        let live: Vec<usize> = self
            .live_nodes()
            .into_iter()
            .filter(|&i| i != failed)
            .collect();
        let lowest = |count: usize, pool: &[usize]| -> Result<Vec<usize>> {
            if pool.len() < count {
                return Err(StoreError::InsufficientNodes {
                    needed: count,
                    available: pool.len(),
                });
            }
            Ok(pool[..count].to_vec())
        };
        match (&self.codec, helpers) {
            (Codec::Dk1(_), Some(h)) => {
                self.check_distinct_live(h, Some(failed))?;
                if h.len() != m.d {
                    return Err(StoreError::HelperSet(format!(
                        "dk1 repair takes d = {} helpers, got {}",
                        m.d,
                        h.len()
                    )));
                }
                Ok((RepairMode::Optimal, h.to_vec()))
            }
            (Codec::Dk1(_), None) => Ok((RepairMode::Optimal, lowest(m.d, &live)?)),
            (Codec::Miser(c), Some(h)) => {
                self.check_distinct_live(h, Some(failed))?;
                if c.is_systematic(failed) {
                    c.validate_helpers(failed, h).map_err(helper_error)?;
                    Ok((RepairMode::Optimal, h.to_vec()))
                } else if h.len() == m.k {
                    Ok((RepairMode::Fallback, h.to_vec()))
                } else {
                    Err(StoreError::HelperSet(format!(
                        "parity node {failed} is rebuilt by decoding from k = {} helpers, got {}",
                        m.k,
                        h.len()
                    )))
                }
            }
            (Codec::Miser(c), None) => {
                let systematic_ok = (0..m.k).all(|j| j == failed || live.contains(&j));
                if c.is_systematic(failed) && systematic_ok && live.len() >= m.d {
                    let mut h: Vec<usize> = (0..m.k).filter(|&j| j != failed).collect();
                    let parity: Vec<usize> = live.iter().copied().filter(|&i| i >= m.k).collect();
                    h.extend(lowest(m.d + 1 - m.k, &parity)?);
                    Ok((RepairMode::Optimal, h))
                } else {
                    Ok((RepairMode::Fallback, lowest(m.k, &live)?))
                }
            }
        }
    }

    /// Regenerate `failed` and write its chunk. For dk1 the node's new
    /// auxiliary vector is saved to the manifest first.
    pub fn repair(&mut self, failed: usize, helpers: Option<&[usize]>) -> Result<RepairOutcome> {
        self.check_node(failed)?;
        let (mode, helpers) = self.plan_helpers(failed, helpers)?;
        let chunks = helpers
            .iter()
            .map(|&h| self.require_node(h))
            .collect::<Result<Vec<_>>>()?;
        let m = self.manifest.clone();
        let alpha = m.alpha;
        let mut rebuilt = Vec::with_capacity(self.chunk_len());

        let per_stripe = match mode {
            RepairMode::Fallback => {
                let message = self.decode_symbols(&helpers, &chunks)?;
                for stripe in message.chunks(m.stripe_symbols) {
                    let node = match &self.codec {
                        Codec::Miser(c) => c.encode_node(stripe, failed)?,
                        Codec::Dk1(c) => c.encode_node(stripe, failed)?,
                    };
                    rebuilt.extend(node);
                }
                m.k * alpha
            }
            RepairMode::Optimal => match &mut self.codec {
                Codec::Miser(c) => {
                    let idx = c.repair_symbol_index(failed)?;
                    for s in 0..m.stripes {
                        let symbols: Vec<RepairSymbol> = helpers
                            .iter()
                            .zip(&chunks)
                            .map(|(&h, chunk)| RepairSymbol {
                                from: h,
                                to: failed,
                                value: chunk[s * alpha + idx],
                            })
                            .collect();
                        rebuilt.extend(c.repair_systematic(failed, &symbols)?);
                    }
                    helpers.len()
                }
                Codec::Dk1(c) => {
                    let plan = c.plan_repair(failed, &helpers)?;
                    let order: Vec<usize> = plan
                        .helpers
                        .iter()
                        .map(|h| helpers.iter().position(|x| x == h).expect("same set"))
                        .collect();
                    for s in 0..m.stripes {
                        let received = order
                            .iter()
                            .map(|&i| {
                                c.helper_symbol(
                                    &plan,
                                    helpers[i],
                                    &Self::stripe_of(&chunks[i], alpha, s),
                                )
                            })
                            .collect::<std::result::Result<Vec<_>, _>>()?;
                        rebuilt.extend(c.apply_repair(&plan, &received)?);
                    }
                    if m.stripes == 0 {
                        c.apply_repair(&plan, &vec![0; plan.helpers.len()])?;
                    }
                    let r = self.manifest.r_vectors.as_mut().expect("dk1 manifest");
                    r[failed] = plan.new_r.clone();
                    self.manifest.save(&self.dir)?;
                    helpers.len()
                }
            },
        };

        write_chunk(&self.chunk_path(failed), &rebuilt)?;
        let downloaded = (per_stripe * m.stripes) as u64;
        self.log(LedgerEvent {
            event: EventKind::Repair,
            node: Some(failed),
            helpers: helpers.clone(),
            mode: Some(mode),
            stripes: m.stripes,
            symbols_per_stripe: per_stripe,
            symbols_downloaded: downloaded,
            baseline_per_stripe: m.stripe_symbols,
        })?;
        Ok(RepairOutcome {
            node: failed,
            helpers,
            mode,
            symbols_per_stripe: per_stripe,
            symbols_downloaded: downloaded,
        })
    }

    /// Decode from the lowest `k` live nodes, check that every live chunk
    /// matches the re-encoded file, then decode from every `k`-subset of
    /// live nodes (a seeded sample when there are more than
    /// [`SUBSET_CHECK_LIMIT`]) and compare.
    pub fn check_subsets(&self, seed: u64) -> Result<SubsetCheck> {
        let m = &self.manifest;
        let live = self.live_nodes();
        if live.len() < m.k {
            return Err(StoreError::InsufficientNodes {
                needed: m.k,
                available: live.len(),
            });
        }
        let chunks = live
            .iter()
            .map(|&i| self.require_node(i))
            .collect::<Result<Vec<_>>>()?;
        let reference = self.decode_symbols(&live[..m.k], &chunks[..m.k])?;

        let mut expected = vec![Vec::with_capacity(self.chunk_len()); m.n];
        for stripe in reference.chunks(m.stripe_symbols) {
            for (e, node) in expected.iter_mut().zip(self.codec.encode(stripe)?) {
                e.extend(node);
            }
        }
        let inconsistent_nodes = live
            .iter()
            .zip(&chunks)
            .filter(|&(&i, c)| expected[i] != *c)
            .map(|(&i, _)| i)
            .collect();

        let total = verifier::binomial(live.len(), m.k);
        let exhaustive = total <= SUBSET_CHECK_LIMIT as u128;
        let subsets: Vec<Vec<usize>> = if exhaustive {
            combinations(live.len(), m.k)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..SUBSET_CHECK_LIMIT)
                .map(|_| {
                    let mut s = sample(&mut rng, live.len(), m.k).into_vec();
                    s.sort_unstable();
                    s
                })
                .collect()
        };
        let mut first_bad_subset = None;
        for pos in &subsets {
            let nodes: Vec<usize> = pos.iter().map(|&i| live[i]).collect();
            let cs: Vec<Vec<u32>> = pos.iter().map(|&i| chunks[i].clone()).collect();
            if self.decode_symbols(&nodes, &cs).ok().as_ref() != Some(&reference) {
                first_bad_subset = Some(nodes);
                break;
            }
        }
        Ok(SubsetCheck {
            subsets_checked: subsets.len(),
            subsets_total: total,
            exhaustive,
            inconsistent_nodes,
            first_bad_subset,
        })
    }

    /// MDS check of the code itself plus [`Store::check_subsets`] when at
    /// least `k` nodes are live.
    pub fn verify(&self, seed: u64) -> Result<VerifyReport> {
        let view = self.codec.view();
        let mds = match verifier::verify_mds(&view) {
            Ok(r) => r,
            Err(_) => {
                verifier::verify_mds_sampled(&view, verifier::MDS_SUBSET_BUDGET as usize, seed)
            }
        }
        .into();
        let live_nodes = self.live_nodes();
        let subsets = if live_nodes.len() >= self.manifest.k {
            Some(self.check_subsets(seed)?)
        } else {
            None
        };
        Ok(VerifyReport {
            mds,
            live_nodes,
            subsets,
        })
    }
}

fn helper_error(e: MiserError) -> StoreError {
    match e {
        MiserError::HelperSet(s) => StoreError::HelperSet(s),
        MiserError::Arity { expected, got } => {
            StoreError::HelperSet(format!("expected {expected} helpers, got {got}"))
        }
        MiserError::DuplicateNode(h) => StoreError::HelperSet(format!("node {h} listed twice")),
        other => other.into(),
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(k).collect()
}
