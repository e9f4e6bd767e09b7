//! Family-agnostic wrapper over the two code constructions.

use regen_core::{CauchySpec, CodeParams, Dk1Code, LinearCodeView, MiserCode};

use crate::error::{field, Result, StoreError};
use crate::manifest::{CauchyPoints, Family, Manifest};

#[derive(Debug, Clone)]
pub enum Codec {
    Miser(MiserCode),
    Dk1(Dk1Code),
}

impl Codec {
    /// Build a fresh code. MISER uses `d = n - 1` and needs `n >= 2k`;
    /// dk1 uses `d = k + 1` with Vandermonde `p` vectors.
    pub fn build(family: Family, n: usize, k: usize, q: u32) -> Result<Self> {
        let f = field(q)?;
        match family {
            Family::Miser => {
                if k == 0 || n < 2 * k {
                    return Err(StoreError::InvalidArgs(format!(
                        "miser needs n >= 2k, got n={n} k={k}"
                    )));
                }
                let params = CodeParams::new(n, k, n - 1)?;
                Ok(Codec::Miser(MiserCode::construct_general(params, f)?))
            }
            Family::Dk1 => {
                if k == 0 || n < k + 2 {
                    return Err(StoreError::InvalidArgs(format!(
                        "dk1 needs n >= k + 2, got n={n} k={k}"
                    )));
                }
                Ok(Codec::Dk1(Dk1Code::new(n, k, f)?))
            }
        }
    }

    /// Rebuild the code recorded in `m`.
    pub fn from_manifest(m: &Manifest) -> Result<Self> {
        match m.family {
            Family::Miser => {
                let codec = Self::build(Family::Miser, m.n, m.k, m.q)?;
                let mut expect = m.clone();
                codec.record(&mut expect);
                if expect.cauchy != m.cauchy
                    || expect.epsilon != m.epsilon
                    || expect.shortened_by != m.shortened_by
                    || expect.d != m.d
                    || expect.alpha != m.alpha
                {
                    return Err(StoreError::Corrupt(
                        "manifest code description does not match the construction".into(),
                    ));
                }
                Ok(codec)
            }
            Family::Dk1 => {
                let missing = || StoreError::Corrupt("dk1 manifest lacks p/r vectors".into());
                let p = m.p_vectors.clone().ok_or_else(missing)?;
                let r = m.r_vectors.clone().ok_or_else(missing)?;
                let code = Dk1Code::with_vectors_unchecked(field(m.q)?, p, r)?;
                let pr = code.params();
                if (pr.n, pr.k, pr.d, pr.alpha) != (m.n, m.k, m.d, m.alpha) {
                    return Err(StoreError::Corrupt("dk1 vectors disagree with n, k".into()));
                }
                Ok(Codec::Dk1(code))
            }
        }
    }

    /// Write the code description into `m`.
    pub fn record(&self, m: &mut Manifest) {
        let p = self.params();
        m.family = self.family();
        m.n = p.n;
        m.k = p.k;
        m.d = p.d;
        m.alpha = p.alpha;
        m.stripe_symbols = p.file_size;
        match self {
            Codec::Miser(c) => {
                let spec: &CauchySpec = c.root().cauchy();
                m.cauchy = Some(CauchyPoints {
                    xs: spec.xs().to_vec(),
                    ys: spec.ys().to_vec(),
                });
                m.epsilon = c.epsilon();
                m.shortened_by = Some(c.shortened_by());
                m.p_vectors = None;
                m.r_vectors = None;
            }
            Codec::Dk1(c) => {
                m.cauchy = None;
                m.epsilon = None;
                m.shortened_by = None;
                m.p_vectors = Some((0..p.n).map(|i| c.p_vector(i).to_vec()).collect());
                m.r_vectors = Some((0..p.n).map(|i| c.r_vector(i).to_vec()).collect());
            }
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Codec::Miser(_) => Family::Miser,
            Codec::Dk1(_) => Family::Dk1,
        }
    }

    pub fn params(&self) -> &CodeParams {
        match self {
            Codec::Miser(c) => c.params(),
            Codec::Dk1(c) => c.params(),
        }
    }

    pub fn encode(&self, message: &[u32]) -> Result<Vec<Vec<u32>>> {
        Ok(match self {
            Codec::Miser(c) => c.encode(message)?,
            Codec::Dk1(c) => c.encode(message)?,
        })
    }

    pub fn reconstruct(&self, nodes: &[usize], contents: &[Vec<u32>]) -> Result<Vec<u32>> {
        Ok(match self {
            Codec::Miser(c) => c.reconstruct(nodes, contents)?,
            Codec::Dk1(c) => c.reconstruct(nodes, contents)?,
        })
    }

    pub fn view(&self) -> LinearCodeView {
        match self {
            Codec::Miser(c) => c.into(),
            Codec::Dk1(c) => c.into(),
        }
    }
}
