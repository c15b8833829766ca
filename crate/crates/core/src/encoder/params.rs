//! Low-rank sparse document encoder.
//!
//! A document's raw term counts `x` are projected to a rank-`k` code
//! `h = Vpᵀ x`, expanded back over the vocabulary as `z = U h + b`, and
//! saturated: `r = ln(1 + max(0, z))`. Only terms with `z > 0` are emitted.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{SparseVector, TermId};

/// Starting point for training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// `U` and `Vp` drawn independently.
    Uniform,
    /// `Vp` drawn as for `Uniform` and copied into `U`, so `U·Vpᵀ` starts
    /// with a positive diagonal: every document initially re-emits its own
    /// tokens, the way a masked-language-model head does.
    Tied,
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Init::Uniform => "uniform",
            Init::Tied => "tied",
        })
    }
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Init::Uniform),
            "tied" => Ok(Init::Tied),
            other => Err(Error::InvalidArgument(format!(
                "unknown init `{other}` (expected uniform or tied)"
            ))),
        }
    }
}

/// Encoder weights. `u` and `vp` are `dim × rank`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    dim: usize,
    rank: usize,
    pub(crate) u: Vec<f64>,
    pub(crate) vp: Vec<f64>,
    pub(crate) b: Vec<f64>,
}

impl EncoderParams {
    pub fn zeros(dim: usize, rank: usize) -> Result<Self> {
        if dim == 0 || rank == 0 {
            return Err(Error::InvalidArgument(format!(
                "encoder needs dim >= 1 and rank >= 1, got dim={dim} rank={rank}"
            )));
        }
        Ok(Self {
            dim,
            rank,
            u: vec![0.0; dim * rank],
            vp: vec![0.0; dim * rank],
            b: vec![0.0; dim],
        })
    }

    /// `U`, `Vp` uniform in `[-1/√k, 1/√k]`, `b = 0`.
    pub fn init<R: Rng>(dim: usize, rank: usize, rng: &mut R) -> Result<Self> {
        Self::init_with(dim, rank, Init::Uniform, rng)
    }

    pub fn init_with<R: Rng>(dim: usize, rank: usize, init: Init, rng: &mut R) -> Result<Self> {
        let mut p = Self::zeros(dim, rank)?;
        let bound = 1.0 / (rank as f64).sqrt();
        match init {
            Init::Uniform => {
                for x in p.u.iter_mut().chain(p.vp.iter_mut()) {
                    *x = rng.random_range(-bound..=bound);
                }
            }
            Init::Tied => {
                for x in p.vp.iter_mut() {
                    *x = rng.random_range(-bound..=bound);
                }
                p.u.copy_from_slice(&p.vp);
            }
        }
        Ok(p)
    }

    pub fn from_parts(dim: usize, rank: usize, u: Vec<f64>, vp: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim == 0 || rank == 0 || u.len() != dim * rank || vp.len() != dim * rank || b.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "encoder parts do not match dim={dim} rank={rank}"
            )));
        }
        if u.iter().chain(&vp).chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("encoder parameters must be finite".into()));
        }
        Ok(Self { dim, rank, u, vp, b })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn vp(&self) -> &[f64] {
        &self.vp
    }

    pub fn bias(&self) -> &[f64] {
        &self.b
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.b
    }

    pub(crate) fn vp_row(&self, t: usize) -> &[f64] {
        &self.vp[t * self.rank..(t + 1) * self.rank]
    }

    /// All parameters in a fixed order: `U`, `Vp`, `b`.
    pub fn flat(&self) -> Vec<f64> {
        self.u.iter().chain(&self.vp).chain(&self.b).copied().collect()
    }

    pub fn num_params(&self) -> usize {
        self.u.len() + self.vp.len() + self.b.len()
    }

    /// Mutable access by flat index, in [`flat`](Self::flat) order.
    pub fn param_mut(&mut self, i: usize) -> &mut f64 {
        let n = self.u.len();
        if i < n {
            &mut self.u[i]
        } else if i < 2 * n {
            &mut self.vp[i - n]
        } else {
            &mut self.b[i - 2 * n]
        }
    }

    /// Forward pass over a batch: `H = X·Vp` accumulated sparsely, then
    /// `Z = H·Uᵀ + b` as one matrix product.
    pub(crate) fn forward_batch(&self, docs: &[SparseVector]) -> Forward {
        let (n, k, dim) = (docs.len(), self.rank, self.dim);
        let mut h = vec![0.0; n * k];
        for (hrow, counts) in h.chunks_exact_mut(k).zip(docs) {
            for &(s, x) in counts.entries() {
                for (hj, &v) in hrow.iter_mut().zip(self.vp_row(s as usize)) {
                    *hj += x * v;
                }
            }
        }
        let mut z = Vec::with_capacity(n * dim);
        for _ in 0..n {
            z.extend_from_slice(&self.b);
        }
        // SAFETY: h is n×k and z is n×dim, both row-major; u is dim×k
        // row-major and read as its k×dim transpose via swapped strides.
        unsafe {
            matrixmultiply::dgemm(
                n, k, dim, 1.0,
                h.as_ptr(), k as isize, 1,
                self.u.as_ptr(), 1, k as isize,
                1.0,
                z.as_mut_ptr(), dim as isize, 1,
            );
        }
        Forward { dim, k, h, z }
    }

    /// Subtracts `learning_rate * grads` from every parameter.
    pub fn apply_gradient(&mut self, grads: &ParamGrads, learning_rate: f64) {
        if learning_rate == 0.0 {
            return;
        }
        for (p, g) in self.u.iter_mut().zip(&grads.u) {
            *p -= learning_rate * g;
        }
        for (p, g) in self.vp.iter_mut().zip(&grads.vp) {
            *p -= learning_rate * g;
        }
        for (p, g) in self.b.iter_mut().zip(&grads.b) {
            *p -= learning_rate * g;
        }
    }
}

/// Cached activations of a batch, row-major: `h` is `n × k`, `z` is `n × |V|`.
#[derive(Debug, Clone)]
pub(crate) struct Forward {
    dim: usize,
    k: usize,
    h: Vec<f64>,
    z: Vec<f64>,
}

impl Forward {
    pub fn len(&self) -> usize {
        self.h.len() / self.k
    }

    pub fn to_sparse(&self, i: usize, doc_id: &str) -> SparseVector {
        let entries = self.z[i * self.dim..(i + 1) * self.dim]
            .iter()
            .enumerate()
            .filter(|&(_, &z)| z > 0.0)
            .map(|(t, &z)| (t as TermId, z.ln_1p()))
            .filter(|&(_, r)| r > 0.0)
            .collect();
        SparseVector::from_sorted_unchecked(doc_id.to_owned(), entries)
    }
}

/// Encodes raw term counts into a learned sparse vector with the same doc id.
pub fn encode(params: &EncoderParams, counts: &SparseVector) -> SparseVector {
    params
        .forward_batch(std::slice::from_ref(counts))
        .to_sparse(0, counts.doc_id())
}

/// Documents per matrix product in [`encode_all`]. Fixed, so the output does
/// not depend on the thread count.
const ENCODE_CHUNK: usize = 128;

/// Encodes many documents, possibly in parallel; output order follows input.
pub fn encode_all(params: &EncoderParams, counts: &[SparseVector]) -> Vec<SparseVector> {
    counts
        .par_chunks(ENCODE_CHUNK)
        .flat_map_iter(|chunk| {
            let fwd = params.forward_batch(chunk);
            let ids: Vec<&str> = chunk.iter().map(SparseVector::doc_id).collect();
            ids.into_iter()
                .enumerate()
                .map(|(i, id)| fwd.to_sparse(i, id))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Gradient buffers shaped like [`EncoderParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub u: Vec<f64>,
    pub vp: Vec<f64>,
    pub b: Vec<f64>,
}

impl ParamGrads {
    pub fn zeros_like(p: &EncoderParams) -> Self {
        Self {
            u: vec![0.0; p.u.len()],
            vp: vec![0.0; p.vp.len()],
            b: vec![0.0; p.b.len()],
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.u.iter().chain(&self.vp).chain(&self.b).copied().collect()
    }

    /// Back-propagates `dl_dr` (`n × |V|`, row-major) through `fwd`.
    ///
    /// With `D = dl_dr ⊙ 1[z > 0] / (1 + z)`: `∂b = Σ_i D_i`, `∂U = Dᵀ·H`,
    /// `∂H = D·U` and `∂Vp_s = Σ_i x_{i,s} ∂H_i`.
    pub(crate) fn accumulate(
        &mut self,
        params: &EncoderParams,
        docs: &[SparseVector],
        fwd: &Forward,
        mut dl_dr: Vec<f64>,
    ) {
        let (n, k, dim) = (docs.len(), params.rank, params.dim);
        assert_eq!(fwd.len(), n, "forward/batch size mismatch");
        assert_eq!(dl_dr.len(), n * dim, "dl_dr must be n × dim");
        for (d, &z) in dl_dr.iter_mut().zip(&fwd.z) {
            // d/dz ln(1 + z) on the active side of the rectifier
            *d = if z > 0.0 { *d / (1.0 + z) } else { 0.0 };
        }
        for row in dl_dr.chunks_exact(dim) {
            for (gb, &d) in self.b.iter_mut().zip(row) {
                *gb += d;
            }
        }
        let mut dh = vec![0.0; n * k];
        // SAFETY: dl_dr is n×dim and fwd.h, dh are n×k, all row-major;
        // params.u and self.u are dim×k row-major. The first product reads
        // dl_dr transposed via swapped strides.
        unsafe {
            matrixmultiply::dgemm(
                dim, n, k, 1.0,
                dl_dr.as_ptr(), 1, dim as isize,
                fwd.h.as_ptr(), k as isize, 1,
                1.0,
                self.u.as_mut_ptr(), k as isize, 1,
            );
            matrixmultiply::dgemm(
                n, dim, k, 1.0,
                dl_dr.as_ptr(), dim as isize, 1,
                params.u.as_ptr(), k as isize, 1,
                0.0,
                dh.as_mut_ptr(), k as isize, 1,
            );
        }
        for (counts, dhrow) in docs.iter().zip(dh.chunks_exact(k)) {
            for &(s, x) in counts.entries() {
                let grow = &mut self.vp[s as usize * k..(s as usize + 1) * k];
                for (gj, &d) in grow.iter_mut().zip(dhrow) {
                    *gj += x * d;
                }
            }
        }
    }
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"DFFLCKPT";
const CHECKPOINT_VERSION: u32 = 1;
const CHECKPOINT_HEADER: usize = 8 + 4 + 8 + 4 + 4;

/// Encoder weights tagged with the hash of the vocabulary they were trained on.
///
/// Binary layout, all integers and floats little-endian:
///
/// ```text
/// offset  size            field
/// 0       8               magic "DFFLCKPT"
/// 8       4   u32         format version (1)
/// 12      8   u64         vocabulary hash (Vocabulary::content_hash)
/// 20      4   u32         dim |V|
/// 24      4   u32         rank k
/// 28      4·|V|·k  f32    U, row-major (term-major)
/// ...     4·|V|·k  f32    Vp, row-major
/// ...     4·|V|    f32    b
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub vocab_hash: u64,
    pub params: EncoderParams,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let p = &self.params;
        let mut out = Vec::with_capacity(CHECKPOINT_HEADER + 4 * p.num_params());
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.vocab_hash.to_le_bytes());
        out.extend_from_slice(&(p.dim as u32).to_le_bytes());
        out.extend_from_slice(&(p.rank as u32).to_le_bytes());
        for x in p.u.iter().chain(&p.vp).chain(&p.b) {
            out.extend_from_slice(&(*x as f32).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |reason: &str| Error::corrupt("checkpoint", reason);
        if bytes.len() < CHECKPOINT_HEADER {
            return Err(corrupt("truncated header"));
        }
        if &bytes[..8] != CHECKPOINT_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(8);
        if version != CHECKPOINT_VERSION {
            return Err(Error::corrupt(
                "checkpoint",
                format!("unsupported version {version}"),
            ));
        }
        let vocab_hash = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let dim = u32_at(20) as usize;
        let rank = u32_at(24) as usize;
        let n = dim
            .checked_mul(rank)
            .and_then(|m| m.checked_mul(2))
            .and_then(|m| m.checked_add(dim))
            .ok_or_else(|| corrupt("dimensions overflow"))?;
        if bytes.len() != CHECKPOINT_HEADER + 4 * n {
            return Err(Error::corrupt(
                "checkpoint",
                format!("expected {} bytes, found {}", CHECKPOINT_HEADER + 4 * n, bytes.len()),
            ));
        }
        let values: Vec<f64> = bytes[CHECKPOINT_HEADER..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let (u, rest) = values.split_at(dim * rank);
        let (vp, b) = rest.split_at(dim * rank);
        let params = EncoderParams::from_parts(dim, rank, u.to_vec(), vp.to_vec(), b.to_vec())
            .map_err(|e| Error::corrupt("checkpoint", e.to_string()))?;
        Ok(Self { vocab_hash, params })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
