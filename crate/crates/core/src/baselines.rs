//! Block-correlation surrogates (BCM with equal blocks, VBCM with variable
//! blocks) and matrix-approximation error.

use std::ops::Range;

use crate::channel::{sampler_exact, SeededSampler};
use crate::matrix::Matrix;
use crate::spectral::{eigendecompose_dense, CorrelationMatrix};
use crate::{Error, Result};

/// How each block's correlation coefficient is fitted.
pub const RHO_FIT_RULE: &str =
    "rho_d = mean of the true off-diagonal correlations inside block d, clamped to [-1/(B_d-1), 1]";
/// How VBCM splits the ports.
pub const VBCM_RULE: &str =
    "greedy scan; port n opens a new block when R(anchor, n) < 0, anchor = first port of the current block";
/// How BCM sizes its blocks.
pub const BCM_RULE: &str = "D contiguous blocks of size floor(N/D) or ceil(N/D), larger blocks first";

/// Contiguous blocks covering `0..N` in order, each with an equi-correlation
/// coefficient valid for a PSD block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    blocks: Vec<Range<usize>>,
    rho: Vec<f64>,
}

impl BlockPartition {
    /// Partition from explicit blocks and coefficients.
    pub fn new(blocks: Vec<Range<usize>>, rho: Vec<f64>) -> Result<Self> {
        if blocks.is_empty() || blocks.len() != rho.len() {
            return Err(Error::param("need one coefficient per block and at least one block"));
        }
        let mut next = 0;
        for b in &blocks {
            if b.start != next || b.end <= b.start {
                return Err(Error::param(format!("blocks must be contiguous and non-empty, got {blocks:?}")));
            }
            next = b.end;
        }
        for (b, &r) in blocks.iter().zip(&rho) {
            if !rho_valid(b.len(), r) {
                return Err(Error::param(format!("rho = {r} is not valid for a block of size {}", b.len())));
            }
        }
        Ok(BlockPartition { blocks, rho })
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Total ports covered.
    pub fn n(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }
}

fn rho_floor(size: usize) -> f64 {
    if size > 1 {
        -1.0 / (size as f64 - 1.0)
    } else {
        0.0
    }
}

fn rho_valid(size: usize, rho: f64) -> bool {
    if size == 1 {
        rho == 0.0
    } else {
        rho >= rho_floor(size) && rho <= 1.0
    }
}

/// Mean off-diagonal correlation inside `range`, clamped. Singletons get 0.
fn fit_rho(r: &CorrelationMatrix, range: &Range<usize>) -> f64 {
    let b = range.len();
    if b < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in range.clone() {
        for j in range.clone() {
            if i != j {
                sum += r.entry(i, j);
            }
        }
    }
    (sum / (b * (b - 1)) as f64).clamp(rho_floor(b), 1.0)
}

fn fitted(r: &CorrelationMatrix, blocks: Vec<Range<usize>>) -> BlockPartition {
    let rho = blocks.iter().map(|b| fit_rho(r, b)).collect();
    BlockPartition { blocks, rho }
}

/// `d` near-equal contiguous blocks over the `n` ports of `r`.
pub fn bcm_partition(n: usize, d: usize, r: &CorrelationMatrix) -> Result<BlockPartition> {
    if n != r.n() {
        return Err(Error::param(format!("N = {n} but the correlation matrix is {}×{}", r.n(), r.n())));
    }
    if d == 0 || d > n {
        return Err(Error::param(format!("block count must be in 1..={n}, got {d}")));
    }
    let (base, extra) = (n / d, n % d);
    let mut blocks = Vec::with_capacity(d);
    let mut start = 0;
    for i in 0..d {
        let len = base + usize::from(i < extra);
        blocks.push(start..start + len);
        start += len;
    }
    Ok(fitted(r, blocks))
}

/// Greedy variable-size blocks: a block ends just before the first port whose
/// correlation with the block's first port is negative.
pub fn vbcm_partition(r: &CorrelationMatrix) -> BlockPartition {
    let n = r.n();
    let mut blocks = Vec::new();
    let mut anchor = 0;
    for port in 1..n {
        if r.entry(anchor, port) < 0.0 {
            blocks.push(anchor..port);
            anchor = port;
        }
    }
    blocks.push(anchor..n);
    fitted(r, blocks)
}

/// Block-diagonal matrix with `(1-ρ_d)I + ρ_d 𝟙𝟙ᵀ` on each block.
pub fn block_covariance(partition: &BlockPartition, n: usize) -> Result<Matrix> {
    if partition.n() != n {
        return Err(Error::param(format!("partition covers {} ports, expected {n}", partition.n())));
    }
    let mut m = Matrix::zeros(n, n);
    for (b, &rho) in partition.blocks.iter().zip(&partition.rho) {
        if !rho_valid(b.len(), rho) {
            return Err(Error::numerical(format!("rho = {rho} escaped the PSD range for block {b:?}")));
        }
        for i in b.clone() {
            for j in b.clone() {
                m[(i, j)] = if i == j { 1.0 } else { rho };
            }
        }
    }
    Ok(m)
}

/// Exact sampler on the block-diagonal surrogate covariance.
pub fn block_sampler(partition: &BlockPartition, seed: u64) -> Result<SeededSampler> {
    let cov = block_covariance(partition, partition.n())?;
    Ok(sampler_exact(&eigendecompose_dense(&cov)?, seed))
}

/// `‖R - approx‖_F / ‖R‖_F`.
pub fn frobenius_rel_error(r: &CorrelationMatrix, approx: &Matrix) -> Result<f64> {
    let dense = r.to_dense();
    if approx.rows() != dense.rows() || approx.cols() != dense.cols() {
        return Err(Error::param(format!(
            "approximation is {}×{}, correlation matrix is {}×{}",
            approx.rows(),
            approx.cols(),
            dense.rows(),
            dense.cols()
        )));
    }
    Ok(dense.sub(approx)?.frobenius_norm() / dense.frobenius_norm())
}
