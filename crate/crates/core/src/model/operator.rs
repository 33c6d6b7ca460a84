use std::collections::BTreeMap;
use std::fmt::Write as _;

use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat};

use crate::error::{Error, Result};

pub type SparseBlock = SparseColMat<usize, c64>;

pub(crate) fn block_from_triplets(
    rows: usize,
    cols: usize,
    entries: &[(usize, usize, c64)],
) -> SparseBlock {
    let t: Vec<_> = entries
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    SparseBlock::try_new_from_triplets(rows, cols, &t).expect("triplet indices in range")
}

/// Sector-blocked sparse operator. Blocks are keyed by
/// `(particles_in, particles_out)`.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    name: String,
    hermitian: bool,
    blocks: BTreeMap<(usize, usize), SparseBlock>,
}

impl BlockOperator {
    pub fn new(name: impl Into<String>, hermitian: bool) -> Self {
        BlockOperator {
            name: name.into(),
            hermitian,
            blocks: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, n_in: usize, n_out: usize, block: SparseBlock) {
        self.blocks.insert((n_in, n_out), block);
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &SparseBlock)> {
        self.blocks.iter()
    }

    /// Diagonal block of sector `n`.
    pub fn block(&self, n: usize) -> Option<&SparseBlock> {
        self.blocks.get(&(n, n))
    }

    pub fn sectors(&self) -> Vec<usize> {
        self.blocks
            .keys()
            .filter(|(a, b)| a == b)
            .map(|&(a, _)| a)
            .collect()
    }

    pub fn is_number_conserving(&self) -> bool {
        self.blocks.keys().all(|(a, b)| a == b)
    }

    pub fn ensure_number_conserving(&self) -> Result<()> {
        if self.is_number_conserving() {
            Ok(())
        } else {
            Err(Error::NotNumberConserving(self.name.clone()))
        }
    }

    pub fn nnz(&self) -> usize {
        self.blocks.values().map(|b| b.compute_nnz()).sum()
    }

    /// Largest `|B − B†|` entry relative to the largest entry, over diagonal blocks.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ((a, b), blk) in &self.blocks {
            if a != b {
                return f64::INFINITY;
            }
            let d = blk.to_dense();
            let scale = max_abs(&d).max(f64::MIN_POSITIVE);
            let n = d.nrows();
            for i in 0..n {
                for j in 0..n {
                    let e = (d[(i, j)] - d[(j, i)].conj()).norm();
                    worst = worst.max(e / scale);
                }
            }
        }
        worst
    }

    pub fn adjoint(&self) -> BlockOperator {
        let mut out = BlockOperator::new(format!("{}†", self.name), self.hermitian);
        for (&(a, b), blk) in &self.blocks {
            let adj = blk
                .as_ref()
                .adjoint()
                .to_col_major()
                .expect("adjoint allocation");
            out.blocks.insert((b, a), adj);
        }
        out
    }

    pub fn scale(&self, c: c64) -> BlockOperator {
        let hermitian = self.hermitian && c.im == 0.0;
        let mut out = BlockOperator::new(self.name.clone(), hermitian);
        for (&k, blk) in &self.blocks {
            out.blocks.insert(k, blk * faer::Scale(c));
        }
        out
    }

    /// `self + c·other`, block by block.
    pub fn add_scaled(&self, c: c64, other: &BlockOperator) -> Result<BlockOperator> {
        let hermitian = self.hermitian && other.hermitian && c.im == 0.0;
        let mut out = BlockOperator::new(self.name.clone(), hermitian);
        for (&k, blk) in &self.blocks {
            out.blocks.insert(k, blk.clone());
        }
        for (&k, blk) in &other.blocks {
            let scaled = blk * faer::Scale(c);
            let merged = match out.blocks.get(&k) {
                Some(existing) => {
                    if existing.nrows() != scaled.nrows() || existing.ncols() != scaled.ncols() {
                        return Err(Error::Dimension(format!(
                            "blocks {:?} of `{}` and `{}` differ in shape",
                            k, self.name, other.name
                        )));
                    }
                    existing + &scaled
                }
                None => scaled,
            };
            out.blocks.insert(k, merged);
        }
        Ok(out)
    }

    /// Operator product on the common number-conserving sectors.
    pub fn product(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.ensure_number_conserving()?;
        other.ensure_number_conserving()?;
        let mut out = BlockOperator::new(format!("{}·{}", self.name, other.name), false);
        for (&k, a) in &self.blocks {
            if let Some(b) = other.blocks.get(&k) {
                if a.ncols() != b.nrows() {
                    return Err(Error::Dimension(format!("sector {} shapes differ", k.0)));
                }
                out.blocks.insert(k, a * b);
            }
        }
        Ok(out)
    }

    /// `[a, b] = ab − ba`.
    pub fn commutator(a: &BlockOperator, b: &BlockOperator) -> Result<BlockOperator> {
        let ab = a.product(b)?;
        let ba = b.product(a)?;
        Ok(ab
            .add_scaled(c64::new(-1.0, 0.0), &ba)?
            .rename(format!("[{},{}]", a.name, b.name)))
    }

    pub fn to_dense(&self, n: usize) -> Option<Mat<c64>> {
        self.block(n).map(|b| b.to_dense())
    }

    /// `y = B v` in sector `n`.
    pub fn apply(&self, n: usize, v: &[c64]) -> Result<Vec<c64>> {
        let b = self
            .block(n)
            .ok_or_else(|| Error::Dimension(format!("`{}` has no sector {n}", self.name)))?;
        if b.ncols() != v.len() {
            return Err(Error::Dimension(format!(
                "vector of length {} for block of width {}",
                v.len(),
                b.ncols()
            )));
        }
        let mut y = vec![c64::new(0.0, 0.0); b.nrows()];
        let b = b.as_ref();
        let col_ptr = b.col_ptr();
        let row_idx = b.row_idx();
        let val = b.val();
        for (j, &vj) in v.iter().enumerate() {
            if vj == c64::new(0.0, 0.0) {
                continue;
            }
            for k in col_ptr[j]..col_ptr[j + 1] {
                y[row_idx[k]] += val[k] * vj;
            }
        }
        Ok(y)
    }

    /// Largest singular value over all blocks.
    pub fn spectral_norm(&self) -> Result<f64> {
        let mut best: f64 = 0.0;
        for blk in self.blocks.values() {
            let d = blk.to_dense();
            if d.nrows() == 0 || d.ncols() == 0 {
                continue;
            }
            let s = d
                .singular_values()
                .map_err(|e| Error::Eigen(format!("{e:?}")))?;
            best = best.max(s.first().copied().unwrap_or(0.0));
        }
        Ok(best)
    }

    /// Coordinate-list text: `n_in n_out row col re im` per nonzero.
    pub fn to_coo_text(&self) -> String {
        let mut s = format!("# {} hermitian={}\n", self.name, self.hermitian);
        for (&(a, b), blk) in &self.blocks {
            for t in blk.triplet_iter() {
                let _ = writeln!(
                    s,
                    "{a} {b} {} {} {:.17e} {:.17e}",
                    t.row, t.col, t.val.re, t.val.im
                );
            }
        }
        s
    }
}

pub(crate) fn max_abs(m: &Mat<c64>) -> f64 {
    let mut best: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}
