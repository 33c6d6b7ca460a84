use crate::error::{Error, Result};

/// Occupation basis of `n` fermions on `l` sites. Bit `x` of a word is `n_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSector {
    sites: usize,
    particles: usize,
    states: Vec<u32>,
}

impl FockSector {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        if sites == 0 || sites > 30 {
            return Err(Error::Dimension(format!("{sites} sites do not fit a word")));
        }
        if particles > sites {
            return Err(Error::Dimension(format!(
                "{particles} particles on {sites} sites"
            )));
        }
        let mut states = Vec::with_capacity(binomial(sites, particles));
        if particles == 0 {
            states.push(0);
        } else {
            // Gosper's hack enumerates words of fixed popcount in increasing order.
            let limit = 1u64 << sites;
            let mut w: u64 = (1u64 << particles) - 1;
            while w < limit {
                states.push(w as u32);
                let c = w & w.wrapping_neg();
                let r = w + c;
                w = (((r ^ w) >> 2) / c) | r;
            }
        }
        Ok(FockSector {
            sites,
            particles,
            states,
        })
    }

    /// All sectors `n = 0..=l`.
    pub fn all(sites: usize) -> Result<Vec<Self>> {
        (0..=sites).map(|n| Self::new(sites, n)).collect()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u32 {
        self.states[i]
    }

    pub fn index_of(&self, word: u32) -> Option<usize> {
        self.states.binary_search(&word).ok()
    }
}

pub fn occupied(word: u32, x: usize) -> bool {
    (word >> x) & 1 == 1
}

/// Sign of `a†_i a_j |word⟩` for `i ≠ j`, creation operators ordered by site.
pub fn hop_sign(word: u32, i: usize, j: usize) -> f64 {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let mask = ((1u32 << hi) - 1) & !((1u32 << (lo + 1)) - 1);
    if (word & mask).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Applies `a†_i a_j` to a basis word, returning the image and its sign.
pub fn apply_hop(word: u32, i: usize, j: usize) -> Option<(u32, f64)> {
    if i == j {
        return occupied(word, j).then_some((word, 1.0));
    }
    if !occupied(word, j) || occupied(word, i) {
        return None;
    }
    let sign = hop_sign(word, i, j);
    Some((word ^ (1 << j) ^ (1 << i), sign))
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
