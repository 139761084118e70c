//! Parametric model families, block weight schemes, and reproducible
//! multinomial sampling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::model::{CellModel, CountVector, WeightVector};
use crate::real::{cast, cast_usize, Real};

/// A named probability model over `k` cells.
///
/// The two-block family puts mass `r/k` on the first half of the cells and
/// `(2-r)/k` on the rest; the four-block variant splits the light half into
/// `1.5r'/k` and `0.5r'/k` quarters; the sparse family concentrates
/// `(160-19r)/(8k)` on the last 5% of cells and spreads `r/(8k)` over the
/// other 95%.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec<R> {
    Equiprobable { k: usize },
    Family1 { k: usize, r: R },
    Family2 { k: usize, r_prime: R },
    Family3 { k: usize, r: R },
    Custom { probs: Vec<R> },
}

impl<R: Real> FamilySpec<R> {
    pub fn k(&self) -> usize {
        match self {
            Self::Equiprobable { k }
            | Self::Family1 { k, .. }
            | Self::Family2 { k, .. }
            | Self::Family3 { k, .. } => *k,
            Self::Custom { probs } => probs.len(),
        }
    }

    pub fn build_model(&self) -> Result<CellModel<R>> {
        match self {
            Self::Equiprobable { k } => CellModel::equiprobable(*k),
            Self::Family1 { k, r } => {
                let k = *k;
                let r = *r;
                if k < 2 || k % 2 != 0 {
                    return Err(GofError::InvalidParameter(format!(
                        "two-block family needs an even k >= 2, got {k}"
                    )));
                }
                check_open_interval(r, 0.0, 2.0, "r")?;
                let k_r = cast_usize::<R>(k);
                let low = r / k_r;
                let high = (cast::<R>(2.0) - r) / k_r;
                let mut probs = vec![low; k / 2];
                probs.extend(vec![high; k / 2]);
                CellModel::new(probs)
            }
            Self::Family2 { k, r_prime } => {
                let k = *k;
                let r = *r_prime;
                if k < 4 || k % 4 != 0 {
                    return Err(GofError::InvalidParameter(format!(
                        "four-block family needs k divisible by 4, got {k}"
                    )));
                }
                check_open_interval(r, 0.0, 2.0, "r_prime")?;
                let k_r = cast_usize::<R>(k);
                let mut probs = vec![cast::<R>(1.5) * r / k_r; k / 4];
                probs.extend(vec![cast::<R>(0.5) * r / k_r; k / 4]);
                probs.extend(vec![(cast::<R>(2.0) - r) / k_r; k / 2]);
                CellModel::new(probs)
            }
            Self::Family3 { k, r } => {
                let k = *k;
                let r = *r;
                if k < 20 || k % 20 != 0 {
                    return Err(GofError::InvalidParameter(format!(
                        "sparse family needs k to be a multiple of 20, got {k}"
                    )));
                }
                check_open_interval(r, 0.0, 8.0, "r")?;
                let k_r = cast_usize::<R>(k);
                let eight = cast::<R>(8.0);
                let light = r / (eight * k_r);
                let heavy = (cast::<R>(160.0) - cast::<R>(19.0) * r) / (eight * k_r);
                let mut probs = vec![light; k / 20 * 19];
                probs.extend(vec![heavy; k / 20]);
                CellModel::new(probs)
            }
            Self::Custom { probs } => CellModel::new(probs.clone()),
        }
    }
}

fn check_open_interval<R: Real>(value: R, lo: f64, hi: f64, name: &str) -> Result<()> {
    if !(value > cast(lo) && value < cast(hi)) {
        return Err(GofError::InvalidParameter(format!(
            "{name} must lie strictly in ({lo}, {hi}), got {value}"
        )));
    }
    Ok(())
}

/// Block weights: `k0 = round(h k)` cells receive `k/k0`, the rest zero.
///
/// `active_low_indices` selects whether the leading or trailing cells carry
/// the weight.
pub fn topk0_weights<R: Real>(
    k: usize,
    h: R,
    active_low_indices: bool,
) -> Result<WeightVector<R>> {
    check_open_interval(h, 0.0, 1.0, "h")?;
    let k0 = (h * cast_usize::<R>(k))
        .round()
        .to_usize()
        .ok_or_else(|| GofError::InvalidParameter("h*k does not round to an integer".into()))?;
    if k0 == 0 || k0 >= k {
        return Err(GofError::InvalidParameter(format!(
            "h*k must round to an integer strictly between 0 and k, got k0={k0} for k={k}"
        )));
    }
    let weight = cast_usize::<R>(k) / cast_usize::<R>(k0);
    let mut weights = vec![R::zero(); k];
    let active = if active_low_indices {
        &mut weights[..k0]
    } else {
        &mut weights[k - k0..]
    };
    for w in active {
        *w = weight;
    }
    WeightVector::new(weights)
}

/// Seed of one replicate: a study-level seed plus the replicate's stream
/// index. The pair fully determines the sampled counts, independent of
/// platform and thread schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSeed {
    pub seed: u64,
    pub stream: u64,
}

impl SamplerSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    fn rng(self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

/// Walker/Vose alias table for O(1) categorical draws after an O(k) build.
#[derive(Clone, Debug)]
pub struct AliasTable<R> {
    accept: Vec<R>,
    alias: Vec<u32>,
}

impl<R: Real> AliasTable<R> {
    pub fn new(model: &CellModel<R>) -> Self {
        let probs = model.probs();
        let k = probs.len();
        assert!(k <= u32::MAX as usize, "cell count exceeds alias table range");
        let total: R = probs.iter().copied().sum();
        let k_r = cast_usize::<R>(k);

        let mut scaled: Vec<R> = probs.iter().map(|&p| p * k_r / total).collect();
        let mut accept = vec![R::one(); k];
        let mut alias: Vec<u32> = (0..k as u32).collect();
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, &s) in scaled.iter().enumerate() {
            if s < R::one() {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            accept[s as usize] = scaled[s as usize];
            alias[s as usize] = l;
            let remainder = (scaled[l as usize] + scaled[s as usize]) - R::one();
            scaled[l as usize] = remainder;
            if remainder < R::one() {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Leftovers in either stack are within rounding of 1.
        for &i in small.iter().chain(large.iter()) {
            accept[i as usize] = R::one();
            alias[i as usize] = i;
        }
        Self { accept, alias }
    }

    pub fn k(&self) -> usize {
        self.accept.len()
    }

    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let k = self.accept.len() as u64;
        // Multiply-shift maps a uniform u64 onto 0..k with O(k/2^64) bias.
        let cell = ((rng.next_u64() as u128 * k as u128) >> 64) as usize;
        let u = cast::<R>((rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0));
        if u < self.accept[cell] {
            cell
        } else {
            self.alias[cell] as usize
        }
    }

    /// Accumulates `n` categorical draws into `counts`, which is zeroed
    /// first.
    pub fn sample_counts_into(&self, n: u64, seed: SamplerSeed, counts: &mut Vec<u64>) {
        counts.clear();
        counts.resize(self.accept.len(), 0);
        let mut rng = seed.rng();
        for _ in 0..n {
            counts[self.draw(&mut rng)] += 1;
        }
    }
}

/// Draws one multinomial replicate of `n` events from `model`.
pub fn sample_counts<R: Real>(model: &CellModel<R>, n: u64, seed: SamplerSeed) -> CountVector {
    let table = AliasTable::new(model);
    let mut counts = Vec::new();
    table.sample_counts_into(n, seed, &mut counts);
    CountVector::new(counts).expect("sampled counts total n")
}
