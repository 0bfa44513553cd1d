use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sort_scalars, Scalar};

pub const DEFAULT_N_BOOT: usize = 1000;
pub const MIN_N_BOOT: usize = 100;
const MIN_SAMPLE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipResult {
    pub statistic: f64,
    /// Share of null replicates whose dip strictly exceeds `statistic`.
    pub p_value: f64,
    pub n_boot: usize,
    pub sample_size: usize,
    pub seed: u64,
}

/// Hartigan's dip of a sample: the sup distance between its empirical CDF
/// and the closest unimodal CDF. Ranges over `[1/(2n), 1/4]`.
pub fn dip_statistic<T: Scalar>(x: &[T]) -> Result<f64> {
    if x.len() < MIN_SAMPLE {
        return Err(Error::SampleTooSmall {
            needed: MIN_SAMPLE,
            got: x.len(),
        });
    }
    let mut sorted: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
    if let Some(i) = sorted.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: i,
            col: 0,
            value: sorted[i].to_string(),
        });
    }
    sort_scalars(&mut sorted);
    Ok(dip_sorted(&sorted))
}

/// Dip of an ascending sample (GCM/LCM cycling, as in Hartigan & Hartigan
/// with the later index fixes). Arrays are 1-based internally.
pub fn dip_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    x.extend_from_slice(sorted);

    let mut dip = 1.0f64;
    if n < 2 || x[n] == x[1] {
        return dip / (2 * n) as f64;
    }

    // indices for the greatest convex minorant
    let mut mn = vec![0usize; n + 1];
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1
                || (x[j] - x[mnj]) * ((mnj - mnmnj) as f64) < (x[mnj] - x[mnmnj]) * ((j - mnj) as f64)
            {
                break;
            }
            mn[j] = mnmnj;
        }
    }
    // and for the least concave majorant
    let mut mj = vec![0usize; n + 1];
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n
                || (x[k] - x[mjk]) * (mjk as f64 - mjmjk as f64)
                    < (x[mjk] - x[mjmjk]) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];
    let (mut low, mut high) = (1usize, n);
    loop {
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        lcm[1] = low;
        let mut i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        let mut d = 0.0f64;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (x[lcmiv] - x[gcmi1]) * (gcmix - gcmi1) as f64 / (x[gcmix] - x[gcmi1]);
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (x[gcmix] - x[lcmiv1]) * (lcmiv - lcmiv1) as f64 / (x[lcmiv] - x[lcmiv1])
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                if ix < 1 {
                    ix = 1;
                }
                if iv > l_lcm {
                    iv = l_lcm;
                }
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }

        if d < dip {
            break;
        }

        // dip of the convex minorant over the current window
        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let mut max_t = 1.0f64;
            let (jb, je) = (gcm[j + 1], gcm[j]);
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    let t = (jj - jb + 1) as f64 - (x[jj] - x[jb]) * c;
                    if max_t < t {
                        max_t = t;
                    }
                }
            }
            if dip_l < max_t {
                dip_l = max_t;
            }
        }
        // and of the concave majorant
        let mut dip_u = 0.0f64;
        for j in ih..l_lcm {
            let mut max_t = 1.0f64;
            let (jb, je) = (lcm[j], lcm[j + 1]);
            if je - jb > 1 && x[je] != x[jb] {
                let c = (je - jb) as f64 / (x[je] - x[jb]);
                for jj in jb..=je {
                    let t = (x[jj] - x[jb]) * c - (jj as f64 - jb as f64 - 1.0);
                    if max_t < t {
                        max_t = t;
                    }
                }
            }
            if dip_u < max_t {
                dip_u = max_t;
            }
        }
        let dipnew = dip_u.max(dip_l);
        if dip < dipnew {
            dip = dipnew;
        }
        // without this check the cycle can repeat forever
        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    dip / (2 * n) as f64
}

/// Sorted dips of `n_boot` uniform samples of size `n`. Replicate `r` draws
/// from its own stream seeded with `seed + r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipNull {
    pub n: usize,
    pub n_boot: usize,
    pub seed: u64,
    dips: Vec<f64>,
}

impl DipNull {
    pub fn simulate(n: usize, n_boot: usize, seed: u64) -> Result<Self> {
        if n < MIN_SAMPLE {
            return Err(Error::SampleTooSmall {
                needed: MIN_SAMPLE,
                got: n,
            });
        }
        if n_boot < MIN_N_BOOT {
            return Err(Error::InvalidArgument(format!(
                "n_boot must be at least {MIN_N_BOOT}, got {n_boot}"
            )));
        }
        let mut dips: Vec<f64> = (0..n_boot as u64)
            .into_par_iter()
            .map_init(
                || vec![0.0f64; n],
                |buf, r| {
                    uniform_order_statistics(seed.wrapping_add(r), buf);
                    dip_sorted(buf)
                },
            )
            .collect();
        dips.sort_unstable_by(|a, b| a.total_cmp(b));
        Ok(DipNull { n, n_boot, seed, dips })
    }

    pub fn dips(&self) -> &[f64] {
        &self.dips
    }

    pub fn p_value(&self, statistic: f64) -> f64 {
        let not_greater = self.dips.partition_point(|d| *d <= statistic);
        (self.dips.len() - not_greater) as f64 / self.dips.len() as f64
    }
}

/// Sorted uniform sample via normalised exponential spacings. The dip is
/// affine invariant, so the final scaling only keeps values in `(0, 1)`.
fn uniform_order_statistics(seed: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for v in out.iter_mut() {
        let e: f64 = Exp1.sample(&mut rng);
        acc += e;
        *v = acc;
    }
    let e: f64 = Exp1.sample(&mut rng);
    let total = acc + e;
    out.iter_mut().for_each(|v| *v /= total);
}

/// Null distributions keyed by `(n, n_boot, seed)`, shared across tests of
/// equally sized samples.
#[derive(Debug, Default)]
pub struct DipNullCache {
    inner: Mutex<HashMap<(usize, usize, u64), Arc<DipNull>>>,
}

impl DipNullCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n: usize, n_boot: usize, seed: u64) -> Result<Arc<DipNull>> {
        let key = (n, n_boot, seed);
        if let Some(hit) = self.inner.lock().expect("dip cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        // simulate outside the lock; a concurrent duplicate is harmless
        let null = Arc::new(DipNull::simulate(n, n_boot, seed)?);
        let mut map = self.inner.lock().expect("dip cache poisoned");
        Ok(map.entry(key).or_insert(null).clone())
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("dip cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn dip_test<T: Scalar>(x: &[T], n_boot: usize, seed: u64) -> Result<DipResult> {
    dip_test_cached(x, n_boot, seed, &DipNullCache::new())
}

pub fn dip_test_cached<T: Scalar>(
    x: &[T],
    n_boot: usize,
    seed: u64,
    cache: &DipNullCache,
) -> Result<DipResult> {
    let statistic = dip_statistic(x)?;
    let null = cache.get(x.len(), n_boot, seed)?;
    Ok(DipResult {
        statistic,
        p_value: null.p_value(statistic),
        n_boot,
        sample_size: x.len(),
        seed,
    })
}
