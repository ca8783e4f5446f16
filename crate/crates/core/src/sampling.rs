//! Seeded random maps for the property suites.
//!
//! Two entry distributions are provided. `Uniform` draws every entry from
//! `{-2, -1, -1/2, 0, 1/2, 1, 2}`. `NearBoolean` draws `0` with probability
//! 0.45, `1` with 0.35, `-1` with 0.15 and a value from `{2, 1/2, -1/2}` with
//! 0.05, which produces far more high-count maps. All draws come from
//! `ChaCha8Rng`, so a seed fixes every output.

use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, rat, ratio, RatMatrix, Rational};

pub use rand::SeedableRng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryDistribution {
    #[default]
    Uniform,
    NearBoolean,
}

impl FromStr for EntryDistribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "near-boolean" => Ok(Self::NearBoolean),
            _ => Err(format!("unknown entry distribution `{s}`")),
        }
    }
}

impl EntryDistribution {
    pub fn sample(self, rng: &mut SampleRng) -> Rational {
        match self {
            Self::Uniform => {
                let choices = [(-2, 1), (-1, 1), (-1, 2), (0, 1), (1, 2), (1, 1), (2, 1)];
                let (n, d) = choices[rng.gen_range(0..choices.len())];
                ratio(n, d)
            }
            Self::NearBoolean => {
                let x: f64 = rng.gen();
                if x < 0.45 {
                    rat(0)
                } else if x < 0.80 {
                    rat(1)
                } else if x < 0.95 {
                    rat(-1)
                } else {
                    [rat(2), ratio(1, 2), ratio(-1, 2)][rng.gen_range(0..3)].clone()
                }
            }
        }
    }
}

pub fn random_matrix(
    rng: &mut SampleRng,
    rows: usize,
    cols: usize,
    dist: EntryDistribution,
) -> RatMatrix {
    let data = (0..rows * cols).map(|_| dist.sample(rng)).collect();
    RatMatrix::new(rows, cols, data).expect("positive dimensions")
}

/// A random map `R^k -> R^m` with `m` uniform in `1..=k+1`.
pub fn random_map(rng: &mut SampleRng, k: usize, dist: EntryDistribution) -> RatMatrix {
    let m = rng.gen_range(1..=k + 1);
    random_matrix(rng, m, k, dist)
}

/// Rational orthogonal matrix `(I - S)(I + S)^-1` for a random skew `S`.
pub fn random_orthogonal(rng: &mut SampleRng, k: usize) -> RatMatrix {
    let mut s = RatMatrix::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let x = ratio(rng.gen_range(-3..=3), rng.gen_range(1..=3));
            s.set(i, j, x.clone());
            s.set(j, i, -x);
        }
    }
    let id = RatMatrix::identity(k);
    let minus = sum(&id, &s.neg());
    let plus = sum(&id, &s);
    let inv = linalg::inverse(&plus)
        .expect("square")
        .expect("I + S is invertible for skew S");
    minus.mul(&inv).expect("square")
}

fn sum(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let data = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x + y)
        .collect();
    RatMatrix::new(a.rows(), a.cols(), data).expect("same shape")
}

fn pad_rows(l: RatMatrix, extra: usize) -> RatMatrix {
    if extra == 0 {
        return l;
    }
    l.stack(&RatMatrix::zeros(extra, l.cols()))
        .expect("same column count")
}

/// A random isometry `R^k -> R^m`: either a rational orthogonal matrix or a
/// signed permutation, padded with up to `k` zero rows.
pub fn random_isometry(rng: &mut SampleRng, k: usize) -> RatMatrix {
    let square = if rng.gen_bool(0.5) {
        random_orthogonal(rng, k)
    } else {
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(rng);
        let mut l = RatMatrix::zeros(k, k);
        for (c, &r) in perm.iter().enumerate() {
            l.set(r, c, if rng.gen_bool(0.5) { rat(1) } else { rat(-1) });
        }
        l
    };
    let extra = rng.gen_range(0..=k);
    pad_rows(square, extra)
}

/// A random contraction `R^k -> R^m`, certified exactly before it is
/// returned. Four generators are mixed: signed partial permutations
/// (sparse, high counts), rational orthogonal matrices, orthogonal times a
/// diagonal with entries in `[-1, 1]`, and a dense draw scaled down by an
/// integer at least its Frobenius norm.
pub fn random_contraction(rng: &mut SampleRng, k: usize, dist: EntryDistribution) -> RatMatrix {
    loop {
        let candidate = match rng.gen_range(0..4) {
            0 => {
                let m = rng.gen_range(1..=k + 1);
                let mut l = RatMatrix::zeros(m, k);
                let mut rows: Vec<usize> = (0..m).collect();
                rows.shuffle(rng);
                for c in 0..k {
                    // mostly distinct target rows; occasional collisions get rejected
                    let r = match rows.get(c) {
                        Some(&r) if rng.gen_bool(0.9) => r,
                        _ => rng.gen_range(0..m),
                    };
                    let v = [rat(0), rat(1), rat(1), rat(-1)][rng.gen_range(0..4)].clone();
                    if !v.is_zero() {
                        l.set(r, c, v);
                    }
                }
                l
            }
            1 => {
                let extra = rng.gen_range(0..=1);
                pad_rows(random_orthogonal(rng, k), extra)
            }
            2 => {
                let q = random_orthogonal(rng, k);
                let mut d = RatMatrix::zeros(k, k);
                for i in 0..k {
                    let v = [rat(0), ratio(1, 2), rat(1), rat(-1)][rng.gen_range(0..4)].clone();
                    d.set(i, i, v);
                }
                q.mul(&d).expect("square")
            }
            _ => {
                let l = random_map(rng, k, dist);
                let f = l.frobenius_sq();
                // integer s with s^2 >= ||L||_F^2
                let bound = (f.numer() + f.denom() - 1u32) / f.denom();
                let mut s = bound.sqrt();
                if &s * &s < bound {
                    s += 1u32;
                }
                let s = s.to_i64().unwrap_or(1).max(1);
                l.scale(&ratio(1, s))
            }
        };
        if linalg::is_contraction(&candidate) {
            return candidate;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_draws_repeat() {
        let a: Vec<RatMatrix> = {
            let mut r = rng(9);
            (0..5)
                .map(|_| random_map(&mut r, 4, EntryDistribution::Uniform))
                .collect()
        };
        let b: Vec<RatMatrix> = {
            let mut r = rng(9);
            (0..5)
                .map(|_| random_map(&mut r, 4, EntryDistribution::Uniform))
                .collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn orthogonal_draws_are_isometries() {
        let mut r = rng(1);
        for k in 1..=5 {
            assert!(linalg::is_isometry(&random_orthogonal(&mut r, k)));
        }
    }

    #[test]
    fn isometry_draws_are_certified() {
        let mut r = rng(3);
        for _ in 0..20 {
            assert!(linalg::is_isometry(&random_isometry(&mut r, 4)));
        }
    }

    #[test]
    fn contraction_draws_are_certified() {
        let mut r = rng(2);
        for _ in 0..40 {
            let l = random_contraction(&mut r, 4, EntryDistribution::NearBoolean);
            assert!(linalg::is_contraction(&l));
            assert_eq!(l.cols(), 4);
        }
    }
}
