//! Counting 0/1 knapsack solutions `|{ v in {0,1}^l : sum p_i v_i = q }|`.

use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{format_rational, Rational};

pub const MAX_ITEMS: usize = 40;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KnapsackInstance {
    pub weights: Vec<Rational>,
    pub target: Rational,
}

impl KnapsackInstance {
    pub fn new(weights: Vec<Rational>, target: Rational) -> Self {
        Self { weights, target }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Warnings for inputs outside the nonnegative setting where a solution
    /// count is known to be an intersection size of a hyperplane.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.weights.iter().any(Signed::is_negative) {
            out.push(
                "negative weights: the count is exact but outside the nonnegative knapsack setting"
                    .into(),
            );
        }
        if self.target.is_negative() {
            out.push("negative target weight".into());
        }
        out
    }

    /// Weights and target multiplied by the common denominator.
    fn integer_form(&self) -> (Vec<BigInt>, BigInt) {
        let d = self
            .weights
            .iter()
            .fold(self.target.denom().clone(), |acc, x| acc.lcm(x.denom()));
        let scale = |x: &Rational| x.numer() * (&d / x.denom());
        (
            self.weights.iter().map(scale).collect(),
            scale(&self.target),
        )
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct KnapsackReport {
    pub count: u64,
    #[serde(rename = "ℓ")]
    pub items: usize,
    pub q: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn report(inst: &KnapsackInstance) -> Result<KnapsackReport> {
    Ok(KnapsackReport {
        count: count_knapsack(inst)?,
        items: inst.len(),
        q: format_rational(&inst.target),
        warnings: inst.warnings(),
    })
}

/// Meet in the middle: subset sums of each half, sorted, joined by a
/// two-pointer sweep.
pub fn count_knapsack(inst: &KnapsackInstance) -> Result<u64> {
    if inst.len() > MAX_ITEMS {
        return Err(Error::Capacity {
            what: "knapsack item count",
            limit: MAX_ITEMS,
            got: inst.len(),
        });
    }
    let (weights, target) = inst.integer_form();
    let magnitude: BigInt = weights.iter().map(|w| w.abs()).sum::<BigInt>() + target.abs();
    if magnitude < BigInt::from(i128::MAX / 2) {
        let w: Vec<i128> = weights.iter().map(|x| x.to_i128().unwrap()).collect();
        Ok(meet_in_the_middle(&w, target.to_i128().unwrap(), 0))
    } else {
        Ok(meet_in_the_middle(&weights, target, BigInt::from(0)))
    }
}

fn subset_sums<T: Clone + Add<Output = T>>(weights: &[T], zero: T) -> Vec<T> {
    let mut sums = Vec::with_capacity(1 << weights.len());
    sums.push(zero);
    for w in weights {
        for i in 0..sums.len() {
            let s = sums[i].clone() + w.clone();
            sums.push(s);
        }
    }
    sums
}

fn meet_in_the_middle<T>(weights: &[T], target: T, zero: T) -> u64
where
    T: Clone + Ord + Add<Output = T>,
{
    let (left, right) = weights.split_at(weights.len() / 2);
    let mut a = subset_sums(left, zero.clone());
    let mut b = subset_sums(right, zero);
    a.sort_unstable();
    b.sort_unstable();
    let mut count = 0u64;
    let (mut i, mut j) = (0, b.len());
    while i < a.len() && j > 0 {
        let s = a[i].clone() + b[j - 1].clone();
        match s.cmp(&target) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j -= 1,
            std::cmp::Ordering::Equal => {
                let run_a = a[i..].iter().take_while(|x| **x == a[i]).count();
                let run_b = b[..j].iter().rev().take_while(|x| **x == b[j - 1]).count();
                count += (run_a * run_b) as u64;
                i += run_a;
                j -= run_b;
            }
        }
    }
    count
}

/// Direct enumeration of all `2^l` subsets in rational arithmetic, visited
/// in Gray-code order so each step adds or removes one weight.
pub fn count_knapsack_naive(inst: &KnapsackInstance) -> u64 {
    let l = inst.len();
    assert!(l < 64);
    let mut sum = Rational::zero();
    let mut v = 0u64;
    let mut count = (sum == inst.target) as u64;
    for i in 1..1u64 << l {
        let bit = i.trailing_zeros() as usize;
        v ^= 1 << bit;
        if v >> bit & 1 == 1 {
            sum += &inst.weights[bit];
        } else {
            sum -= &inst.weights[bit];
        }
        count += (sum == inst.target) as u64;
    }
    count
}

/// `C(n, r)` for small arguments.
pub fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratio};

    fn inst(w: &[i64], q: i64) -> KnapsackInstance {
        KnapsackInstance::new(w.iter().map(|&x| rat(x)).collect(), rat(q))
    }

    #[test]
    fn examples() {
        assert_eq!(count_knapsack(&inst(&[1, 1, 1, 1], 2)).unwrap(), 6);
        assert_eq!(count_knapsack(&inst(&[1, 2, 3], 3)).unwrap(), 2);
        assert_eq!(count_knapsack(&inst(&[], 0)).unwrap(), 1);
        assert_eq!(count_knapsack(&inst(&[], 1)).unwrap(), 0);
    }

    #[test]
    fn rational_and_negative_weights() {
        let i = KnapsackInstance::new(vec![ratio(1, 2), ratio(1, 3), ratio(1, 6), rat(-1)], rat(0));
        // {} and {1/2, 1/3, 1/6, -1}
        assert_eq!(count_knapsack(&i).unwrap(), 2);
        assert_eq!(count_knapsack_naive(&i), 2);
        assert_eq!(i.warnings().len(), 1);
    }

    #[test]
    fn capacity_limit() {
        let big = inst(&[1; 41], 3);
        assert!(matches!(count_knapsack(&big), Err(Error::Capacity { .. })));
        assert_eq!(
            count_knapsack(&inst(&[1; 40], 20)).unwrap(),
            binomial(40, 20)
        );
    }

    #[test]
    fn huge_weights_use_bigints() {
        let w = Rational::from_integer(BigInt::from(10).pow(45));
        let i = KnapsackInstance::new(vec![w.clone(), w.clone(), w.clone()], w * rat(2));
        assert_eq!(count_knapsack(&i).unwrap(), 3);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }
}
