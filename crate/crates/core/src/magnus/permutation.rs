use num_rational::Rational64;

use crate::error::{Error, Result};

/// Element of the symmetric group `S_n`, stored as its one-line image
/// `(π(1), …, π(n))` with values in `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty permutation".into()));
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!(
                    "{image:?} is not a bijection on 1..={n}"
                )));
            }
            seen[v - 1] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (1..=n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// All of `S_n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut current: Vec<usize> = (1..=n).collect();
        let mut out = vec![Permutation {
            image: current.clone(),
        }];
        // Standard next-permutation step.
        while let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) {
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
            out.push(Permutation {
                image: current.clone(),
            });
        }
        out
    }
}

/// Number of positions `i` with `π(i) > π(i+1)`.
pub fn descent_count(p: &Permutation) -> usize {
    p.image.windows(2).filter(|w| w[0] > w[1]).count()
}

/// Magnus coefficient `C_{π,n} = (−1)^d / (n·binom(n−1, d))` for a
/// permutation of length `n` with `d` descents, kept as an exact rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MagnusCoefficient {
    pub n: usize,
    pub descents: usize,
    pub value: Rational64,
}

impl MagnusCoefficient {
    pub fn to_f64(&self) -> f64 {
        *self.value.numer() as f64 / *self.value.denom() as f64
    }
}

pub fn magnus_coefficient(n: usize, descents: usize) -> Result<MagnusCoefficient> {
    if n == 0 || descents >= n {
        return Err(Error::DescentOutOfRange { n, descents });
    }
    let sign = if descents.is_multiple_of(2) { 1 } else { -1 };
    let denom = n as i64 * binomial(n as i64 - 1, descents as i64);
    Ok(MagnusCoefficient {
        n,
        descents,
        value: Rational64::new(sign, denom),
    })
}

pub(crate) fn binomial(n: i64, k: i64) -> i64 {
    let k = k.min(n - k);
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn descents() {
        assert_eq!(descent_count(&perm(&[1, 2, 3])), 0);
        assert_eq!(descent_count(&perm(&[2, 1])), 1);
        assert_eq!(descent_count(&perm(&[3, 1, 2])), 1);
        assert_eq!(descent_count(&perm(&[3, 2, 1])), 2);
    }

    #[test]
    fn invalid_permutations() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 3]).is_err());
        assert!(Permutation::new(vec![]).is_err());
    }

    #[test]
    fn enumeration_covers_group() {
        for n in 1..=5 {
            let all = Permutation::all(n);
            let expected: usize = (1..=n).product();
            assert_eq!(all.len(), expected);
            let unique: std::collections::HashSet<_> = all.iter().cloned().collect();
            assert_eq!(unique.len(), expected);
            assert_eq!(all[0], Permutation::identity(n));
        }
    }

    #[test]
    fn coefficient_values() {
        let c = |n, d| magnus_coefficient(n, d).unwrap().value;
        assert_eq!(c(1, 0), Rational64::new(1, 1));
        assert_eq!(c(2, 0), Rational64::new(1, 2));
        assert_eq!(c(2, 1), Rational64::new(-1, 2));
        assert_eq!(c(3, 0), Rational64::new(1, 3));
        assert_eq!(c(3, 1), Rational64::new(-1, 6));
        assert_eq!(c(3, 2), Rational64::new(1, 3));
        assert!(matches!(
            magnus_coefficient(3, 3),
            Err(Error::DescentOutOfRange { .. })
        ));
    }

    #[test]
    fn coefficient_normalization_is_exact() {
        for n in 1..=7usize {
            for d in 0..n {
                let c = magnus_coefficient(n, d).unwrap().value;
                let scaled = c * Rational64::from_integer(n as i64 * binomial(n as i64 - 1, d as i64));
                assert_eq!(scaled * scaled, Rational64::from_integer(1));
            }
        }
    }

    #[test]
    fn coefficients_sum_to_constant_generator_value() {
        // For a constant generator every product equals A^n, so Σ_π C_{π,n}
        // must reproduce Ω_1 = hA for n = 1 and vanish for n ≥ 2.
        for n in 1..=5 {
            let total: Rational64 = Permutation::all(n)
                .iter()
                .map(|p| magnus_coefficient(n, descent_count(p)).unwrap().value)
                .sum();
            let expected = if n == 1 { 1 } else { 0 };
            assert_eq!(total, Rational64::from_integer(expected), "n = {n}");
        }
    }

    #[test]
    fn eulerian_counts() {
        let mut counts = [0usize; 5];
        for p in Permutation::all(5) {
            counts[descent_count(&p)] += 1;
        }
        assert_eq!(counts, [1, 26, 66, 26, 1]);
    }
}
