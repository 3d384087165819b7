use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn binomial(n: u64, k: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// `M^{(2)}, …, M^{(2 p_max)}` from the induction
/// `M^{(2p)} = (2^p - 2)^{-1} Σ_{k=1}^{p-1} C(2p, 2k) M^{(2k)} M^{(2p-2k)}`,
/// `M^{(2)} = 1`, in exact rational arithmetic.
pub fn gaussian_even_moments_exact(p_max: u32) -> Vec<BigRational> {
    let mut m: Vec<BigRational> = Vec::with_capacity(p_max as usize);
    for p in 1..=u64::from(p_max) {
        if p == 1 {
            m.push(BigRational::one());
            continue;
        }
        let mut sum = BigRational::zero();
        for k in 1..p {
            let c = BigRational::from_integer(binomial(2 * p, 2 * k));
            sum += c * &m[k as usize - 1] * &m[(p - k) as usize - 1];
        }
        let denom = (BigInt::one() << p as usize) - BigInt::from(2);
        m.push(sum / BigRational::from_integer(denom));
    }
    m
}

/// [`gaussian_even_moments_exact`] rounded to `f64`.
pub fn gaussian_even_moments(p_max: u32) -> Vec<f64> {
    gaussian_even_moments_exact(p_max)
        .iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_steps() {
        let m = gaussian_even_moments_exact(4);
        assert_eq!(m[0], BigRational::one());
        // (2²-2)^{-1}·C(4,2) = 6/2
        assert_eq!(m[1], BigRational::from_integer(3.into()));
        assert_eq!(gaussian_even_moments(4), [1.0, 3.0, 15.0, 105.0]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 8), BigInt::from(12870));
        assert_eq!(binomial(5, 0), BigInt::one());
    }
}
