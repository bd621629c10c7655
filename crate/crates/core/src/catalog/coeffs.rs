//! Exact integer coefficients of `(1 + t + ... + t^{n-1})^r`.

use super::CatalogError;
use num_bigint::BigUint;

const SIZE_CAP: usize = 10_000;

/// Coefficient sequence `A_0 .. A_{r(n-1)}` of `(1 + t + ... + t^{n-1})^r`,
/// computed by repeated exact integer polynomial multiplication.
pub fn a_coeffs(r: usize, n: usize) -> Result<Vec<BigUint>, CatalogError> {
    assert!(r >= 1 && n >= 2);
    let size = r * (n - 1);
    if size > SIZE_CAP {
        return Err(CatalogError::TooLarge {
            size,
            cap: SIZE_CAP,
        });
    }
    let base: Vec<BigUint> = (0..n).map(|_| BigUint::from(1u32)).collect();
    let mut acc = base.clone();
    for _ in 1..r {
        acc = poly_mul(&acc, &base);
    }
    Ok(acc)
}

fn poly_mul(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::ZERO; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Lossy f64 view for ratio statistics.
pub fn to_f64(v: &BigUint) -> f64 {
    let s = v.to_string();
    s.parse::<f64>().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_is_all_ones() {
        for n in [2, 5, 17] {
            let a = a_coeffs(1, n).unwrap();
            assert_eq!(a.len(), n);
            assert!(a.iter().all(|v| *v == BigUint::from(1u32)));
        }
    }

    #[test]
    fn square_of_one_plus_t() {
        let a = a_coeffs(2, 2).unwrap();
        let want: Vec<BigUint> = [1u32, 2, 1].iter().map(|&x| BigUint::from(x)).collect();
        assert_eq!(a, want);
    }

    #[test]
    fn symmetry_exact() {
        for r in 1..=4 {
            for n in [2, 3, 7, 16, 32] {
                let a = a_coeffs(r, n).unwrap();
                let top = r * (n - 1);
                for v in 0..=top {
                    assert_eq!(a[v], a[top - v], "r={r} n={n} v={v}");
                }
            }
        }
    }

    #[test]
    fn sum_is_n_to_the_r() {
        for r in 1..=4 {
            for n in [2, 5, 32] {
                let a = a_coeffs(r, n).unwrap();
                let sum: BigUint = a.iter().sum();
                assert_eq!(sum, BigUint::from(n).pow(r as u32));
            }
        }
    }

    #[test]
    fn positivity() {
        let a = a_coeffs(4, 9).unwrap();
        assert!(a.iter().all(|v| *v >= BigUint::from(1u32)));
    }

    #[test]
    fn size_cap_enforced() {
        assert!(matches!(
            a_coeffs(101, 101),
            Err(CatalogError::TooLarge { .. })
        ));
    }
}
