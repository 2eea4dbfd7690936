//! Exact integer and rational building blocks.
//!
//! Everything here is exact; tables are memoized behind mutexes so they can
//! be shared by worker threads.

use std::sync::Mutex;

use rug::{Integer, Rational};

use crate::error::{invalid, Result};

/// `n!`.
pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k))
}

static BERNOULLI: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// Bernoulli number `B_m` for any `m >= 0`, with the convention `B_1 = -1/2`.
pub(crate) fn bernoulli_any(m: u32) -> Rational {
    let mut table = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    if table.is_empty() {
        table.push(Rational::from(1));
    }
    while table.len() <= m as usize {
        let idx = table.len() as u32;
        if idx > 1 && idx % 2 == 1 {
            table.push(Rational::new());
            continue;
        }
        // sum_{j=0}^{idx} C(idx+1, j) B_j = 0
        let mut acc = Rational::new();
        for (j, b) in table.iter().enumerate() {
            if *b != 0 {
                acc += Rational::from(binomial(idx + 1, j as u32)) * b;
            }
        }
        table.push(-acc / Rational::from(idx + 1));
    }
    table[m as usize].clone()
}

/// Bernoulli number `B_m` for even `m >= 2`.
pub fn bernoulli(m: u32) -> Result<Rational> {
    if m < 2 || m % 2 == 1 {
        return Err(invalid(format!("bernoulli: index must be even and >= 2, got {m}")));
    }
    Ok(bernoulli_any(m))
}

/// `b_m` with `zeta(2m) = b_m * zeta(2)^m`, i.e.
/// `(-1)^(m+1) 2^(3m-1) 3^m B_2m / (2m)!`.
pub fn even_zeta_coeff(m: u32) -> Result<Rational> {
    if m < 2 {
        return Err(invalid(format!("even_zeta_coeff: m must be >= 2, got {m}")));
    }
    let b = bernoulli_any(2 * m);
    let mut num = Integer::from(1) << (3 * m - 1);
    num *= Integer::from(Integer::u_pow_u(3, m));
    let mut r = Rational::from(num) * b / Rational::from(factorial(2 * m));
    if m % 2 == 0 {
        r = -r;
    }
    Ok(r)
}

static REFLECTION: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// `c_k` in `pi t / sin(pi t) = sum_k c_k pi^(2k) t^(2k)`.
///
/// Obtained by inverting `sin(x)/x = sum (-1)^j x^(2j) / (2j+1)!` as a power
/// series in `x^2`, so `pi` never has to be approximated.
pub fn reflection_coeff(k: u32) -> Rational {
    let mut table = REFLECTION.lock().unwrap_or_else(|e| e.into_inner());
    while table.len() <= k as usize {
        let idx = table.len() as u32;
        if idx == 0 {
            table.push(Rational::from(1));
            continue;
        }
        let mut acc = Rational::new();
        for j in 1..=idx {
            let mut s = Rational::from((1, factorial(2 * j + 1)));
            if j % 2 == 1 {
                s = -s;
            }
            acc += s * &table[(idx - j) as usize];
        }
        table.push(-acc);
    }
    table[k as usize].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial_oracle(n: u32) -> Integer {
        (1..=n).fold(Integer::from(1), |acc, k| acc * k)
    }

    fn pascal_oracle(n: usize) -> Vec<Vec<Integer>> {
        let mut rows: Vec<Vec<Integer>> = vec![vec![Integer::from(1)]];
        for i in 1..=n {
            let prev = &rows[i - 1];
            let mut row = vec![Integer::from(1); i + 1];
            for k in 1..i {
                row[k] = Integer::from(&prev[k - 1] + &prev[k]);
            }
            rows.push(row);
        }
        rows
    }

    // Akiyama-Tanigawa, gives B_1 = +1/2 but agrees on even indices.
    fn bernoulli_oracle(m: usize) -> Rational {
        let mut a: Vec<Rational> = Vec::new();
        for i in 0..=m {
            a.push(Rational::from((1, i as u32 + 1)));
            for j in (1..=i).rev() {
                let diff = Rational::from(&a[j - 1] - &a[j]);
                a[j - 1] = diff * Rational::from(j as u32);
            }
        }
        a[0].clone()
    }

    #[test]
    fn factorial_examples() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(5), 120);
        assert_eq!(factorial(15), factorial_oracle(15));
        assert_eq!(factorial(15), Integer::from(1_307_674_368_000u64));
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(4, 2), 6);
        for n in 0..20 {
            assert_eq!(binomial(n, 0), 1);
        }
        assert_eq!(binomial(3, 5), 0);
        let pascal = pascal_oracle(10);
        assert_eq!(binomial(10, 5), pascal[10][5]);
        assert_eq!(binomial(10, 5), 252);
    }

    #[test]
    fn pascal_rule_up_to_64() {
        for n in 1..=64u32 {
            for k in 1..=n {
                let rhs = binomial(n - 1, k - 1) + binomial(n - 1, k);
                assert_eq!(binomial(n, k), rhs, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn bernoulli_examples_against_oracle() {
        assert_eq!(bernoulli(2).unwrap(), Rational::from((1, 6)));
        assert_eq!(bernoulli(4).unwrap(), Rational::from((-1, 30)));
        assert_eq!(bernoulli(12).unwrap(), Rational::from((-691, 2730)));
        for m in (2..=40).step_by(2) {
            assert_eq!(bernoulli(m).unwrap(), bernoulli_oracle(m as usize), "m={m}");
        }
    }

    #[test]
    fn bernoulli_rejects_bad_index() {
        assert!(bernoulli(0).is_err());
        assert!(bernoulli(3).is_err());
        assert!(bernoulli(1).is_err());
    }

    #[test]
    fn bernoulli_recurrence_holds() {
        for m in 1..=30u32 {
            let mut acc = Rational::new();
            for j in 0..=m {
                acc += Rational::from(binomial(m + 1, j)) * bernoulli_any(j);
            }
            assert_eq!(acc, 0, "m={m}");
        }
        assert_eq!(bernoulli_any(1), Rational::from((-1, 2)));
    }

    #[test]
    fn even_zeta_coeff_examples() {
        assert_eq!(even_zeta_coeff(2).unwrap(), Rational::from((2, 5)));
        assert_eq!(even_zeta_coeff(3).unwrap(), Rational::from((8, 35)));
        for m in 2..=20 {
            assert!(even_zeta_coeff(m).unwrap() > 0, "m={m}");
        }
        assert!(even_zeta_coeff(1).is_err());
    }

    // Oracle: t/sin(t) by exact power-series division with explicit sine coefficients.
    fn reflection_oracle(kmax: usize) -> Vec<Rational> {
        // sin(t)/t coefficients in t^(2j)
        let sin_over: Vec<Rational> = (0..=kmax)
            .map(|j| {
                let r = Rational::from((1, factorial_oracle(2 * j as u32 + 1)));
                if j % 2 == 1 {
                    -r
                } else {
                    r
                }
            })
            .collect();
        // long division of 1 by sin_over
        let mut rem: Vec<Rational> = vec![Rational::new(); kmax + 1];
        rem[0] = Rational::from(1);
        let mut out = Vec::new();
        for i in 0..=kmax {
            let q = Rational::from(&rem[i] / &sin_over[0]);
            for j in i..=kmax {
                let t = Rational::from(&q * &sin_over[j - i]);
                rem[j] -= t;
            }
            out.push(q);
        }
        out
    }

    #[test]
    fn reflection_coeff_examples() {
        assert_eq!(reflection_coeff(0), 1);
        assert_eq!(reflection_coeff(1), Rational::from((1, 6)));
        assert_eq!(reflection_coeff(2), Rational::from((7, 360)));
        let oracle = reflection_oracle(12);
        for (k, c) in oracle.iter().enumerate() {
            assert_eq!(&reflection_coeff(k as u32), c);
            assert!(*c != 0);
        }
    }
}
