//! Determinants over polynomials, rationals and intervals.

use std::collections::HashMap;

use rug::Rational;

use crate::interval::Interval;
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetStrategy {
    /// Fraction-free elimination with exact polynomial division.
    Bareiss,
    /// Expansion by minors with memoized cofactors.
    Minors,
    /// Minors for small or sparse matrices, Bareiss otherwise.
    Auto,
}

fn check_square<T>(m: &[Vec<T>]) {
    let n = m.len();
    assert!(m.iter().all(|r| r.len() == n), "determinant of a non-square matrix");
}

/// Exact determinant, or `None` if some intermediate polynomial grows past
/// `budget` terms.
pub fn symbolic_det_budget(m: &[Vec<Poly>], strategy: DetStrategy, budget: usize) -> Option<Poly> {
    check_square(m);
    let strategy = match strategy {
        DetStrategy::Auto => {
            let nonzero = m.iter().flatten().filter(|p| !p.is_zero()).count();
            if m.len() <= 4 || nonzero * 2 <= m.len() * m.len() {
                DetStrategy::Minors
            } else {
                DetStrategy::Bareiss
            }
        }
        s => s,
    };
    match strategy {
        DetStrategy::Minors => minors_det(m, budget),
        _ => bareiss_det(m, budget),
    }
}

pub fn symbolic_det(m: &[Vec<Poly>]) -> Poly {
    symbolic_det_budget(m, DetStrategy::Auto, usize::MAX).expect("unbounded budget")
}

fn bareiss_det(m: &[Vec<Poly>], budget: usize) -> Option<Poly> {
    let n = m.len();
    if n == 0 {
        return Some(Poly::constant(1));
    }
    let mut a: Vec<Vec<Poly>> = m.to_vec();
    let mut prev = Poly::constant(1);
    let mut negate = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return Some(Poly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                if num.len() > budget.saturating_mul(4) {
                    return None;
                }
                let q = num.div_exact(&prev).expect("Bareiss division is exact");
                if q.len() > budget {
                    return None;
                }
                a[i][j] = q;
            }
            a[i][k] = Poly::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Some(if negate { d.neg() } else { d })
}

fn minors_det(m: &[Vec<Poly>], budget: usize) -> Option<Poly> {
    let n = m.len();
    assert!(n < 64, "matrix too large for minor expansion");
    let mut memo: HashMap<u64, Poly> = HashMap::new();
    let full = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    minor(m, 0, full, &mut memo, budget)
}

fn minor(m: &[Vec<Poly>], row: usize, mask: u64, memo: &mut HashMap<u64, Poly>, budget: usize) -> Option<Poly> {
    if row == m.len() {
        return Some(Poly::constant(1));
    }
    if let Some(p) = memo.get(&mask) {
        return Some(p.clone());
    }
    let mut acc = Poly::zero();
    let mut pos = 0;
    for c in 0..m.len() {
        if mask & (1 << c) == 0 {
            continue;
        }
        if !m[row][c].is_zero() {
            let sub = minor(m, row + 1, mask & !(1 << c), memo, budget)?;
            let t = m[row][c].mul(&sub);
            acc = if pos % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            if acc.len() > budget {
                return None;
            }
        }
        pos += 1;
    }
    memo.insert(mask, acc.clone());
    Some(acc)
}

/// Exact determinant of a rational matrix by Gaussian elimination.
pub fn rational_det(m: &[Vec<Rational>]) -> Rational {
    check_square(m);
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::from(1);
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| a[i][k] != 0) else {
            return Rational::new();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let pivot = a[k][k].clone();
        det *= &pivot;
        for i in k + 1..n {
            if a[i][k] == 0 {
                continue;
            }
            let f = Rational::from(&a[i][k] / &pivot);
            for j in k..n {
                let t = Rational::from(&f * &a[k][j]);
                a[i][j] -= t;
            }
        }
    }
    det
}

/// Determinant of an interval matrix by elimination with partial pivoting.
/// Returns `None` when no remaining pivot candidate excludes zero.
pub fn interval_det(m: &[Vec<Interval>]) -> Option<Interval> {
    check_square(m);
    let n = m.len();
    let prec = m.first().and_then(|r| r.first()).map(|x| x.prec()).unwrap_or(64);
    let mut a = m.to_vec();
    let mut det = Interval::point_int(1, prec);
    for k in 0..n {
        // largest guaranteed magnitude among candidates that exclude zero
        let mut best: Option<(usize, rug::Float)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            if row[k].excludes_zero() {
                let low = row[k].abs().lo().clone();
                if best.as_ref().is_none_or(|(_, b)| low > *b) {
                    best = Some((i, low));
                }
            }
        }
        let (p, _) = best?;
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let pivot = a[k][k].clone();
        det = det.mul(&pivot);
        for i in k + 1..n {
            let f = a[i][k].div(&pivot).ok()?;
            for j in k + 1..n {
                let t = f.mul(&a[k][j]);
                a[i][j] = a[i][j].sub(&t);
            }
        }
    }
    Some(det)
}

/// Leibniz expansion over all permutations; test oracle for small matrices.
pub fn permutation_det(m: &[Vec<Poly>]) -> Poly {
    check_square(m);
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut acc = Poly::zero();
    permute(m, &mut perm, 0, &mut acc);
    acc
}

fn permute(m: &[Vec<Poly>], perm: &mut Vec<usize>, k: usize, acc: &mut Poly) {
    let n = perm.len();
    if k == n {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let mut t = Poly::constant(1);
        for (i, &c) in perm.iter().enumerate() {
            t = t.mul(&m[i][c]);
            if t.is_zero() {
                return;
            }
        }
        *acc = if inversions % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
        return;
    }
    for i in k..n {
        perm.swap(k, i);
        permute(m, perm, k + 1, acc);
        perm.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarId;
    use proptest::prelude::*;

    fn c(v: i64) -> Poly {
        Poly::constant(v)
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(symbolic_det(&[vec![c(5)]]), c(5));
        let x = Poly::var(VarId::gamma(1));
        let y = Poly::var(VarId::gamma(2));
        let d = vec![vec![x.clone(), c(0), c(0)], vec![c(0), y.clone(), c(0)], vec![c(0), c(0), x.add(&y)]];
        let expected = x.mul(&y).mul(&x.add(&y));
        for s in [DetStrategy::Bareiss, DetStrategy::Minors, DetStrategy::Auto] {
            assert_eq!(symbolic_det_budget(&d, s, usize::MAX).unwrap(), expected);
        }
    }

    #[test]
    fn zero_pivot_needs_swap() {
        let m = vec![vec![c(0), c(1)], vec![c(1), c(0)]];
        assert_eq!(symbolic_det_budget(&m, DetStrategy::Bareiss, usize::MAX).unwrap(), c(-1));
        let r = vec![vec![Rational::new(), Rational::from(2)], vec![Rational::from(3), Rational::from(1)]];
        assert_eq!(rational_det(&r), -6);
    }

    #[test]
    fn interval_det_brackets_exact() {
        let vals = [[2i64, -1, 0], [1, 3, 4], [0, 5, -2]];
        let m: Vec<Vec<Interval>> =
            vals.iter().map(|r| r.iter().map(|&v| Interval::point_int(v, 64)).collect()).collect();
        let exact: Vec<Vec<Rational>> = vals.iter().map(|r| r.iter().map(|&v| Rational::from(v)).collect()).collect();
        let d = interval_det(&m).unwrap();
        assert!(d.contains_rational(&rational_det(&exact)));
        let singular = vec![vec![Interval::point_int(0, 64); 2]; 2];
        assert!(interval_det(&singular).is_none());
    }

    proptest! {
        #[test]
        fn four_by_four_matches_permutations(vals in prop::collection::vec(-9i64..=9, 16)) {
            let m: Vec<Vec<Poly>> = vals.chunks(4).map(|r| r.iter().map(|&v| c(v)).collect()).collect();
            let oracle = permutation_det(&m);
            prop_assert_eq!(symbolic_det_budget(&m, DetStrategy::Bareiss, usize::MAX).unwrap(), oracle.clone());
            prop_assert_eq!(symbolic_det_budget(&m, DetStrategy::Minors, usize::MAX).unwrap(), oracle.clone());
            let r: Vec<Vec<Rational>> = vals.chunks(4).map(|r| r.iter().map(|&v| Rational::from(v)).collect()).collect();
            prop_assert_eq!(Poly::constant(rational_det(&r)), oracle);
        }

        #[test]
        fn polynomial_entries_match_permutations(vals in prop::collection::vec((-3i64..=3, 0u32..2, 0u32..2), 9)) {
            let m: Vec<Vec<Poly>> = vals
                .chunks(3)
                .map(|r| r.iter().map(|&(k, a, b)| {
                    Poly::constant(k).add(&Poly::var(VarId::gamma(1)).pow(a).mul(&Poly::var(VarId::gamma(3)).pow(b)))
                }).collect())
                .collect();
            let oracle = permutation_det(&m);
            prop_assert_eq!(symbolic_det_budget(&m, DetStrategy::Bareiss, usize::MAX).unwrap(), oracle.clone());
            prop_assert_eq!(symbolic_det_budget(&m, DetStrategy::Minors, usize::MAX).unwrap(), oracle);
        }
    }
}
