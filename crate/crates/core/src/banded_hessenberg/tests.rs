use super::*;
use crate::scalar::{rational, Rational};
use num_traits::Zero;

fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

fn sample(n: usize, p: usize, seed: u64) -> FiniteBandedMatrix<Rational> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    FiniteBandedMatrix::from_fn(n, p, |_, _| {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let v = ((x >> 33) % 9) as i64 - 4;
        let d = ((x >> 40) % 3) as i64 + 1;
        rational(v, d)
    })
}

/// Exact determinant by fraction-valued elimination.
fn det(mut a: Vec<Vec<Rational>>) -> Rational {
    let n = a.len();
    let mut acc = q(1);
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return q(0);
        };
        if piv != c {
            a.swap(piv, c);
            acc = -acc;
        }
        acc = acc * a[c][c].clone();
        for r in c + 1..n {
            let f = a[r][c].clone() / a[c][c].clone();
            for k in c..n {
                let t = f.clone() * a[c][k].clone();
                a[r][k] = a[r][k].clone() - t;
            }
        }
    }
    acc
}

/// Characteristic polynomial of the principal submatrix on rows/cols `rng`,
/// by Lagrange interpolation through `size + 1` determinant values.
fn dense_minor_poly(b: &FiniteBandedMatrix<Rational>, rng: std::ops::Range<usize>) -> Poly<Rational> {
    let d = b.to_dense();
    let m = rng.len();
    let pts: Vec<Rational> = (0..=m as i64).map(q).collect();
    let vals: Vec<Rational> = pts
        .iter()
        .map(|z| {
            let a = rng
                .clone()
                .map(|r| {
                    rng.clone()
                        .map(|c| if r == c { z.clone() - d[r][c].clone() } else { -d[r][c].clone() })
                        .collect()
                })
                .collect();
            det(a)
        })
        .collect();
    let mut out = Poly::zero();
    for (i, zi) in pts.iter().enumerate() {
        let mut basis = Poly::one();
        let mut denom = q(1);
        for (k, zk) in pts.iter().enumerate() {
            if k != i {
                basis = &basis * &Poly::linear(zk.clone());
                denom = denom * (zi.clone() - zk.clone());
            }
        }
        out = &out + &basis.scale(&(vals[i].clone() / denom));
    }
    out
}

fn trim(p: &Poly<Rational>) -> Vec<Rational> {
    let d = p.degree().map_or(0, |d| d + 1);
    p.coeffs()[..d].to_vec()
}

#[test]
fn family_matches_dense_minors() {
    for p in 1..=3 {
        for n in 1..=7 {
            let b = sample(n, p, (31 * n + p) as u64);
            let fam = char_poly_family(&b).unwrap();
            assert_eq!(trim(&fam.q), trim(&dense_minor_poly(&b, 0..n)));
            for ell in 0..n {
                assert_eq!(trim(&fam.qplus[ell]), trim(&dense_minor_poly(&b, n - ell..n)), "Q+ {ell}");
                assert_eq!(trim(&fam.qminus[ell]), trim(&dense_minor_poly(&b, 0..ell)), "Q- {ell}");
            }
            assert_eq!(trim(&fam.plus(n as isize)), trim(&fam.q));
            assert!(fam.plus(-1).is_zero());
        }
    }
}

#[test]
fn identities_hold_exactly() {
    for p in 1..=3 {
        for n in 1..=10 {
            let b = sample(n, p, (7 * n + 3 * p) as u64);
            let fam = char_poly_family(&b).unwrap();
            assert!(derivative_identity_residual(&fam).is_zero());
            for j in 1..=n {
                assert!(row_expansion_residual(&b, &fam, j).unwrap().is_zero(), "p={p} n={n} j={j}");
            }
            assert!(row_expansion_residual(&b, &fam, 0).is_err());
        }
    }
}

#[test]
fn tridiagonal_example() {
    // p = 1, zero diagonal, unit subdiagonal: Q_2 = z^2 - 1.
    let b = FiniteBandedMatrix::from_fn(2, 1, |k, _| q(k as i64));
    let fam = char_poly_family(&b).unwrap();
    assert_eq!(trim(&fam.q), vec![q(-1), q(0), q(1)]);
}

#[test]
fn resolvent_entries_agree_with_dense_oracle() {
    for p in 1..=2 {
        for n in 1..=6 {
            let b = sample(n, p, (n * 11 + p) as u64);
            let fam = char_poly_family(&b).unwrap();
            let z = rational(17, 3);
            for j in 1..=n {
                let diag = resolvent_entry_poly(&fam, &z, j, j).unwrap();
                assert_eq!(diag, resolvent_entry_dense_oracle(&b, &z, j, j).unwrap());
                let row = resolvent_entry_poly(&fam, &z, 1, j).unwrap();
                assert_eq!(row, resolvent_entry_dense_oracle(&b, &z, 1, j).unwrap());
            }
            if n >= 3 {
                assert!(resolvent_entry_poly(&fam, &z, 2, 3).is_err());
            }
        }
    }
    let b = FiniteBandedMatrix::from_fn(2, 1, |k, _| q(k as i64));
    let fam = char_poly_family(&b).unwrap();
    assert_eq!(resolvent_entry_poly(&fam, &q(1), 1, 1), Err(Error::EigenvalueHit));
    assert_eq!(resolvent_entry_dense_oracle(&b, &q(1), 1, 1), Err(Error::EigenvalueHit));
}

/// Power sums from the characteristic polynomial by Newton's identities.
fn newton_power_sums(qn: &Poly<Rational>, n: usize, s_max: usize) -> Vec<Rational> {
    // e_k = (-1)^k [z^{n-k}] Q
    let e = |k: usize| -> Rational {
        if k > n {
            return q(0);
        }
        let c = qn.coeff(n - k);
        if k % 2 == 0 {
            c
        } else {
            -c
        }
    };
    let mut ps = vec![q(n as i64)];
    for s in 1..=s_max {
        let mut acc = if s <= n { q(s as i64) * e(s) * if (s - 1) % 2 == 0 { q(1) } else { q(-1) } } else { q(0) };
        for i in 1..s {
            let sign = if (i - 1) % 2 == 0 { q(1) } else { q(-1) };
            acc = acc + sign * e(i) * ps[s - i].clone();
        }
        ps.push(acc);
    }
    ps
}

fn dense_traces(b: &FiniteBandedMatrix<Rational>, s_max: usize) -> Vec<Rational> {
    let d = b.to_dense();
    let n = d.len();
    let mut pow: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| q((i == j) as i64)).collect()).collect();
    let mut out = vec![q(n as i64)];
    for _ in 0..s_max {
        pow = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(q(0), |acc, k| acc + pow[i][k].clone() * d[k][j].clone()))
                    .collect()
            })
            .collect();
        out.push((0..n).fold(q(0), |acc, i| acc + pow[i][i].clone()));
    }
    out
}

#[test]
fn traces_agree_with_dense_and_newton() {
    for p in 1..=3 {
        for n in 1..=8 {
            let b = sample(n, p, (n * 5 + p * 13) as u64);
            let t = trace_powers(&b, 9);
            assert_eq!(t, dense_traces(&b, 9));
            let fam = char_poly_family(&b).unwrap();
            assert_eq!(t, newton_power_sums(&fam.q, n, 9));
            assert_eq!(trace_power(&b, 4), t[4]);
            for j in 1..=n {
                let diag = power_diagonal_entries(&b, j, 5);
                assert_eq!(diag.len(), 6);
            }
        }
    }
}

#[test]
fn power_diagonal_sums_to_trace() {
    let b = sample(6, 2, 99);
    let t = trace_powers(&b, 6);
    let mut sums = vec![q(0); 7];
    for j in 1..=6 {
        for (s, v) in power_diagonal_entries(&b, j, 6).into_iter().enumerate() {
            sums[s] = sums[s].clone() + v;
        }
    }
    assert_eq!(sums, t);
}

#[test]
fn log_derivative_matches_family() {
    let b = sample(9, 2, 5).diagonals().iter().map(|d| d.iter().map(|x| x.to_c64().re).collect()).collect();
    let bf = FiniteBandedMatrix::<f64>::new(9, 2, b).unwrap();
    let fam = char_poly_family(&bf).unwrap();
    let z = 11.5;
    let direct = fam.q.derivative().eval(&z) / fam.q.eval(&z) / 9.0;
    let scaled = normalized_log_derivative(&bf, &z).unwrap();
    assert!((direct - scaled).abs() < 1e-13);
}

#[test]
fn power_inner_product_locality() {
    let seqs = DiagonalSequences::from_fn(2, 40, |k, n| rational((k as i64 + 1) * (n as i64 % 5) - 3, 2));
    for s in 0..=5 {
        for j in 1..=4 {
            let v = power_inner_product(&seqs, s, j).unwrap();
            // A larger truncation gives the same entry.
            let h = seqs.truncation(40).unwrap();
            let mut w = vec![q(0); 40];
            w[j - 1] = q(1);
            for _ in 0..s {
                w = h.matvec(&w);
            }
            assert_eq!(v, w[0]);
        }
    }
    let short = DiagonalSequences::from_fn(2, 5, |_, _| q(1));
    assert_eq!(
        power_inner_product(&short, 3, 1),
        Err(Error::InsufficientWindow { needed: 9, available: 5 })
    );
}

#[test]
fn float_family_residual_small() {
    let b = FiniteBandedMatrix::<f64>::from_fn(12, 3, |k, j| ((k * 7 + j * 3) % 5) as f64 * 0.25 - 0.5);
    let fam = char_poly_family(&b).unwrap();
    let r = derivative_identity_residual(&fam);
    assert!(r.coeffs().iter().all(|c| c.abs() < 1e-9 * fam.q.coeff_scale()));
}
