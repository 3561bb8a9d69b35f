use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

use banded_spectra::banded_hessenberg::{
    char_poly_family, derivative_identity_residual, power_inner_product, resolvent_entry_dense_oracle,
    resolvent_entry_poly, row_expansion_residual, DiagonalSequences, FiniteBandedMatrix,
};
use banded_spectra::combinatorics::{compositions, eta_map, multinomial, Composition, IndexVector};
use banded_spectra::experiments::{Estimate, ExperimentReport, Row, Verdict};
use banded_spectra::sampling::{DistributionSpec, EnsembleSpec, Role, Sampler, StreamId};
use banded_spectra::{ExactSeries, Rational, Scalar};

fn rat(v: i64) -> Rational {
    Rational::from_i64(v)
}

fn series(max_order: usize) -> impl Strategy<Value = ExactSeries> {
    (0..=max_order).prop_flat_map(|order| prop::collection::vec(-5i64..=5, order + 1))
        .prop_map(|c| ExactSeries::new(c.into_iter().map(rat).collect()))
}

fn series_pair(max_order: usize) -> impl Strategy<Value = (ExactSeries, ExactSeries, ExactSeries)> {
    (0..=max_order).prop_flat_map(|order| {
        let one = || prop::collection::vec(-5i64..=5, order + 1).prop_map(|c| ExactSeries::new(c.into_iter().map(rat).collect()));
        (one(), one(), one())
    })
}

/// Random banded matrix with small integer coefficients.
fn matrix() -> impl Strategy<Value = FiniteBandedMatrix<Rational>> {
    (1usize..=7, 1usize..=3).prop_flat_map(|(n, p)| {
        prop::collection::vec(-3i64..=3, n * (p + 1))
            .prop_map(move |v| FiniteBandedMatrix::from_fn(n, p, |k, j| rat(v[k * n + j - 1])))
    })
}

fn dense_power_entry(b: &FiniteBandedMatrix<Rational>, s: usize, i: usize, j: usize) -> Rational {
    let n = b.size();
    let mut v: Vec<Rational> = (1..=n).map(|r| if r == j { Rational::one() } else { Rational::zero() }).collect();
    for _ in 0..s {
        v = (1..=n)
            .map(|r| (1..=n).fold(Rational::zero(), |acc, c| acc + b.entry(r, c) * v[c - 1].clone()))
            .collect();
    }
    v[i - 1].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_product_is_commutative_and_associative((f, g, h) in series_pair(8)) {
        prop_assert_eq!(f.multiply(&g), g.multiply(&f));
        prop_assert_eq!(f.multiply(&g).multiply(&h), f.multiply(&g.multiply(&h)));
        prop_assert_eq!(f.multiply(&(&g + &h)), &f.multiply(&g) + &f.multiply(&h));
    }

    #[test]
    fn series_power_matches_repeated_product(f in series(6), m in 0usize..6) {
        let direct = (0..m).fold(ExactSeries::one(f.order()), |acc, _| acc.multiply(&f));
        prop_assert_eq!(f.power(m), direct);
    }

    #[test]
    fn series_inverse_is_inverse(f in series(8), c0 in 1i64..5) {
        let mut c = f.into_coeffs();
        c[0] = rat(c0);
        let f = ExactSeries::new(c);
        prop_assert_eq!(f.multiply(&f.inverse().unwrap()), ExactSeries::one(f.order()));
    }

    #[test]
    fn resolvent_reciprocal_is_geometric_sum(d in series(7)) {
        let n = d.order();
        let r = ExactSeries::resolvent_reciprocal(&d);
        let mut padded = d.into_coeffs();
        padded.push(Rational::zero());
        let d = ExactSeries::new(padded);
        let geometric = (&ExactSeries::one(n + 1) - &d.shift_down(1)).inverse().unwrap().shift_down(1);
        prop_assert_eq!(r, geometric);
    }

    #[test]
    fn composition_counts_and_sums(n in 0usize..7, m in 1usize..5) {
        let all = compositions(n, m);
        let expected = (1..m).fold(1u64, |acc, i| acc * (n + i) as u64 / i as u64);
        prop_assert_eq!(all.len() as u64, expected);
        prop_assert!(all.iter().all(|c| c.len() == m && c.total() == n));
        prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
        let total = all.iter().fold(BigUint::zero(), |acc, c| acc + multinomial(n, c).unwrap());
        prop_assert_eq!(total, BigUint::from(m).pow(n as u32));
    }

    #[test]
    fn eta_map_moves_mass(r in prop::collection::vec(0usize..4, 1..4), extra in prop::collection::vec(0usize..4, 4)) {
        let p = r.len();
        let k = Composition::new(extra[..=p].to_vec());
        let eta = eta_map(&IndexVector(r.clone()), &k).unwrap();
        prop_assert_eq!(eta.total(), k.total() - k.parts()[0] + r.iter().sum::<usize>() - r[0]);
    }

    #[test]
    fn char_poly_identities_hold(b in matrix()) {
        let fam = char_poly_family(&b).unwrap();
        prop_assert!(derivative_identity_residual(&fam).is_zero());
        for j in 1..=b.size() {
            prop_assert!(row_expansion_residual(&b, &fam, j).unwrap().is_zero());
        }
    }

    #[test]
    fn resolvent_formula_is_exact(b in matrix(), z in 30i64..60, j_seed in 0usize..7) {
        let fam = char_poly_family(&b).unwrap();
        let z = rat(z);
        let j = 1 + j_seed % b.size();
        for (i, j) in [(j, j), (1, j)] {
            prop_assert_eq!(
                resolvent_entry_poly(&fam, &z, i, j).unwrap(),
                resolvent_entry_dense_oracle(&b, &z, i, j).unwrap()
            );
        }
    }

    #[test]
    fn power_inner_product_matches_dense_power(
        p in 1usize..=3, s in 0usize..5, j in 1usize..4,
        v in prop::collection::vec(-3i64..=3, 4 * 30),
    ) {
        let len = j + s * p + p;
        let seqs = DiagonalSequences::from_fn(p, len, |k, n| rat(v[k * 30 + n - 1]));
        let b = seqs.truncation(len).unwrap();
        prop_assert_eq!(power_inner_product(&seqs, s, j).unwrap(), dense_power_entry(&b, s, 1, j));
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), trial in 0u64..1000, len in 1usize..20) {
        let ens = EnsembleSpec::new(
            2,
            vec![
                DistributionSpec::uniform(rat(-1), rat(1)),
                DistributionSpec::uniform_atoms(&[rat(-1), rat(0), rat(2)]),
                DistributionSpec::constant(rat(3)),
            ],
            seed,
        )
        .unwrap();
        let a: Sampler<f64> = Sampler::new(&ens).unwrap();
        let b: Sampler<f64> = Sampler::new(&ens).unwrap();
        let stream = StreamId::new(trial, Role::Matrix);
        let x = a.sequences(len, stream);
        prop_assert_eq!(&x, &b.sequences(len, stream));
        prop_assert_eq!(&a.sequences(len + 5, stream).truncation(len).unwrap(), &x.truncation(len).unwrap());
        prop_assert!((1..=len).all(|n| *x.get(2, n) == 3.0 && x.get(0, n).abs() <= 1.0));
    }

    #[test]
    fn report_json_round_trips(
        values in prop::collection::vec((any::<f64>(), -1e3f64..1e3, 0f64..10.0, 0usize..3), 0..6),
        seed in any::<u64>(),
    ) {
        let mut report = ExperimentReport::new(seed, "abc".into());
        for (i, (re, im, se, v)) in values.into_iter().enumerate() {
            let re = if re.is_finite() { re } else { 0.5 };
            let est = Estimate { re, im, se };
            report.rows.push(Row {
                experiment: "compare".into(),
                key: format!("s={i}, \"quoted\""),
                n: Some(i),
                lhs: Some(est),
                rhs: Some(est),
                verdict: [Verdict::Pass, Verdict::Fail, Verdict::Inconclusive][v],
                allowance: se,
                detail: String::new(),
            });
        }
        let text = report.to_json();
        prop_assert_eq!(ExperimentReport::from_json(&text).unwrap().to_json(), text);
        prop_assert_eq!(report.to_csv().lines().count(), report.rows.len() + 1);
    }
}
