use proptest::prelude::*;
use qpir::codes::LinearCode;
use qpir::field::Field;
use qpir::protocol::{expected_resources, generate_queries, random_files, run_retrieval, DssConfig, OddMode};
use qpir::quantum::BackendKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field_and_values() -> impl Strategy<Value = (Field, u16, u16, u16)> {
    (1u8..=4).prop_flat_map(|l| {
        let f = Field::new(l).unwrap();
        let q = f.order() as u16;
        (Just(f), 0..q, 0..q, 0..q)
    })
}

fn mds_params() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=7).prop_flat_map(|n| (Just(n), 1..n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms((f, a, b, c) in field_and_values()) {
        let (a, b, c) = (f.element(a).unwrap(), f.element(b).unwrap(), f.element(c).unwrap());
        prop_assert_eq!((a + b) + c, a + (b + c));
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!(a + a, f.zero());
        if !a.is_zero() {
            prop_assert_eq!(a * a.inv().unwrap(), f.one());
        }
        prop_assert_eq!(f.phi_inv(&a.phi()).unwrap(), a);
    }

    #[test]
    fn grs_encode_decode_roundtrip((n, k) in mds_params(), seed in any::<u64>()) {
        let f = Field::for_length(n).unwrap();
        let code = LinearCode::grs_default(f, n, k).unwrap();
        let files = random_files(f, k, 1, 1, &mut ChaCha8Rng::seed_from_u64(seed));
        let msg = &files[0][0];
        let y = code.encode(msg).unwrap();
        // any k positions decode
        let positions: Vec<usize> = (n - k..n).collect();
        let ys: Vec<_> = positions.iter().map(|&p| y[p]).collect();
        prop_assert_eq!(&code.decode_from(&positions, &ys).unwrap(), msg);
    }

    #[test]
    fn queries_are_shifted_dual_codewords((n, k) in mds_params(), m in 1usize..=3, seed in any::<u64>()) {
        let f = Field::for_length(n).unwrap();
        let code = LinearCode::grs_default(f, n, k).unwrap();
        let cfg = DssConfig::new(code.clone(), n - k, m, 1).unwrap();
        let file = (seed % m as u64) as usize;
        let qs = generate_queries(&cfg, file, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for p in 0..k {
            for i in 0..m {
                let v: Vec<_> = (0..n)
                    .map(|s| qs.q[p][s][i] + if s == p && i == file { f.one() } else { f.zero() })
                    .collect();
                let g = code.generator();
                for r in 0..k {
                    let dot = (0..n).fold(f.zero(), |acc, s| acc + g.get(r, s) * v[s]);
                    prop_assert!(dot.is_zero());
                }
            }
        }
    }

    #[test]
    fn retrieval_is_exact(
        (n, k) in mds_params(),
        m in 1usize..=3,
        beta in 1usize..=2,
        basis in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let f = Field::for_length(n).unwrap();
        let code = LinearCode::grs_default(f, n, k).unwrap();
        let mode = if basis { OddMode::Basis } else { OddMode::Quantum };
        let cfg = DssConfig::new(code, n - k, m, beta).unwrap().with_odd_mode(mode);
        let files = random_files(f, k, m, beta, &mut ChaCha8Rng::seed_from_u64(seed));
        let file = (seed % m as u64) as usize;
        let (got, tr) = run_retrieval(&cfg, &files, file, BackendKind::Symbolic, seed).unwrap();
        prop_assert_eq!(&got, &files[file]);
        prop_assert_eq!(tr.resources, expected_resources(&cfg));
    }

    #[test]
    fn backends_give_identical_transcripts((n, k) in (2usize..=5).prop_flat_map(|n| (Just(n), 1..n)), seed in any::<u64>()) {
        let f = Field::for_length(n).unwrap();
        let cfg = DssConfig::new(LinearCode::grs_default(f, n, k).unwrap(), n - k, 2, 1).unwrap();
        let files = random_files(f, k, 2, 1, &mut ChaCha8Rng::seed_from_u64(seed));
        let (a, ta) = run_retrieval(&cfg, &files, 1, BackendKind::Exact, seed).unwrap();
        let (b, tb) = run_retrieval(&cfg, &files, 1, BackendKind::Symbolic, seed).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(ta.slices, tb.slices);
    }
}
