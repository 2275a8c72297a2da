use fusionkit_core::evidence::{
    bayesian_approximation, belief_interval, combine_dempster, Frame, MassFunction, Subset,
};
use fusionkit_core::Error;
use proptest::prelude::*;

fn frame(n: usize) -> Frame {
    Frame::new((0..n).map(|i| format!("h{i}"))).unwrap()
}

/// Random mass function on an `n`-element frame.
fn mass(n: usize) -> impl Strategy<Value = MassFunction> {
    let full = (1u32 << n) - 1;
    prop::collection::vec((1..=full, 0.01f64..1.0), 1..6).prop_map(move |focal| {
        let total: f64 = focal.iter().map(|(_, w)| w).sum();
        MassFunction::new(frame(n), focal.into_iter().map(|(s, w)| (Subset(s), w / total))).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (MassFunction, MassFunction)> {
    (1usize..=5).prop_flat_map(|n| (mass(n), mass(n)))
}

fn triple() -> impl Strategy<Value = (MassFunction, MassFunction, MassFunction)> {
    (1usize..=5).prop_flat_map(|n| (mass(n), mass(n), mass(n)))
}

fn all_subsets(n: usize) -> impl Iterator<Item = Subset> {
    (1u32..(1 << n)).map(Subset)
}

fn assert_close(a: &MassFunction, b: &MassFunction, tol: f64) -> Result<(), TestCaseError> {
    for s in all_subsets(a.frame().len()) {
        prop_assert!((a.mass(s) - b.mass(s)).abs() <= tol, "{:?}: {} vs {}", s, a.mass(s), b.mass(s));
    }
    Ok(())
}

/// Dense double loop over every pair of subsets, no pruning.
fn brute_force(m1: &MassFunction, m2: &MassFunction) -> (Vec<f64>, f64) {
    let n = m1.frame().len();
    let size = 1usize << n;
    let mut out = vec![0.0; size];
    for b in 0..size {
        for c in 0..size {
            out[b & c] += m1.mass(Subset(b as u32)) * m2.mass(Subset(c as u32));
        }
    }
    let k = out[0];
    out[0] = 0.0;
    out.iter_mut().for_each(|x| *x /= 1.0 - k);
    (out, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn combination_commutes((m1, m2) in pair()) {
        match (combine_dempster(&m1, &m2), combine_dempster(&m2, &m1)) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a.conflict - b.conflict).abs() <= 1e-12);
                assert_close(&a.mass, &b.mass, 1e-10)?;
            }
            (Err(Error::TotalConflict(_)), Err(Error::TotalConflict(_))) => {}
            other => prop_assert!(false, "asymmetric outcome {:?}", other),
        }
    }

    #[test]
    fn combination_associates((m1, m2, m3) in triple()) {
        let left = combine_dempster(&m1, &m2).and_then(|a| combine_dempster(&a.mass, &m3));
        let right = combine_dempster(&m2, &m3).and_then(|a| combine_dempster(&m1, &a.mass));
        if let (Ok(l), Ok(r)) = (left, right) {
            assert_close(&l.mass, &r.mass, 1e-10)?;
        }
    }

    #[test]
    fn vacuous_is_identity(m in (1usize..=5).prop_flat_map(mass)) {
        let v = MassFunction::vacuous(m.frame().clone());
        let c = combine_dempster(&v, &m).unwrap();
        prop_assert_eq!(c.conflict, 0.0);
        assert_close(&c.mass, &m, 1e-12)?;
    }

    #[test]
    fn matches_dense_double_loop((m1, m2) in (1usize..=4).prop_flat_map(|n| (mass(n), mass(n)))) {
        let (dense, k) = brute_force(&m1, &m2);
        match combine_dempster(&m1, &m2) {
            Ok(c) => {
                prop_assert!((c.conflict - k).abs() <= 1e-12);
                for s in all_subsets(m1.frame().len()) {
                    prop_assert!((c.mass.mass(s) - dense[s.0 as usize]).abs() <= 1e-10);
                }
            }
            Err(Error::TotalConflict(_)) => prop_assert!(k > 1.0 - 1e-9),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn belief_plausibility_duality(m in (1usize..=5).prop_flat_map(mass), raw in 0u32..32) {
        let n = m.frame().len();
        let full = m.frame().full();
        let a = Subset(raw & full.0);
        let bi = belief_interval(&m, a).unwrap();
        let complement = Subset(full.0 & !a.0);
        let ci = belief_interval(&m, complement).unwrap();
        prop_assert!(bi.belief <= bi.plausibility + 1e-12);
        prop_assert!((bi.belief + ci.plausibility - 1.0).abs() <= 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&bi.plausibility));
        prop_assert!(n >= 1);
    }

    #[test]
    fn approximation_is_a_distribution(m in (1usize..=5).prop_flat_map(mass)) {
        let p = bayesian_approximation(&m);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn approximation_fixes_bayesian_masses(w in prop::collection::vec(0.01f64..1.0, 1..=5)) {
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        let m = MassFunction::bayesian(frame(p.len()), &p).unwrap();
        for (a, b) in bayesian_approximation(&m).iter().zip(&p) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn text_round_trip(m in (1usize..=5).prop_flat_map(mass)) {
        let text = format!("frame {{{}}}\n{m}", m.frame().elements().join(","));
        let back = fusionkit_core::evidence::parse_mass_text(&text).unwrap();
        assert_close(&back, &m, 1e-15)?;
    }
}

#[test]
fn crossed_singletons() {
    let f = Frame::new(["a", "b"]).unwrap();
    let a = f.singleton("a").unwrap();
    let b = f.singleton("b").unwrap();
    let m1 = MassFunction::new(f.clone(), [(a, 0.9), (b, 0.1)]).unwrap();
    let m2 = MassFunction::new(f, [(a, 0.1), (b, 0.9)]).unwrap();
    let c = combine_dempster(&m1, &m2).unwrap();
    assert!((c.conflict - 0.82).abs() <= 1e-12);
    assert!((c.mass.mass(a) - 0.5).abs() <= 1e-12);
    assert!((c.mass.mass(b) - 0.5).abs() <= 1e-12);
}
