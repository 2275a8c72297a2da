use fusionkit_core::attributes::{
    initialize_attributes, update_attributes, Attribute, AttributeCatalog, AttributeKind, AttributeOutcome,
    LikelihoodModel,
};
use fusionkit_core::classification::{
    amplitude_class_likelihood, length_class_likelihood, update_class_posterior, ClassDefinition, ClassPosterior,
};
use fusionkit_core::distributions::{Gaussian, Rayleigh};
use fusionkit_core::measurement::{Feature, FeatureObservation};
use proptest::prelude::*;

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let t: f64 = v.iter().sum();
    v.into_iter().map(|x| x / t).collect()
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(normalized)
}

fn length_attribute(means: &[f64], priors: &[f64]) -> Attribute {
    Attribute {
        kind: AttributeKind::Length,
        outcomes: means
            .iter()
            .zip(priors)
            .map(|(&m, &p)| AttributeOutcome {
                label: format!("{m}"),
                prior: p,
                model: LikelihoodModel::Gaussian { feature: Feature::Length, dist: Gaussian::new(m, 3.0).unwrap() },
            })
            .collect(),
    }
}

fn classify_oracle(prior: &[f64], steps: &[Vec<f64>]) -> Vec<f64> {
    normalized(prior.iter().enumerate().map(|(i, p)| p * steps.iter().map(|l| l[i]).product::<f64>()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn attribute_recursion_matches_batch(
        means in prop::collection::vec(0.0f64..20.0, 2..5),
        seed_priors in simplex(4),
        ys in prop::collection::vec(0.0f64..20.0, 20),
    ) {
        let priors = normalized(seed_priors[..means.len()].to_vec());
        let catalog = AttributeCatalog::new(vec![length_attribute(&means, &priors)]).unwrap();
        let mut report = initialize_attributes(&catalog);
        for &y in &ys {
            report = update_attributes(&report, &FeatureObservation { feature: Feature::Length, value: y }, &catalog).unwrap();
        }
        let dist: Vec<Gaussian> = means.iter().map(|&m| Gaussian::new(m, 3.0).unwrap()).collect();
        let likelihoods: Vec<Vec<f64>> = ys.iter().map(|&y| dist.iter().map(|d| d.pdf(y)).collect()).collect();
        let batch = classify_oracle(&priors, &likelihoods);
        for (a, b) in report.posteriors[0].iter().zip(&batch) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
        prop_assert_eq!(report.step_index, 20);
    }

    #[test]
    fn class_recursion_matches_batch(
        prior in simplex(3),
        steps in prop::collection::vec(prop::collection::vec(0.01f64..2.0, 3), 20),
    ) {
        let mut post = ClassPosterior { probabilities: prior.clone(), step_index: 0 };
        for l in &steps {
            post = update_class_posterior(&post, l).unwrap();
        }
        let batch = classify_oracle(&prior, &steps);
        for (a, b) in post.probabilities.iter().zip(&batch) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn order_of_updates_is_irrelevant(
        steps in prop::collection::vec(prop::collection::vec(0.01f64..2.0, 3), 2..20),
        rotate in 0usize..19,
    ) {
        let fold = |ls: &[Vec<f64>]| ls.iter().fold(ClassPosterior::uniform(3), |p, l| update_class_posterior(&p, l).unwrap());
        let mut shuffled = steps.clone();
        shuffled.rotate_left(rotate % steps.len());
        shuffled.reverse();
        let (a, b) = (fold(&steps), fold(&shuffled));
        for (x, y) in a.probabilities.iter().zip(&b.probabilities) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn likelihood_scale_is_irrelevant(
        prior in simplex(3),
        l in prop::collection::vec(0.01f64..2.0, 3),
        scale in 1e-3f64..1e3,
    ) {
        let p = ClassPosterior { probabilities: prior, step_index: 0 };
        let scaled: Vec<f64> = l.iter().map(|x| x * scale).collect();
        let (a, b) = (update_class_posterior(&p, &l).unwrap(), update_class_posterior(&p, &scaled).unwrap());
        for (x, y) in a.probabilities.iter().zip(&b.probabilities) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn amplitude_and_length_commute(alpha in 0.0f64..6.0, length in -5.0f64..30.0) {
        let classes = ClassDefinition::maritime_classes();
        let la: Vec<f64> = classes.iter().map(|c| amplitude_class_likelihood(alpha, c).unwrap()).collect();
        let ll: Vec<f64> = classes.iter().map(|c| length_class_likelihood(length, c, 5.0).unwrap()).collect();
        let p0 = ClassPosterior::uniform(3);
        if la.iter().sum::<f64>() > 0.0 && ll.iter().sum::<f64>() > 0.0 {
            let ab = update_class_posterior(&update_class_posterior(&p0, &la).unwrap(), &ll).unwrap();
            let ba = update_class_posterior(&update_class_posterior(&p0, &ll).unwrap(), &la).unwrap();
            for (x, y) in ab.probabilities.iter().zip(&ba.probabilities) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn near_uniform_likelihood_keeps_the_argmax(
        prior in simplex(3),
        noise in prop::collection::vec(-1e-9f64..1e-9, 3),
    ) {
        let p = ClassPosterior { probabilities: prior, step_index: 0 };
        let sorted = {
            let mut v = p.probabilities.clone();
            v.sort_by(f64::total_cmp);
            v
        };
        prop_assume!(sorted[2] - sorted[1] > 1e-6);
        let l: Vec<f64> = noise.iter().map(|e| 1.0 + e).collect();
        prop_assert_eq!(update_class_posterior(&p, &l).unwrap().argmax(), p.argmax());
    }

    #[test]
    fn favourable_evidence_never_lowers_the_favoured_class(
        prior in simplex(3),
        boost in 1.0f64..10.0,
        target in 0usize..3,
    ) {
        let p = ClassPosterior { probabilities: prior, step_index: 0 };
        let mut l = vec![1.0; 3];
        l[target] = boost;
        let q = update_class_posterior(&p, &l).unwrap();
        prop_assert!(q.probabilities[target] >= p.probabilities[target] - 1e-15);
    }
}

#[test]
fn amplitude_evidence_orders_classes() {
    let classes = ClassDefinition::maritime_classes();
    let ray = |s: f64| Rayleigh::new(s).unwrap();
    assert_eq!(classes[2].amplitude, ray(0.5));
    let l: Vec<f64> = classes.iter().map(|c| amplitude_class_likelihood(0.5, c).unwrap()).collect();
    assert!(l[2] > l[1] && l[1] > l[0]);
}
