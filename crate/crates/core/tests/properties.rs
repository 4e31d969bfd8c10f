use actroute::activations::{ActivationKind, Catalog};
use actroute::numkit::Matrix;
use actroute::regularizer::{gradient_norms, kl_divergence, pseudo_probs, total_loss};
use actroute::routing::{softmax_vjp, tempered_softmax, Logits, ProbVector};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = ActivationKind> {
    (0usize..5).prop_map(|i| ActivationKind::from_index(i).unwrap())
}

fn logits() -> impl Strategy<Value = Logits> {
    prop::array::uniform5(-20.0f64..20.0)
}

fn simplex() -> impl Strategy<Value = ProbVector> {
    prop::array::uniform5(-6.0f64..6.0).prop_map(|z| tempered_softmax(&z, 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn bounded_candidates_stay_bounded(x in -1e6f64..1e6) {
        let c = Catalog::default();
        let s = c.value(ActivationKind::Sigmoid, x);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!(c.value(ActivationKind::Tanh, x).abs() <= 1.0);
        prop_assert!(c.derivative(ActivationKind::Sigmoid, x) <= 0.25);
        prop_assert_eq!(c.value(ActivationKind::Identity, x), x);
    }

    #[test]
    fn rectifiers_agree_on_the_positive_side(x in 1e-9f64..1e6) {
        let c = Catalog::default();
        prop_assert_eq!(c.value(ActivationKind::Relu, x), x);
        prop_assert_eq!(c.value(ActivationKind::LeakyRelu, x), x);
        prop_assert_eq!(c.value(ActivationKind::Relu, -x), 0.0);
        prop_assert!((c.value(ActivationKind::LeakyRelu, -x) + 0.01 * x).abs() <= 1e-15 * x.max(1.0));
    }

    #[test]
    fn derivative_matches_difference_quotient(k in kind(), x in -8.0f64..8.0) {
        prop_assume!(x.abs() > 1e-3);
        let c = Catalog::default();
        let h = 1e-6;
        let fd = (c.value(k, x + h) - c.value(k, x - h)) / (2.0 * h);
        prop_assert!((fd - c.derivative(k, x)).abs() < 1e-6);
    }

    #[test]
    fn tempered_softmax_is_a_distribution(z in logits(), tau in 0.01f64..10.0) {
        let p = tempered_softmax(&z, tau);
        prop_assert!(p.as_array().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((p.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn temperature_does_not_move_the_argmax(z in logits(), t1 in 0.01f64..10.0, t2 in 0.01f64..10.0) {
        prop_assert_eq!(tempered_softmax(&z, t1).argmax(), tempered_softmax(&z, t2).argmax());
    }

    #[test]
    fn softmax_vjp_is_orthogonal_to_ones(p in simplex(), up in prop::array::uniform5(-5.0f64..5.0), tau in 0.1f64..5.0) {
        let g = softmax_vjp(&p, &up, tau);
        prop_assert!(g.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn kl_is_a_divergence(a in simplex(), b in simplex()) {
        prop_assert!(kl_divergence(&a, &b) >= 0.0);
        prop_assert!(kl_divergence(&a, &a).abs() < 1e-12);
    }

    #[test]
    fn total_is_task_plus_weighted_kl(task in 0.0f64..1e3, kl in 0.0f64..1e3, alpha in 0.0f64..10.0) {
        let l = total_loss(task, kl, alpha);
        prop_assert!((l.total - (task + alpha * kl)).abs() <= 1e-12 * l.total.max(1.0));
        prop_assert_eq!(l.task, task);
        prop_assert_eq!(l.kl, kl);
    }

    #[test]
    fn pseudo_probs_ignore_shifts(h in prop::collection::vec(-10.0f64..10.0, 1..40), c in -100.0f64..100.0, lambda in 0.05f64..5.0) {
        let stats = gradient_norms(&Matrix::new(h.len(), 1, h).unwrap(), &Catalog::default()).unwrap();
        let mut shifted = stats.clone();
        shifted.mean = stats.mean.map(|g| g + c);
        let (p, q) = (pseudo_probs(&stats, lambda), pseudo_probs(&shifted, lambda));
        for k in 0..5 {
            prop_assert!((p.as_array()[k] - q.as_array()[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_probs_prefer_smaller_norms(h in prop::collection::vec(-10.0f64..10.0, 1..40), lambda in 0.05f64..5.0) {
        let stats = gradient_norms(&Matrix::new(h.len(), 1, h).unwrap(), &Catalog::default()).unwrap();
        let p = pseudo_probs(&stats, lambda);
        for i in 0..5 {
            for j in 0..5 {
                if stats.mean[i] < stats.mean[j] {
                    prop_assert!(p.as_array()[i] >= p.as_array()[j]);
                }
            }
        }
        let id = ActivationKind::Identity.index();
        prop_assert_eq!(stats.mean[id], 1.0);
        prop_assert!(stats.mean[ActivationKind::Sigmoid.index()] <= 0.25);
    }

    #[test]
    fn prob_vector_json_round_trip(p in simplex()) {
        let json = serde_json::to_string(&p).unwrap();
        let back: ProbVector = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn activation_names_round_trip(k in kind()) {
        prop_assert_eq!(k.name().parse::<ActivationKind>().unwrap(), k);
        prop_assert_eq!(k.label().to_ascii_lowercase().parse::<ActivationKind>().unwrap(), k);
    }
}
