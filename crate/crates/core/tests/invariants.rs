use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use realgit::flows::flow_at;
use realgit::kempfness::{kn_cocycle_defect, kn_value};
use realgit::liealg::{Direction, GroupKind, ReductiveSetup};
use realgit::sampling::{random_group_element, random_k_element, random_unit_p};
use realgit::spaces::{Field, ModelPoint, ModelSpace};
use realgit::weights::{lambda_t, max_weight, moment_weight_margin, transport_weight};
use realgit::ExtReal;

fn cp2() -> ModelSpace {
    ModelSpace::projective(ReductiveSetup::new(GroupKind::SlR, 3).unwrap(), Field::Real).unwrap()
}

fn point(x: &ModelSpace, coords: &[f64]) -> Option<ModelPoint> {
    if coords.iter().map(|c| c * c).sum::<f64>() < 1e-2 {
        return None;
    }
    x.point_real(coords).ok()
}

fn direction(x: &ModelSpace, seed: u64) -> Direction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Direction::new(&random_unit_p(&x.setup, &mut rng)).unwrap()
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(48) })]

    #[test]
    fn flow_is_a_one_parameter_group(c in coords(), seed in any::<u64>(), s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let x = cp2();
        let Some(p) = point(&x, &c) else { return Ok(()) };
        let b = direction(&x, seed);
        let two = flow_at(&x, &flow_at(&x, &p, &b, s).unwrap(), &b, t).unwrap();
        let one = flow_at(&x, &p, &b, s + t).unwrap();
        prop_assert!(x.distance(&one, &two) < 1e-9);
    }

    #[test]
    fn lambda_t_is_nondecreasing(c in coords(), seed in any::<u64>()) {
        let x = cp2();
        let Some(p) = point(&x, &c) else { return Ok(()) };
        let b = direction(&x, seed);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..40 {
            let l = lambda_t(&x, &p, &b, -4.0 + 0.25 * i as f64).unwrap();
            prop_assert!(l >= prev - 1e-12);
            prev = l;
        }
        if let ExtReal::Finite(v) = max_weight(&x, &p, &b).value {
            prop_assert!(prev <= v + 1e-9);
        }
    }

    #[test]
    fn kempf_ness_cocycle_and_k_invariance(c in coords(), seed in any::<u64>()) {
        let x = cp2();
        let Some(p) = point(&x, &c) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_group_element(&x.setup, 0.8, &mut rng).unwrap();
        let h = random_group_element(&x.setup, 0.8, &mut rng).unwrap();
        let k = random_k_element(&x.setup, &mut rng).unwrap();
        prop_assert!(kn_cocycle_defect(&x, &p, &g.matrix, &h.matrix).unwrap() < 1e-9);
        let kg = &k.matrix * &g.matrix;
        prop_assert!((kn_value(&x, &p, &kg).unwrap() - kn_value(&x, &p, &g.matrix).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn moment_weight_inequality(c in coords(), seed in any::<u64>()) {
        let x = cp2();
        let Some(p) = point(&x, &c) else { return Ok(()) };
        let b = direction(&x, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let gs: Vec<_> = (0..10).map(|_| random_group_element(&x.setup, 1.0, &mut rng).unwrap()).collect();
        let (lhs, rhs) = moment_weight_margin(&x, &p, &b, &gs).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn weight_is_equivariant(c in coords(), seed in any::<u64>()) {
        let x = cp2();
        let Some(p) = point(&x, &c) else { return Ok(()) };
        let b = direction(&x, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
        let g = random_group_element(&x.setup, 1.0, &mut rng).unwrap();
        let direct = max_weight(&x, &x.act(&g.matrix, &p).unwrap(), &b).value;
        let moved = transport_weight(&x, &p, &g, &b).unwrap().value;
        prop_assert!(direct.close_to(moved, 1e-6), "{direct:?} vs {moved:?}");
    }
}

#[test]
fn sharp_moment_weight_case() {
    let l = ModelSpace::linear(ReductiveSetup::new(GroupKind::SlR, 2).unwrap(), Field::Real).unwrap();
    let p = ModelSpace::projective(l.setup.clone(), Field::Real).unwrap();
    let x = p.point_real(&[0.0, 1.0]).unwrap();
    let b = p.setup.direction(&realgit::linalg::real_diag(&[1.0, -1.0])).unwrap();
    let (lhs, rhs) = moment_weight_margin(&p, &x, &b, &[p.setup.identity()]).unwrap();
    assert!((lhs - rhs).abs() < 1e-9, "{lhs} {rhs}");
}
