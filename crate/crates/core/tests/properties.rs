use std::sync::Arc;

use e1dirac::calculus::{exterior_d, lie_bracket, KForm, VectorField};
use e1dirac::sampling::random_polynomial;
use e1dirac::sections::{extended_bracket, pairing_plus, t_tensor, t_tensor_closed, E1Section};
use e1dirac::symexpr::{parse_expr, Chart, Expr};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn r3() -> Arc<Chart> {
    Arc::new(Chart::standard(3))
}

fn poly(rng: &mut ChaCha8Rng) -> Expr {
    random_polynomial(rng, 3, 2, 3)
}

fn field(c: &Arc<Chart>, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField::new(c, (0..3).map(|_| poly(rng)).collect()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partials_match_central_differences(seed in any::<u64>(), x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = poly(&mut rng) * (poly(&mut rng) * Expr::ratio(1, 4)).exp();
        let p = [x, y, z];
        for i in 0..3 {
            let h = 1e-4;
            let (mut a, mut b) = (p, p);
            a[i] += h;
            b[i] -= h;
            let fd = (e.eval(&a).unwrap() - e.eval(&b).unwrap()) / (2.0 * h);
            let exact = e.partial(i).eval(&p).unwrap();
            prop_assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{fd} vs {exact}");
        }
    }

    #[test]
    fn printed_expressions_parse_back(seed in any::<u64>(), x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let c = r3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = poly(&mut rng) - poly(&mut rng).sin() * poly(&mut rng);
        let text = e.display_with(&c).to_string();
        let back = parse_expr(&text, &c).unwrap();
        let p = [x, y, z];
        prop_assert!(close(e.eval(&p).unwrap(), back.eval(&p).unwrap()), "{text}");
    }

    #[test]
    fn d_squared_vanishes(seed in any::<u64>()) {
        let c = r3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = KForm::from_components(&c, (0..3).map(|_| poly(&mut rng).exp()).collect()).unwrap();
        let dd = exterior_d(&exterior_d(&theta).unwrap()).unwrap();
        prop_assert!(dd.max_abs_at(&[0.3, -0.2, 0.7]).unwrap() < 1e-9);
    }

    #[test]
    fn lie_bracket_satisfies_jacobi(seed in any::<u64>()) {
        let c = r3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (field(&c, &mut rng), field(&c, &mut rng), field(&c, &mut rng));
        let j = lie_bracket(&x, &lie_bracket(&y, &z).unwrap()).unwrap()
            .add(&lie_bracket(&y, &lie_bracket(&z, &x).unwrap()).unwrap()).unwrap()
            .add(&lie_bracket(&z, &lie_bracket(&x, &y).unwrap()).unwrap()).unwrap();
        let v = j.eval(&[0.4, 0.1, -0.6]).unwrap();
        prop_assert!(v.iter().all(|c| c.abs() < 1e-9), "{v:?}");
    }

    #[test]
    fn closed_t_tensor_agrees_on_isotropic_triples(seed in any::<u64>()) {
        // sections of the graph of a closed 2-form are pairwise isotropic
        let c = r3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = exterior_d(&KForm::from_components(&c, (0..3).map(|_| poly(&mut rng)).collect()).unwrap()).unwrap();
        let section = |rng: &mut ChaCha8Rng| {
            let x = field(&c, rng);
            let alpha = e1dirac::calculus::interior(&x, &omega).unwrap();
            E1Section::new(x, Expr::zero(), alpha, poly(rng)).unwrap()
        };
        let (a, b, d) = (section(&mut rng), section(&mut rng), section(&mut rng));
        let p = [0.2, 0.5, -0.3];
        prop_assert!(pairing_plus(&a, &b).unwrap().eval(&p).unwrap().abs() < 1e-12);
        let t = t_tensor(&a, &b, &d).unwrap().eval(&p).unwrap();
        let tc = t_tensor_closed(&a, &b, &d).unwrap().eval(&p).unwrap();
        prop_assert!(close(t, tc), "{t} vs {tc}");
        prop_assert!(t.abs() < 1e-9);
        let sum = extended_bracket(&a, &b).unwrap().add(&extended_bracket(&b, &a).unwrap()).unwrap();
        prop_assert!(sum.max_abs_at(&p).unwrap() < 1e-9);
    }
}
