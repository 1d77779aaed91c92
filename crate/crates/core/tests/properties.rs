use cosetlab::finite_math::{decimal_complement, parse_decimal};
use cosetlab::region_analysis::{compute_theta, coset_sum_margin, ex1_embedded_joint};
use cosetlab::{binary_entropy, bconv, fq_add, fq_mul, fq_neg, FieldElem, IcParams, JointPmf, Prob};
use proptest::prelude::*;

fn joint_strategy() -> impl Strategy<Value = JointPmf> {
    prop::collection::vec(2usize..=3, 3).prop_flat_map(|dims| {
        let cells: usize = dims.iter().product();
        prop::collection::vec(0.0f64..1.0, cells).prop_map(move |w| {
            let total: f64 = w.iter().sum::<f64>() + 1e-300;
            JointPmf::new(dims.clone(), w.iter().map(|x| x / total).collect()).unwrap()
        })
    })
}

fn half() -> impl Strategy<Value = f64> {
    1e-6f64..0.5
}

proptest! {
    #[test]
    fn chain_rule(j in joint_strategy()) {
        let h_ab = j.entropy_of(&[0, 1]).unwrap();
        let h_a = j.entropy_of(&[0]).unwrap();
        let h_b_given_a = j.cond_entropy(&[1], &[0]).unwrap();
        prop_assert!((h_ab - h_a - h_b_given_a).abs() < 1e-12);
    }

    #[test]
    fn information_is_non_negative_and_symmetric(j in joint_strategy()) {
        let i_ab = j.mutual_info(&[0], &[1]).unwrap();
        let i_ba = j.mutual_info(&[1], &[0]).unwrap();
        prop_assert!(i_ab >= 0.0);
        prop_assert!((i_ab - i_ba).abs() < 1e-12);
        prop_assert!(j.cond_mutual_info(&[0], &[1], &[2]).unwrap() >= 0.0);
        prop_assert!(i_ab <= j.entropy_of(&[0]).unwrap().min(j.entropy_of(&[1]).unwrap()) + 1e-12);
    }

    #[test]
    fn conditioning_reduces_entropy(j in joint_strategy()) {
        let h = j.entropy_of(&[0]).unwrap();
        let h1 = j.cond_entropy(&[0], &[1]).unwrap();
        let h12 = j.cond_entropy(&[0], &[1, 2]).unwrap();
        prop_assert!(h1 <= h + 1e-12 && h12 <= h1 + 1e-12 && h12 >= 0.0);
    }

    #[test]
    fn binary_entropy_symmetry(x in 0.0f64..=1.0) {
        let h = binary_entropy(Prob::new(x).unwrap());
        let g = binary_entropy(Prob::new(1.0 - x).unwrap());
        prop_assert!((h - g).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&h));
    }

    #[test]
    fn bconv_laws(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
        let p = |x: f64| Prob::new(x).unwrap();
        prop_assert!((bconv(p(a), p(b)).value() - bconv(p(b), p(a)).value()).abs() < 1e-15);
        prop_assert!((bconv(p(a), Prob::ZERO).value() - a).abs() < 1e-15);
        prop_assert!((bconv(p(a), Prob::HALF).value() - 0.5).abs() < 1e-15);
        let left = bconv(bconv(p(a), p(b)), p(c)).value();
        let right = bconv(p(a), bconv(p(b), p(c))).value();
        prop_assert!((left - right).abs() < 1e-12);
    }

    #[test]
    fn theta_is_the_sum_decoding_margin(t1 in half(), t in half(), d1 in half(), d in half()) {
        let p = IcParams::new(t1, t, d1, d).unwrap();
        let margin = coset_sum_margin(&ex1_embedded_joint(&p).unwrap(), [1, 2], 3).unwrap();
        prop_assert!((compute_theta(&p).unwrap() - margin).abs() < 1e-12);
    }

    #[test]
    fn field_axioms(q in prop::sample::select(vec![2u8, 3, 5, 7]), a in 0u8..7, b in 0u8..7) {
        let (a, b) = (a % q, b % q);
        let x = FieldElem::new(q, a).unwrap();
        let y = FieldElem::new(q, b).unwrap();
        prop_assert_eq!(fq_add(x, y).unwrap(), fq_add(y, x).unwrap());
        prop_assert_eq!(fq_mul(x, y).unwrap(), fq_mul(y, x).unwrap());
        prop_assert_eq!(fq_add(x, fq_neg(x)).unwrap().value(), 0);
    }

    #[test]
    fn decimal_complements_sum_to_one(cents in 0u32..=100) {
        let text = format!("{}.{:02}", cents / 100, cents % 100);
        let back = parse_decimal(&decimal_complement(&text).unwrap()).unwrap();
        prop_assert!((parse_decimal(&text).unwrap() + back - 1.0).abs() < 1e-15);
    }
}
