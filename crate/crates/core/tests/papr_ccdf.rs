use mixnum_core::icef::{clip_polar, threshold_from_target};
use mixnum_core::metrics::{ccdf, papr_at_probability, papr_per_sample};
use mixnum_core::{Complex64, ComplexSignal};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn samples(min: usize, max: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), min..max)
        .prop_map(|v| v.into_iter().map(|(re, im)| c(re, im)).collect())
        .prop_filter("non-zero power", |v: &Vec<Complex64>| v.iter().any(|x| x.norm() > 1e-3))
}

#[test]
fn four_sample_hand_oracle() {
    // powers 4, 0, 0, 4 -> mean 2
    let y = ComplexSignal::new(vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)], 1.0);
    assert_eq!(papr_per_sample(&y).unwrap(), vec![2.0, 0.0, 0.0, 2.0]);
    // powers 1, 1, 9, 9 -> mean 5
    let y = ComplexSignal::new(vec![c(1.0, 0.0), c(0.0, -1.0), c(-3.0, 0.0), c(0.0, 3.0)], 1.0);
    assert_eq!(papr_per_sample(&y).unwrap(), vec![0.2, 0.2, 1.8, 1.8]);
}

#[test]
fn known_quantile_of_constructed_distribution() {
    // 999 unit samples and one at 10: P(PAPR > t) = 1e-3 just below the peak
    let mut v = vec![c(1.0, 0.0); 999];
    v.push(c(10.0_f64.sqrt(), 0.0));
    let p = papr_per_sample(&ComplexSignal::new(v, 1.0)).unwrap();
    let curve = ccdf(&p).unwrap();
    assert_eq!(curve.probabilities, vec![1e-3, 0.0]);
    let mean = 1009.0 / 1000.0;
    assert!((papr_at_probability(&curve, 1e-3) - 10.0 * (1.0f64 / mean).log10()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn mean_papr_is_one(v in samples(1, 400)) {
        let p = papr_per_sample(&ComplexSignal::new(v, 1.0)).unwrap();
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        prop_assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn papr_is_scale_invariant(v in samples(2, 200), g in 0.01f64..100.0, phase in -3.2f64..3.2) {
        let y = ComplexSignal::new(v, 1.0);
        let a = papr_per_sample(&y).unwrap();
        let b = papr_per_sample(&y.scaled(Complex64::from_polar(g, phase))).unwrap();
        for (x, z) in a.iter().zip(&b) {
            prop_assert!((x - z).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn clipping_threshold_scales_with_amplitude(v in samples(2, 200), g in 0.01f64..100.0, t in 0.0f64..12.0) {
        let y = ComplexSignal::new(v, 1.0);
        let a0 = threshold_from_target(&y, t).unwrap();
        let a1 = threshold_from_target(&y.scaled(c(g, 0.0)), t).unwrap();
        prop_assert!((a1 - g * a0).abs() <= 1e-12 * a1);
        let clipped = clip_polar(&y, a0).unwrap();
        prop_assert!(clipped.samples.iter().all(|x| x.norm() <= a0 * (1.0 + 1e-15)));
    }

    #[test]
    fn ccdf_is_monotone(v in samples(1, 500)) {
        let p = papr_per_sample(&ComplexSignal::new(v, 1.0)).unwrap();
        let curve = ccdf(&p).unwrap();
        prop_assert!(curve.thresholds_db.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(curve.probabilities.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(curve.probabilities.iter().all(|&q| (0.0..1.0).contains(&q)));
        prop_assert_eq!(*curve.probabilities.last().unwrap(), 0.0);
    }

    #[test]
    fn quantile_is_non_increasing_in_probability(v in samples(2, 500), mut ps in prop::collection::vec(1e-4f64..1.0, 2..8)) {
        let p = papr_per_sample(&ComplexSignal::new(v, 1.0)).unwrap();
        let curve = ccdf(&p).unwrap();
        ps.sort_by(f64::total_cmp);
        let q: Vec<f64> = ps.iter().map(|&p| papr_at_probability(&curve, p)).collect();
        prop_assert!(q.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?} -> {:?}", ps, q);
    }

    #[test]
    fn exceedance_matches_direct_count(v in samples(1, 300), t in -20.0f64..10.0) {
        let p = papr_per_sample(&ComplexSignal::new(v, 1.0)).unwrap();
        let curve = ccdf(&p).unwrap();
        let direct = p.iter().filter(|&&x| 10.0 * x.log10() > t).count() as f64 / p.len() as f64;
        prop_assert!((curve.exceedance_at(t) - direct).abs() < 1e-12);
    }
}
