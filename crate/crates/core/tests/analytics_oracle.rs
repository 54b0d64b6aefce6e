use fxarb::analytics::{
    config_stats, ecology_timeline, pooled_cross_correlation, same_state_probability, Ccdf,
    EcologyConfig,
};
use fxarb::{MarketId, PerMarket};
use proptest::prelude::*;

fn timeline_strategy(len: usize) -> impl Strategy<Value = Vec<EcologyConfig>> {
    // sticky runs so that episodes have varied lengths
    prop::collection::vec((0usize..8, 1usize..12), 1..len).prop_map(move |runs| {
        let mut tl = Vec::new();
        for (c, n) in runs {
            tl.extend(std::iter::repeat_n(
                EcologyConfig::from_index(c).unwrap(),
                n,
            ));
        }
        tl.truncate(len);
        tl
    })
}

/// Naive Pearson correlation of `k`-step differences, computed in two
/// passes with explicit index arithmetic.
fn naive_rho(pairs: &[(Vec<f64>, Vec<f64>)], k: usize) -> Option<f64> {
    let mut dx = Vec::new();
    let mut dy = Vec::new();
    for (x, y) in pairs {
        let n = x.len().min(y.len());
        let mut j = 0;
        while j + k < n {
            dx.push(x[j + k] - x[j]);
            dy.push(y[j + k] - y[j]);
            j += k;
        }
    }
    let n = dx.len() as f64;
    let mx = dx.iter().sum::<f64>() / n;
    let my = dy.iter().sum::<f64>() / n;
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = dx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = dy.iter().map(|b| (b - my).powi(2)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

proptest! {
    #[test]
    fn config_stats_equal_brute_force(tl in timeline_strategy(200)) {
        let dt = 0.01;
        let stats = config_stats(&tl, dt).unwrap();
        let n = tl.len();
        for c in EcologyConfig::all() {
            let count = tl.iter().filter(|&&x| x == c).count();
            prop_assert_eq!(stats.appearance(c), count as f64 / n as f64);
        }
        // boundaries: a new episode starts wherever the label changes
        let mut starts = vec![0];
        starts.extend((1..n).filter(|&t| tl[t] != tl[t - 1]));
        starts.push(n);
        let mut lengths: Vec<Vec<usize>> = vec![Vec::new(); 8];
        let mut counts = [[0usize; 8]; 8];
        for e in 0..starts.len() - 1 {
            let c = tl[starts[e]].index();
            if e > 0 && e + 2 < starts.len() {
                lengths[c].push(starts[e + 1] - starts[e]);
            }
            if e + 2 < starts.len() {
                counts[c][tl[starts[e + 1]].index()] += 1;
            }
        }
        prop_assert_eq!(stats.transition_counts, counts);
        for c in 0..8 {
            let expected = (!lengths[c].is_empty())
                .then(|| lengths[c].iter().sum::<usize>() as f64 / lengths[c].len() as f64 * dt);
            match (stats.mean_lifetime[c], expected) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
            let row: f64 = stats.transition_matrix[c].iter().sum();
            let departures: usize = counts[c].iter().sum();
            let row_ok = if departures > 0 { (row - 1.0).abs() < 1e-9 } else { row == 0.0 };
            prop_assert!(row_ok);
            prop_assert_eq!(stats.transition_matrix[c][c], 0.0);
        }
    }

    #[test]
    fn same_and_opposite_states_partition(tl in timeline_strategy(200)) {
        for (x, y) in [(MarketId::UsdJpy, MarketId::EurUsd), (MarketId::EurUsd, MarketId::EurJpy)] {
            let same = same_state_probability(&tl, (x, y)).unwrap();
            let opposite = fxarb::analytics::opposite_state_probability(&tl, (x, y)).unwrap();
            prop_assert!((same + opposite - 1.0).abs() < 1e-12);
            let brute = tl.iter().filter(|c| c.sign(x) == c.sign(y)).count() as f64 / tl.len() as f64;
            prop_assert_eq!(same, brute);
        }
    }

    #[test]
    fn timeline_follows_trend_signs(
        trends in prop::collection::vec((-2i8..=2, -2i8..=2, -2i8..=2), 1..100)
    ) {
        let series = PerMarket::from_fn(|m| {
            trends.iter().map(|t| [t.0, t.1, t.2][m.index()] as f64).collect::<Vec<f64>>()
        });
        let tl = ecology_timeline(&series);
        let mut label = ['+', '+', '+'];
        for (t, c) in tl.iter().enumerate() {
            for m in MarketId::ALL {
                let v = series[m][t];
                if v > 0.0 { label[m.index()] = '+' } else if v < 0.0 { label[m.index()] = '-' }
            }
            prop_assert_eq!(c.label(), label.iter().collect::<String>());
        }
    }

    #[test]
    fn pooled_correlation_matches_naive(
        seed_walks in prop::collection::vec(
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 30..120), 1..4),
        k in 1usize..6,
    ) {
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = seed_walks
            .iter()
            .map(|steps| {
                let mut x = vec![0.0];
                let mut y = vec![0.0];
                for &(a, b) in steps {
                    x.push(x.last().unwrap() + a);
                    y.push(y.last().unwrap() + 0.5 * a + b);
                }
                (x, y)
            })
            .collect();
        prop_assume!(pairs.iter().all(|(x, _)| x.len() >= 3 * k));
        let dt = 0.1;
        let refs: Vec<(&[f64], &[f64])> = pairs.iter().map(|(x, y)| (x.as_slice(), y.as_slice())).collect();
        let expected = naive_rho(&pairs, k);
        match pooled_cross_correlation(&refs, k as f64 * dt, dt) {
            Ok((rho, _)) => prop_assert!((rho - expected.unwrap()).abs() < 1e-9),
            Err(_) => prop_assert!(expected.is_none()),
        }
    }

    #[test]
    fn ccdf_matches_counting(samples in prop::collection::vec(0u8..20, 1..60), x in 0u8..22) {
        let values: Vec<f64> = samples.iter().map(|&s| s as f64 * 0.1).collect();
        let c = Ccdf::new(values.clone());
        let x = x as f64 * 0.1;
        let brute = values.iter().filter(|&&v| v >= x).count() as f64 / values.len() as f64;
        prop_assert_eq!(c.eval(x), brute);
    }
}
