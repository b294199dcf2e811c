mod common;

use std::io::Write;

use proptest::prelude::*;
use remoteness::analysis::{heterogeneity, spearman};
use remoteness::index_core::{compute_year, raw_ri, ClampFlags, RIResult, RunConfig, WeightScheme};
use remoteness::ingest::{parse_places, write_places_csv, Coord, CoordinateMode, PlaceRecord, PlaceSet};
use remoteness::spatial::FallbackPolicy;

fn distances() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(1.0..5_000.0f64)
}

fn diag_cfg() -> RunConfig {
    RunConfig {
        fallback: FallbackPolicy::Diagonal,
        ..RunConfig::default()
    }
}

prop_compose! {
    fn planar_set(max: usize)(rows in prop::collection::vec(
        (0.0..500_000.0f64, 0.0..500_000.0f64, 0u64..2_000_000), 2..max)
    ) -> PlaceSet {
        let records = rows
            .into_iter()
            .enumerate()
            .map(|(i, (x, y, p))| PlaceRecord::new(format!("id{i}"), 2010, Coord::new(x, y), p))
            .collect();
        PlaceSet::new(2010, CoordinateMode::Planar, records).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn raw_decreases_with_population(s in 10u64..50_000_000, growth in 1.01..20.0f64, d in distances()) {
        let cfg = RunConfig::default();
        let w = WeightScheme::equal();
        let s2 = (s as f64 * growth) as u64;
        prop_assert!(raw_ri(s2, &d, &w, &cfg).value < raw_ri(s, &d, &w, &cfg).value);
    }

    #[test]
    fn raw_increases_with_distance(s in 0u64..10_000_000, d in distances(), k in 0usize..5, growth in 1.001..50.0f64) {
        let cfg = RunConfig::default();
        let w = WeightScheme::ascending();
        let mut d2 = d;
        d2[k] *= growth;
        prop_assert!(raw_ri(s, &d2, &w, &cfg).value > raw_ri(s, &d, &w, &cfg).value);
    }

    #[test]
    fn integer_weight_scaling_is_bit_exact(
        s in 0u64..10_000_000, d in distances(),
        w_pop in 0u32..100, w_pc in prop::array::uniform5(0u32..100), k in 1u32..1000,
    ) {
        let cfg = RunConfig::default();
        prop_assume!(w_pop + w_pc.iter().sum::<u32>() > 0);
        let w = WeightScheme::new("w", w_pop as f64, w_pc.map(f64::from)).unwrap();
        let wk = w.scaled(k as f64);
        prop_assert_eq!(raw_ri(s, &d, &w, &cfg).value.to_bits(), raw_ri(s, &d, &wk, &cfg).value.to_bits());
    }

    #[test]
    fn scaled_range(ps in planar_set(60)) {
        let out = compute_year(&ps, &diag_cfg()).unwrap();
        let v: Vec<f64> = out.results.iter().map(|r| r.scaled).collect();
        prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
        if !out.degenerate {
            prop_assert_eq!(v.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
            prop_assert_eq!(v.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
    }

    #[test]
    fn permuting_places_permutes_results(ps in planar_set(40), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut recs = ps.records().to_vec();
        recs.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = PlaceSet::new(2010, CoordinateMode::Planar, recs.clone()).unwrap();
        let a = compute_year(&ps, &diag_cfg()).unwrap();
        let b = compute_year(&shuffled, &diag_cfg()).unwrap();
        for (rec, r) in recs.iter().zip(&b.results) {
            prop_assert_eq!(&rec.place_id, &r.place_id);
            let orig = a.results.iter().find(|x| x.place_id == r.place_id).unwrap();
            prop_assert_eq!(orig.raw.to_bits(), r.raw.to_bits());
            prop_assert_eq!(orig.scaled.to_bits(), r.scaled.to_bits());
        }
    }

    #[test]
    fn variance_identity(values in prop::collection::vec((0.0..1.0f64, 0usize..6), 2..80)) {
        let places = PlaceSet::new(
            2010,
            CoordinateMode::Planar,
            values.iter().enumerate()
                .map(|(i, (_, c))| PlaceRecord::new(format!("p{i}"), 2010, Coord::new(0.0, i as f64), 1).with_county(format!("c{c}")))
                .collect(),
        ).unwrap();
        let results: Vec<RIResult> = values.iter().enumerate().map(|(i, (v, _))| RIResult {
            place_id: format!("p{i}"), year: 2010, population: 1, distances_km: [1.0; 5],
            raw: *v, scaled: *v, flags: ClampFlags::default(),
        }).collect();
        let rep = heterogeneity(&results, &places).unwrap();
        let v = &rep.variance;
        prop_assert!((v.within + v.between - v.total).abs() <= 1e-9 * v.total.max(f64::MIN_POSITIVE));
        if let Some(s) = v.within_share {
            prop_assert!((0.0..=1.0).contains(&s));
        }

        let mut rev = results.clone();
        rev.reverse();
        prop_assert_eq!(heterogeneity(&rev, &places).unwrap(), rep);
    }

    #[test]
    fn spearman_invariant_under_monotone_maps(pairs in prop::collection::vec((0.0..1.0f64, 1i32..10), 3..60)) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        if let Some(rho) = spearman(&x, &y) {
            prop_assert!((-1.0..=1.0).contains(&rho));
            let fx: Vec<f64> = x.iter().map(|v| (3.0 * v).exp()).collect();
            let fy: Vec<f64> = y.iter().map(|v| v * v * v + 2.0).collect();
            prop_assert_eq!(spearman(&fx, &fy), Some(rho));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn csv_export_roundtrip(ps in planar_set(30)) {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        write_places_csv(&mut f, std::slice::from_ref(&ps)).unwrap();
        f.flush().unwrap();
        let parsed = parse_places(f.path(), None).unwrap();
        prop_assert!(parsed.rejections.is_empty());
        prop_assert_eq!(&parsed.sets[0], &ps);
    }

    #[test]
    fn parsing_is_total_and_order_stable(rows in prop::collection::vec((0u8..4, -3i64..40_000, 0u8..3), 1..40), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut lines: Vec<String> = rows.iter().enumerate().map(|(i, (id, pop, yr))| {
            let year = [1990, 2000, 2010][*yr as usize];
            format!("p{id}_{i},,{year},{},{},{pop},", i * 10, i)
        }).collect();
        lines.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let body = format!("place_id,name,year,x,y,population,county_id\n{}\n", lines.join("\n"));
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        let parsed = parse_places(f.path(), None).unwrap();
        prop_assert_eq!(parsed.total_records() + parsed.rejections.len(), lines.len());
        // Per-year order follows file order.
        let file_order: Vec<&str> = lines.iter().map(|l| l.split(',').next().unwrap()).collect();
        for set in &parsed.sets {
            let pos: Vec<usize> = set.iter().map(|r| file_order.iter().position(|id| *id == r.place_id).unwrap()).collect();
            prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
