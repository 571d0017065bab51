use augequiv_core::dataset::FIXTURE_GROUPS;
use augequiv_core::surface::trace_contours;
use augequiv_core::{
    compute_ir, fit_law, fixture_group, ols_fit, parse_records, predict_ratio, run_study, select_model, slice_for_base,
    write_records, BasisFunction, Criterion, EquivalenceTuple, ExperimentRecord, GridSpec, LossSpace, Mode, Schema,
    SlicePoint, StudyConfig, Subset,
};
use proptest::prelude::*;

const EPS: f64 = 1.0;

fn record() -> impl Strategy<Value = ExperimentRecord> {
    (
        "[a-z][a-z0-9_]{0,11}",
        0usize..3,
        "[a-z][a-z0-9_]{0,7}",
        1u64..200_000,
        0u64..500_000,
        0.0f64..=100.0,
    )
        .prop_map(|(dataset, mode, classifier, n_base, added, accuracy)| {
            let mode = Mode::ALL[mode];
            let (added_real, added_syn) = match mode {
                Mode::RealAug => (added, 0),
                _ => (0, added),
            };
            ExperimentRecord {
                dataset,
                mode,
                classifier,
                n_base,
                added_real,
                added_syn,
                accuracy,
            }
        })
}

fn subset() -> impl Strategy<Value = Subset> {
    (1u8..32).prop_map(|b| Subset::from_bits(b).unwrap())
}

fn coefficient() -> impl Strategy<Value = f64> {
    (0.5f64..5.0, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

/// 24 points, one per row and per column of a 24x24 stratification, so
/// no shrink collapses them onto a line.
fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 24).prop_map(|jitter| {
        let n = jitter.len() as f64;
        jitter
            .iter()
            .enumerate()
            .map(|(i, (u, v))| {
                let j = (i * 5) % jitter.len();
                (50.0 + (i as f64 + u) * 4950.0 / n, 1.0 + (j as f64 + v) * 4999.0 / n)
            })
            .collect()
    })
}

fn noiseless(subset: Subset, coefs: &[f64], intercept: f64, xy: &[(f64, f64)]) -> Vec<SlicePoint> {
    xy.iter()
        .map(|&(r, y)| SlicePoint {
            n_real: r,
            n_syn: y,
            accuracy: subset
                .members()
                .zip(coefs)
                .map(|(b, c)| c * b.eval(r, y, EPS))
                .sum::<f64>()
                + intercept,
        })
        .collect()
}

fn model_case() -> impl Strategy<Value = (Subset, Vec<f64>, f64, Vec<(f64, f64)>)> {
    (
        subset(),
        prop::collection::vec(coefficient(), 5),
        -50.0f64..50.0,
        points(),
    )
        .prop_map(|(s, mut c, i, p)| {
            c.truncate(s.len());
            (s, c, i, p)
        })
}

fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let orient = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let (d1, d2) = (orient(a, b, c), orient(a, b, d));
    let (d3, d4) = (orient(c, d, a), orient(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

/// A curved, increasing surface over added amounts.
fn log_surface(a: f64, b: f64, c: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| a * (1000.0 + x + EPS).ln() + b * (y + EPS).ln() + c * (1000.0 + x + y + EPS).ln()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_then_parse_is_identity(records in prop::collection::vec(record(), 0..40)) {
        let text = write_records(&records);
        let back = parse_records(&text, &Schema::default()).unwrap();
        prop_assert_eq!(back, records);
    }

    #[test]
    fn residuals_orthogonal_to_columns((s, coefs, intercept, xy) in model_case(), noise in prop::collection::vec(-1.0f64..1.0, 30)) {
        let mut pts = noiseless(s, &coefs, intercept, &xy);
        for (p, e) in pts.iter_mut().zip(&noise) {
            p.accuracy += e;
        }
        let model = ols_fit(&pts, s, EPS).unwrap();
        let res = model.residuals(&pts);
        let y_norm = pts.iter().map(|p| p.accuracy * p.accuracy).sum::<f64>().sqrt();
        let ones: Vec<f64> = vec![1.0; pts.len()];
        let mut cols = vec![ones];
        for b in s.members() {
            cols.push(pts.iter().map(|p| b.eval(p.n_real, p.n_syn, EPS)).collect());
        }
        for col in cols {
            let dot: f64 = col.iter().zip(&res).map(|(c, r)| c * r).sum();
            let c_norm = col.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!(dot.abs() <= 1e-9 * c_norm * y_norm, "dot {dot} for {s}");
        }
    }

    #[test]
    fn permuted_points_give_identical_fit((s, coefs, intercept, xy) in model_case(), seed in any::<u64>()) {
        let pts = noiseless(s, &coefs, intercept, &xy);
        let mut shuffled = pts.clone();
        let n = shuffled.len();
        let mut state = seed | 1;
        for i in (1..n).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let a = ols_fit(&pts, s, EPS).unwrap();
        let b = ols_fit(&shuffled, s, EPS).unwrap();
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        prop_assert!((a.intercept - b.intercept).abs() <= 1e-12 * a.intercept.abs().max(1.0));
    }

    #[test]
    fn noiseless_selection_returns_generating_subset((s, coefs, intercept, xy) in model_case()) {
        let pts = noiseless(s, &coefs, intercept, &xy);
        let sel = select_model(&pts, EPS, Criterion::AdjustedR2).unwrap();
        let scale = pts.iter().map(|p| p.accuracy.abs()).fold(0.0, f64::max);
        for r in sel.model.residuals(&pts) {
            prop_assert!(r.abs() <= 1e-8 * scale.max(1.0), "{} for {s}: residual {r}, adj r2 {}", sel.model.subset, sel.model.diagnostics.adjusted_r2);
        }
        prop_assert_eq!(sel.model.subset, s);
    }

    #[test]
    fn predict_ratio_increasing_and_convex_in_r(c1 in 0.3f64..3.0, c2 in 1.01f64..50.0, nb in 100.0f64..50_000.0) {
        let tau = 1.0 / 5000.0;
        let h = 0.01;
        let f = |r: f64| predict_ratio(c1, c2, tau, nb, r);
        for k in 0..300 {
            let r = k as f64 * h;
            let (a, b, c) = (f(r), f(r + h), f(r + 2.0 * h));
            prop_assert!(b > a);
            prop_assert!(c - 2.0 * b + a > 0.0);
        }
    }

    #[test]
    fn c1_sets_direction_in_n_base(c1 in 0.3f64..3.0, c2 in 1.01f64..50.0, r in 0.01f64..4.0) {
        prop_assume!((c1 - 1.0).abs() > 1e-3);
        let tau = 1.0 / 5000.0;
        let small = predict_ratio(c1, c2, tau, 1000.0, r);
        let large = predict_ratio(c1, c2, tau, 20_000.0, r);
        if c1 < 1.0 {
            prop_assert!(large < small);
        } else {
            prop_assert!(large > small);
        }
    }

    #[test]
    fn ir_ignores_a_shared_accuracy_shift(shift in -5.0f64..4.0, n_base in prop::sample::select(vec![500u64, 5000, 50_000])) {
        let records = fixture_group("cifar10").unwrap();
        let shifted: Vec<ExperimentRecord> = records
            .iter()
            .map(|r| {
                let mut r = r.clone();
                if r.n_base == n_base {
                    r.accuracy += shift;
                }
                r
            })
            .collect();
        let a = compute_ir(&records, "cifar10", n_base, 1.0).unwrap();
        let b = compute_ir(&shifted, "cifar10", n_base, 1.0).unwrap();
        prop_assert!((a.ir.unwrap() - b.ir.unwrap()).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn law_fit_recovers_parameters(c1 in 0.5f64..2.0, c2 in 1.2f64..40.0) {
        let tau = 1.0 / 5000.0;
        let mut tuples = Vec::new();
        for nb in [500u64, 5000, 25_000] {
            for r in [1.0, 2.0, 3.0] {
                let nbf = nb as f64;
                tuples.push(EquivalenceTuple {
                    n_base: nb,
                    n_real_plus: r * nbf,
                    n_syn_plus: predict_ratio(c1, c2, tau, nbf, r) * nbf,
                    surface_id: String::new(),
                });
            }
        }
        let law = fit_law(&tuples, tau, LossSpace::Log).unwrap();
        prop_assert!((law.c1 - c1).abs() <= 1e-3, "c1 {} vs {c1}", law.c1);
        prop_assert!((law.c2 - c2).abs() <= 1e-3, "c2 {} vs {c2}", law.c2);
    }

    #[test]
    fn contours_of_distinct_levels_never_cross(a in 0.5f64..4.0, b in 0.2f64..3.0, c in -1.0f64..2.0) {
        let f = log_surface(a, b, c);
        let grid = GridSpec::square(4000.0, 40);
        let lo = f(0.0, 0.0);
        let hi = f(4000.0, 4000.0);
        let levels: Vec<f64> = (1..6).map(|k| lo + (hi - lo) * k as f64 / 6.0).collect();
        let set = trace_contours(&f, &grid, &levels).unwrap();
        for (i, li) in set.levels.iter().enumerate() {
            for lj in &set.levels[i + 1..] {
                for pa in &li.polylines {
                    for pb in &lj.polylines {
                        for sa in pa.windows(2) {
                            for sb in pb.windows(2) {
                                prop_assert!(!segments_cross(sa[0], sa[1], sb[0], sb[1]));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn refinement_moves_vertices_less_than_a_cell(a in 0.5f64..4.0, b in 0.2f64..3.0, c in -1.0f64..2.0) {
        let f = log_surface(a, b, c);
        let coarse = GridSpec::square(4000.0, 32);
        let fine = GridSpec::square(4000.0, 64);
        let lo = f(0.0, 0.0);
        let hi = f(4000.0, 4000.0);
        let levels: Vec<f64> = (1..5).map(|k| lo + (hi - lo) * k as f64 / 5.0).collect();
        let cs = trace_contours(&f, &coarse, &levels).unwrap();
        let fs = trace_contours(&f, &fine, &levels).unwrap();
        let diag = coarse.cell_diagonal();
        for (lc, lf) in cs.levels.iter().zip(&fs.levels) {
            for v in lc.polylines.iter().flatten() {
                let nearest = lf
                    .polylines
                    .iter()
                    .flat_map(|p| {
                        let single = (p.len() == 1).then(|| ((p[0].0 - v.0).powi(2) + (p[0].1 - v.1).powi(2)).sqrt());
                        p.windows(2).map(|s| point_segment_distance(*v, s[0], s[1])).chain(single)
                    })
                    .fold(f64::INFINITY, f64::min);
                prop_assert!(nearest < diag, "vertex {v:?} is {nearest} from the fine contour");
            }
        }
    }
}

#[test]
fn slice_points_lie_on_the_axes() {
    for (group, _) in FIXTURE_GROUPS {
        let records = fixture_group(group).unwrap();
        let mut keys: Vec<(String, Mode, u64)> = records
            .iter()
            .filter(|r| r.mode.is_synthetic())
            .map(|r| (r.dataset.clone(), r.mode, r.n_base))
            .collect();
        keys.sort();
        keys.dedup();
        for (dataset, mode, n_base) in keys {
            let Ok(points) = slice_for_base(&records, &dataset, mode, n_base) else {
                continue;
            };
            let nb = n_base as f64;
            for p in points {
                assert!(p.n_real >= nb, "{group} {mode} {n_base}: {p:?}");
                assert_eq!((p.n_real - nb) * p.n_syn, 0.0, "{group} {mode} {n_base}: {p:?}");
            }
        }
    }
}

#[test]
fn fitted_surfaces_increase_in_synthetic_data_on_their_domain() {
    for preset in ["cifar10", "bloodmnist"] {
        let records = fixture_group(preset).unwrap();
        let config = StudyConfig::preset(preset).unwrap();
        let report = run_study(&records, &config, &[Mode::ClosedSet, Mode::OpenSet]).unwrap();
        for mode in [Mode::ClosedSet, Mode::OpenSet] {
            let Some(fit) = report.mode_fit(mode) else { continue };
            for s in fit.surfaces.values() {
                let nb = s.n_base as f64;
                let steps = 200;
                let mut prev = s.eval(nb, 0.0);
                for k in 1..=steps {
                    let y = s.max_n_syn * k as f64 / steps as f64;
                    let v = s.eval(nb, y);
                    assert!(v >= prev, "{} decreases at n_syn = {y}", s.id());
                    prev = v;
                }
                assert!(s.model.d_syn(nb, s.max_n_syn) >= 0.0);
            }
        }
    }
}

#[test]
fn report_is_deterministic() {
    let records = fixture_group("bloodmnist").unwrap();
    let config = StudyConfig::preset("bloodmnist").unwrap();
    let a = run_study(&records, &config, &[Mode::ClosedSet, Mode::OpenSet]).unwrap();
    let b = run_study(&records, &config, &[Mode::ClosedSet, Mode::OpenSet]).unwrap();
    assert_eq!(a.render(), b.render());
}

#[test]
fn basis_names_round_trip() {
    for b in BasisFunction::ALL {
        assert_eq!(b.name().parse::<BasisFunction>().unwrap(), b);
    }
    for s in Subset::all() {
        assert_eq!(s.to_string().parse::<Subset>().unwrap(), s);
    }
}
