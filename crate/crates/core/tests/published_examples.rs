mod common;

use catcollapse::hllm::ModelSpec;
use catcollapse::pcc::{info_concentration, PccTrace};
use catcollapse::{
    adjusted_rsq, backward_select, build_table, expand_model, fit_hllpm, g2_independence,
    independence_model, ipf_fit, loss_matrix, model_df, pair_loss, pearson_ratios,
    penalized_scores, run_pcc, select_merge, CategoryScheme, Partition, Table, Treatment,
    TreatmentConfig, VariableDef,
};
use common::{christensen, wermuth_cox};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn nominal(k: usize) -> TreatmentConfig {
    TreatmentConfig::uniform(Treatment::Nominal, k)
}

#[test]
fn build_from_scheme() {
    let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
    let scheme = CategoryScheme::new(vec![
        VariableDef::new("S", labels(5), Treatment::Ordinal),
        VariableDef::new("A", labels(5), Treatment::Ordinal),
    ])
    .unwrap();
    let entries: Vec<(Vec<usize>, f64)> = common::WERMUTH_COX
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &c)| (vec![i, j], c)))
        .collect();
    let t: Table = build_table(&scheme, entries).unwrap();
    assert_eq!(t.shape(), &[5, 5]);
    assert_eq!(t.total(), 3673.0);

    let empty: Table = build_table(&scheme, Vec::<(Vec<usize>, f64)>::new()).unwrap();
    assert_eq!((empty.total(), empty.nnz()), (0.0, 0));

    let dup: Table = build_table(&scheme, vec![(vec![0, 0], 2.0), (vec![0, 0], 3.0)]).unwrap();
    assert_eq!((dup.nnz(), dup.get(&[0, 0])), (1, 5.0));

    assert!(build_table::<f64, _, _>(&scheme, vec![(vec![5, 0], 1.0)]).is_err());
    assert!(build_table::<f64, _, _>(&scheme, vec![(vec![0, 0], -1.0)]).is_err());
}

#[test]
fn row_marginal() {
    let m = wermuth_cox().marginal(&[0]).unwrap();
    let rows: Vec<f64> = (0..5).map(|i| m.get(&[i])).collect();
    // independent hand sums of each row
    let expect: Vec<f64> = common::WERMUTH_COX.iter().map(|r| r.iter().sum()).collect();
    assert_eq!(rows, expect);
    assert_eq!(rows, vec![64.0, 1812.0, 933.0, 211.0, 653.0]);
    assert_eq!(wermuth_cox().marginal(&[0, 1]).unwrap(), wermuth_cox());
}

#[test]
fn age_key_merges_last_columns() {
    let p = Partition::new(vec![vec![0, 1, 2, 3, 4], vec![0, 1, 2, 3, 3]]).unwrap();
    let t = wermuth_cox().apply_partition(&p).unwrap();
    assert_eq!(t.shape(), &[5, 4]);
    let col: Vec<f64> = (0..5).map(|i| t.get(&[i, 3])).collect();
    assert_eq!(col, vec![27.0, 597.0, 164.0, 21.0, 93.0]);
    assert_eq!(t.total(), 3673.0);
}

#[test]
fn schooling_pair_slice() {
    let s = wermuth_cox().pair_slice(0, 0, 1).unwrap();
    assert_eq!(s.shape(), &[2, 5]);
    let rows: Vec<Vec<f64>> = (0..2)
        .map(|i| (0..5).map(|j| s.get(&[i, j])).collect())
        .collect();
    assert_eq!(
        rows,
        vec![
            vec![12.0, 13.0, 12.0, 20.0, 7.0],
            vec![215.0, 507.0, 493.0, 460.0, 137.0]
        ]
    );
    let (g2, df) = g2_independence(&s).unwrap();
    assert!(close(g2, 6.95, 0.005), "{g2}");
    assert_eq!(df, 4);
}

#[test]
fn independence_deviance() {
    let (g2, df) = g2_independence(&wermuth_cox()).unwrap();
    assert!(close(g2, 357.146, 0.0005), "{g2}");
    assert_eq!(df, 16);
}

#[test]
fn schooling_loss_matrix() {
    let m = loss_matrix(&wermuth_cox(), 0, Treatment::Nominal).unwrap();
    let expect = [
        (0, 1, 6.95),
        (0, 2, 20.44),
        (0, 3, 32.92),
        (0, 4, 30.40),
        (1, 2, 173.69),
        (1, 3, 77.52),
        (1, 4, 236.06),
        (2, 3, 14.77),
        (2, 4, 12.99),
        (3, 4, 16.31),
    ];
    assert_eq!(m.entries.len(), expect.len());
    for (u, v, g2) in expect {
        let e = m.get(u, v).unwrap();
        assert!(close(e.g2, g2, 0.01), "({u},{v}) {} vs {g2}", e.g2);
        assert_eq!(e.df, 4);
    }
}

#[test]
fn age_loss_matrix() {
    let m = loss_matrix(&wermuth_cox(), 1, Treatment::Nominal).unwrap();
    let expect = [
        (0, 1, 70.52),
        (0, 2, 178.53),
        (0, 3, 253.15),
        (0, 4, 117.20),
        (1, 2, 43.25),
        (1, 3, 110.11),
        (1, 4, 45.81),
        (2, 3, 23.96),
        (2, 4, 10.13),
        (3, 4, 0.84),
    ];
    for (u, v, g2) in expect {
        assert!(close(m.get(u, v).unwrap().g2, g2, 0.01), "({u},{v})");
    }
    let adjacent = loss_matrix(&wermuth_cox(), 1, Treatment::Ordinal).unwrap();
    assert_eq!(adjacent.entries.len(), 4);
}

#[test]
fn abortion_age_losses() {
    let t = christensen();
    let m = loss_matrix(&t, 3, Treatment::Nominal).unwrap();
    let expect = [
        (0, 1, 7.21),
        (0, 2, 14.29),
        (0, 3, 22.21),
        (0, 4, 35.21),
        (0, 5, 54.45),
        (1, 2, 7.05),
        (1, 3, 15.24),
        (1, 4, 22.48),
        (1, 5, 38.21),
        (2, 3, 4.58),
        (2, 4, 9.87),
        (2, 5, 19.60),
        (3, 4, 3.43),
        (3, 5, 9.59),
        (4, 5, 2.19),
    ];
    for (u, v, g2) in expect {
        let e = m.get(u, v).unwrap();
        assert!(close(e.g2, g2, 0.01), "({u},{v}) {}", e.g2);
        assert_eq!(e.df, 11);
    }
    let p = pair_loss(&t, 3, 4, 5).unwrap();
    assert!(close(p.g2, 2.19, 0.005));
}

#[test]
fn first_merges() {
    let w = select_merge(&wermuth_cox(), &nominal(2)).unwrap().unwrap();
    assert_eq!((w.dim, w.u, w.v, w.df), (1, 3, 4, 4));
    assert!(close(w.g2, 0.84, 0.005));
    let c = select_merge(&christensen(), &nominal(4)).unwrap().unwrap();
    assert_eq!((c.dim, c.u, c.v, c.df), (3, 4, 5, 11));
    assert!(close(c.g2, 2.19, 0.005));
    let single = Table::from_dense(vec![1, 1, 1], &[5.0]).unwrap();
    assert!(select_merge(&single, &nominal(3)).unwrap().is_none());
}

fn row(trace: &PccTrace<f64>, r: usize) -> &catcollapse::PccStep<f64> {
    &trace.steps[r]
}

#[test]
fn schooling_age_trace() {
    let trace = run_pcc(&wermuth_cox(), &nominal(2)).unwrap();
    assert_eq!(trace.steps.len(), 9);
    let r2 = row(&trace, 2);
    assert_eq!(
        (r2.dim, r2.key.clone(), r2.shape.clone()),
        (Some(0), vec![0, 0, 1, 2, 3], vec![4, 4])
    );
    assert!(close(r2.dev, 7.66, 0.01));
    assert!(close(r2.dev_term, 6.82, 0.01));
    let r6 = row(&trace, 6);
    assert!(close(r6.dev, 110.54, 0.01));
    assert!(close(r6.adj_rsq, 0.670, 0.001));
    assert!(close(trace.final_dev(), 357.146, 0.001));
}

#[test]
fn abortion_trace_opening() {
    let trace = run_pcc(&christensen(), &nominal(4)).unwrap();
    let terms: Vec<f64> = trace.steps[1..4].iter().map(|s| s.dev_term).collect();
    for (got, want) in terms.iter().zip([2.19, 4.58, 7.21]) {
        assert!(close(*got, want, 0.01), "{got}");
    }
    let r4 = row(&trace, 4);
    assert_eq!(
        (r4.dim, r4.df_term, r4.shape.clone()),
        (Some(1), 17, vec![2, 1, 3, 3])
    );
    assert!(close(r4.dev_term, 28.67, 0.01));
    assert!(close(r4.dev, 42.65, 0.01));
}

#[test]
fn duplicate_rows_merge_first() {
    let t = Table::from_dense(vec![3, 3], &[3.0, 8.0, 2.0, 5.0, 1.0, 9.0, 3.0, 8.0, 2.0]).unwrap();
    let trace = run_pcc(&t, &nominal(2)).unwrap();
    let s = row(&trace, 1);
    assert_eq!((s.dim, s.pair), (Some(0), Some((0, 2))));
    assert!(s.dev_term.abs() < 1e-12);
}

#[test]
fn adjusted_rsq_examples() {
    assert!(close(adjusted_rsq(110.54, 15, 357.15, 16).0, 0.670, 0.0005));
    assert!(close(adjusted_rsq(0.84, 4, 357.15, 16).0, 0.991, 0.0005));
    assert!(adjusted_rsq(357.15f64, 16, 357.15, 16).0.abs() < 1e-12);
    assert_eq!(adjusted_rsq(0.0, 0, 357.15, 16), (1.0, false));
    assert_eq!(adjusted_rsq(0.0, 3, 0.0, 5), (1.0, true));
}

#[test]
fn penalized_score_examples() {
    let (aic, bic) = penalized_scores(0.0, 24, 3673.0);
    assert_eq!(aic, 48.0);
    assert!(close(bic - aic, 24.0 * (3673f64.ln() - 2.0), 1e-9));
    let (aic, bic) = penalized_scores(357.15, 8, 3673.0);
    assert!(close(aic, 373.15, 1e-9));
    assert!(close(bic - aic, 8.0 * (3673f64.ln() - 2.0), 1e-9));
}

#[test]
fn concentration_of_schooling_trace() {
    // trapezoid rule over the published (dfmod, dev) pairs
    let published = [
        (24.0, 0.00),
        (20.0, 0.84),
        (17.0, 7.66),
        (14.0, 20.39),
        (11.0, 35.69),
        (10.0, 52.89),
        (9.0, 110.54),
        (8.0, 357.15),
        (8.0, 357.15),
    ];
    let (x_max, x_min, y_max) = (24.0, 8.0, 357.15);
    let mut area = 0.0;
    for w in published.windows(2) {
        let x0 = (x_max - w[0].0) / (x_max - x_min);
        let x1 = (x_max - w[1].0) / (x_max - x_min);
        area += (x1 - x0) * (w[0].1 + w[1].1) / (2.0 * y_max);
    }
    let oracle = area / 0.5;

    let trace = run_pcc(&wermuth_cox(), &nominal(2)).unwrap();
    let got = info_concentration(&trace.curve()).unwrap();
    assert!(close(got, oracle, 1e-3), "{got} vs {oracle}");
    assert!(got < 0.35);

    assert!(close(
        info_concentration(&[(2, 0.0), (1, 1.0), (0, 2.0)]).unwrap(),
        1.0,
        1e-12
    ));
    let late: Vec<(usize, f64)> = (0..=100)
        .rev()
        .map(|x| (x, if x == 0 { 1.0 } else { 0.0 }))
        .collect();
    assert!(info_concentration(&late).unwrap() < 0.011);
}

#[test]
fn model_df_examples() {
    assert_eq!(model_df(&ModelSpec::main_effects(2), &[5, 5]), 8);
    assert_eq!(model_df(&ModelSpec::saturated(4), &[2, 2, 3, 6]), 71);
    let names = ["A", "M", "Q", "F"];
    let spec = ModelSpec::parse("[MQF][AQF][AMF][AMQ]", &names).unwrap();
    assert_eq!(model_df(&spec, &[11, 5, 11, 16]), 3679);
}

#[test]
fn independence_fit() {
    let fit = ipf_fit(&wermuth_cox(), &ModelSpec::main_effects(2), 1e-8, 1000).unwrap();
    assert!(fit.converged);
    assert!(close(fit.dev, 357.146, 0.0005));
    assert_eq!((fit.dfmod, fit.dfres), (8, 16));
    let sat = ipf_fit(&wermuth_cox(), &ModelSpec::saturated(2), 1e-8, 1000).unwrap();
    assert!(sat.dev.abs() < 1e-9);
}

fn line4_partition() -> Partition {
    Partition::new(vec![
        vec![0, 1],
        vec![0, 0],
        vec![0, 1, 2],
        vec![0, 0, 1, 1, 2, 2],
    ])
    .unwrap()
}

#[test]
fn abortion_backward_selection() {
    let collapsed = christensen().apply_partition(&line4_partition()).unwrap();
    assert_eq!(collapsed.shape(), &[2, 1, 3, 3]);
    let trace = backward_select(&collapsed, &ModelSpec::saturated(4)).unwrap();
    let names = ["r", "s", "o", "a"];
    let find = |label: &str| {
        trace
            .rows
            .iter()
            .find(|r| r.spec.display_with(&names) == label)
            .unwrap_or_else(|| panic!("{label} missing"))
    };
    assert!(find("[roa][s]").dev.abs() < 1e-9);
    let r8 = find("[oa][ra][ro][s]");
    assert!(close(r8.dev, 5.245, 0.01));
    assert_eq!((r8.dfmod, r8.dfres), (13, 4));
    assert!(close(r8.adj_rsq, 0.800, 0.001));
    let r9 = find("[oa][ro][s]");
    assert!(close(r9.dev, 9.225, 0.01));
    assert!(close(r9.dev_term, 3.980, 0.01));
    assert_eq!(r9.df_term, 2);
    assert!(close(find("[oa][s][r]").dev, 23.214, 0.02));
    assert!(close(find("[a][o][s][r]").dev, 78.811, 0.02));
}

#[test]
fn partition_model_fits() {
    let w = wermuth_cox();
    let p4 = Partition::new(vec![vec![0, 0, 1, 1, 1], vec![0, 1, 2, 3, 3]]).unwrap();
    let fit = fit_hllpm(&w, &p4, &ModelSpec::saturated(2)).unwrap();
    assert!(close(fit.dev, 35.69, 0.01));
    assert_eq!(fit.dfmod + fit.dfres, 24);
    let id = fit_hllpm(&w, &Partition::identity(&[5, 5]), &ModelSpec::saturated(2)).unwrap();
    assert!(id.dev.abs() < 1e-9);
    let c = fit_hllpm(&christensen(), &line4_partition(), &ModelSpec::saturated(4)).unwrap();
    assert!(close(c.dev, 42.65, 0.01));
}

#[test]
fn pearson_ratio_blocks() {
    let w = wermuth_cox();
    let ind = independence_model(&w).unwrap();
    let ratios = pearson_ratios(&w, &ind).unwrap();
    for (j, want) in [0.873, 0.657, 0.814, 1.652, 1.941].into_iter().enumerate() {
        assert!(close(ratios.get(&[0, j]), want, 0.002));
    }

    // row-4 collapsed model expanded back to 5 x 5
    let p4 = Partition::new(vec![vec![0, 0, 1, 1, 1], vec![0, 1, 2, 3, 3]]).unwrap();
    let collapsed = w
        .apply_partition(&p4)
        .unwrap()
        .scaled(1.0 / w.total())
        .unwrap();
    let expanded = expand_model(&collapsed, &p4, &w.one_way_all()).unwrap();
    let r = pearson_ratios(&expanded, &ind).unwrap();
    let top = [0.56, 0.90, 1.17, 1.35, 1.35];
    let bottom = [1.46, 1.11, 0.82, 0.63, 0.63];
    for i in 0..5 {
        let want = if i < 2 { top } else { bottom };
        for j in 0..5 {
            assert!(
                close(r.get(&[i, j]), want[j], 0.01),
                "({i},{j}) {}",
                r.get(&[i, j])
            );
        }
    }

    let uniform = Table::from_dense(vec![3, 2], &[4.0; 6]).unwrap();
    let ones = pearson_ratios(&uniform, &independence_model(&uniform).unwrap()).unwrap();
    assert!(ones.values().iter().all(|&v| close(v, 1.0, 1e-12)));
}
