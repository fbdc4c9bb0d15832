use catcollapse::hllm::{ipf_fit, ModelSpec, Term};
use catcollapse::pcc::{exhaustive_partition_search, expanded_dfmod, partition_loss};
use catcollapse::{run_pcc, Partition, Table, Treatment, TreatmentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_table(rng: &mut ChaCha8Rng, shape: &[usize], max: u32) -> Table {
    let cells: usize = shape.iter().product();
    let values: Vec<f64> = (0..cells)
        .map(|_| f64::from(rng.gen_range(1..=max)))
        .collect();
    Table::from_dense(shape.to_vec(), &values).unwrap()
}

fn sparse_random_table(rng: &mut ChaCha8Rng, shape: &[usize], max: u32) -> Table {
    let cells: usize = shape.iter().product();
    let mut values: Vec<f64> = (0..cells)
        .map(|_| {
            if rng.gen_bool(0.15) {
                0.0
            } else {
                f64::from(rng.gen_range(1..=max))
            }
        })
        .collect();
    values[0] += 1.0;
    Table::from_dense(shape.to_vec(), &values).unwrap()
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn term(v: &[usize]) -> Term {
    Term::new(v).unwrap()
}

#[test]
fn ipf_joint_plus_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = ModelSpec::new([term(&[0, 1]), term(&[2])]);
    for shape in [[2, 2, 2], [3, 2, 2]] {
        for _ in 0..200 {
            let t = random_table(&mut rng, &shape, 60);
            let fit = ipf_fit(&t, &spec, 1e-10, 1000).unwrap();
            assert!(fit.converged);
            let n = t.total();
            for (coords, fitted) in fit.fitted.iter() {
                let (i, j, k) = (coords[0], coords[1], coords[2]);
                let nij: f64 = (0..shape[2]).map(|c| t.get(&[i, j, c])).sum();
                let nk: f64 = (0..shape[0])
                    .flat_map(|a| (0..shape[1]).map(move |b| (a, b)))
                    .map(|(a, b)| t.get(&[a, b, k]))
                    .sum();
                assert!(rel_close(fitted, nij * nk / n, 1e-8), "{coords:?}");
            }
        }
    }
}

#[test]
fn ipf_conditional_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spec = ModelSpec::new([term(&[0, 1]), term(&[1, 2])]);
    for shape in [[2, 2, 2], [3, 2, 2]] {
        for _ in 0..200 {
            let t = random_table(&mut rng, &shape, 60);
            let fit = ipf_fit(&t, &spec, 1e-10, 1000).unwrap();
            assert!(fit.converged);
            for (coords, fitted) in fit.fitted.iter() {
                let (i, j, k) = (coords[0], coords[1], coords[2]);
                let nij: f64 = (0..shape[2]).map(|c| t.get(&[i, j, c])).sum();
                let njk: f64 = (0..shape[0]).map(|a| t.get(&[a, j, k])).sum();
                let nj: f64 = (0..shape[0])
                    .flat_map(|a| (0..shape[2]).map(move |c| (a, c)))
                    .map(|(a, c)| t.get(&[a, j, c]))
                    .sum();
                assert!(rel_close(fitted, nij * njk / nj, 1e-8), "{coords:?}");
            }
        }
    }
}

/// Every partition reachable from `p` by merging two groups of one variable,
/// tagged with `(dim, u, v)` in the group numbering of `p`.
fn one_merge_neighbours(p: &Partition) -> Vec<((usize, usize, usize), Partition)> {
    let mut out = Vec::new();
    for dim in 0..p.keys().len() {
        let g = p.group_counts()[dim];
        for u in 0..g {
            for v in u + 1..g {
                let mut keys = p.keys().to_vec();
                keys[dim] = keys[dim]
                    .iter()
                    .map(|&x| if x == v { u } else { x })
                    .collect();
                out.push(((dim, u, v), Partition::new(keys).unwrap()));
            }
        }
    }
    out
}

/// Checks each greedy step against the minimum quotient recomputed through
/// expanded-model deviances of all one-merge neighbours.
fn check_greedy_steps(t: &Table) {
    let cfg = TreatmentConfig::uniform(Treatment::Nominal, t.ndim());
    let trace = run_pcc(t, &cfg).unwrap();
    for pair in trace.steps.windows(2) {
        let (prev, step) = (&pair[0], &pair[1]);
        if step.terminal {
            continue;
        }
        let base_loss = partition_loss(t, &prev.partition).unwrap();
        let base_df = expanded_dfmod(&prev.partition);
        let mut scored = Vec::new();
        for (tag, q) in one_merge_neighbours(&prev.partition) {
            let df = base_df - expanded_dfmod(&q);
            if df == 0 {
                continue;
            }
            let loss = partition_loss(t, &q).unwrap() - base_loss;
            scored.push((tag, loss / df as f64, df));
        }
        let best = scored.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * best.abs().max(1e-9);
        let chosen = scored.iter().find(|s| s.1 - best <= tol).unwrap();
        let (dim, u, v) = chosen.0;
        assert_eq!(step.dim, Some(dim), "step {}", step.r);
        assert_eq!(step.pair, Some((u, v)), "step {}", step.r);
        assert_eq!(step.df_term, chosen.2);
        assert!(
            (step.quotient - best).abs() <= 1e-9 * best.abs().max(1.0),
            "{} vs {best}",
            step.quotient
        );
    }
}

#[test]
fn greedy_steps_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for shape in [vec![3, 3], vec![3, 3, 2]] {
        for _ in 0..50 {
            check_greedy_steps(&sparse_random_table(&mut rng, &shape, 40));
        }
    }
}

#[test]
fn greedy_never_beats_shape_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let cfg = TreatmentConfig::uniform(Treatment::Nominal, 3);
    for _ in 0..10 {
        let t = sparse_random_table(&mut rng, &[3, 3, 2], 40);
        let search = exhaustive_partition_search(&t, &cfg, 1_000).unwrap();
        assert_eq!(search.evaluated, 5 * 5 * 2);
        let trace = run_pcc(&t, &cfg).unwrap();
        for step in &trace.steps {
            let best = search.best_for(&step.shape).unwrap();
            assert!(best.loss <= step.dev + 1e-9 * step.dev.max(1.0));
        }
        let identity = search.best_for(&[3, 3, 2]).unwrap();
        assert!(identity.loss.abs() < 1e-9);
        assert_eq!(identity.dfmod, 17);
        let collapsed = search.best_for(&[1, 1, 1]).unwrap();
        assert!(rel_close(collapsed.loss, trace.final_dev(), 1e-6));
    }
}
