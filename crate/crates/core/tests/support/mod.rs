//! Independent reference implementations and seeded check loops shared by
//! the property tests and the acceptance runner.

#![allow(dead_code)]

use netclass::bipartite::{project, ThresholdedBipartite, Side};
use netclass::classify::{gini_split, kmeans, FeatureMatrix};
use netclass::features::{degree_assortativity, num_triangles, triangles_per_node};
use netclass::graph::Graph;
use netclass::rng::{self, Rng};
use netclass::stats::{fit_lognormal, ks_one_sample, ks_two_sample};
use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Normal};

pub fn random_graph(rng: &mut Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

pub fn dense(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// Triangle total and per-node counts by enumerating all triples.
pub fn brute_triangles(g: &Graph) -> (u64, Vec<u64>) {
    let a = dense(g);
    let n = a.len();
    let mut per = vec![0u64; n];
    let mut total = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if a[i][j] && a[j][k] && a[i][k] {
                    total += 1;
                    per[i] += 1;
                    per[j] += 1;
                    per[k] += 1;
                }
            }
        }
    }
    (total, per)
}

/// Pearson correlation of endpoint degrees over both orientations of every
/// edge; `None` when either side has zero variance.
pub fn pearson_assortativity(g: &Graph) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (u, v) in g.edges() {
        let (du, dv) = (g.degree(u) as f64, g.degree(v) as f64);
        xs.extend([du, dv]);
        ys.extend([dv, du]);
    }
    let n = xs.len() as f64;
    if n == 0.0 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn gini_of(labels: &[u32]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    let max = *labels.iter().max().unwrap();
    (1..=max)
        .map(|k| {
            let p = labels.iter().filter(|&&l| l == k).count() as f64 / n;
            p * (1.0 - p)
        })
        .sum()
}

/// Lowest size-weighted child impurity over every feature and every cut
/// between distinct observed values, and the parent impurity.
pub fn exhaustive_split(data: &FeatureMatrix, rows: &[usize], candidates: &[usize]) -> (f64, Option<f64>) {
    let labels = data.labels().unwrap();
    let all: Vec<u32> = rows.iter().map(|&i| labels[i]).collect();
    let parent = gini_of(&all);
    let n = rows.len() as f64;
    let mut best: Option<f64> = None;
    for &j in candidates {
        for &t in rows {
            let t = data.get(t, j);
            let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| data.get(i, j) <= t);
            if right.is_empty() {
                continue;
            }
            let l: Vec<u32> = left.iter().map(|&i| labels[i]).collect();
            let r: Vec<u32> = right.iter().map(|&i| labels[i]).collect();
            let child = (l.len() as f64 * gini_of(&l) + r.len() as f64 * gini_of(&r)) / n;
            if best.is_none_or(|b| child < b) {
                best = Some(child);
            }
        }
    }
    (parent, best)
}

/// Projection adjacency from the dense product `B B^T` (or `B^T B`).
pub fn dense_projection(tb: &ThresholdedBipartite, side: Side) -> Vec<Vec<bool>> {
    let (nl, nr) = (tb.n_left(), tb.n_right());
    let b: Vec<Vec<u32>> = (0..nl).map(|l| (0..nr).map(|r| u32::from(tb.has_edge(l, r))).collect()).collect();
    let m = match side {
        Side::Left => nl,
        Side::Right => nr,
    };
    let mut out = vec![vec![false; m]; m];
    for a in 0..m {
        for c in 0..m {
            let s: u32 = match side {
                Side::Left => (0..nr).map(|r| b[a][r] * b[c][r]).sum(),
                Side::Right => (0..nl).map(|l| b[l][a] * b[l][c]).sum(),
            };
            out[a][c] = a != c && s > 0;
        }
    }
    out
}

pub fn random_bipartite(rng: &mut Rng, nl: usize, nr: usize, p: f64) -> ThresholdedBipartite {
    let mut edges = Vec::new();
    for l in 0..nl {
        for r in 0..nr {
            if rng.random::<f64>() < p {
                edges.push((l, r));
            }
        }
    }
    ThresholdedBipartite::from_edges(nl, nr, &edges)
}

pub type Check = Result<String, String>;

pub fn check_triangles(n_graphs: usize, seed: u64) -> Check {
    for i in 0..n_graphs {
        let mut rng = rng::stream(seed, i as u64);
        let n = rng.random_range(0..=30);
        let p = rng.random::<f64>();
        let g = random_graph(&mut rng, n, p);
        let (total, per) = brute_triangles(&g);
        if num_triangles(&g) != total as f64 || triangles_per_node(&g) != per {
            return Err(format!("graph {i} (n={n}): got {} triangles, oracle {total}", num_triangles(&g)));
        }
    }
    Ok(format!("{n_graphs} graphs agree"))
}

pub fn check_assortativity(n_graphs: usize, seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..n_graphs {
        let mut rng = rng::stream(seed, i as u64);
        let n = rng.random_range(2..=40);
        let p = rng.random::<f64>() * 0.5;
        let g = random_graph(&mut rng, n, p);
        let got = degree_assortativity(&g);
        match pearson_assortativity(&g) {
            Some(r) => {
                if got.degenerate {
                    return Err(format!("graph {i}: flagged degenerate, oracle {r}"));
                }
                worst = worst.max((got.value - r).abs());
            }
            None if !got.degenerate => return Err(format!("graph {i}: oracle undefined, got {}", got.value)),
            None => {}
        }
    }
    if worst < 1e-9 {
        Ok(format!("{n_graphs} graphs, max |delta| {worst:.2e}"))
    } else {
        Err(format!("max |delta| {worst:.2e}"))
    }
}

pub fn check_gini_split(n_sets: usize, seed: u64) -> Check {
    for i in 0..n_sets {
        let mut rng = rng::stream(seed, i as u64);
        let n = rng.random_range(1..=8);
        let p = rng.random_range(1..=3);
        let classes = rng.random_range(1..=3);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| f64::from(rng.random_range(0..4u8))).collect()).collect();
        let labels: Vec<u32> = (0..n).map(|_| rng.random_range(1..=classes)).collect();
        let m = FeatureMatrix::from_labeled_rows(rows, labels).unwrap().with_n_classes(classes as usize);
        let all: Vec<usize> = (0..n).collect();
        let cand: Vec<usize> = (0..p).collect();
        let (parent, best) = exhaustive_split(&m, &all, &cand);
        let got = gini_split(&m, &all, &cand);
        let expect = best.filter(|&b| parent - b > 1e-9);
        match (got, expect) {
            (None, None) => {}
            (Some(s), Some(b)) if (s.child_impurity - b).abs() < 1e-12 && (s.parent_impurity - parent).abs() < 1e-12 => {
                let left: Vec<usize> = all.iter().copied().filter(|&r| m.get(r, s.feature) <= s.threshold).collect();
                if left.is_empty() || left.len() == n {
                    return Err(format!("dataset {i}: split threshold separates nothing"));
                }
            }
            (g, e) => return Err(format!("dataset {i}: got {g:?}, oracle child impurity {e:?}")),
        }
    }
    Ok(format!("{n_sets} datasets agree"))
}

pub fn check_projection(n_graphs: usize, seed: u64) -> Check {
    for i in 0..n_graphs {
        let mut rng = rng::stream(seed, i as u64);
        let (nl, nr) = (rng.random_range(0..=12), rng.random_range(0..=15));
        let p = rng.random::<f64>() * 0.4;
        let tb = random_bipartite(&mut rng, nl, nr, p);
        for side in [Side::Left, Side::Right] {
            if dense(&project(&tb, side).graph) != dense_projection(&tb, side) {
                return Err(format!("graph {i} ({nl}x{nr}) side {side:?} differs"));
            }
        }
    }
    Ok(format!("{n_graphs} bipartite graphs agree"))
}

pub fn check_kmeans(n_seeds: usize) -> Check {
    for s in 0..n_seeds as u64 {
        let mut rng = rng::seeded(s);
        let n = rng.random_range(5..=60);
        let p = rng.random_range(1..=4);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random::<f64>() * 10.0).collect()).collect();
        let k = rng.random_range(1..=5.min(n));
        let m = FeatureMatrix::from_rows(rows.clone()).unwrap();
        let model = kmeans(&m, k, 3, s).map_err(|e| e.to_string())?;
        if let Some(w) = model.objective_trace.windows(2).find(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-12) {
            return Err(format!("seed {s}: objective rose from {} to {}", w[0], w[1]));
        }
        let direct: f64 = rows
            .iter()
            .zip(&model.assignments)
            .map(|(r, &c)| r.iter().zip(&model.centroids[c]).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .sum();
        if (direct - model.objective).abs() > 1e-9 * direct.max(1.0) {
            return Err(format!("seed {s}: reported objective {} but assignments give {direct}", model.objective));
        }
    }
    Ok(format!("{n_seeds} seeded runs nonincreasing"))
}

pub const MONDAY_MU: f64 = 1.794;
pub const MONDAY_SIGMA: f64 = 0.693;

/// Trials (out of `trials`) whose 95% intervals cover the true mu and sigma.
pub fn lognormal_coverage(trials: usize, n: usize, seed: u64) -> (usize, usize) {
    let dist = LogNormal::new(MONDAY_MU, MONDAY_SIGMA).unwrap();
    let (mut mu_in, mut sigma_in) = (0, 0);
    for t in 0..trials {
        let mut rng = rng::stream(seed, t as u64);
        let sample: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let fit = fit_lognormal(&sample).unwrap();
        mu_in += usize::from(fit.ci_mu.0 <= MONDAY_MU && MONDAY_MU <= fit.ci_mu.1);
        sigma_in += usize::from(fit.ci_sigma.0 <= MONDAY_SIGMA && MONDAY_SIGMA <= fit.ci_sigma.1);
    }
    (mu_in, sigma_in)
}

pub fn check_lognormal(seed: u64) -> Check {
    let (mu_in, sigma_in) = lognormal_coverage(100, 100_000, seed);
    let msg = format!("mu covered {mu_in}/100, sigma covered {sigma_in}/100");
    if mu_in >= 90 && sigma_in >= 90 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// p-values of `reps` two-sample KS tests with both samples from one normal.
pub fn null_ks_pvalues(reps: usize, n: usize, m: usize, seed: u64) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).unwrap();
    (0..reps)
        .map(|r| {
            let mut rng = rng::stream(seed, r as u64);
            let a: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            let b: Vec<f64> = (0..m).map(|_| normal.sample(&mut rng)).collect();
            ks_two_sample(&a, &b).unwrap().pvalue
        })
        .collect()
}

pub fn check_ks_uniform(seed: u64) -> Check {
    let p = null_ks_pvalues(1000, 400, 300, seed);
    let test = ks_one_sample(&p, |x| x.clamp(0.0, 1.0)).map_err(|e| e.to_string())?;
    let msg = format!("1000 null p-values vs uniform: D {:.4}, p {:.3}", test.statistic, test.pvalue);
    if test.pvalue >= 0.01 {
        Ok(msg)
    } else {
        Err(msg)
    }
}
