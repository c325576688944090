//! Snowball versus zip-group subsampling: how does the misclassification
//! rate depend on network size and on the sampling design?

use std::collections::HashSet;
use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{cross_validate, ClassifierConfig, ClassifierKind};
use crate::error::{Error, Result};
use crate::features::{extract_unipartite, num_nodes, DistributionOptions, FeatureSet};
use crate::graph::{Graph, GraphBuilder, GraphCollection};
use crate::rng;
use crate::sampling::{attribute_subsample, induce_ids, snowball, zip_values, Subsample, ZipSubsample};
use crate::stats::{fit_lad, permutation_test_beta2, LadFit, PermutationTest};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub radii: Vec<usize>,
    pub snowballs_per_radius: usize,
    pub min_size: usize,
    pub folds: usize,
    pub trees: usize,
    pub n_perm: usize,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            radii: vec![4, 5, 6],
            snowballs_per_radius: 15,
            min_size: crate::sampling::MIN_SIZE,
            folds: 7,
            trees: 100,
            n_perm: 1000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub sample_type: String,
    pub name: String,
    pub subsample_size: usize,
    /// Mean number of active nodes over the induced daily networks.
    pub avg_network_size: f64,
    /// Out-of-fold misclassification rate over all days.
    pub mr: f64,
}

impl StudyRow {
    pub fn z(&self) -> u8 {
        u8::from(self.sample_type == "zip")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub rows: Vec<StudyRow>,
    pub fit: LadFit,
    pub permutation: PermutationTest,
}

fn evaluate_subsample(
    days: &GraphCollection<Graph>,
    ids: &[&str],
    config: &StudyConfig,
    seed: u64,
) -> Result<(f64, f64)> {
    let graphs: Vec<Graph> = days.graphs.iter().map(|g| induce_ids(g, ids)).collect();
    let avg = graphs.iter().map(num_nodes).sum::<f64>() / graphs.len() as f64;
    let labels = days.labels().ok_or_else(|| Error::Config("the study needs labeled days".into()))?;
    let sub = GraphCollection::labeled(graphs, days.ids.clone(), labels.to_vec(), days.class_names().to_vec())?;
    let e = extract_unipartite(&sub, FeatureSet::Cdr, DistributionOptions::default())?;
    let classifier = ClassifierConfig {
        classifier: ClassifierKind::Rf,
        trees: config.trees,
        ..Default::default()
    };
    let cv = cross_validate(&e.matrix, &classifier, config.folds, seed)?;
    let wrong = cv.predictions.iter().zip(labels).filter(|(p, &y)| p.class != y).count();
    Ok((avg, wrong as f64 / labels.len() as f64))
}

/// Draws snowball samples from `combined` and takes every qualifying zip
/// group, evaluates a forest on each subsample's daily networks, and fits
/// `1/(MR + 0.01) - beta0 = b1 X + b2 Z X` with a binned permutation test.
pub fn run_sampling_study(
    days: &GraphCollection<Graph>,
    combined: &Graph,
    config: &StudyConfig,
) -> Result<StudyResult> {
    let mut subsamples: Vec<(String, Subsample)> = Vec::new();
    let snowball_seed = rng::derive_seed(config.seed, 2);
    for &radius in &config.radii {
        for k in 0..config.snowballs_per_radius {
            let stream = (radius * 1_000_000 + k) as u64;
            let s = snowball(combined, radius, config.min_size, &mut rng::stream(snowball_seed, stream))?;
            subsamples.push((format!("r{radius}-{}", k + 1), s));
        }
    }
    for zip in zip_values(combined) {
        if let ZipSubsample::Accepted(s) = attribute_subsample(combined, &zip, config.min_size) {
            subsamples.push((zip, s));
        }
    }
    let eval_seed = rng::derive_seed(config.seed, 3);
    let rows = subsamples
        .par_iter()
        .enumerate()
        .map(|(i, (name, s))| {
            let (avg, mr) = evaluate_subsample(days, &s.ids(combined), config, rng::derive_seed(eval_seed, i as u64))?;
            Ok(StudyRow {
                sample_type: match s.kind {
                    crate::sampling::SubsampleKind::Snowball { .. } => "snowball",
                    crate::sampling::SubsampleKind::AttributeGroup { .. } => "zip",
                }
                .into(),
                name: name.clone(),
                subsample_size: s.len(),
                avg_network_size: avg,
                mr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (fit, permutation) = run_sampling_regression(&rows, config.n_perm, rng::derive_seed(config.seed, 4))?;
    Ok(StudyResult { rows, fit, permutation })
}

/// Union of the daily networks by node id; the first attribute record seen
/// for a node wins.
pub fn combine_days(days: &GraphCollection<Graph>) -> Graph {
    let mut b = GraphBuilder::new();
    let mut seen: HashSet<String> = HashSet::new();
    for g in &days.graphs {
        for v in 0..g.node_count() {
            b.add_node(g.id(v));
            if let Some(a) = g.attr(v) {
                if !seen.contains(g.id(v)) {
                    seen.insert(g.id(v).to_owned());
                    b.set_attr(g.id(v), a.clone());
                }
            }
        }
        for (u, v) in g.edges() {
            b.add_edge(g.id(u), g.id(v));
        }
    }
    b.build().0
}

pub fn run_sampling_regression(rows: &[StudyRow], n_perm: usize, seed: u64) -> Result<(LadFit, PermutationTest)> {
    let mr: Vec<f64> = rows.iter().map(|r| r.mr).collect();
    let x: Vec<f64> = rows.iter().map(|r| r.avg_network_size).collect();
    let z: Vec<u8> = rows.iter().map(StudyRow::z).collect();
    let mut fit = fit_lad(&mr, &x, &z)?;
    let permutation = permutation_test_beta2(&mr, &x, &z, n_perm, seed)?;
    fit.permutation_pvalue = Some(permutation.pvalue);
    Ok((fit, permutation))
}

pub fn write_study_csv<W: std::io::Write>(rows: &[StudyRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["sample_type", "name", "subsample_size", "avg_network_size", "mr"])?;
    for r in rows {
        out.write_record([
            r.sample_type.clone(),
            r.name.clone(),
            r.subsample_size.to_string(),
            r.avg_network_size.to_string(),
            r.mr.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

/// Reads a CSV with at least the columns `mr`, `avg_network_size` and
/// `sample_type` (`zip`/`1` or `snowball`/`0`).
pub fn read_study_csv<R: Read>(r: R) -> Result<Vec<StudyRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column {name:?}")))
    };
    let (c_mr, c_x, c_t) = (col("mr")?, col("avg_network_size")?, col("sample_type")?);
    let c_name = headers.iter().position(|h| h == "name");
    let c_size = headers.iter().position(|h| h == "subsample_size");
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let number = |c: usize| -> Result<f64> {
            record[c].parse().map_err(|_| Error::ParseCell {
                row: i + 2,
                column: c + 1,
                message: format!("expected a number, got {:?}", &record[c]),
            })
        };
        let sample_type = match &record[c_t] {
            "zip" | "1" => "zip",
            "snowball" | "0" => "snowball",
            other => {
                return Err(Error::ParseCell {
                    row: i + 2,
                    column: c_t + 1,
                    message: format!("unknown sample type {other:?}"),
                })
            }
        };
        rows.push(StudyRow {
            sample_type: sample_type.into(),
            name: c_name.map_or_else(|| format!("row{}", i + 1), |c| record[c].to_owned()),
            subsample_size: c_size.and_then(|c| record[c].parse().ok()).unwrap_or(0),
            avg_network_size: number(c_x)?,
            mr: number(c_mr)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_and_aliases() {
        let rows = vec![
            StudyRow { sample_type: "zip".into(), name: "z1".into(), subsample_size: 60, avg_network_size: 55.5, mr: 0.25 },
            StudyRow { sample_type: "snowball".into(), name: "r4-1".into(), subsample_size: 65, avg_network_size: 58.0, mr: 0.0 },
        ];
        let mut buf = Vec::new();
        write_study_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_study_csv(&buf[..]).unwrap(), rows);
        let minimal = "mr,avg_network_size,sample_type\n0.1,50,1\n0.2,60,0\n";
        let back = read_study_csv(minimal.as_bytes()).unwrap();
        assert_eq!(back[0].z(), 1);
        assert_eq!(back[1].z(), 0);
        assert!(read_study_csv("mr,avg_network_size,sample_type\n0.1,50,x\n".as_bytes()).is_err());
        assert!(read_study_csv("mr,x\n".as_bytes()).is_err());
    }

    #[test]
    fn combined_days_match_generator() {
        let config = crate::synth::SynthConfig {
            population: 300,
            days: 7,
            ..crate::synth::SynthConfig::preset("distinct", 2).unwrap()
        };
        let s = crate::synth::generate_synthetic_cdr(&config).unwrap();
        let c = combine_days(&s.days);
        assert_eq!(c.edge_count(), s.combined.edge_count());
        let index = s.combined.index();
        for v in 0..c.node_count() {
            assert_eq!(c.attr(v), s.combined.attr(index[c.id(v)]));
        }
    }
}
