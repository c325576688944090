//! Readers and writers for the on-disk network formats.
//!
//! * edge list: one `u v` pair per line, whitespace- or comma-separated;
//!   blank lines and lines starting with `#` or `%` are skipped.
//! * node attributes: CSV with header `id,sex,age,zip`; empty or `NA` cells
//!   are unknown.
//! * benchmark triple: `NAME_A.txt`, `NAME_graph_indicator.txt`,
//!   `NAME_graph_labels.txt` with 1-based global node numbers.
//! * bipartite matrix: CSV whose header row lists the right-partition ids
//!   (first cell ignored) and whose first column lists left-partition ids.
//! * collection directory: `labels.csv` (`graph_id,label`) plus one
//!   `<graph_id>.edges` (or `<graph_id>.csv` matrix) per network and, for
//!   edge lists, an optional `attributes.csv` shared by all networks.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;

use super::{BipartiteWeightedGraph, Graph, GraphBuilder, GraphCollection, LoadDiagnostics, NodeAttr, Sex};
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn is_unknown(cell: &str) -> bool {
    let cell = cell.trim();
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        (!line.is_empty() && !line.starts_with('#') && !line.starts_with('%')).then_some((i + 1, line))
    })
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    let mut tokens = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty());
    let pair = (tokens.next()?, tokens.next()?);
    tokens.next().is_none().then_some(pair)
}

/// Parses edge-list text into a builder, so callers can attach attributes.
pub fn parse_edge_list(text: &str) -> Result<GraphBuilder> {
    let mut builder = GraphBuilder::new();
    for (line_no, line) in content_lines(text) {
        let (u, v) = split_pair(line).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected two node ids, got {line:?}"),
        })?;
        builder.add_edge(u, v);
    }
    Ok(builder)
}

/// Parses an `id,sex,age,zip` attribute table.
pub fn parse_attributes(text: &str) -> Result<Vec<(String, NodeAttr)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let expected = ["id", "sex", "age", "zip"];
    if header.len() != 4 || header.iter().zip(expected).any(|(h, e)| !h.eq_ignore_ascii_case(e)) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header id,sex,age,zip, got {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let sex = match record[1].to_ascii_lowercase().as_str() {
            "m" | "male" => Sex::Male,
            "f" | "female" => Sex::Female,
            "u" | "unknown" => Sex::Unknown,
            s if is_unknown(s) => Sex::Unknown,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unrecognized sex {other:?}"),
                })
            }
        };
        let age = if is_unknown(&record[2]) {
            None
        } else {
            Some(record[2].parse::<u32>().map_err(|_| Error::Parse {
                line,
                message: format!("age {:?} is not a nonnegative integer", &record[2]),
            })?)
        };
        let zip = (!is_unknown(&record[3])).then(|| record[3].to_owned());
        out.push((record[0].to_owned(), NodeAttr { sex, age, zip }));
    }
    Ok(out)
}

/// Loads an edge list and, optionally, a node-attribute table.
///
/// Attribute rows for ids absent from the edge list become degree-0 nodes.
pub fn load_edge_list(path: &Path, attr_path: Option<&Path>) -> Result<(Graph, LoadDiagnostics)> {
    let mut builder = parse_edge_list(&read(path)?)?;
    if let Some(attr_path) = attr_path {
        for (id, attr) in parse_attributes(&read(attr_path)?)? {
            builder.set_attr(&id, attr);
        }
    }
    let (graph, diag) = builder.build();
    if diag.self_loops > 0 {
        warn!("{}: dropped {} self-loop(s)", path.display(), diag.self_loops);
    }
    Ok((graph, diag))
}

pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", g.id(u), g.id(v))?;
    }
    Ok(())
}

pub fn write_attributes<W: Write>(g: &Graph, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "sex", "age", "zip"])?;
    if let Some(attrs) = g.attributes() {
        for (id, a) in g.ids().iter().zip(attrs) {
            let sex = match a.sex {
                Sex::Male => "M",
                Sex::Female => "F",
                Sex::Unknown => "NA",
            };
            let age = a.age.map_or_else(|| "NA".to_owned(), |x| x.to_string());
            out.write_record([id.as_str(), sex, &age, a.zip.as_deref().unwrap_or("NA")])?;
        }
    }
    out.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

fn parse_int_lines(path: &Path) -> Result<Vec<i64>> {
    content_lines(&read(path)?)
        .map(|(line, text)| {
            text.trim_end_matches(',').trim().parse::<i64>().map_err(|_| Error::Parse {
                line,
                message: format!("{}: expected an integer, got {text:?}", path.display()),
            })
        })
        .collect()
}

/// Loads a graph-classification benchmark in the triple-file layout.
pub fn load_tu_benchmark(dir: &Path, name: &str) -> Result<GraphCollection<Graph>> {
    let indicator = parse_int_lines(&dir.join(format!("{name}_graph_indicator.txt")))?;
    let labels_path = dir.join(format!("{name}_graph_labels.txt"));
    let raw_labels: Vec<String> = content_lines(&read(&labels_path)?)
        .map(|(_, l)| l.to_owned())
        .collect();

    let mut graph_keys: Vec<i64> = indicator.clone();
    graph_keys.sort_unstable();
    graph_keys.dedup();
    if graph_keys.len() != raw_labels.len() {
        return Err(Error::Format(format!(
            "{} graphs in the indicator file but {} labels",
            graph_keys.len(),
            raw_labels.len()
        )));
    }

    // Global node (1-based) -> (graph slot, local index).
    let mut local = Vec::with_capacity(indicator.len());
    let mut sizes = vec![0usize; graph_keys.len()];
    for &g in &indicator {
        let slot = graph_keys.binary_search(&g).unwrap();
        local.push((slot, sizes[slot]));
        sizes[slot] += 1;
    }
    let mut ids: Vec<Vec<String>> = sizes.iter().map(|&n| Vec::with_capacity(n)).collect();
    for (node, &(slot, _)) in local.iter().enumerate() {
        ids[slot].push((node + 1).to_string());
    }
    let mut adjacency: Vec<Vec<Vec<usize>>> = sizes.iter().map(|&n| vec![Vec::new(); n]).collect();

    let a_path = dir.join(format!("{name}_A.txt"));
    for (line, text) in content_lines(&read(&a_path)?) {
        let parse_err = || Error::Parse {
            line,
            message: format!("{}: expected `u, v`, got {text:?}", a_path.display()),
        };
        let (u, v) = split_pair(text).ok_or_else(parse_err)?;
        let u: usize = u.parse().map_err(|_| parse_err())?;
        let v: usize = v.parse().map_err(|_| parse_err())?;
        let lookup = |n: usize| {
            n.checked_sub(1).and_then(|i| local.get(i)).copied().ok_or_else(|| {
                Error::Format(format!("line {line}: node {n} is missing from the graph indicator"))
            })
        };
        let (gu, lu) = lookup(u)?;
        let (gv, lv) = lookup(v)?;
        if gu != gv {
            return Err(Error::Format(format!(
                "line {line}: edge ({u}, {v}) crosses graphs {} and {}",
                graph_keys[gu], graph_keys[gv]
            )));
        }
        // Files list both orientations; the builder deduplicates.
        adjacency[gu][lu].push(lv);
        adjacency[gu][lv].push(lu);
    }

    let graphs = ids
        .into_iter()
        .zip(adjacency)
        .map(|(ids, adj)| Graph::from_adjacency(ids, adj, None).0)
        .collect();
    let graph_ids = graph_keys.iter().map(|k| format!("{name}_{k}")).collect();
    GraphCollection::with_raw_labels(graphs, graph_ids, &raw_labels)
}

pub fn parse_bipartite_matrix(id: &str, text: &str) -> Result<BipartiteWeightedGraph> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::Format("empty bipartite matrix file".into())),
    };
    if header.len() < 2 {
        return Err(Error::Format("header must list at least one right-partition id".into()));
    }
    let right_ids: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut left_ids = Vec::new();
    let mut weights = Vec::new();
    for (i, record) in records.enumerate() {
        let row = i + 2;
        let record = record?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != header.len() {
            return Err(Error::Format(format!(
                "row {row} has {} cells, header has {}",
                record.len(),
                header.len()
            )));
        }
        left_ids.push(record[0].to_owned());
        for (j, cell) in record.iter().enumerate().skip(1) {
            let w: f64 = cell.parse().map_err(|_| Error::ParseCell {
                row,
                column: j + 1,
                message: format!("{cell:?} is not a number"),
            })?;
            weights.push(w);
        }
    }
    if left_ids.is_empty() {
        return Err(Error::Format("bipartite matrix has no data rows".into()));
    }
    BipartiteWeightedGraph::new(id, left_ids, right_ids, weights)
}

/// Loads a dense bipartite weight matrix; the graph id is the file stem.
pub fn load_bipartite_matrix(path: &Path) -> Result<BipartiteWeightedGraph> {
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_bipartite_matrix(&id, &read(path)?)
}

pub const LABELS_FILE: &str = "labels.csv";
pub const ATTRIBUTES_FILE: &str = "attributes.csv";

fn check_graph_id(id: &str) -> Result<()> {
    if id.is_empty() || id.starts_with('.') || id.contains(['/', '\\']) {
        return Err(Error::Format(format!("graph id {id:?} is not usable as a file name")));
    }
    Ok(())
}

/// Reads `labels.csv`; returns ids and labels (`None` when every label cell
/// is empty).
fn read_labels(dir: &Path) -> Result<(Vec<String>, Option<Vec<String>>)> {
    let path = dir.join(LABELS_FILE);
    let text = read(&path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let id = record.get(0).unwrap_or("").to_owned();
        check_graph_id(&id).map_err(|_| Error::ParseCell {
            row: row + 2,
            column: 1,
            message: format!("bad graph id {id:?}"),
        })?;
        ids.push(id);
        labels.push(record.get(1).unwrap_or("").to_owned());
    }
    if ids.is_empty() {
        return Err(Error::Format(format!("{}: no networks listed", path.display())));
    }
    let labeled = labels.iter().filter(|l| !l.is_empty()).count();
    match labeled {
        0 => Ok((ids, None)),
        n if n == labels.len() => Ok((ids, Some(labels))),
        _ => Err(Error::Format(format!("{}: some networks lack a label", path.display()))),
    }
}

fn collect<G>(graphs: Vec<G>, ids: Vec<String>, labels: Option<Vec<String>>) -> Result<GraphCollection<G>> {
    match labels {
        Some(raw) => GraphCollection::with_raw_labels(graphs, ids, &raw),
        None => GraphCollection::unlabeled(graphs, ids),
    }
}

/// Loads an edge-list collection directory. Attributes from
/// `attributes.csv`, when present, are attached to matching node ids.
pub fn load_edge_collection(dir: &Path) -> Result<GraphCollection<Graph>> {
    let (ids, labels) = read_labels(dir)?;
    let attr_path = dir.join(ATTRIBUTES_FILE);
    let attrs: Option<HashMap<String, NodeAttr>> = if attr_path.exists() {
        Some(parse_attributes(&read(&attr_path)?)?.into_iter().collect())
    } else {
        None
    };
    let graphs = ids
        .iter()
        .map(|id| {
            let path = dir.join(format!("{id}.edges"));
            let (g, diag) = parse_edge_list(&read(&path)?)?.build();
            if diag.self_loops > 0 {
                warn!("{}: dropped {} self-loop(s)", path.display(), diag.self_loops);
            }
            Ok(match &attrs {
                Some(map) => {
                    let a = g.ids().iter().map(|v| map.get(v).cloned().unwrap_or_default()).collect();
                    g.with_attributes(a)
                }
                None => g,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    collect(graphs, ids, labels)
}

/// Loads a directory of weighted bipartite matrices.
pub fn load_bipartite_collection(dir: &Path) -> Result<GraphCollection<BipartiteWeightedGraph>> {
    let (ids, labels) = read_labels(dir)?;
    let graphs = ids
        .iter()
        .map(|id| parse_bipartite_matrix(id, &read(&dir.join(format!("{id}.csv")))?))
        .collect::<Result<Vec<_>>>()?;
    collect(graphs, ids, labels)
}

fn create(path: PathBuf) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(&path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes an edge-list collection directory. Node attributes of all graphs
/// are merged by node id into one `attributes.csv`; isolated nodes are not
/// representable and are dropped.
pub fn write_edge_collection(dir: &Path, collection: &GraphCollection<Graph>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut labels = csv::Writer::from_writer(create(dir.join(LABELS_FILE))?);
    labels.write_record(["graph_id", "label"])?;
    let mut merged: Vec<(String, NodeAttr)> = Vec::new();
    let mut seen: HashMap<String, ()> = HashMap::new();
    for (k, (id, g)) in collection.ids.iter().zip(&collection.graphs).enumerate() {
        check_graph_id(id)?;
        let label = collection
            .labels()
            .map_or(String::new(), |l| collection.class_names()[l[k] as usize - 1].clone());
        labels.write_record([id.as_str(), &label])?;
        let path = dir.join(format!("{id}.edges"));
        let mut w = create(path.clone())?;
        write_edge_list(g, &mut w).map_err(|e| Error::io(&path, e))?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        if let Some(attrs) = g.attributes() {
            for (v, a) in g.ids().iter().zip(attrs) {
                if seen.insert(v.clone(), ()).is_none() {
                    merged.push((v.clone(), a.clone()));
                }
            }
        }
    }
    labels.flush().map_err(|e| Error::io(dir.join(LABELS_FILE), e))?;
    if !merged.is_empty() {
        let mut b = GraphBuilder::new();
        for (v, a) in merged {
            b.set_attr(&v, a);
        }
        write_attributes(&b.build().0, create(dir.join(ATTRIBUTES_FILE))?)?;
    }
    Ok(())
}
