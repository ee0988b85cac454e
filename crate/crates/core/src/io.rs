//! JSON file formats for spaces, maps, sequences and families, and CSV
//! report assembly.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cone::{param_label, parse_param};
use crate::error::{CoarseError, Result};
use crate::generators::Family;
use crate::homotopy::HomotopyFamily;
use crate::maps::MapWitness;
use crate::metric::{shortest_path_metric, WeightedGraph};
use crate::space::FiniteMetricSpace;

/// A label given either as a JSON string or a JSON number.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum Label {
    Text(String),
    Int(i64),
}

impl Label {
    pub fn into_string(self) -> String {
        match self {
            Label::Text(s) => s,
            Label::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct GraphFile {
    pub vertices: Vec<Label>,
    pub edges: Vec<(Label, Label, f64)>,
}

/// `{"points", "matrix"}` or `{"graph": {"vertices", "edges"}}`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum SpaceFile {
    Matrix { points: Vec<Label>, matrix: Vec<Vec<f64>> },
    Graph { graph: GraphFile },
}

impl SpaceFile {
    pub fn into_space(self) -> Result<FiniteMetricSpace> {
        match self {
            SpaceFile::Matrix { points, matrix } => {
                FiniteMetricSpace::from_matrix(points.into_iter().map(Label::into_string).collect(), matrix)
            }
            SpaceFile::Graph { graph } => {
                let vertices = graph.vertices.into_iter().map(Label::into_string).collect();
                let edges: Vec<(String, String, f64)> = graph
                    .edges
                    .into_iter()
                    .map(|(u, v, w)| (u.into_string(), v.into_string(), w))
                    .collect();
                shortest_path_metric(&WeightedGraph::from_labeled(vertices, &edges)?)
            }
        }
    }

    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        let n = space.len();
        SpaceFile::Matrix {
            points: space.labels().into_iter().map(Label::Text).collect(),
            matrix: (0..n).map(|i| (0..n).map(|j| space.dist(i, j)).collect()).collect(),
        }
    }
}

pub fn parse_space(json: &str) -> Result<FiniteMetricSpace> {
    let file: SpaceFile = serde_json::from_str(json)?;
    file.into_space()
}

pub fn space_to_json(space: &FiniteMetricSpace) -> Result<String> {
    Ok(serde_json::to_string(&SpaceFile::from_space(space))?)
}

/// `gen:family:size` or a path, resolved against `base_dir`.
pub fn load_space(reference: &str, base_dir: &Path) -> Result<FiniteMetricSpace> {
    if let Some(rest) = reference.strip_prefix("gen:") {
        let (fam, size) = rest
            .rsplit_once(':')
            .ok_or_else(|| CoarseError::Parse(format!("`{reference}` needs gen:family:size")))?;
        let family: Family = fam.parse()?;
        let size = size
            .parse()
            .map_err(|_| CoarseError::Parse(format!("bad size in `{reference}`")))?;
        return Ok(family.generate(size));
    }
    parse_space(&fs::read_to_string(resolve(reference, base_dir))?)
}

fn resolve(reference: &str, base_dir: &Path) -> PathBuf {
    let p = Path::new(reference);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// `{"source": name, "target": name, "map": {label: label}}`.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct MapFile {
    pub source: String,
    pub target: String,
    pub map: BTreeMap<String, Label>,
}

impl MapFile {
    pub fn into_map(self, source: Arc<FiniteMetricSpace>, target: Arc<FiniteMetricSpace>) -> Result<MapWitness> {
        let table: HashMap<String, String> = self.map.into_iter().map(|(k, v)| (k, v.into_string())).collect();
        MapWitness::from_labels(source, target, &table)
    }

    pub fn from_map(w: &MapWitness, source: &str, target: &str) -> Self {
        Self {
            source: source.to_owned(),
            target: target.to_owned(),
            map: w.label_table().into_iter().map(|(k, v)| (k, Label::Text(v))).collect(),
        }
    }
}

/// Reads a map file and the spaces it names (relative to the file).
pub fn load_map(path: &Path) -> Result<MapWitness> {
    let file: MapFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let dir = parent_dir(path);
    let source = Arc::new(load_space(&file.source, &dir)?);
    let target = if file.target == file.source {
        source.clone()
    } else {
        Arc::new(load_space(&file.target, &dir)?)
    };
    file.into_map(source, target)
}

/// Reads a map whose source and target are already loaded.
pub fn load_map_between(
    path: &Path,
    source: Arc<FiniteMetricSpace>,
    target: Arc<FiniteMetricSpace>,
) -> Result<MapWitness> {
    let file: MapFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_map(source, target)
}

pub fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// A bare label list or `{"sequence": [...]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SequenceFile {
    Bare(Vec<Label>),
    Wrapped { sequence: Vec<Label> },
}

pub fn parse_sequence(json: &str, space: &FiniteMetricSpace) -> Result<Vec<usize>> {
    let labels = match serde_json::from_str::<SequenceFile>(json)? {
        SequenceFile::Bare(v) | SequenceFile::Wrapped { sequence: v } => v,
    };
    labels.into_iter().map(|l| space.index_of(&l.into_string())).collect()
}

/// A list of label lists.
pub fn parse_rays(json: &str, space: &FiniteMetricSpace) -> Result<Vec<Vec<usize>>> {
    let rays: Vec<Vec<Label>> = serde_json::from_str(json)?;
    rays.into_iter()
        .map(|r| r.into_iter().map(|l| space.index_of(&l.into_string())).collect())
        .collect()
}

/// `{"c": c, "maps": {"t": {label: label}}}` with `t` written as `a/b`.
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct FamilyFile {
    pub c: f64,
    pub maps: BTreeMap<String, BTreeMap<String, Label>>,
}

pub fn parse_family(
    json: &str,
    source: Arc<FiniteMetricSpace>,
    target: Arc<FiniteMetricSpace>,
) -> Result<HomotopyFamily> {
    let file: FamilyFile = serde_json::from_str(json)?;
    let mut entries = file
        .maps
        .into_iter()
        .map(|(t, m)| {
            let table: HashMap<String, String> = m.into_iter().map(|(k, v)| (k, v.into_string())).collect();
            Ok((
                parse_param(&t)?,
                MapWitness::from_labels(source.clone(), target.clone(), &table)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by_key(|e| e.0);
    let (grid, maps) = entries.into_iter().unzip();
    HomotopyFamily::new(grid, maps, file.c)
}

pub fn family_to_json(fam: &HomotopyFamily) -> Result<String> {
    let maps = fam
        .grid()
        .iter()
        .zip(fam.maps())
        .map(|(t, m)| {
            let table = m.label_table().into_iter().map(|(k, v)| (k, Label::Text(v))).collect();
            (param_label(t), table)
        })
        .collect();
    Ok(serde_json::to_string(&FamilyFile { c: fam.c, maps })?)
}

/// Accumulates CSV rows under the fixed header.
#[derive(Debug, Default, Clone)]
pub struct CsvReport {
    rows: String,
}

pub const CSV_HEADER: &str = "check,scale,constant,bound,verdict";

impl CsvReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends pre-formatted rows (no header).
    pub fn extend(&mut self, rows: &str) {
        self.rows.push_str(rows);
        if !rows.is_empty() && !rows.ends_with('\n') {
            self.rows.push('\n');
        }
    }

    pub fn row(&mut self, check: &str, scale: &str, constant: &str, bound: &str, pass: bool) {
        let verdict = if pass { "pass" } else { "fail" };
        self.rows
            .push_str(&format!("{check},{scale},{constant},{bound},{verdict}\n"));
    }

    pub fn render(&self) -> String {
        format!("{CSV_HEADER}\n{}", self.rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::zplus;

    #[test]
    fn matrix_and_graph_spaces() {
        let s = parse_space(r#"{"points":["a","b"],"matrix":[[0,2],[2,0]]}"#).unwrap();
        assert_eq!(s.dist(0, 1), 2.0);
        let g = parse_space(r#"{"graph":{"vertices":["a","b","c"],"edges":[["a","b",1],["b","c",2]]}}"#).unwrap();
        assert_eq!(g.dist(0, 2), 3.0);
        let n = parse_space(r#"{"graph":{"vertices":[0,1],"edges":[[0,1,1.5]]}}"#).unwrap();
        assert_eq!(n.label(1), "1");
    }

    #[test]
    fn space_round_trip() {
        let z = zplus(5);
        let back = parse_space(&space_to_json(&z).unwrap()).unwrap();
        assert_eq!(back.labels(), z.labels());
        assert_eq!(back.to_dense(), z.to_dense());
    }

    #[test]
    fn generator_reference() {
        let s = load_space("gen:zplus:10", Path::new(".")).unwrap();
        assert_eq!(s.len(), 11);
        assert!(load_space("gen:nope:3", Path::new(".")).is_err());
    }

    #[test]
    fn sequences_and_rays() {
        let z = zplus(5);
        assert_eq!(parse_sequence(r#"["0", 2, "4"]"#, &z).unwrap(), vec![0, 2, 4]);
        assert_eq!(parse_sequence(r#"{"sequence":[1]}"#, &z).unwrap(), vec![1]);
        assert!(parse_sequence(r#"["9"]"#, &z).is_err());
        assert_eq!(parse_rays(r#"[[0,1],["2"]]"#, &z).unwrap(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn family_round_trip() {
        let z = Arc::new(zplus(3));
        let json = r#"{"c":2,"maps":{"0":{"0":0,"1":1,"2":2,"3":3},"1":{"0":1,"1":2,"2":3,"3":3}}}"#;
        let fam = parse_family(json, z.clone(), z.clone()).unwrap();
        assert_eq!(fam.grid().len(), 2);
        let again = parse_family(&family_to_json(&fam).unwrap(), z.clone(), z).unwrap();
        assert!(again.same_maps(&fam));
    }

    #[test]
    fn csv_header_fixed() {
        let mut r = CsvReport::new();
        r.row("x", "1", "2", "3", true);
        assert_eq!(r.render(), "check,scale,constant,bound,verdict\nx,1,2,3,pass\n");
    }
}
