use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// Undirected weighted relations between concepts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelationGraph {
    adjacency: BTreeMap<String, BTreeMap<String, f64>>,
}

impl RelationGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, a: &str, b: &str, weight: f64) -> Result<()> {
        if a == b {
            return Err(Error::Validation(format!("self-loop on {a}")));
        }
        if !weight.is_finite() || !(0.0..=1.0).contains(&weight) {
            return Err(Error::Validation(format!(
                "edge {a}-{b}: weight {weight} outside [0, 1]"
            )));
        }
        if let Some(&old) = self.adjacency.get(a).and_then(|n| n.get(b)) {
            if old != weight {
                return Err(Error::Validation(format!(
                    "edge {a}-{b} listed with conflicting weights {old} and {weight}"
                )));
            }
        }
        self.adjacency
            .entry(a.to_owned())
            .or_default()
            .insert(b.to_owned(), weight);
        self.adjacency
            .entry(b.to_owned())
            .or_default()
            .insert(a.to_owned(), weight);
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Parses `concept concept weight` lines; `#` starts a comment.
    pub fn from_reader<R: Read>(reader: R, name: &str) -> Result<Self> {
        let mut graph = RelationGraph::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::parse(name, line_no, e.to_string()))?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    name,
                    line_no,
                    format!("expected `concept concept weight`, found {} fields", fields.len()),
                ));
            }
            let weight: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(name, line_no, format!("bad weight {:?}", fields[2])))?;
            graph
                .add_edge(fields[0], fields[1], weight)
                .map_err(|e| Error::parse(name, line_no, e.to_string()))?;
        }
        Ok(graph)
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        self.adjacency.get(a).and_then(|n| n.get(b)).copied()
    }

    /// Neighbors of `concept` in id order.
    pub fn neighbors<'a>(&'a self, concept: &str) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        self.adjacency
            .get(concept)
            .into_iter()
            .flat_map(|n| n.iter().map(|(k, &w)| (k.as_str(), w)))
    }

    pub fn degree(&self, concept: &str) -> usize {
        self.adjacency.get(concept).map_or(0, BTreeMap::len)
    }

    /// Jaccard similarity of the two neighborhoods; 0 when both are empty.
    pub fn neighborhood_jaccard(&self, a: &str, b: &str) -> f64 {
        let (Some(na), Some(nb)) = (self.adjacency.get(a), self.adjacency.get(b)) else {
            return 0.0;
        };
        let shared = na.keys().filter(|k| nb.contains_key(*k)).count();
        let union = na.len() + nb.len() - shared;
        if union == 0 {
            0.0
        } else {
            shared as f64 / union as f64
        }
    }

    /// Every edge once, as `(a, b, weight)` with `a < b`, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        self.adjacency.iter().flat_map(|(a, nbrs)| {
            nbrs.iter()
                .filter(move |(b, _)| a.as_str() < b.as_str())
                .map(move |(b, &w)| (a.as_str(), b.as_str(), w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }
}
