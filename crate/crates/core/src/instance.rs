//! Instance files: a graph, a fractional point and an optional bipartition.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CrsError, Result};
use crate::graph::{FractionalPoint, Multigraph, VertexId};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EdgeRecord {
    pub id: usize,
    pub u: VertexId,
    pub v: VertexId,
    pub x: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub vertices: usize,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bipartition: Option<Vec<VertexId>>,
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: Multigraph,
    pub x: FractionalPoint,
    /// Side-U vertices, when the instance declares a bipartition.
    pub bipartition: Option<Vec<VertexId>>,
}

impl Instance {
    pub fn new(
        graph: Multigraph,
        x: FractionalPoint,
        bipartition: Option<Vec<VertexId>>,
    ) -> Result<Self> {
        x.check_graph(&graph)?;
        if let Some(side) = &bipartition {
            let mut in_u = vec![false; graph.vertex_count()];
            for &w in side {
                graph.check_vertex(w)?;
                in_u[w] = true;
            }
            for (id, e) in graph.edges().iter().enumerate() {
                if in_u[e.u] == in_u[e.v] {
                    return Err(CrsError::input(format!(
                        "edge {id} = ({}, {}) does not cross the declared bipartition",
                        e.u, e.v
                    )));
                }
            }
        }
        Ok(Instance {
            graph,
            x,
            bipartition,
        })
    }

    pub fn from_file_record(rec: InstanceFile) -> Result<Self> {
        let m = rec.edges.len();
        let mut slots: Vec<Option<&EdgeRecord>> = vec![None; m];
        for r in &rec.edges {
            if r.id >= m {
                return Err(CrsError::input(format!(
                    "edge id {} out of range; ids must be 0..{m}",
                    r.id
                )));
            }
            if slots[r.id].is_some() {
                return Err(CrsError::input(format!("duplicate edge id {}", r.id)));
            }
            slots[r.id] = Some(r);
        }
        let ordered: Vec<&EdgeRecord> = slots.into_iter().map(|s| s.unwrap()).collect();
        let graph = Multigraph::new(rec.vertices, ordered.iter().map(|r| (r.u, r.v)))?;
        let x = FractionalPoint::new(ordered.iter().map(|r| r.x).collect())?;
        Instance::new(graph, x, rec.bipartition)
    }

    pub fn to_file_record(&self) -> InstanceFile {
        InstanceFile {
            vertices: self.graph.vertex_count(),
            edges: self
                .graph
                .edges()
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeRecord {
                    id,
                    u: e.u,
                    v: e.v,
                    x: self.x.get(id),
                })
                .collect(),
            bipartition: self.bipartition.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: InstanceFile = serde_json::from_str(text)?;
        Instance::from_file_record(rec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file_record())?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Instance::from_json(&text)
    }
}
