//! Spot tables, embedding blocks and abundance matrices.
//!
//! Everything here is loaded once and then treated as immutable. Row order is
//! significant: embeddings, coordinates and abundances are all indexed by the
//! position of a spot in its [`SpotTable`].

pub(crate) mod io;
mod split;

use std::collections::{BTreeMap, HashMap};

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

pub use io::{
    load_abundance_table, load_embedding_block, load_predictions, load_spot_table,
    load_spot_table_with_blocks, scan_dataset, write_abundance_table, write_embedding_block,
    write_spot_table, Finding,
};
pub use split::{make_splits, SampleSplit, SplitMode};

/// Per-spot identity, grouping, location and image embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotTable {
    spot_ids: Vec<String>,
    sample_ids: Vec<String>,
    patient_ids: Vec<String>,
    coords: Array2<f64>,
    embeddings: Array2<f64>,
    index: HashMap<String, usize>,
}

impl SpotTable {
    pub fn new(
        spot_ids: Vec<String>,
        sample_ids: Vec<String>,
        patient_ids: Vec<String>,
        coords: Array2<f64>,
        embeddings: Array2<f64>,
    ) -> Result<Self> {
        let n = spot_ids.len();
        if sample_ids.len() != n || patient_ids.len() != n {
            return Err(Error::Shape(format!(
                "{} spot ids but {} sample ids and {} patient ids",
                n,
                sample_ids.len(),
                patient_ids.len()
            )));
        }
        if coords.dim() != (n, 2) {
            return Err(Error::Shape(format!(
                "coordinates are {:?}, expected ({n}, 2)",
                coords.dim()
            )));
        }
        if embeddings.nrows() != n {
            return Err(Error::Shape(format!(
                "{} embedding rows for {n} spots",
                embeddings.nrows()
            )));
        }
        if n > 0 && embeddings.ncols() == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if coords.iter().chain(embeddings.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite coordinate or embedding value"));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in spot_ids.iter().enumerate() {
            if id.is_empty() {
                return Err(Error::invalid(format!("empty spot_id at row {i}")));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate spot_id {id:?}")));
            }
        }
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for (s, p) in sample_ids.iter().zip(&patient_ids) {
            if s.is_empty() || p.is_empty() {
                return Err(Error::invalid("every spot needs a sample_id and a patient_id"));
            }
            match owner.insert(s, p) {
                Some(prev) if prev != p => {
                    return Err(Error::invalid(format!(
                        "sample {s:?} belongs to patients {prev:?} and {p:?}"
                    )))
                }
                _ => {}
            }
        }
        Ok(Self {
            spot_ids,
            sample_ids,
            patient_ids,
            coords,
            embeddings,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.spot_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spot_ids.is_empty()
    }

    /// Embedding dimension.
    pub fn dim(&self) -> usize {
        self.embeddings.ncols()
    }

    pub fn spot_ids(&self) -> &[String] {
        &self.spot_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn patient_ids(&self) -> &[String] {
        &self.patient_ids
    }

    /// `n × 2` matrix of spot centers (x, y) in pixels.
    pub fn coords(&self) -> ArrayView2<'_, f64> {
        self.coords.view()
    }

    pub fn embeddings(&self) -> ArrayView2<'_, f64> {
        self.embeddings.view()
    }

    pub fn embedding(&self, i: usize) -> ArrayView1<'_, f64> {
        self.embeddings.row(i)
    }

    pub fn index_of(&self, spot_id: &str) -> Option<usize> {
        self.index.get(spot_id).copied()
    }

    /// Row indices per sample, keyed and ordered by sample_id.
    pub fn samples(&self) -> BTreeMap<&str, Vec<usize>> {
        group(&self.sample_ids)
    }

    /// Row indices per patient, keyed and ordered by patient_id.
    pub fn patients(&self) -> BTreeMap<&str, Vec<usize>> {
        group(&self.patient_ids)
    }

    /// New table holding the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> SpotTable {
        let pick = |v: &[String]| rows.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        let spot_ids = pick(&self.spot_ids);
        let index = spot_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        SpotTable {
            spot_ids,
            sample_ids: pick(&self.sample_ids),
            patient_ids: pick(&self.patient_ids),
            coords: self.coords.select(Axis(0), rows),
            embeddings: self.embeddings.select(Axis(0), rows),
            index,
        }
    }

    /// Same spots with a different embedding matrix.
    pub fn with_embeddings(&self, embeddings: Array2<f64>) -> Result<SpotTable> {
        SpotTable::new(
            self.spot_ids.clone(),
            self.sample_ids.clone(),
            self.patient_ids.clone(),
            self.coords.clone(),
            embeddings,
        )
    }
}

fn group(keys: &[String]) -> BTreeMap<&str, Vec<usize>> {
    let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, k) in keys.iter().enumerate() {
        out.entry(k.as_str()).or_default().push(i);
    }
    out
}

/// Embedding vectors from one feature source, keyed by spot.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBlock {
    pub source_name: String,
    spot_ids: Vec<String>,
    values: Array2<f64>,
}

impl EmbeddingBlock {
    pub fn new(source_name: impl Into<String>, spot_ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if spot_ids.len() != values.nrows() {
            return Err(Error::Shape(format!(
                "{} spot ids for {} embedding rows",
                spot_ids.len(),
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::invalid("embedding block has dimension 0"));
        }
        let mut seen = std::collections::HashSet::with_capacity(spot_ids.len());
        if let Some(dup) = spot_ids.iter().find(|s| !seen.insert(s.as_str())) {
            return Err(Error::invalid(format!("duplicate spot_id {dup:?} in embedding block")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite embedding value"));
        }
        Ok(Self {
            source_name: source_name.into(),
            spot_ids,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn len(&self) -> usize {
        self.spot_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spot_ids.is_empty()
    }

    pub fn spot_ids(&self) -> &[String] {
        &self.spot_ids
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    /// Rows re-ordered to follow `order`; every id must be present.
    pub fn aligned_to(&self, order: &[String]) -> Result<Array2<f64>> {
        let index: HashMap<&str, usize> = self
            .spot_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let rows = order
            .iter()
            .map(|id| {
                index.get(id.as_str()).copied().ok_or_else(|| {
                    Error::invalid(format!(
                        "embedding source {:?} has no row for spot {id:?}",
                        self.source_name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.values.select(Axis(0), &rows))
    }
}

/// Joins embedding blocks column-wise, in the given order.
///
/// Rows follow the spot order of the first block. All blocks must cover the
/// same set of spots.
pub fn concat_embeddings(blocks: &[EmbeddingBlock]) -> Result<EmbeddingBlock> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::invalid("no embedding blocks to concatenate"))?;
    if blocks.len() == 1 {
        return Ok(first.clone());
    }
    let reference: std::collections::BTreeSet<&str> =
        first.spot_ids.iter().map(String::as_str).collect();
    for b in &blocks[1..] {
        let other: std::collections::BTreeSet<&str> = b.spot_ids.iter().map(String::as_str).collect();
        if other != reference {
            let diff: Vec<&str> = reference.symmetric_difference(&other).take(10).copied().collect();
            return Err(Error::invalid(format!(
                "embedding sources {:?} and {:?} cover different spots; first differences: {}",
                first.source_name,
                b.source_name,
                diff.join(", ")
            )));
        }
    }
    let parts = blocks
        .iter()
        .map(|b| b.aligned_to(&first.spot_ids))
        .collect::<Result<Vec<_>>>()?;
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    let values = ndarray::concatenate(Axis(1), &views)
        .map_err(|e| Error::Shape(e.to_string()))?;
    let name = blocks
        .iter()
        .map(|b| b.source_name.as_str())
        .collect::<Vec<_>>()
        .join("+");
    EmbeddingBlock::new(name, first.spot_ids.clone(), values)
}

/// Per-spot abundance for each cell type. Used for both ground truth and
/// predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct AbundanceMatrix {
    spot_ids: Vec<String>,
    cell_types: Vec<String>,
    values: Array2<f64>,
}

impl AbundanceMatrix {
    pub fn new(spot_ids: Vec<String>, cell_types: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (spot_ids.len(), cell_types.len()) {
            return Err(Error::Shape(format!(
                "abundance values are {:?}, expected ({}, {})",
                values.dim(),
                spot_ids.len(),
                cell_types.len()
            )));
        }
        if cell_types.len() < 2 {
            return Err(Error::invalid("at least two cell types are required"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = cell_types.iter().find(|c| !seen.insert(c.as_str())) {
            return Err(Error::invalid(format!("duplicate cell type {dup:?}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite abundance value"));
        }
        Ok(Self {
            spot_ids,
            cell_types,
            values,
        })
    }

    pub fn spot_ids(&self) -> &[String] {
        &self.spot_ids
    }

    pub fn cell_types(&self) -> &[String] {
        &self.cell_types
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn n_spots(&self) -> usize {
        self.spot_ids.len()
    }

    pub fn n_types(&self) -> usize {
        self.cell_types.len()
    }

    pub fn subset(&self, rows: &[usize]) -> AbundanceMatrix {
        AbundanceMatrix {
            spot_ids: rows.iter().map(|&i| self.spot_ids[i].clone()).collect(),
            cell_types: self.cell_types.clone(),
            values: self.values.select(Axis(0), rows),
        }
    }

    /// Error unless both matrices list the same spots and cell types in the
    /// same order.
    pub fn check_aligned(&self, other: &AbundanceMatrix) -> Result<()> {
        if self.cell_types != other.cell_types {
            return Err(Error::Shape(format!(
                "cell types differ: {}",
                describe_diff(&self.cell_types, &other.cell_types)
            )));
        }
        if self.spot_ids != other.spot_ids {
            return Err(Error::Shape("spot ids differ or are ordered differently".into()));
        }
        Ok(())
    }
}

/// Human-readable difference between two name lists.
pub(crate) fn describe_diff(a: &[String], b: &[String]) -> String {
    let sa: std::collections::BTreeSet<&String> = a.iter().collect();
    let sb: std::collections::BTreeSet<&String> = b.iter().collect();
    let only_a: Vec<&str> = sa.difference(&sb).map(|s| s.as_str()).collect();
    let only_b: Vec<&str> = sb.difference(&sa).map(|s| s.as_str()).collect();
    if only_a.is_empty() && only_b.is_empty() {
        "same names in a different order".to_string()
    } else {
        format!(
            "only in first: [{}]; only in second: [{}]",
            only_a.join(", "),
            only_b.join(", ")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn block(name: &str, ids: &[&str], dim: usize, base: f64) -> EmbeddingBlock {
        let values = Array2::from_shape_fn((ids.len(), dim), |(i, j)| base + (i * dim + j) as f64);
        EmbeddingBlock::new(name, ids.iter().map(|s| s.to_string()).collect(), values).unwrap()
    }

    #[test]
    fn concat_dims_add_up() {
        let ids = ["a", "b", "c"];
        let out = concat_embeddings(&[block("CONCH", &ids, 512, 0.0), block("UNI", &ids, 1024, 0.5)]).unwrap();
        assert_eq!(out.dim(), 1536);
        assert_eq!(out.source_name, "CONCH+UNI");
    }

    #[test]
    fn concat_single_block_is_identity() {
        let b = block("UNI2", &["a", "b"], 3, 1.0);
        assert_eq!(concat_embeddings(std::slice::from_ref(&b)).unwrap(), b);
    }

    #[test]
    fn concat_aligns_rows_by_spot_id() {
        let a = block("a", &["x", "y"], 1, 0.0);
        let b = EmbeddingBlock::new("b", vec!["y".into(), "x".into()], array![[20.0], [10.0]]).unwrap();
        let out = concat_embeddings(&[a, b]).unwrap();
        assert_eq!(out.values(), array![[0.0, 10.0], [1.0, 20.0]]);
    }

    #[test]
    fn concat_rejects_disjoint_spots() {
        let err = concat_embeddings(&[block("a", &["x", "y"], 2, 0.0), block("b", &["p", "q"], 2, 0.0)])
            .unwrap_err()
            .to_string();
        assert!(err.contains("p") && err.contains("x"), "{err}");
    }

    #[test]
    fn concat_rejects_empty_list() {
        assert!(concat_embeddings(&[]).is_err());
    }

    #[test]
    fn spot_table_rejects_sample_with_two_patients() {
        let err = SpotTable::new(
            vec!["s1".into(), "s2".into()],
            vec!["A1".into(), "A1".into()],
            vec!["A".into(), "B".into()],
            Array2::zeros((2, 2)),
            Array2::zeros((2, 1)),
        )
        .unwrap_err();
        assert!(err.to_string().contains("A1"));
    }

    #[test]
    fn abundance_needs_two_cell_types() {
        assert!(AbundanceMatrix::new(vec!["s".into()], vec!["T".into()], Array2::zeros((1, 1))).is_err());
    }
}
