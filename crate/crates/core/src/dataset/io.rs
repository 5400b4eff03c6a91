//! CSV ingestion and serialization.
//!
//! The format is deliberately narrow: UTF-8, comma separated, one header row,
//! no quoting. Numbers are written in the shortest form that parses back to
//! the identical `f64`, so save → load → save is byte-stable.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use ndarray::Array2;

use super::{concat_embeddings, AbundanceMatrix, EmbeddingBlock, SpotTable};
use crate::error::{Error, Result};

const SPOT_COLUMNS: [&str; 5] = ["spot_id", "sample_id", "patient_id", "x", "y"];

/// One problem found while checking an input file.
///
/// `line` is 1-based; 0 means the finding concerns the file as a whole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub path: PathBuf,
    pub line: usize,
    pub message: String,
}

impl Finding {
    fn new(path: &Path, line: usize, message: impl Into<String>) -> Self {
        Self {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn into_error(self) -> Error {
        Error::Schema {
            path: self.path,
            line: self.line,
            message: self.message,
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}: {}", self.path.display(), self.line, self.message)
        } else {
            write!(f, "{}: {}", self.path.display(), self.message)
        }
    }
}

struct CsvFile {
    path: PathBuf,
    header: Vec<String>,
    /// (1-based line number, fields)
    rows: Vec<(usize, Vec<String>)>,
}

fn read_csv(path: &Path) -> Result<CsvFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let header = match lines.next() {
        Some((_, l)) => split_fields(l),
        None => Vec::new(),
    };
    let rows = lines.map(|(n, l)| (n, split_fields(l))).collect();
    Ok(CsvFile {
        path: path.to_path_buf(),
        header,
        rows,
    })
}

fn split_fields(line: &str) -> Vec<String> {
    line.split(',').map(|f| f.trim().to_string()).collect()
}

fn parse_number(raw: &str, column: &str) -> std::result::Result<f64, String> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("non-finite value {raw:?} in column {column}")),
        Err(_) => Err(format!("cannot parse {raw:?} as a number in column {column}")),
    }
}

fn header_index(file: &CsvFile, findings: &mut Vec<Finding>) -> HashMap<String, usize> {
    let mut index = HashMap::new();
    for (i, name) in file.header.iter().enumerate() {
        if name.is_empty() {
            findings.push(Finding::new(&file.path, 1, format!("empty header name in column {}", i + 1)));
        } else if index.insert(name.clone(), i).is_some() {
            findings.push(Finding::new(&file.path, 1, format!("duplicate header column {name:?}")));
        }
    }
    index
}

/// Parsed contents of a spots file before the embedding is settled.
struct SpotRows {
    spot_ids: Vec<String>,
    sample_ids: Vec<String>,
    patient_ids: Vec<String>,
    coords: Vec<f64>,
    embedding: Vec<f64>,
    dim: usize,
}

fn scan_spots(path: &Path) -> Result<(SpotRows, Vec<Finding>)> {
    let file = read_csv(path)?;
    let mut findings = Vec::new();
    let mut rows = SpotRows {
        spot_ids: Vec::new(),
        sample_ids: Vec::new(),
        patient_ids: Vec::new(),
        coords: Vec::new(),
        embedding: Vec::new(),
        dim: 0,
    };
    if file.header.is_empty() {
        findings.push(Finding::new(path, 0, "empty file (no header)"));
        return Ok((rows, findings));
    }

    let index = header_index(&file, &mut findings);
    let mut fixed = [0usize; 5];
    for (slot, name) in fixed.iter_mut().zip(SPOT_COLUMNS) {
        match index.get(name) {
            Some(&i) => *slot = i,
            None => findings.push(Finding::new(path, 1, format!("missing header column {name:?}"))),
        }
    }
    let emb_count = file.header.iter().filter(|h| is_embedding_column(h)).count();
    let mut emb_cols = Vec::with_capacity(emb_count);
    for k in 0..emb_count {
        match index.get(&format!("e{k}")) {
            Some(&i) => emb_cols.push(i),
            None => findings.push(Finding::new(
                path,
                1,
                format!("embedding columns must be e0..e{}; e{k} is missing", emb_count - 1),
            )),
        }
    }
    for name in &file.header {
        if !name.is_empty() && !SPOT_COLUMNS.contains(&name.as_str()) && !is_embedding_column(name) {
            findings.push(Finding::new(path, 1, format!("unknown header column {name:?}")));
        }
    }
    if !findings.is_empty() {
        return Ok((rows, findings));
    }
    if file.rows.is_empty() {
        findings.push(Finding::new(path, 1, "no spots (header only)"));
        return Ok((rows, findings));
    }
    rows.dim = emb_cols.len();

    let width = file.header.len();
    let mut first_line: HashMap<String, usize> = HashMap::new();
    let mut sample_owner: HashMap<String, (String, usize)> = HashMap::new();
    for (line, fields) in &file.rows {
        let line = *line;
        if fields.len() != width {
            findings.push(Finding::new(
                path,
                line,
                format!("expected {width} fields, found {}", fields.len()),
            ));
            continue;
        }
        let id = &fields[fixed[0]];
        let sample = &fields[fixed[1]];
        let patient = &fields[fixed[2]];
        let mut ok = true;
        if id.is_empty() {
            findings.push(Finding::new(path, line, "empty spot_id"));
            ok = false;
        } else if let Some(prev) = first_line.get(id) {
            findings.push(Finding::new(
                path,
                line,
                format!("duplicate spot_id {id:?} (first on line {prev})"),
            ));
            ok = false;
        }
        if sample.is_empty() || patient.is_empty() {
            findings.push(Finding::new(path, line, format!("spot {id:?} lacks a sample_id or patient_id")));
            ok = false;
        } else if let Some((owner, owner_line)) = sample_owner.get(sample) {
            if owner != patient {
                findings.push(Finding::new(
                    path,
                    line,
                    format!(
                        "sample {sample:?} assigned to patient {patient:?} but to {owner:?} on line {owner_line}"
                    ),
                ));
                ok = false;
            }
        } else {
            sample_owner.insert(sample.clone(), (patient.clone(), line));
        }
        let mut numbers = Vec::with_capacity(2 + rows.dim);
        for (&col, name) in [fixed[3], fixed[4]].iter().zip(["x", "y"]) {
            match parse_number(&fields[col], name) {
                Ok(v) => numbers.push(v),
                Err(msg) => {
                    findings.push(Finding::new(path, line, msg));
                    ok = false;
                }
            }
        }
        for (k, &col) in emb_cols.iter().enumerate() {
            match parse_number(&fields[col], &format!("e{k}")) {
                Ok(v) => numbers.push(v),
                Err(msg) => {
                    findings.push(Finding::new(path, line, msg));
                    ok = false;
                }
            }
        }
        if !id.is_empty() {
            first_line.entry(id.clone()).or_insert(line);
        }
        if ok {
            rows.spot_ids.push(id.clone());
            rows.sample_ids.push(sample.clone());
            rows.patient_ids.push(patient.clone());
            rows.coords.extend_from_slice(&numbers[..2]);
            rows.embedding.extend_from_slice(&numbers[2..]);
        }
    }
    Ok((rows, findings))
}

fn is_embedding_column(name: &str) -> bool {
    name.len() > 1 && name.starts_with('e') && name[1..].bytes().all(|b| b.is_ascii_digit())
}

fn build_table(rows: SpotRows, embeddings: Array2<f64>) -> Result<SpotTable> {
    let n = rows.spot_ids.len();
    let coords = Array2::from_shape_vec((n, 2), rows.coords).map_err(|e| Error::Shape(e.to_string()))?;
    SpotTable::new(rows.spot_ids, rows.sample_ids, rows.patient_ids, coords, embeddings)
}

/// Loads a spots file whose embedding columns `e0..e{D-1}` are inline.
pub fn load_spot_table(path: impl AsRef<Path>) -> Result<SpotTable> {
    let path = path.as_ref();
    let (mut rows, findings) = scan_spots(path)?;
    if let Some(first) = findings.into_iter().next() {
        return Err(first.into_error());
    }
    if rows.dim == 0 {
        return Err(Finding::new(path, 1, "no embedding columns (expected e0..e{D-1})").into_error());
    }
    let n = rows.spot_ids.len();
    let emb = Array2::from_shape_vec((n, rows.dim), std::mem::take(&mut rows.embedding))
        .map_err(|e| Error::Shape(e.to_string()))?;
    build_table(rows, emb)
}

/// Loads a spots file, taking embeddings from separate per-source files when
/// the spots file carries none inline.
///
/// Inline embeddings take precedence; block files are then ignored with a
/// warning. Blocks are concatenated in the order given.
pub fn load_spot_table_with_blocks<P: AsRef<Path>>(path: impl AsRef<Path>, blocks: &[P]) -> Result<SpotTable> {
    let path = path.as_ref();
    let (mut rows, findings) = scan_spots(path)?;
    if let Some(first) = findings.into_iter().next() {
        return Err(first.into_error());
    }
    let n = rows.spot_ids.len();
    if rows.dim > 0 {
        if !blocks.is_empty() {
            warn!(
                "{} has inline embeddings; ignoring {} embedding file(s)",
                path.display(),
                blocks.len()
            );
        }
        let emb = Array2::from_shape_vec((n, rows.dim), std::mem::take(&mut rows.embedding))
            .map_err(|e| Error::Shape(e.to_string()))?;
        return build_table(rows, emb);
    }
    if blocks.is_empty() {
        return Err(Finding::new(path, 1, "no inline embedding columns and no embedding files given").into_error());
    }
    let loaded = blocks
        .iter()
        .map(load_embedding_block)
        .collect::<Result<Vec<_>>>()?;
    let joined = concat_embeddings(&loaded)?;
    let emb = joined.aligned_to(&rows.spot_ids)?;
    build_table(rows, emb)
}

/// Loads one embedding source (`spot_id,e0,...`). The source name is the file
/// stem.
pub fn load_embedding_block(path: impl AsRef<Path>) -> Result<EmbeddingBlock> {
    let path = path.as_ref();
    let file = read_csv(path)?;
    let mut findings = Vec::new();
    let index = header_index(&file, &mut findings);
    if file.header.first().map(String::as_str) != Some("spot_id") {
        findings.push(Finding::new(path, 1, "first header column must be \"spot_id\""));
    }
    let dim = file.header.len().saturating_sub(1);
    for k in 0..dim {
        if !index.contains_key(&format!("e{k}")) {
            findings.push(Finding::new(path, 1, format!("missing embedding column e{k}")));
        }
    }
    if dim == 0 {
        findings.push(Finding::new(path, 1, "no embedding columns"));
    }
    if let Some(first) = findings.into_iter().next() {
        return Err(first.into_error());
    }
    let cols: Vec<usize> = (0..dim).map(|k| index[&format!("e{k}")]).collect();
    let mut ids = Vec::with_capacity(file.rows.len());
    let mut values = Vec::with_capacity(file.rows.len() * dim);
    for (line, fields) in &file.rows {
        if fields.len() != dim + 1 {
            return Err(Finding::new(path, *line, format!("expected {} fields, found {}", dim + 1, fields.len())).into_error());
        }
        ids.push(fields[0].clone());
        for (k, &c) in cols.iter().enumerate() {
            let v = parse_number(&fields[c], &format!("e{k}"))
                .map_err(|m| Finding::new(path, *line, m).into_error())?;
            values.push(v);
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "embedding".to_string());
    let n = ids.len();
    let values = Array2::from_shape_vec((n, dim), values).map_err(|e| Error::Shape(e.to_string()))?;
    EmbeddingBlock::new(name, ids, values)
}

fn scan_abundance(
    path: &Path,
    spot_order: &[String],
    ground_truth: bool,
) -> Result<(Option<AbundanceMatrix>, Vec<Finding>)> {
    let file = read_csv(path)?;
    let mut findings = Vec::new();
    if file.header.is_empty() {
        findings.push(Finding::new(path, 0, "empty file (no header)"));
        return Ok((None, findings));
    }
    header_index(&file, &mut findings);
    if file.header[0] != "spot_id" {
        findings.push(Finding::new(path, 1, "first header column must be \"spot_id\""));
    }
    let cell_types: Vec<String> = file.header[1..].to_vec();
    if cell_types.len() < 2 {
        findings.push(Finding::new(path, 1, "at least two cell-type columns are required"));
    }
    if !findings.is_empty() {
        return Ok((None, findings));
    }
    let c = cell_types.len();
    let mut by_id: HashMap<&str, (usize, Vec<f64>)> = HashMap::new();
    for (line, fields) in &file.rows {
        let line = *line;
        if fields.len() != c + 1 {
            findings.push(Finding::new(path, line, format!("expected {} fields, found {}", c + 1, fields.len())));
            continue;
        }
        let id = fields[0].as_str();
        let mut row = Vec::with_capacity(c);
        let mut ok = true;
        for (raw, name) in fields[1..].iter().zip(&cell_types) {
            match parse_number(raw, name) {
                Ok(v) if ground_truth && v < 0.0 => {
                    findings.push(Finding::new(
                        path,
                        line,
                        format!("negative abundance {raw} for spot {id:?}, cell type {name:?}"),
                    ));
                    ok = false;
                }
                Ok(v) => row.push(v),
                Err(msg) => {
                    findings.push(Finding::new(path, line, msg));
                    ok = false;
                }
            }
        }
        if let Some((prev, _)) = by_id.get(id) {
            findings.push(Finding::new(path, line, format!("duplicate spot_id {id:?} (first on line {prev})")));
            continue;
        }
        if ok {
            by_id.insert(id, (line, row));
        } else {
            by_id.insert(id, (line, Vec::new()));
        }
    }
    let mut values = Vec::with_capacity(spot_order.len() * c);
    for id in spot_order {
        match by_id.get(id.as_str()) {
            Some((_, row)) if row.len() == c => values.extend_from_slice(row),
            Some(_) => {}
            None => findings.push(Finding::new(path, 0, format!("missing spot {id:?}"))),
        }
    }
    if !findings.is_empty() {
        return Ok((None, findings));
    }
    let values = Array2::from_shape_vec((spot_order.len(), c), values).map_err(|e| Error::Shape(e.to_string()))?;
    let matrix = AbundanceMatrix::new(spot_order.to_vec(), cell_types, values)?;
    Ok((Some(matrix), findings))
}

fn load_abundance_impl(path: &Path, spots: &SpotTable, ground_truth: bool) -> Result<AbundanceMatrix> {
    let (matrix, findings) = scan_abundance(path, spots.spot_ids(), ground_truth)?;
    if let Some(first) = findings.into_iter().next() {
        return Err(first.into_error());
    }
    matrix.ok_or_else(|| Error::invalid(format!("{}: unreadable abundance table", path.display())))
}

/// Loads ground-truth abundances (`spot_id,<type_1>,...`), reordered to match
/// `spots`. Values must be finite and non-negative; rows for spots not in
/// `spots` are ignored.
pub fn load_abundance_table(path: impl AsRef<Path>, spots: &SpotTable) -> Result<AbundanceMatrix> {
    load_abundance_impl(path.as_ref(), spots, true)
}

/// Like [`load_abundance_table`] but allows negative values, as produced by
/// an unclamped regressor.
pub fn load_predictions(path: impl AsRef<Path>, spots: &SpotTable) -> Result<AbundanceMatrix> {
    load_abundance_impl(path.as_ref(), spots, false)
}

/// Runs every dataset check on a spots/abundance pair and returns all
/// findings instead of stopping at the first one. Only I/O failures are
/// returned as errors.
pub fn scan_dataset(spots: impl AsRef<Path>, abundances: impl AsRef<Path>) -> Result<Vec<Finding>> {
    let spots = spots.as_ref();
    let (rows, mut findings) = scan_spots(spots)?;
    if findings.is_empty() && rows.dim == 0 {
        findings.push(Finding::new(spots, 1, "no embedding columns (expected e0..e{D-1})"));
    }
    let (_, more) = scan_abundance(abundances.as_ref(), &rows.spot_ids, true)?;
    findings.extend(more);
    Ok(findings)
}

pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(f))
}

pub fn write_spot_table(spots: &SpotTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&SPOT_COLUMNS.join(","));
    for k in 0..spots.dim() {
        out.push_str(&format!(",e{k}"));
    }
    out.push('\n');
    let coords = spots.coords();
    for i in 0..spots.len() {
        out.push_str(&format!(
            "{},{},{},{},{}",
            spots.spot_ids()[i],
            spots.sample_ids()[i],
            spots.patient_ids()[i],
            fmt_num(coords[[i, 0]]),
            fmt_num(coords[[i, 1]])
        ));
        for v in spots.embedding(i) {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        out.push('\n');
    }
    write_all(path, &out)
}

pub fn write_embedding_block(block: &EmbeddingBlock, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("spot_id");
    for k in 0..block.dim() {
        out.push_str(&format!(",e{k}"));
    }
    out.push('\n');
    for (id, row) in block.spot_ids().iter().zip(block.values().rows()) {
        out.push_str(id);
        for v in row {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        out.push('\n');
    }
    write_all(path.as_ref(), &out)
}

pub fn write_abundance_table(matrix: &AbundanceMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("spot_id");
    for c in matrix.cell_types() {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (id, row) in matrix.spot_ids().iter().zip(matrix.values().rows()) {
        out.push_str(id);
        for v in row {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        out.push('\n');
    }
    write_all(path.as_ref(), &out)
}

pub(crate) fn write_all(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    const SPOTS: &str = "spot_id,sample_id,patient_id,x,y,e0,e1,e2,e3\n\
        s1,A1,A,10,20,0.1,0.2,0.3,0.4\n\
        s2,A1,A,30,20,1e-3,2,3,4\n\
        s3,B1,B,50,20,-1,-2,-3,-4\n";

    #[test]
    fn loads_three_spots() {
        let dir = tempfile::tempdir().unwrap();
        let t = load_spot_table(write(&dir, "spots.csv", SPOTS)).unwrap();
        assert_eq!((t.len(), t.dim()), (3, 4));
        assert_eq!(t.embedding(1)[0], 1e-3);
        assert_eq!(t.patients().len(), 2);
    }

    #[test]
    fn duplicate_spot_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let body = "spot_id,sample_id,patient_id,x,y,e0\ns1,A,A,0,0,1\ns1,A,A,1,1,2\n";
        let err = load_spot_table(write(&dir, "d.csv", body)).unwrap_err().to_string();
        assert!(err.contains("\"s1\"") && err.contains(":3:"), "{err}");
    }

    #[test]
    fn header_only_has_no_spots() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_spot_table(write(&dir, "h.csv", "spot_id,sample_id,patient_id,x,y,e0\n"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("no spots"), "{err}");
    }

    #[test]
    fn rejects_nan_and_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let nan = "spot_id,sample_id,patient_id,x,y,e0\ns1,A,A,0,0,NaN\n";
        assert!(load_spot_table(write(&dir, "n.csv", nan)).unwrap_err().to_string().contains("non-finite"));
        let ragged = "spot_id,sample_id,patient_id,x,y,e0,e1\ns1,A,A,0,0,1\n";
        let err = load_spot_table(write(&dir, "r.csv", ragged)).unwrap_err().to_string();
        assert!(err.contains("expected 7 fields, found 6"), "{err}");
    }

    #[test]
    fn rejects_missing_and_duplicate_header_columns() {
        let dir = tempfile::tempdir().unwrap();
        let missing = "spot_id,sample_id,x,y,e0\ns1,A,0,0,1\n";
        assert!(load_spot_table(write(&dir, "m.csv", missing)).unwrap_err().to_string().contains("patient_id"));
        let dup = "spot_id,sample_id,patient_id,x,x,y,e0\ns1,A,A,0,0,0,1\n";
        assert!(load_spot_table(write(&dir, "u.csv", dup)).unwrap_err().to_string().contains("duplicate header"));
    }

    #[test]
    fn abundance_examples() {
        let dir = tempfile::tempdir().unwrap();
        let spots = load_spot_table(write(&dir, "spots.csv", SPOTS)).unwrap();
        let zeros = "spot_id,T1,T2\ns3,0.0,0.0\ns1,0,0\ns2,0,0\n";
        let m = load_abundance_table(write(&dir, "z.csv", zeros), &spots).unwrap();
        assert_eq!(m.spot_ids(), spots.spot_ids());
        assert!(m.values().iter().all(|&v| v == 0.0));

        let missing = "spot_id,T1,T2\ns1,0,0\ns3,0,0\n";
        let err = load_abundance_table(write(&dir, "m.csv", missing), &spots).unwrap_err().to_string();
        assert!(err.contains("\"s2\""), "{err}");

        let negative = "spot_id,T1,T2\ns1,0,-0.1\ns2,0,0\ns3,0,0\n";
        assert!(load_abundance_table(write(&dir, "neg.csv", negative), &spots).is_err());
        assert!(load_predictions(write(&dir, "neg2.csv", negative), &spots).is_ok());

        let text = "spot_id,T1,T2\ns1,0,abc\ns2,0,0\ns3,0,0\n";
        assert!(load_abundance_table(write(&dir, "t.csv", text), &spots).unwrap_err().to_string().contains("abc"));
    }

    #[test]
    fn scan_reports_every_problem() {
        let dir = tempfile::tempdir().unwrap();
        let spots = "spot_id,sample_id,patient_id,x,y,e0\ns1,A,A,0,0,1\ns1,A,A,0,0,1\ns2,A,A,0,0,nan\n";
        let ab = "spot_id,T1,T2\ns1,1,-1\n";
        let findings = scan_dataset(write(&dir, "s.csv", spots), write(&dir, "a.csv", ab)).unwrap();
        let text: Vec<String> = findings.iter().map(|f| f.to_string()).collect();
        assert!(text.iter().any(|t| t.contains("duplicate spot_id")), "{text:?}");
        assert!(text.iter().any(|t| t.contains("non-finite")), "{text:?}");
        assert!(text.iter().any(|t| t.contains("negative abundance")), "{text:?}");
    }

    #[test]
    fn blocks_fill_in_missing_inline_embeddings() {
        let dir = tempfile::tempdir().unwrap();
        let spots = write(&dir, "spots.csv", "spot_id,sample_id,patient_id,x,y\ns1,A,A,0,0\ns2,A,A,1,0\n");
        let a = write(&dir, "CONCH.csv", "spot_id,e0,e1\ns2,3,4\ns1,1,2\n");
        let b = write(&dir, "UNI.csv", "spot_id,e0\ns1,5\ns2,6\n");
        let t = load_spot_table_with_blocks(&spots, &[a, b]).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.embedding(0).to_vec(), vec![1.0, 2.0, 5.0]);
        assert_eq!(t.embedding(1).to_vec(), vec![3.0, 4.0, 6.0]);
        assert!(load_spot_table(&spots).is_err());
    }
}
