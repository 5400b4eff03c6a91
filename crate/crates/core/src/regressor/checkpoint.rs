//! Plain-text model checkpoint.
//!
//! ```text
//! histocell-mlp v1
//! layer_dims,<D>,<h1>,...,<h7>,<C>
//! seed,<u64>
//! cell_types,<name>,...
//! means,<v>,...
//! stds,<v>,...
//! layer,<k>
//! <one line per weight row>
//! <bias line>
//! ...
//! ```

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Dense, MlpModel, Standardizer};
use crate::dataset::io::{fmt_num, write_all};
use crate::error::{Error, Result};

pub const CHECKPOINT_HEADER: &str = "histocell-mlp v1";

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_num).collect::<Vec<_>>().join(",")
}

pub fn checkpoint_to_string(model: &MlpModel) -> String {
    let mut out = String::new();
    out.push_str(CHECKPOINT_HEADER);
    out.push('\n');
    let dims: Vec<String> = model.layer_dims().iter().map(|d| d.to_string()).collect();
    out.push_str(&format!("layer_dims,{}\n", dims.join(",")));
    out.push_str(&format!("seed,{}\n", model.seed));
    out.push_str(&format!("cell_types,{}\n", model.cell_types.join(",")));
    out.push_str(&format!("means,{}\n", join(model.standardizer.means.iter().copied())));
    out.push_str(&format!("stds,{}\n", join(model.standardizer.stds.iter().copied())));
    for (k, layer) in model.layers().iter().enumerate() {
        out.push_str(&format!("layer,{k}\n"));
        for row in layer.weight.rows() {
            out.push_str(&join(row.iter().copied()));
            out.push('\n');
        }
        out.push_str(&join(layer.bias.iter().copied()));
        out.push('\n');
    }
    out
}

pub fn save_checkpoint(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    write_all(path.as_ref(), &checkpoint_to_string(model))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text).map_err(|(line, message)| Error::Schema {
        path: path.to_path_buf(),
        line,
        message,
    })
}

type ParseResult<T> = std::result::Result<T, (usize, String)>;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> ParseResult<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l.trim_end_matches('\r'))
            }
            None => Err((self.last + 1, "unexpected end of checkpoint".into())),
        }
    }

    fn keyed(&mut self, key: &str) -> ParseResult<Vec<&'a str>> {
        let line = self.next()?;
        let mut parts = line.split(',');
        if parts.next() != Some(key) {
            return Err((self.last, format!("expected a {key:?} line")));
        }
        Ok(parts.collect())
    }

    fn numbers(&mut self, expected: usize) -> ParseResult<Vec<f64>> {
        let line = self.next()?;
        let values = line
            .split(',')
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err((self.last, format!("bad parameter value {s:?}"))),
            })
            .collect::<ParseResult<Vec<f64>>>()?;
        if values.len() != expected {
            return Err((self.last, format!("expected {expected} values, found {}", values.len())));
        }
        Ok(values)
    }
}

fn parse_checkpoint(text: &str) -> ParseResult<MlpModel> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    if lines.next()? != CHECKPOINT_HEADER {
        return Err((1, format!("missing {CHECKPOINT_HEADER:?} header")));
    }
    let dims = lines
        .keyed("layer_dims")?
        .iter()
        .map(|s| s.parse::<usize>().map_err(|_| (2, format!("bad layer width {s:?}"))))
        .collect::<ParseResult<Vec<usize>>>()?;
    if dims.len() < 2 {
        return Err((2, "layer_dims needs at least two entries".into()));
    }
    let seed_field = lines.keyed("seed")?;
    let seed = match seed_field.as_slice() {
        [s] => s.parse::<u64>().map_err(|_| (lines.last, format!("bad seed {s:?}")))?,
        _ => return Err((lines.last, "seed line needs one value".into())),
    };
    let cell_types: Vec<String> = lines.keyed("cell_types")?.iter().map(|s| s.to_string()).collect();
    let d = dims[0];
    let parse_row = |fields: Vec<&str>, line: usize| -> ParseResult<Array1<f64>> {
        if fields.len() != d {
            return Err((line, format!("expected {d} values, found {}", fields.len())));
        }
        fields
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| (line, format!("bad value {s:?}"))))
            .collect::<ParseResult<Array1<f64>>>()
    };
    let means = parse_row(lines.keyed("means")?, lines.last)?;
    let stds = parse_row(lines.keyed("stds")?, lines.last)?;
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for k in 0..dims.len() - 1 {
        let header = lines.keyed("layer")?;
        if header != [k.to_string().as_str()] {
            return Err((lines.last, format!("expected layer {k}")));
        }
        let (fan_in, fan_out) = (dims[k], dims[k + 1]);
        let mut weight = Array2::zeros((fan_out, fan_in));
        for r in 0..fan_out {
            let row = lines.numbers(fan_in)?;
            weight.row_mut(r).assign(&Array1::from(row));
        }
        let bias = Array1::from(lines.numbers(fan_out)?);
        layers.push(Dense { weight, bias });
    }
    let tail = lines.last;
    MlpModel::from_layers(layers, Standardizer { means, stds }, cell_types, seed)
        .map_err(|e| (tail, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_foreign_header() {
        let err = parse_checkpoint("not a model\n").unwrap_err();
        assert_eq!(err.0, 1);
    }

    #[test]
    fn truncated_file_is_reported() {
        let err = parse_checkpoint("histocell-mlp v1\nlayer_dims,2,2,2,2,2,2,2,2,2\nseed,1\n").unwrap_err();
        assert!(err.1.contains("end of checkpoint") || err.1.contains("cell_types"), "{err:?}");
    }
}
