//! Observation matrices and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Column name treated as a generating-component label rather than a feature.
pub const COMPONENT_COLUMN: &str = "component";

/// An `n x d` matrix of observations. Row `i` is observation `i`, column `j`
/// is feature `j` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
    names: Vec<String>,
    components: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("dataset contains non-finite values"));
        }
        let names = (0..values.ncols()).map(|j| format!("x{j}")).collect();
        Ok(Self {
            values,
            names,
            components: None,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.values.ncols() {
            return Err(Error::input(format!(
                "{} column names for {} features",
                names.len(),
                self.values.ncols()
            )));
        }
        self.names = names;
        Ok(self)
    }

    pub fn with_components(mut self, components: Vec<usize>) -> Result<Self> {
        if components.len() != self.values.nrows() {
            return Err(Error::input(format!(
                "{} component labels for {} rows",
                components.len(),
                self.values.nrows()
            )));
        }
        self.components = Some(components);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn feature(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn components(&self) -> Option<&[usize]> {
        self.components.as_deref()
    }

    /// Columns `features` in the given order, as a new `n x |features|` matrix.
    pub fn project(&self, features: &[usize]) -> Result<Array2<f64>> {
        if let Some(&bad) = features.iter().find(|&&j| j >= self.d()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.d(),
            });
        }
        Ok(self.values.select(Axis(1), features))
    }

    /// Reads a headed CSV. A column named `component` is kept as labels, every
    /// other column must be numeric and becomes a feature.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let label_col = headers.iter().position(|h| h == COMPONENT_COLUMN);
        let names: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != label_col)
            .map(|(_, h)| h.clone())
            .collect();

        let mut flat = Vec::new();
        let mut components = Vec::new();
        let mut rows = 0;
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            for (i, field) in record.iter().enumerate() {
                if Some(i) == label_col {
                    components.push(field.parse::<usize>().map_err(|_| {
                        Error::input(format!("row {line}: bad component label {field:?}"))
                    })?);
                } else {
                    flat.push(field.parse::<f64>().map_err(|_| {
                        Error::input(format!("row {line}: bad number {field:?}"))
                    })?);
                }
            }
            rows += 1;
        }
        let values = Array2::from_shape_vec((rows, names.len()), flat)
            .map_err(|e| Error::input(format!("ragged CSV: {e}")))?;
        let data = Self::new(values)?.with_names(names)?;
        match label_col {
            Some(_) => data.with_components(components),
            None => Ok(data),
        }
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes the features, plus the `component` column when labels exist.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.names.iter().map(String::as_str).collect();
        if self.components.is_some() {
            header.push(COMPONENT_COLUMN);
        }
        wtr.write_record(&header)?;
        for (i, row) in self.values.rows().into_iter().enumerate() {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            if let Some(c) = &self.components {
                record.push(c[i].to_string());
            }
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Reads a single numeric column, with or without a header line.
pub fn read_single_column<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let Some(field) = record.get(0) else { continue };
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if line == 0 => {}
            Err(_) => return Err(Error::input(format!("line {line}: bad number {field:?}"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn csv_round_trip_keeps_component_column() {
        let data = Dataset::new(array![[0.5, -1.25], [3.0, 1e-9]])
            .unwrap()
            .with_components(vec![1, 0])
            .unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,component\n"));
        assert_eq!(Dataset::read_csv(buf.as_slice()).unwrap(), data);
    }

    #[test]
    fn rejects_non_finite_and_bad_fields() {
        assert!(Dataset::new(array![[f64::NAN]]).is_err());
        assert!(Dataset::read_csv("a,b\n1,x\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("a,b\n1,2\n3\n".as_bytes()).is_err());
    }

    #[test]
    fn single_column_header_optional() {
        assert_eq!(read_single_column("x\n1\n2.5\n".as_bytes()).unwrap(), vec![1.0, 2.5]);
        assert_eq!(read_single_column("1\n2.5\n".as_bytes()).unwrap(), vec![1.0, 2.5]);
        assert!(read_single_column("1\nfoo\n".as_bytes()).is_err());
    }

    #[test]
    fn projection_keeps_requested_order() {
        let data = Dataset::new(array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(data.project(&[2, 0]).unwrap(), array![[3.0, 1.0], [6.0, 4.0]]);
        assert!(data.project(&[3]).is_err());
    }
}
