//! Regression samples and their CSV form.
//!
//! The CSV layout is a header `x1,...,xd,y` followed by one observation per
//! line. Values are written with the shortest representation that parses
//! back to the same bits, so export followed by import is lossless.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// A sample of `n` feature rows in `R^d` with their outputs.
///
/// Rows are stored contiguously (row-major) since every hot loop in the
/// estimators walks the sample one observation at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: usize,
}

impl<T: Real> Dataset<T> {
    /// Builds a dataset from row-major features.
    pub fn from_rows(x: Vec<T>, y: Vec<T>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("feature dimension must be at least 1"));
        }
        if y.is_empty() {
            return Err(Error::domain("dataset must contain at least one observation"));
        }
        check_len("feature buffer", y.len() * d, x.len())?;
        if let Some(pos) = x.iter().chain(&y).position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at flat position {pos}")));
        }
        Ok(Self { x, y, d })
    }

    /// Builds a dataset from a list of rows.
    pub fn from_vecs(rows: &[Vec<T>], y: Vec<T>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        check_len("row count", y.len(), rows.len())?;
        let mut x = Vec::with_capacity(rows.len() * d);
        for row in rows {
            check_len("feature row", d, row.len())?;
            x.extend_from_slice(row);
        }
        Self::from_rows(x, y, d)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn ys(&self) -> &[T] {
        &self.y
    }

    /// Row-major feature buffer.
    pub fn xs(&self) -> &[T] {
        &self.x
    }

    /// Features as an `n x d` matrix.
    pub fn x_matrix(&self) -> DMatrix<T> {
        DMatrix::from_row_slice(self.n(), self.d, &self.x)
    }

    /// Copy of the dataset with outputs replaced.
    pub fn with_outputs(&self, y: Vec<T>) -> Result<Self> {
        check_len("outputs", self.n(), y.len())?;
        Self::from_rows(self.x.clone(), y, self.d)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.d).map(|j| format!("x{j}")).collect();
        header.push("y".to_owned());
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.d + 1);
        for i in 0..self.n() {
            record.clear();
            record.extend(self.row(i).iter().map(|v| v.to_string()));
            record.push(self.y[i].to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = r.headers()?.clone();
        let cols = header.len();
        if cols < 2 {
            return Err(Error::Csv("header needs at least one feature column and y".into()));
        }
        let d = cols - 1;
        for (j, name) in header.iter().enumerate() {
            let expected = if j == d { "y".to_owned() } else { format!("x{}", j + 1) };
            if name.trim() != expected {
                return Err(Error::Csv(format!(
                    "column {} is named {name:?}, expected {expected:?}",
                    j + 1
                )));
            }
        }
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Csv(format!("row {}: cannot parse {field:?} as a number", line + 1))
                })?;
                let v = T::from_f64(v)
                    .ok_or_else(|| Error::Csv(format!("row {}: value out of range", line + 1)))?;
                if j == d {
                    y.push(v);
                } else {
                    x.push(v);
                }
            }
        }
        Self::from_rows(x, y, d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}
