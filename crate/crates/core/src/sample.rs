use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Rows are samples, columns are variables in node-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    pub labels: Vec<String>,
    pub data: DMatrix<f64>,
}

impl SampleMatrix {
    pub fn new(labels: Vec<String>, data: DMatrix<f64>) -> Result<Self> {
        if labels.len() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.ncols(), got: labels.len() });
        }
        if data.nrows() == 0 {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite sample value".into()));
        }
        Ok(SampleMatrix { labels, data })
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    /// Header row of labels, then one line per sample, 17 significant digits.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.labels)?;
        let mut record = Vec::with_capacity(self.ncols());
        for r in 0..self.nrows() {
            record.clear();
            record.extend((0..self.ncols()).map(|c| format!("{:.16e}", self.data[(r, c)])));
            writer.write_record(&record)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii output"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let labels: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut values = Vec::new();
        let mut rows = 0;
        for record in reader.records() {
            let record = record?;
            if record.len() != labels.len() {
                return Err(Error::Csv(format!("row {} has {} fields", rows + 1, record.len())));
            }
            for field in record.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Csv(format!("bad number {field:?}")))?;
                values.push(v);
            }
            rows += 1;
        }
        let data = DMatrix::from_row_slice(rows, labels.len(), &values);
        SampleMatrix::new(labels, data)
    }
}
