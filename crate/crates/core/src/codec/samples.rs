use std::collections::BTreeMap;

use crate::error::{HdfeError, Result};

/// `n` input rows of width `m`, with optional scalar outputs. Samples without
/// outputs describe an implicit function (a point set).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    m: usize,
    inputs: Vec<f64>,
    outputs: Option<Vec<f64>>,
    /// Free-form labels such as the sampling distribution or noise level.
    pub metadata: BTreeMap<String, String>,
}

impl SampleSet {
    /// `inputs` is row-major `n x m`.
    pub fn explicit(m: usize, inputs: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        let set = SampleSet::build(m, inputs, Some(outputs))?;
        Ok(set)
    }

    pub fn implicit(m: usize, inputs: Vec<f64>) -> Result<Self> {
        SampleSet::build(m, inputs, None)
    }

    pub fn from_rows(rows: &[Vec<f64>], outputs: Option<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map(|r| r.len()).ok_or(HdfeError::EmptySamples)?;
        let mut inputs = Vec::with_capacity(rows.len() * m);
        for r in rows {
            if r.len() != m {
                return Err(HdfeError::Dimension {
                    expected: m,
                    got: r.len(),
                });
            }
            inputs.extend_from_slice(r);
        }
        SampleSet::build(m, inputs, outputs)
    }

    /// One-dimensional explicit samples.
    pub fn scalar(xs: &[f64], ys: &[f64]) -> Result<Self> {
        SampleSet::explicit(1, xs.to_vec(), ys.to_vec())
    }

    fn build(m: usize, inputs: Vec<f64>, outputs: Option<Vec<f64>>) -> Result<Self> {
        if m == 0 {
            return Err(HdfeError::param("m", "must be at least 1"));
        }
        if inputs.is_empty() {
            return Err(HdfeError::EmptySamples);
        }
        if inputs.len() % m != 0 {
            return Err(HdfeError::param(
                "inputs",
                format!("length {} is not a multiple of m = {m}", inputs.len()),
            ));
        }
        let n = inputs.len() / m;
        if let Some(ys) = &outputs {
            if ys.len() != n {
                return Err(HdfeError::Dimension {
                    expected: n,
                    got: ys.len(),
                });
            }
            if ys.iter().any(|y| !y.is_finite()) {
                return Err(HdfeError::NonFinite("output value"));
            }
        }
        if inputs.iter().any(|x| !x.is_finite()) {
            return Err(HdfeError::NonFinite("input coordinate"));
        }
        Ok(SampleSet {
            m,
            inputs,
            outputs,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.inputs.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.m..(i + 1) * self.m]
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn outputs(&self) -> Option<&[f64]> {
        self.outputs.as_deref()
    }

    pub fn output(&self, i: usize) -> Option<f64> {
        self.outputs.as_ref().map(|ys| ys[i])
    }

    pub fn is_implicit(&self) -> bool {
        self.outputs.is_none()
    }

    /// Keeps the samples at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<SampleSet> {
        let mut inputs = Vec::with_capacity(idx.len() * self.m);
        for &i in idx {
            inputs.extend_from_slice(self.input(i));
        }
        let outputs = self
            .outputs
            .as_ref()
            .map(|ys| idx.iter().map(|&i| ys[i]).collect());
        let mut out = SampleSet::build(self.m, inputs, outputs)?;
        out.metadata = self.metadata.clone();
        Ok(out)
    }

    pub fn with_outputs(&self, outputs: Vec<f64>) -> Result<SampleSet> {
        let mut out = SampleSet::build(self.m, self.inputs.clone(), Some(outputs))?;
        out.metadata = self.metadata.clone();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(matches!(
            SampleSet::explicit(1, vec![], vec![]),
            Err(HdfeError::EmptySamples)
        ));
        assert!(SampleSet::explicit(2, vec![0.0, 1.0, 2.0], vec![0.0]).is_err());
        assert!(SampleSet::explicit(1, vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(SampleSet::explicit(1, vec![0.0], vec![f64::NAN]).is_err());
        let s = SampleSet::explicit(2, vec![0.0, 1.0, 2.0, 3.0], vec![0.5, 0.6]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.input(1), &[2.0, 3.0]);
        assert_eq!(s.output(0), Some(0.5));
        let sel = s.select(&[1, 1, 0]).unwrap();
        assert_eq!(sel.inputs(), &[2.0, 3.0, 2.0, 3.0, 0.0, 1.0]);
        assert_eq!(sel.outputs().unwrap(), &[0.6, 0.6, 0.5]);
    }

    #[test]
    fn rows_constructor() {
        let s = SampleSet::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]], None).unwrap();
        assert!(s.is_implicit());
        assert_eq!(s.input_dim(), 2);
        assert!(SampleSet::from_rows(&[vec![0.1], vec![0.3, 0.4]], None).is_err());
    }
}
