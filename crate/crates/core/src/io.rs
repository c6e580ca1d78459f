//! File formats: sample CSV, dataset sidecars, config text and output
//! rescaling.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::SampleSet;
use crate::datagen::{DatasetSpec, GeneratedDataset};
use crate::error::{HdfeError, Result};
use crate::fpe::{EncodingConfig, SeedRepr};

pub const SIDECAR_FORMAT_VERSION: u16 = 1;

/// Writes `x1,..,xm[,y]` rows with 17 significant digits, enough to round
/// trip every double.
pub fn write_samples_csv<W: Write>(out: W, samples: &SampleSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let m = samples.input_dim();
    let mut header: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    if !samples.is_implicit() {
        header.push("y".into());
    }
    w.write_record(&header).map_err(csv_write)?;
    let mut row = Vec::with_capacity(m + 1);
    for i in 0..samples.len() {
        row.clear();
        row.extend(samples.input(i).iter().map(|v| format!("{v:.16e}")));
        if let Some(y) = samples.output(i) {
            row.push(format!("{y:.16e}"));
        }
        w.write_record(&row).map_err(csv_write)?;
    }
    w.flush().map_err(|e| HdfeError::io("<csv>", e))
}

fn csv_write(e: csv::Error) -> HdfeError {
    HdfeError::Serialize(e.to_string())
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<SampleSet> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = r
        .headers()
        .map_err(|e| HdfeError::Csv {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let has_y = names.last() == Some(&"y");
    let m = if has_y { names.len() - 1 } else { names.len() };
    if m == 0 {
        return Err(HdfeError::Csv {
            line: 1,
            reason: "header has no input columns".into(),
        });
    }
    for (i, name) in names[..m].iter().enumerate() {
        if *name != format!("x{}", i + 1) {
            return Err(HdfeError::Csv {
                line: 1,
                reason: format!("expected column `x{}`, found `{name}`", i + 1),
            });
        }
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| HdfeError::Csv {
            line: e.position().map_or(line, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        if rec.len() != names.len() {
            return Err(HdfeError::Csv {
                line,
                reason: format!("expected {} fields, found {}", names.len(), rec.len()),
            });
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| HdfeError::Csv {
                line,
                reason: format!("column {} is not a number: `{field}`", j + 1),
            })?;
            if !v.is_finite() {
                return Err(HdfeError::Csv {
                    line,
                    reason: format!("column {} is not finite", j + 1),
                });
            }
            if j < m {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
    }
    if xs.is_empty() {
        return Err(HdfeError::Csv {
            line: 2,
            reason: "no samples".into(),
        });
    }
    if has_y {
        SampleSet::explicit(m, xs, ys)
    } else {
        SampleSet::implicit(m, xs)
    }
}

pub fn save_samples(path: &Path, samples: &SampleSet) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| HdfeError::io(path, e))?;
    write_samples_csv(std::io::BufWriter::new(f), samples)
}

pub fn load_samples(path: &Path) -> Result<SampleSet> {
    let f = std::fs::File::open(path).map_err(|e| HdfeError::io(path, e))?;
    read_samples_csv(std::io::BufReader::new(f))
}

pub fn save_config(path: &Path, cfg: &EncodingConfig) -> Result<()> {
    std::fs::write(path, cfg.to_toml()?).map_err(|e| HdfeError::io(path, e))
}

pub fn load_config(path: &Path) -> Result<EncodingConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HdfeError::io(path, e))?;
    EncodingConfig::from_toml(&text)
}

/// Affine map from the original output range onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescale {
    pub lo: f64,
    pub hi: f64,
    /// The outputs were constant; every value was mapped to 0.5.
    pub degenerate: bool,
}

impl Rescale {
    pub fn forward(&self, y: f64) -> f64 {
        (y - self.lo) / (self.hi - self.lo)
    }

    pub fn inverse(&self, v: f64) -> f64 {
        self.lo + v * (self.hi - self.lo)
    }
}

/// Maps outputs from `[lo, hi]` onto `[0, 1]`.
pub fn rescale_outputs(samples: &SampleSet, lo: f64, hi: f64) -> Result<(SampleSet, Rescale)> {
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(HdfeError::DegenerateRange(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let ys = samples
        .outputs()
        .ok_or(HdfeError::WrongCodec("rescaling needs outputs"))?;
    let r = Rescale {
        lo,
        hi,
        degenerate: false,
    };
    let mapped = ys.iter().map(|&y| r.forward(y)).collect();
    Ok((samples.with_outputs(mapped)?, r))
}

/// Maps the observed output range onto `[0, 1]`. Constant outputs are
/// flagged and sent to 0.5.
pub fn rescale_to_unit(samples: &SampleSet) -> Result<(SampleSet, Rescale)> {
    let ys = samples
        .outputs()
        .ok_or(HdfeError::WrongCodec("rescaling needs outputs"))?;
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        return rescale_outputs(samples, lo, hi);
    }
    let r = Rescale {
        lo: lo - 0.5,
        hi: lo + 0.5,
        degenerate: true,
    };
    Ok((samples.with_outputs(vec![0.5; ys.len()])?, r))
}

/// Structured-text companion of a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(rename = "format-version")]
    pub format_version: u16,
    pub kind: String,
    pub seed: SeedRepr,
    pub spec: toml::Table,
    pub n: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rescale: Option<Rescale>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Sidecar {
    pub fn new(spec: &DatasetSpec, data: &GeneratedDataset, rescale: Option<Rescale>) -> Result<Self> {
        let mut table = toml::Table::try_from(&spec.kind)
            .map_err(|e| HdfeError::Serialize(e.to_string()))?;
        table.remove("kind");
        Ok(Sidecar {
            format_version: SIDECAR_FORMAT_VERSION,
            kind: spec.kind_name().to_string(),
            seed: SeedRepr::from(spec.seed),
            spec: table,
            n: data.samples.len(),
            m: data.samples.input_dim(),
            complexity: data.complexity,
            ground_truth: data.ground_truth.clone(),
            centers: data.centers.clone(),
            rescale,
            metadata: data.samples.metadata.clone(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HdfeError::Serialize(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Sidecar = toml::from_str(text).map_err(|e| HdfeError::Config(e.to_string()))?;
        if s.format_version != SIDECAR_FORMAT_VERSION {
            return Err(HdfeError::Config(format!(
                "unsupported sidecar format-version {}",
                s.format_version
            )));
        }
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| HdfeError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HdfeError::io(path, e))?;
        Sidecar::from_toml(&text)
    }
}

/// `data.csv` -> `data.toml`.
pub fn sidecar_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("toml")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let s = SampleSet::explicit(2, vec![0.1, 0.25, 1.0, 0.0], vec![0.5, 1.0 / 3.0]).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x1,x2,y"));
        assert_eq!(
            lines.next(),
            Some("1.0000000000000001e-1,2.5000000000000000e-1,5.0000000000000000e-1")
        );
        let back = read_samples_csv(text.as_bytes()).unwrap();
        assert_eq!(back.inputs(), s.inputs());
        assert_eq!(back.outputs(), s.outputs());
    }

    #[test]
    fn csv_errors_name_the_line() {
        let bad = "x1,y\n0.1,0.2\n0.3,abc\n";
        match read_samples_csv(bad.as_bytes()) {
            Err(HdfeError::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let short = "x1,y\n0.1,0.2\n0.3\n";
        assert!(matches!(read_samples_csv(short.as_bytes()), Err(HdfeError::Csv { line: 3, .. })));
        let header = "a,y\n0.1,0.2\n";
        assert!(matches!(read_samples_csv(header.as_bytes()), Err(HdfeError::Csv { line: 1, .. })));
        let empty = "x1,y\n";
        assert!(read_samples_csv(empty.as_bytes()).is_err());
    }

    #[test]
    fn rescale_contracts() {
        let s = SampleSet::scalar(&[0.0, 0.5, 1.0], &[0.0, 0.3, 1.0]).unwrap();
        let (t, r) = rescale_outputs(&s, 0.0, 1.0).unwrap();
        assert_eq!(t.outputs(), s.outputs());
        assert!(!r.degenerate);

        let s = SampleSet::scalar(&[0.0, 0.5, 1.0], &[-1.0, 0.2, 1.0]).unwrap();
        let (t, r) = rescale_outputs(&s, -1.0, 1.0).unwrap();
        assert_eq!(t.outputs().unwrap()[0], 0.0);
        assert_eq!(t.outputs().unwrap()[2], 1.0);
        for (a, b) in t.outputs().unwrap().iter().zip(s.outputs().unwrap()) {
            assert!((r.inverse(*a) - b).abs() <= 1e-15);
        }

        let c = SampleSet::scalar(&[0.0, 1.0], &[3.0, 3.0]).unwrap();
        let (t, r) = rescale_to_unit(&c).unwrap();
        assert!(r.degenerate);
        assert_eq!(t.outputs().unwrap(), &[0.5, 0.5]);
        assert_eq!(r.inverse(0.5), 3.0);

        assert!(matches!(rescale_outputs(&s, 1.0, 1.0), Err(HdfeError::DegenerateRange(_))));
    }

    #[test]
    fn sidecar_round_trip() {
        let mut p = BTreeMap::new();
        p.insert("n".to_string(), "20".to_string());
        p.insert("direction".to_string(), "right".to_string());
        let spec = DatasetSpec::from_params("skewed-uniform", &p, u64::MAX - 3).unwrap();
        let data = generate(&spec).unwrap();
        let sc = Sidecar::new(&spec, &data, None).unwrap();
        let text = sc.to_toml().unwrap();
        assert!(text.contains("kind = \"skewed-uniform\""));
        let back = Sidecar::from_toml(&text).unwrap();
        assert_eq!(back, sc);
        assert_eq!(back.seed.value().unwrap(), u64::MAX - 3);
    }

    proptest! {
        #[test]
        fn csv_round_trips_bit_exactly(
            rows in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 3), 1..30),
            explicit in any::<bool>(),
        ) {
            let ys: Vec<f64> = rows.iter().map(|r| r[2]).collect();
            let xs: Vec<Vec<f64>> = rows.iter().map(|r| r[..2].to_vec()).collect();
            let s = SampleSet::from_rows(&xs, explicit.then_some(ys)).unwrap();
            let mut buf = Vec::new();
            write_samples_csv(&mut buf, &s).unwrap();
            let back = read_samples_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.inputs(), s.inputs());
            prop_assert_eq!(back.outputs(), s.outputs());
        }
    }
}
