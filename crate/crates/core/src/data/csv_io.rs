use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::dataset::FeatureDataset;
use crate::error::{Error, Result};

/// Parses rows of `d` floats followed by an integer label. `C` is `max label + 1`.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<FeatureDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, has_header)
}

pub fn read_csv<R: Read>(reader: R, has_header: bool) -> Result<FeatureDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut dim: Option<usize> = None;
    let mut features = Vec::new();
    let mut labels: Vec<u32> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse { line, message };
        if record.len() < 2 {
            return Err(parse_err(format!("expected at least 2 fields, found {}", record.len())));
        }
        let d = record.len() - 1;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(parse_err(format!("ragged row: {d} features, expected {expected}")));
            }
            _ => {}
        }
        for (col, cell) in record.iter().take(d).enumerate() {
            let v: f32 = cell
                .parse()
                .map_err(|_| parse_err(format!("column {col}: '{cell}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("column {col}: non-finite value")));
            }
            features.push(v);
        }
        let cell = &record[d];
        let label: u32 = cell
            .parse()
            .map_err(|_| parse_err(format!("label '{cell}' is not a non-negative integer")))?;
        labels.push(label);
    }
    let Some(dim) = dim else {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    };
    let classes = labels.iter().copied().max().unwrap_or(0) as usize + 1;
    FeatureDataset::new(dim, classes, features, labels)
}

/// Writes one row per sample using shortest round-trip float text.
pub fn save_csv(ds: &FeatureDataset, path: impl AsRef<Path>, header: bool) -> Result<()> {
    let path = path.as_ref();
    let mut wtr = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    if header {
        let mut names: Vec<String> = (0..ds.dim()).map(|j| format!("f{j}")).collect();
        names.push("label".into());
        wtr.write_record(&names).map_err(|e| csv_write_err(path, e))?;
    }
    let mut row = Vec::with_capacity(ds.dim() + 1);
    for i in 0..ds.len() {
        row.clear();
        row.extend(ds.sample(i).iter().map(|v| v.to_string()));
        row.push(ds.labels()[i].to_string());
        wtr.write_record(&row).map_err(|e| csv_write_err(path, e))?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

fn csv_write_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_parse() {
        let ds = read_csv("0.0,0.0,0\n1.0,1.0,1".as_bytes(), false).unwrap();
        assert_eq!((ds.len(), ds.dim(), ds.num_classes()), (2, 2, 2));
        assert_eq!(ds.sample(1), &[1.0, 1.0]);
    }

    #[test]
    fn header_is_skipped() {
        let ds = read_csv("a,b,label\n0.5,2,3\n".as_bytes(), true).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.num_classes(), 4);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(read_csv("".as_bytes(), false), Err(Error::Parse { .. })));
    }

    #[test]
    fn reports_line_numbers() {
        match read_csv("1,2,0\n1,2,3,0\n".as_bytes(), false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match read_csv("1,2,0\n1,2,0\n1,x,0\n".as_bytes(), false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(read_csv("1,2,-1\n".as_bytes(), false).is_err());
    }
}
