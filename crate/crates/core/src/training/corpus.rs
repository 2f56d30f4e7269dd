//! Plain-text corpora: one sample per line, the target first and then the
//! inputs, separated by single spaces. Lines starting with `#` are
//! comments. Numbers are written in Rust's shortest round-trip form, so a
//! written corpus reads back bit-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::TrainingError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn push(&mut self, input: Vec<f64>, target: f64) {
        self.inputs.push(input);
        self.targets.push(target);
    }

    pub fn to_text(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            let _ = write!(out, "{y}");
            for v in x {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TrainingError> {
        let mut corpus = Self::default();
        let mut width = None;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| TrainingError::Corpus { line: k + 1, message };
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number {t:?}"))))
                .collect::<Result<_, _>>()?;
            if values.len() < 2 {
                return Err(err("need a target and at least one input".into()));
            }
            match width {
                None => width = Some(values.len()),
                Some(w) if w != values.len() => return Err(err(format!("expected {w} fields, found {}", values.len()))),
                _ => {}
            }
            corpus.push(values[1..].to_vec(), values[0]);
        }
        Ok(corpus)
    }
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &Corpus, header: &str) -> Result<(), TrainingError> {
    Ok(fs::write(path, corpus.to_text(header))?)
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Corpus, TrainingError> {
    Corpus::from_text(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = Corpus::default();
        c.push(vec![0.1, -3.0, 1e-17], 1.0);
        c.push(vec![2.0 / 3.0, 0.0, 5.5], 0.0);
        let text = c.to_text("label then features");
        assert!(text.starts_with("# label then features\n1 0.1 -3 0.00000000000000001\n"));
        assert_eq!(Corpus::from_text(&text).unwrap(), c);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        match Corpus::from_text("1 2 3\n# c\n0 1\n") {
            Err(TrainingError::Corpus { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Corpus::from_text("1 x\n").is_err());
    }
}
