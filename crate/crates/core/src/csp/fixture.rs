//! Plain-text systems for test fixtures.
//!
//! ```text
//! # comments and blank lines are ignored
//! 3 3          <- rows cols
//! 1 1 0        <- one line per row of A (0/1 entries)
//! 0 1 1
//! 1 1 1
//! 1 1 1        <- the target vector N (rows entries)
//! ```

use std::fmt::Write as _;

use super::{ConstraintSystem, CspError};

impl ConstraintSystem {
    pub fn from_fixture_str(text: &str) -> Result<Self, CspError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let err = |line: usize, message: String| CspError::Fixture { line, message };
        let parse_row = |line: usize, l: &str| -> Result<Vec<i64>, CspError> {
            l.split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|e| err(line, format!("bad integer {t:?}: {e}"))))
                .collect()
        };

        let (hline, header) = lines.next().ok_or_else(|| err(0, "missing header".into()))?;
        let dims = parse_row(hline, header)?;
        let [rows, cols] = dims[..] else {
            return Err(err(hline, format!("header needs `rows cols`, got {} fields", dims.len())));
        };
        if rows < 0 || cols < 0 {
            return Err(err(hline, "dimensions must be non-negative".into()));
        }
        let (rows, cols) = (rows as usize, cols as usize);

        let mut matrix = Vec::with_capacity(rows);
        for r in 0..rows {
            let (line, l) = lines.next().ok_or_else(|| err(0, format!("missing matrix row {r}")))?;
            let values = parse_row(line, l)?;
            if values.len() != cols {
                return Err(err(line, format!("expected {cols} entries, got {}", values.len())));
            }
            let row = values
                .into_iter()
                .map(|v| match v {
                    0 | 1 => Ok(v as u8),
                    _ => Err(err(line, format!("matrix entry {v} is not 0/1"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            matrix.push(row);
        }

        let targets = if rows == 0 {
            Vec::new()
        } else {
            let (line, l) = lines.next().ok_or_else(|| err(0, "missing target line".into()))?;
            let values = parse_row(line, l)?;
            if values.len() != rows {
                return Err(err(line, format!("expected {rows} targets, got {}", values.len())));
            }
            values.into_iter().map(|v| v as i32).collect()
        };
        if let Some((line, _)) = lines.next() {
            return Err(err(line, "trailing content".into()));
        }
        if rows == 0 {
            return Ok(ConstraintSystem::unconstrained(cols));
        }
        ConstraintSystem::from_dense(&matrix, &targets)
    }

    /// Writes the live matrix and current targets in fixture form.
    pub fn to_fixture_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.num_rows(), self.num_vars());
        for row in self.dense_matrix() {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        if self.num_rows() > 0 {
            let line: Vec<String> = self.targets().iter().map(i32::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let s = ConstraintSystem::from_fixture_str(
            "# coupled rows\n3 3\n1 1 0\n0 1 1\n1 1 1\n1 1 1\n",
        )
        .unwrap();
        assert_eq!(s.dense_matrix(), vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 1, 1]]);
        assert_eq!(s.targets(), &[1, 1, 1]);
        let again = ConstraintSystem::from_fixture_str(&s.to_fixture_string()).unwrap();
        assert_eq!(again.dense_matrix(), s.dense_matrix());
    }

    #[test]
    fn reports_line_numbers() {
        let e = ConstraintSystem::from_fixture_str("2 2\n1 1\n1 2\n1 1\n").unwrap_err();
        assert_eq!(e, CspError::Fixture { line: 3, message: "matrix entry 2 is not 0/1".into() });
        let e = ConstraintSystem::from_fixture_str("1 2\n1 1\n").unwrap_err();
        assert!(matches!(e, CspError::Fixture { .. }));
        let e = ConstraintSystem::from_fixture_str("1 2\n1 1\n1\n9\n").unwrap_err();
        assert_eq!(e, CspError::Fixture { line: 4, message: "trailing content".into() });
    }

    #[test]
    fn rowless_system_keeps_its_variables() {
        let s = ConstraintSystem::from_fixture_str("0 3\n").unwrap();
        assert_eq!(s.num_vars(), 3);
        assert_eq!(s.num_rows(), 0);
    }
}
