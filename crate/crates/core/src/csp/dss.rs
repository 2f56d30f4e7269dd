use super::{ConstraintSystem, CspError};

/// Upper bound on full passes over the rows.
pub const DSS_MAX_PASSES: usize = 10;

/// Variables fixed by the row rules, as `(variable index, is_mine)` in the
/// order they were found.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeterminedList {
    pub entries: Vec<(usize, bool)>,
}

impl DeterminedList {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn safe(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().filter(|e| !e.1).map(|e| e.0)
    }

    pub fn mines(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().filter(|e| e.1).map(|e| e.0)
    }
}

/// Deterministic solution search.
///
/// Repeats two row rules until a pass changes nothing (at most
/// [`DSS_MAX_PASSES`] passes): a row whose target is 0 makes all of its
/// variables safe, and a row whose target equals its unassigned-variable
/// count makes all of them mines. Fixed variables are reduced into `system`
/// as they are found. Sound but incomplete: everything returned is a
/// backbone variable of a satisfiable system, but not every backbone is found.
pub fn dss(system: &mut ConstraintSystem) -> Result<DeterminedList, CspError> {
    let mut determined = DeterminedList::default();
    let mut row_vars = Vec::new();
    for _ in 0..DSS_MAX_PASSES {
        let mut fired = false;
        for i in 0..system.num_rows() {
            if !system.row_ok(i) {
                return Err(CspError::Contradiction { cell: None });
            }
            let live = system.row_live(i);
            if live == 0 {
                continue;
            }
            let target = system.target(i) as usize;
            let value = if target == 0 {
                false
            } else if target == live {
                true
            } else {
                continue;
            };
            row_vars.clear();
            row_vars.extend(system.row_vars(i));
            for &j in &row_vars {
                system.reduce(j, value);
                determined.entries.push((j, value));
            }
            fired = true;
        }
        if !fired {
            break;
        }
    }
    if !system.feasible() {
        return Err(CspError::Contradiction { cell: None });
    }
    Ok(determined)
}
