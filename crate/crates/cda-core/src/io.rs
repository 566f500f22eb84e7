//! On-disk formats: model files, array CSV, outcome CSV.
//!
//! Arrays are stored human-auditably: the first line holds the parameter
//! names, every following line one row of value names. Outcomes pair a row
//! index with PASS or FAIL.

use std::path::Path;

use crate::cca::TestArray;
use crate::localize::{Outcome, RowOutcome};
use crate::model::{parse_model, validate_model, SutModel, TestCase};
use crate::{Error, Result};

/// Parses and validates a model file.
pub fn load_model(path: &Path) -> Result<SutModel> {
    let text = std::fs::read_to_string(path)?;
    let m = parse_model(&text)?;
    validate_model(&m)?;
    Ok(m)
}

/// Renders an array as CSV with symbolic value names.
pub fn array_to_csv(m: &SutModel, a: &TestArray) -> String {
    let mut out = String::new();
    out.push_str(
        &m.parameters
            .iter()
            .map(|p| p.name.as_str())
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for row in a.rows() {
        let line = row
            .values
            .iter()
            .enumerate()
            .map(|(p, &v)| m.value_name(p, v))
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_array(path: &Path, m: &SutModel, a: &TestArray) -> Result<()> {
    std::fs::write(path, array_to_csv(m, a))?;
    Ok(())
}

/// Reads an array CSV back against its model; the header must name the
/// model's parameters in order, values resolve by name, and every row must
/// be valid.
pub fn array_from_csv(m: &SutModel, text: &str) -> Result<TestArray> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::Format("empty array file".into()));
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let expected: Vec<&str> = m.parameters.iter().map(|p| p.name.as_str()).collect();
    if names != expected {
        return Err(Error::Format(format!(
            "header {names:?} does not match the model parameters {expected:?}"
        )));
    }
    let mut rows = Vec::new();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != m.k() {
            return Err(Error::Format(format!(
                "line {}: expected {} cells, found {}",
                line_no + 1,
                m.k(),
                cells.len()
            )));
        }
        let mut values = Vec::with_capacity(m.k());
        for (p, cell) in cells.iter().enumerate() {
            let Some(v) = m.value_index(p, cell) else {
                return Err(Error::Format(format!(
                    "line {}: unknown value `{}` for parameter `{}`",
                    line_no + 1,
                    cell,
                    m.parameters[p].name
                )));
            };
            values.push(v);
        }
        rows.push(TestCase::new(values));
    }
    TestArray::new(m, rows)
}

pub fn read_array(path: &Path, m: &SutModel) -> Result<TestArray> {
    let text = std::fs::read_to_string(path)?;
    array_from_csv(m, &text)
}

/// Renders an outcome as `row,PASS|FAIL` lines with a header.
pub fn outcome_to_csv(outcome: &Outcome) -> String {
    let mut out = String::from("row,outcome\n");
    for (i, o) in outcome.0.iter().enumerate() {
        let word = match o {
            RowOutcome::Pass => "PASS",
            RowOutcome::Fail => "FAIL",
        };
        out.push_str(&format!("{i},{word}\n"));
    }
    out
}

/// Parses an outcome CSV for an array of `rows` rows. Every row index must
/// appear exactly once.
pub fn outcome_from_csv(text: &str, rows: usize) -> Result<Outcome> {
    let mut seen = vec![false; rows];
    let mut verdicts = vec![RowOutcome::Pass; rows];
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("row") {
            continue;
        }
        let mut parts = trimmed.split(',');
        let (Some(idx), Some(word)) = (parts.next(), parts.next()) else {
            return Err(Error::Format(format!(
                "line {}: expected `row,outcome`",
                line_no + 1
            )));
        };
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad row index", line_no + 1)))?;
        if idx >= rows {
            return Err(Error::Format(format!(
                "line {}: row {idx} out of range (array has {rows} rows)",
                line_no + 1
            )));
        }
        if seen[idx] {
            return Err(Error::Format(format!(
                "line {}: duplicate row {idx}",
                line_no + 1
            )));
        }
        seen[idx] = true;
        verdicts[idx] = match word.trim() {
            "PASS" | "pass" => RowOutcome::Pass,
            "FAIL" | "fail" => RowOutcome::Fail,
            other => {
                return Err(Error::Format(format!(
                    "line {}: expected PASS or FAIL, found `{other}`",
                    line_no + 1
                )))
            }
        };
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Format(format!("row {missing} has no outcome")));
    }
    Ok(Outcome(verdicts))
}

pub fn read_outcome(path: &Path, rows: usize) -> Result<Outcome> {
    let text = std::fs::read_to_string(path)?;
    outcome_from_csv(&text, rows)
}

/// Parses interactions given as `param=value` pairs joined by `,`, with
/// multiple interactions separated by `;`:
/// `price=usd50,address=domestic;payment=gift_card`.
pub fn parse_interaction_list(
    m: &SutModel,
    text: &str,
) -> Result<crate::interactions::InteractionSet> {
    let mut out = crate::interactions::InteractionSet::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let mut pairs = Vec::new();
        for atom in part.split(',') {
            let Some((pname, vname)) = atom.split_once('=') else {
                return Err(Error::Format(format!(
                    "expected `param=value`, found `{atom}`"
                )));
            };
            let (pname, vname) = (pname.trim(), vname.trim());
            let Some(p) = m.param_index(pname) else {
                return Err(Error::Format(format!("unknown parameter `{pname}`")));
            };
            let Some(v) = m.value_index(p, vname) else {
                return Err(Error::Format(format!(
                    "unknown value `{vname}` for parameter `{pname}`"
                )));
            };
            pairs.push((p, v));
        }
        out.insert(crate::interactions::Interaction::new(pairs)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localize::run_tests;

    fn shopping() -> SutModel {
        parse_model(include_str!("../../../fixtures/shopping.sut")).unwrap()
    }

    #[test]
    fn array_csv_round_trip() {
        let m = shopping();
        let a = crate::cca::generate_cca(&m, 2, 0).unwrap();
        let csv = array_to_csv(&m, &a);
        let back = array_from_csv(&m, &csv).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn fixture_array_loads() {
        let m = shopping();
        let a = array_from_csv(&m, include_str!("../../../fixtures/shopping_12cda.csv")).unwrap();
        assert_eq!(a.len(), 24);
        assert_eq!(a.rows()[2].values, vec![0, 0, 0, 3]);
    }

    #[test]
    fn invalid_rows_are_rejected_on_read() {
        let m = shopping();
        let text = "price,address,method,payment\nusd50,international,same_day,visa\n";
        assert!(matches!(
            array_from_csv(&m, text),
            Err(Error::InvalidRow { row: 0 })
        ));
    }

    #[test]
    fn unknown_value_is_reported_with_line() {
        let m = shopping();
        let text = "price,address,method,payment\nusd50,domestic,same_day,euros\n";
        let err = array_from_csv(&m, text).unwrap_err();
        assert!(err.to_string().contains("euros"), "{err}");
    }

    #[test]
    fn outcome_round_trip() {
        let m = shopping();
        let a = array_from_csv(&m, include_str!("../../../fixtures/shopping_2cca.csv")).unwrap();
        let faulty = parse_interaction_list(&m, "price=usd50,address=domestic").unwrap();
        let outcome = run_tests(&a, &faulty);
        let csv = outcome_to_csv(&outcome);
        let back = outcome_from_csv(&csv, a.len()).unwrap();
        assert_eq!(outcome, back);
    }

    #[test]
    fn outcome_rejects_missing_rows() {
        assert!(outcome_from_csv("row,outcome\n0,PASS\n", 2).is_err());
    }

    #[test]
    fn interaction_list_parses_multiple_sets() {
        let m = shopping();
        let set = parse_interaction_list(
            &m,
            "price=usd50,method=same_day; price=usd50,payment=mastercard",
        )
        .unwrap();
        assert_eq!(set.len(), 2);
    }
}
