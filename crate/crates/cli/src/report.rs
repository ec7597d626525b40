//! Delimited report files.
//!
//! ```text
//! # iob-report;name=decisions;version=1
//! hour_start,predicted,...
//! 2008-12-13T21:00:00,83.1,...
//! # aggregate:
//! # hours=200
//! ```

use std::fmt::Write as _;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub aggregate: Vec<(String, String)>,
}

impl Report {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Report {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Report::default()
        }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.rows.push(fields);
    }

    pub fn aggregate(&mut self, key: &str, value: impl ToString) {
        self.aggregate.push((key.to_string(), value.to_string()));
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# iob-report;name={};version={REPORT_VERSION}", self.name);
        push_record(&mut out, &self.columns);
        for row in &self.rows {
            push_record(&mut out, row);
        }
        out.push_str("# aggregate:\n");
        for (k, v) in &self.aggregate {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn aggregate_value(&self, key: &str) -> Option<&str> {
        self.aggregate.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn parse(text: &str) -> Result<Report, String> {
        let mut lines = text.lines();
        let meta = lines.next().ok_or("empty report")?;
        let name = meta
            .strip_prefix("# iob-report;name=")
            .and_then(|rest| rest.split(';').next())
            .ok_or_else(|| format!("bad report header: {meta}"))?;
        let mut report = Report {
            name: name.to_string(),
            columns: split_record(lines.next().ok_or("missing column row")?)?,
            ..Report::default()
        };
        let mut in_aggregate = false;
        for line in lines {
            if line == "# aggregate:" {
                in_aggregate = true;
            } else if in_aggregate {
                let (k, v) = line
                    .strip_prefix("# ")
                    .and_then(|l| l.split_once('='))
                    .ok_or_else(|| format!("bad aggregate line: {line}"))?;
                report.aggregate.push((k.to_string(), v.to_string()));
            } else {
                let row = split_record(line)?;
                if row.len() != report.columns.len() {
                    return Err(format!("row has {} fields, expected {}", row.len(), report.columns.len()));
                }
                report.rows.push(row);
            }
        }
        if !in_aggregate {
            return Err("missing aggregate block".into());
        }
        Ok(report)
    }
}

fn push_record(out: &mut String, fields: &[String]) {
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if f.contains([',', '"', '\n']) {
            out.push('"');
            out.push_str(&f.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(f);
        }
    }
    out.push('\n');
}

fn split_record(line: &str) -> Result<Vec<String>, String> {
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match (quoted, c) {
            (true, '"') if chars.peek() == Some(&'"') => {
                chars.next();
                field.push('"');
            }
            (true, '"') => quoted = false,
            (true, c) => field.push(c),
            (false, '"') if field.is_empty() => quoted = true,
            (false, ',') => fields.push(std::mem::take(&mut field)),
            (false, c) => field.push(c),
        }
    }
    if quoted {
        return Err(format!("unterminated quote: {line}"));
    }
    fields.push(field);
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let mut r = Report::new("demo", &["a", "sentence"]);
        r.row(vec!["1".into(), "kitchen, laundry \"and\" more".into()]);
        r.row(vec!["2".into(), String::new()]);
        r.aggregate("total", 3);
        let text = r.render();
        assert!(text.starts_with("# iob-report;name=demo;version=1\na,sentence\n"));
        assert!(text.ends_with("# aggregate:\n# total=3\n"));
        assert_eq!(Report::parse(&text).unwrap(), r);
    }

    #[test]
    fn empty_report_still_has_aggregate_block() {
        let r = Report::new("empty", &["x"]);
        let parsed = Report::parse(&r.render()).unwrap();
        assert!(parsed.rows.is_empty());
        assert!(parsed.aggregate.is_empty());
    }
}
