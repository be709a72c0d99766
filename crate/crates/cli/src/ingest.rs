use std::path::Path;

use bimodal_skew::Error;

/// Reads the first numeric column of a CSV file.
///
/// A leading row whose fields are all non-numeric is taken as a header. The
/// column is fixed by the first data row; any later row whose field in that
/// column fails to parse is reported by line number and the whole read fails.
pub fn read_column(path: &Path) -> Result<Vec<f64>, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?;

    let mut column: Option<usize> = None;
    let mut values = Vec::new();
    let mut bad_lines = Vec::new();
    let mut first = true;

    for record in reader.records() {
        let record = record.map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let col = match column {
            Some(c) => c,
            None => match record.iter().position(|f| parse(f).is_some()) {
                Some(c) => {
                    column = Some(c);
                    c
                }
                None if first => {
                    first = false;
                    continue;
                }
                None => {
                    bad_lines.push(line);
                    continue;
                }
            },
        };
        first = false;
        match record.get(col).and_then(parse) {
            Some(v) => values.push(v),
            None => bad_lines.push(line),
        }
    }

    if !bad_lines.is_empty() {
        let shown: Vec<String> = bad_lines.iter().take(20).map(u64::to_string).collect();
        let more = if bad_lines.len() > 20 {
            format!(" and {} more", bad_lines.len() - 20)
        } else {
            String::new()
        };
        return Err(Error::Ingestion(format!(
            "{}: non-numeric value on line(s) {}{more}",
            path.display(),
            shown.join(", ")
        )));
    }
    if values.is_empty() {
        return Err(Error::Ingestion(format!("{}: no numeric data", path.display())));
    }
    Ok(values)
}

fn parse(field: &str) -> Option<f64> {
    field.parse::<f64>().ok().filter(|v| v.is_finite())
}
