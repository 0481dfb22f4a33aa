use crate::Format;
use commlab::Result;
use serde_json::Value;
use std::io::Write;
use std::path::Path;

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(_) | Value::Number(_) => v.to_string(),
        nested => nested.to_string(),
    }
}

fn render(records: &[Value], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = Vec::new();
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.push(b'\n');
            }
            Ok(out)
        }
        Format::Csv => {
            let mut columns: Vec<&str> = Vec::new();
            for r in records {
                for key in r.as_object().into_iter().flat_map(|o| o.keys()) {
                    if !columns.contains(&key.as_str()) {
                        columns.push(key);
                    }
                }
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| commlab::Error::Io(e.to_string());
            w.write_record(&columns).map_err(io)?;
            for r in records {
                w.write_record(columns.iter().map(|c| r.get(*c).map(cell).unwrap_or_default()))
                    .map_err(io)?;
            }
            w.into_inner().map_err(|e| commlab::Error::Io(e.to_string()))
        }
    }
}

pub fn write(records: &[Value], format: Format, out: Option<&Path>) -> Result<()> {
    let bytes = render(records, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}
