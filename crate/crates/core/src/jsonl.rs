//! Line-delimited JSON helpers shared by every file format.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::corpus::LoadError;

/// Iterates the non-blank lines of a JSONL file as `(line_number, record)`.
pub fn read<T: DeserializeOwned>(
    path: &Path,
) -> Result<impl Iterator<Item = Result<(usize, T), LoadError>>, LoadError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| LoadError::Io {
        path: display.clone(),
        source,
    })?;
    let reader = BufReader::new(file);
    Ok(reader.lines().enumerate().filter_map(move |(i, line)| {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(source) => {
                return Some(Err(LoadError::Io {
                    path: display.clone(),
                    source,
                }))
            }
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(
            serde_json::from_str::<T>(&line)
                .map(|rec| (line_no, rec))
                .map_err(|e| LoadError::Malformed {
                    path: display.clone(),
                    line: line_no,
                    message: e.to_string(),
                }),
        )
    }))
}

/// Writes one compact JSON object per line, LF-terminated.
pub fn write<'a, T, I>(path: &Path, records: I) -> io::Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut out = BufWriter::new(File::create(path)?);
    write_to(&mut out, records)?;
    out.flush()
}

pub fn write_to<'a, T, I, W>(out: &mut W, records: I) -> io::Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
    W: Write,
{
    for rec in records {
        serde_json::to_writer(&mut *out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
