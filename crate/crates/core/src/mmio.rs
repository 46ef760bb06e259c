//! MatrixMarket coordinate reader and convergence-history CSV files.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::csr::{CsrMatrix, TripletBuilder};
use crate::error::{Error, Result};
use crate::krylov::ConvergenceHistory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MmField {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MmSymmetry {
    General,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatrixMarketHeader {
    pub field: MmField,
    pub symmetry: MmSymmetry,
}

impl MatrixMarketHeader {
    fn parse(line: &str, path: &Path) -> Result<Self> {
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg,
        };
        let mut tok = line.split_whitespace();
        if tok.next() != Some("%%MatrixMarket") {
            return Err(err("missing %%MatrixMarket banner".into()));
        }
        let rest: Vec<String> = tok.map(str::to_ascii_lowercase).collect();
        let [object, format, field, symmetry] = rest.as_slice() else {
            return Err(err(format!("banner needs 4 fields after %%MatrixMarket, got {}", rest.len())));
        };
        if object != "matrix" {
            return Err(err(format!("unsupported object `{object}`")));
        }
        if format != "coordinate" {
            return Err(err(format!("unsupported format `{format}` (only coordinate)")));
        }
        let field = match field.as_str() {
            "real" | "double" => MmField::Real,
            "integer" => MmField::Integer,
            "pattern" => MmField::Pattern,
            other => return Err(err(format!("unsupported field `{other}`"))),
        };
        let symmetry = match symmetry.as_str() {
            "general" => MmSymmetry::General,
            "symmetric" => MmSymmetry::Symmetric,
            other => return Err(err(format!("unsupported symmetry `{other}`"))),
        };
        Ok(Self { field, symmetry })
    }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(BufReader::new(file), path)
}

/// Parses coordinate MatrixMarket text. `path` is only used in error messages.
///
/// Indices are converted to 0-based, symmetric storage is expanded (diagonal
/// entries are not duplicated), duplicate coordinates are summed and pattern
/// entries get the value 1.
pub fn parse_matrix_market<R: BufRead>(reader: R, path: &Path) -> Result<CsrMatrix<f64>> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));
    let header = match lines.next() {
        Some((_, line)) => MatrixMarketHeader::parse(&line.map_err(|e| Error::io(path, e))?, path)?,
        None => return Err(perr(1, "empty file".into())),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut builder: Option<TripletBuilder<f64>> = None;
    let mut seen = 0usize;
    let mut last_line = 1;
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        last_line = lineno;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let Some((nrows, ncols, nnz)) = size else {
            let [r, c, z] = fields.as_slice() else {
                return Err(perr(lineno, format!("size line needs 3 integers, got `{t}`")));
            };
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| perr(lineno, format!("bad integer `{s}` in size line")))
            };
            let dims = (parse(r)?, parse(c)?, parse(z)?);
            if header.symmetry == MmSymmetry::Symmetric && dims.0 != dims.1 {
                return Err(perr(lineno, "symmetric matrix must be square".into()));
            }
            size = Some(dims);
            let cap = if header.symmetry == MmSymmetry::Symmetric { 2 * dims.2 } else { dims.2 };
            builder = Some(TripletBuilder::with_capacity(dims.0, dims.1, cap));
            continue;
        };
        if seen == nnz {
            return Err(perr(lineno, format!("more than the declared {nnz} entries")));
        }
        let want = if header.field == MmField::Pattern { 2 } else { 3 };
        if fields.len() < want {
            return Err(perr(lineno, format!("expected {want} fields, got `{t}`")));
        }
        let index = |s: &str, bound: usize, what: &str| -> Result<usize> {
            let k = s
                .parse::<usize>()
                .map_err(|_| perr(lineno, format!("bad {what} index `{s}`")))?;
            if k == 0 || k > bound {
                return Err(perr(lineno, format!("{what} index {k} outside 1..={bound}")));
            }
            Ok(k - 1)
        };
        let i = index(fields[0], nrows, "row")?;
        let j = index(fields[1], ncols, "column")?;
        let v = match header.field {
            MmField::Pattern => 1.0,
            _ => fields[2]
                .parse::<f64>()
                .map_err(|_| perr(lineno, format!("bad value `{}`", fields[2])))?,
        };
        let b = builder.as_mut().unwrap();
        b.push(i, j, v)?;
        if header.symmetry == MmSymmetry::Symmetric && i != j {
            b.push(j, i, v)?;
        }
        seen += 1;
    }
    let Some((_, _, nnz)) = size else {
        return Err(perr(last_line, "missing size line".into()));
    };
    if seen != nnz {
        return Err(perr(
            last_line,
            format!("end of file after {seen} of {nnz} declared entries"),
        ));
    }
    Ok(builder.unwrap().build())
}

/// Identifies a run in the history file's comment line.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryMeta {
    pub solver: String,
    pub precond: String,
    pub n: usize,
    pub tol: f64,
}

impl fmt::Display for HistoryMeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "# solver={},precond={},n={},tol={:e}",
            self.solver, self.precond, self.n, self.tol
        )
    }
}

/// Writes `# solver=...` then `iter,rel_res` then one row per entry, values
/// with 17 significant digits.
pub fn write_history_csv(
    history: &ConvergenceHistory,
    meta: &HistoryMeta,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_history(&mut w, history, meta).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_history<W: Write>(
    w: &mut W,
    history: &ConvergenceHistory,
    meta: &HistoryMeta,
) -> std::io::Result<()> {
    writeln!(w, "{meta}")?;
    writeln!(w, "iter,rel_res")?;
    for (k, r) in history.rel_res.iter().enumerate() {
        writeln!(w, "{k},{r:.16e}")?;
    }
    Ok(())
}

/// Reads the `(iter, rel_res)` rows back, skipping the comment and header.
pub fn read_history_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut rows = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path, e))?;
        if line.starts_with('#') || line == "iter,rel_res" || line.is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            path: path.clone(),
            line: k + 1,
            msg: format!("bad history row `{line}`"),
        };
        let (it, r) = line.split_once(',').ok_or_else(bad)?;
        rows.push((it.parse().map_err(|_| bad())?, r.parse().map_err(|_| bad())?));
    }
    Ok(rows)
}
