//! Readers and writers for datasets, grids, graphs and vertex lists.
//!
//! | extension | contents |
//! |-----------|----------|
//! | `.csv`    | one value per line (signal) or one image row per line |
//! | `.pgm`    | P2 or P5 graymap, maxval up to 65535 |
//! | `.t`      | `d`, shape, extents `a_1 b_1 .. a_d b_d`, values |
//! | `.grid`   | `d`, then one line of breakpoints per axis |
//! | `.pcr`    | `grid = <path>` line, then cell values |
//! | `.graph`  | `n m`, one vertex weight per line, `m` lines `i j W` |
//!
//! Blank lines and lines starting with `#` are skipped in every text format.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Signal,
    Image,
    Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Format {
    Csv,
    Pgm { binary: bool, maxval: u32 },
    Tensor,
    Pcr { grid_path: PathBuf },
}

impl Format {
    /// File extension used when writing this format.
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Pgm { .. } => "pgm",
            Format::Tensor => "t",
            Format::Pcr { .. } => "pcr",
        }
    }
}

/// Values on the cells of a grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub kind: DatasetKind,
    pub grid: Grid,
    pub values: Vec<f64>,
    pub format: Format,
}

impl Dataset {
    pub fn new(kind: DatasetKind, grid: Grid, values: Vec<f64>, format: Format) -> Result<Self> {
        crate::error::check_len("dataset values", grid.cell_count(), values.len())?;
        Ok(Self {
            kind,
            grid,
            values,
            format,
        })
    }

    /// Same grid and format, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.kind, self.grid.clone(), values, self.format.clone())
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(display(path), line, format!("`{tok}` is not a number")))
}

fn parse_usize(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.trim()
        .parse::<usize>()
        .map_err(|_| Error::parse(display(path), line, format!("`{tok}` is not a count")))
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
}

/// Guesses the format from the extension, or uses `hint` (`csv`, `pgm`,
/// `t`/`tensor`, `pcr`) when given.
pub fn load_dataset(path: &Path, hint: Option<&str>) -> Result<Dataset> {
    let ext = hint
        .map(str::to_ascii_lowercase)
        .or_else(|| {
            path.extension()
                .map(|e| e.to_string_lossy().to_ascii_lowercase())
        })
        .unwrap_or_default();
    match ext.as_str() {
        "csv" => read_csv(path),
        "pgm" => read_pgm(path),
        "t" | "tensor" => read_tensor(path),
        "pcr" => read_pcr(path),
        other => Err(Error::parse(
            display(path),
            0,
            format!("unknown dataset format `{other}`"),
        )),
    }
}

fn read_csv(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, l) in content_lines(&text) {
        let row = l
            .split(',')
            .map(|t| parse_f64(path, line, t))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    display(path),
                    line,
                    format!("{} columns, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let (h, w) = (rows.len(), rows.first().map_or(0, Vec::len));
    if h == 0 {
        return Err(Error::parse(display(path), 1, "no values"));
    }
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    if w == 1 {
        let grid = Grid::uniform(&[(0.0, h as f64)], &[h])?;
        Dataset::new(DatasetKind::Signal, grid, values, Format::Csv)
    } else {
        let grid = Grid::uniform(&[(0.0, h as f64), (0.0, w as f64)], &[h, w])?;
        Dataset::new(DatasetKind::Image, grid, values, Format::Csv)
    }
}

/// Header tokens of a netpbm file and the byte offset just past them.
fn pgm_header(path: &Path, bytes: &[u8]) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse(
                display(path),
                1,
                format!("truncated header at byte {pos}"),
            ));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from raster data
    Ok((tokens, pos + 1))
}

fn line_of(bytes: &[u8], pos: usize) -> usize {
    1 + bytes[..pos.min(bytes.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
}

fn read_pgm(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path)?;
    let (tokens, data_start) = pgm_header(path, &bytes)?;
    let binary = match tokens[0].as_str() {
        "P2" => false,
        "P5" => true,
        m => {
            return Err(Error::parse(
                display(path),
                1,
                format!("unsupported magic `{m}`"),
            ))
        }
    };
    let line = line_of(&bytes, data_start);
    let width = parse_usize(path, line, &tokens[1])?;
    let height = parse_usize(path, line, &tokens[2])?;
    let maxval = parse_usize(path, line, &tokens[3])?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::parse(
            display(path),
            line,
            format!("unsupported maxval {maxval}"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::parse(display(path), line, "empty image"));
    }
    let count = width * height;
    let mut values = Vec::with_capacity(count);
    if binary {
        let size = if maxval < 256 { 1 } else { 2 };
        let raster = bytes.get(data_start..).unwrap_or(&[]);
        if raster.len() < count * size {
            return Err(Error::parse(
                display(path),
                line,
                format!(
                    "raster ends at byte {}, expected {} bytes of pixels",
                    bytes.len(),
                    count * size
                ),
            ));
        }
        for k in 0..count {
            let v = if size == 1 {
                raster[k] as usize
            } else {
                (raster[2 * k] as usize) << 8 | raster[2 * k + 1] as usize
            };
            if v > maxval {
                let at = data_start + k * size;
                return Err(Error::parse(
                    display(path),
                    line_of(&bytes, at),
                    format!("pixel {v} exceeds maxval at byte {at}"),
                ));
            }
            values.push(v as f64);
        }
    } else {
        let text = String::from_utf8_lossy(&bytes[data_start.min(bytes.len())..]).into_owned();
        let first = line_of(&bytes, data_start);
        for (i, l) in text.lines().enumerate() {
            let l = l.split('#').next().unwrap_or("");
            for tok in l.split_whitespace() {
                let v = parse_usize(path, first + i, tok)?;
                if v > maxval {
                    return Err(Error::parse(
                        display(path),
                        first + i,
                        format!("pixel {v} exceeds maxval {maxval}"),
                    ));
                }
                values.push(v as f64);
            }
        }
        if values.len() != count {
            return Err(Error::parse(
                display(path),
                line_of(&bytes, bytes.len()),
                format!("{} pixels, expected {count}", values.len()),
            ));
        }
    }
    let grid = Grid::uniform(
        &[(0.0, height as f64), (0.0, width as f64)],
        &[height, width],
    )?;
    Dataset::new(
        DatasetKind::Image,
        grid,
        values,
        Format::Pgm {
            binary,
            maxval: maxval as u32,
        },
    )
}

fn read_tensor(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::parse(display(path), 0, format!("missing {what}")))
    };
    let (line, l) = next("dimension line")?;
    let d = parse_usize(path, line, l)?;
    if d == 0 {
        return Err(Error::parse(display(path), line, "dimension must be >= 1"));
    }
    let (line, l) = next("shape line")?;
    let shape = split_fields(l)
        .map(|t| parse_usize(path, line, t))
        .collect::<Result<Vec<_>>>()?;
    if shape.len() != d {
        return Err(Error::parse(
            display(path),
            line,
            format!("shape has {} entries, expected {d}", shape.len()),
        ));
    }
    let (line, l) = next("extent line")?;
    let ext = split_fields(l)
        .map(|t| parse_f64(path, line, t))
        .collect::<Result<Vec<_>>>()?;
    if ext.len() != 2 * d {
        return Err(Error::parse(
            display(path),
            line,
            format!("{} extents, expected {}", ext.len(), 2 * d),
        ));
    }
    let domain: Vec<(f64, f64)> = ext.chunks(2).map(|c| (c[0], c[1])).collect();
    let grid = Grid::uniform(&domain, &shape)
        .map_err(|e| Error::parse(display(path), line, e.to_string()))?;
    let mut values = Vec::with_capacity(grid.cell_count());
    let mut last = line;
    for (line, l) in lines {
        for t in split_fields(l) {
            values.push(parse_f64(path, line, t)?);
        }
        last = line;
    }
    if values.len() != grid.cell_count() {
        return Err(Error::parse(
            display(path),
            last,
            format!("{} values, expected {}", values.len(), grid.cell_count()),
        ));
    }
    Dataset::new(DatasetKind::Tensor, grid, values, Format::Tensor)
}

pub fn read_grid(path: &Path) -> Result<Grid> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let (line, l) = lines
        .next()
        .ok_or_else(|| Error::parse(display(path), 0, "missing dimension line"))?;
    let d = parse_usize(path, line, l)?;
    let mut axes = Vec::with_capacity(d);
    let mut last = line;
    for (line, l) in lines.by_ref().take(d) {
        axes.push(
            split_fields(l)
                .map(|t| parse_f64(path, line, t))
                .collect::<Result<Vec<_>>>()?,
        );
        last = line;
    }
    if axes.len() != d || d == 0 {
        return Err(Error::parse(
            display(path),
            last,
            format!("expected {d} axis lines"),
        ));
    }
    Grid::new(axes).map_err(|e| Error::parse(display(path), last, e.to_string()))
}

pub fn write_grid(grid: &Grid, path: &Path) -> Result<()> {
    let mut out = format!("{}\n", grid.dim());
    for axis in grid.axes() {
        out.push_str(&join(axis, " "));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn read_pcr(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let (line, l) = lines
        .next()
        .ok_or_else(|| Error::parse(display(path), 0, "missing grid reference"))?;
    let reference = l
        .strip_prefix("grid")
        .map(|r| r.trim_start())
        .and_then(|r| r.strip_prefix('='))
        .map(str::trim)
        .ok_or_else(|| Error::parse(display(path), line, "expected `grid = <path>`"))?;
    let grid_path = PathBuf::from(reference);
    let resolved = match path.parent() {
        Some(dir) if grid_path.is_relative() => dir.join(&grid_path),
        _ => grid_path.clone(),
    };
    let grid = read_grid(&resolved)?;
    let mut values = Vec::with_capacity(grid.cell_count());
    let mut last = line;
    for (line, l) in lines {
        for t in split_fields(l) {
            values.push(parse_f64(path, line, t)?);
        }
        last = line;
    }
    if values.len() != grid.cell_count() {
        return Err(Error::parse(
            display(path),
            last,
            format!("{} values, expected {}", values.len(), grid.cell_count()),
        ));
    }
    let kind = match grid.dim() {
        1 => DatasetKind::Signal,
        2 => DatasetKind::Image,
        _ => DatasetKind::Tensor,
    };
    Dataset::new(kind, grid, values, Format::Pcr { grid_path })
}

fn join(values: &[f64], sep: &str) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push_str(sep);
        }
        write!(s, "{v}").expect("writing to a string");
    }
    s
}

/// Writes `data` in its own format. PGM output needs `quantize`, which
/// clamps to `[0, maxval]` and rounds; without it the values are written
/// as CSV rows instead, and the returned path says which file was written.
pub fn save_dataset(data: &Dataset, path: &Path, quantize: bool) -> Result<PathBuf> {
    match &data.format {
        Format::Pgm { binary, maxval } if quantize => {
            write_pgm(data, path, *binary, *maxval)?;
            Ok(path.to_path_buf())
        }
        Format::Pgm { .. } | Format::Csv => {
            let path = path.with_extension("csv");
            write_csv(data, &path)?;
            Ok(path)
        }
        Format::Tensor => {
            let mut out = format!("{}\n", data.grid.dim());
            let shape: Vec<String> = data.grid.shape().iter().map(usize::to_string).collect();
            out.push_str(&shape.join(" "));
            out.push('\n');
            let ext: Vec<f64> = data
                .grid
                .domain()
                .iter()
                .flat_map(|&(a, b)| [a, b])
                .collect();
            out.push_str(&join(&ext, " "));
            out.push('\n');
            for v in &data.values {
                writeln!(out, "{v}").expect("writing to a string");
            }
            fs::write(path, out)?;
            Ok(path.to_path_buf())
        }
        Format::Pcr { grid_path } => {
            let grid_file = path.with_extension("grid");
            write_grid(&data.grid, &grid_file)?;
            let name = grid_file
                .file_name()
                .map(PathBuf::from)
                .unwrap_or_else(|| grid_path.clone());
            let mut out = format!("grid = {}\n", name.display());
            for v in &data.values {
                writeln!(out, "{v}").expect("writing to a string");
            }
            fs::write(path, out)?;
            Ok(path.to_path_buf())
        }
    }
}

fn write_csv(data: &Dataset, path: &Path) -> Result<()> {
    let shape = data.grid.shape();
    let width = if shape.len() == 2 { shape[1] } else { 1 };
    let mut out = String::new();
    for row in data.values.chunks(width) {
        out.push_str(&join(row, ","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_pgm(data: &Dataset, path: &Path, binary: bool, maxval: u32) -> Result<()> {
    let shape = data.grid.shape();
    if shape.len() != 2 {
        return Err(Error::Config(
            "PGM output needs a two-dimensional dataset".into(),
        ));
    }
    let (h, w) = (shape[0], shape[1]);
    let pixels: Vec<u32> = data
        .values
        .iter()
        .map(|v| v.clamp(0.0, maxval as f64).round() as u32)
        .collect();
    let mut out = format!("{}\n{w} {h}\n{maxval}\n", if binary { "P5" } else { "P2" }).into_bytes();
    if binary {
        for p in pixels {
            if maxval < 256 {
                out.push(p as u8);
            } else {
                out.extend_from_slice(&(p as u16).to_be_bytes());
            }
        }
    } else {
        for row in pixels.chunks(w) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let (line, l) = lines
        .next()
        .ok_or_else(|| Error::parse(display(path), 0, "missing `n m` header"))?;
    let head: Vec<&str> = split_fields(l).collect();
    if head.len() != 2 {
        return Err(Error::parse(display(path), line, "expected `n m`"));
    }
    let n = parse_usize(path, line, head[0])?;
    let m = parse_usize(path, line, head[1])?;
    let mut last = line;
    let mut weights = Vec::with_capacity(n);
    while weights.len() < n {
        let (line, l) = lines
            .next()
            .ok_or_else(|| Error::parse(display(path), last, "missing vertex weights"))?;
        for t in split_fields(l) {
            weights.push(parse_f64(path, line, t)?);
        }
        last = line;
    }
    if weights.len() != n {
        return Err(Error::parse(
            display(path),
            last,
            format!("{} vertex weights, expected {n}", weights.len()),
        ));
    }
    let mut edges = Vec::with_capacity(m);
    let mut edge_weights = Vec::with_capacity(m);
    for (line, l) in lines {
        let f: Vec<&str> = split_fields(l).collect();
        if f.len() != 3 {
            return Err(Error::parse(display(path), line, "expected `i j W`"));
        }
        edges.push((
            parse_usize(path, line, f[0])?,
            parse_usize(path, line, f[1])?,
        ));
        edge_weights.push(parse_f64(path, line, f[2])?);
        last = line;
    }
    if edges.len() != m {
        return Err(Error::parse(
            display(path),
            last,
            format!("{} edges, expected {m}", edges.len()),
        ));
    }
    WeightedGraph::new(weights, edges, edge_weights)
        .map_err(|e| Error::parse(display(path), last, e.to_string()))
}

pub fn write_graph(g: &WeightedGraph, path: &Path) -> Result<()> {
    let mut out = format!("{} {}\n", g.vertex_count(), g.edge_count());
    for w in g.vertex_weights() {
        writeln!(out, "{w}").expect("writing to a string");
    }
    for (&(i, j), w) in g.edges().iter().zip(g.edge_weights()) {
        writeln!(out, "{i} {j} {w}").expect("writing to a string");
    }
    fs::write(path, out)?;
    Ok(())
}

/// One vertex per line, coordinates separated by commas.
pub fn read_vertices(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (line, l) in content_lines(&text) {
        let v = l
            .split(',')
            .map(|t| parse_f64(path, line, t))
            .collect::<Result<Vec<_>>>()?;
        if out.first().is_some_and(|f| f.len() != v.len()) {
            return Err(Error::parse(
                display(path),
                line,
                "vertices differ in dimension",
            ));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::parse(display(path), 1, "no vertices"));
    }
    Ok(out)
}
