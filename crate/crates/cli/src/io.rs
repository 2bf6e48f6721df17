use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use signrange::{Complex2, IndexSet, Matrix2, Rect, SequenceSpec, SequenceWindow};

pub const TOOL: &str = concat!("signrange ", env!("CARGO_PKG_VERSION"));

/// A failed run; both kinds exit with status 2.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    pub fn invalid(msg: impl std::fmt::Display) -> Self {
        CliError::Invalid(msg.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::invalid(e)
            }
        }
    )*};
}

invalid_from!(
    signrange::SeriesError,
    signrange::OracleError,
    signrange::SelectionError,
    signrange::RatioError,
    signrange::MoranError,
    signrange::DensityError
);

/// Provenance stamped into every artifact.
pub struct Meta {
    pub command: String,
    pub config: Value,
}

impl Meta {
    pub fn new(command: &str, config: Value) -> Self {
        Meta {
            command: command.to_string(),
            config,
        }
    }

    fn value(&self) -> Value {
        json!({ "tool": TOOL, "command": self.command, "config": self.config })
    }

    fn comment_lines(&self) -> String {
        format!("# {TOOL} {}\n# config {}\n", self.command, self.config)
    }
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

pub fn write_json<T: Serialize>(path: Option<&Path>, meta: &Meta, payload: &T) -> Result<(), CliError> {
    let body = serde_json::to_value(payload).map_err(|e| CliError::Io(e.to_string()))?;
    let mut doc = Map::new();
    doc.insert("meta".into(), meta.value());
    match body {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    emit(path, &text)
}

pub fn write_csv(path: Option<&Path>, meta: &Meta, header: &str, rows: impl Iterator<Item = String>) -> Result<(), CliError> {
    let mut text = meta.comment_lines();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    emit(path, &text)
}

/// Plain graymap (`P2`) of hit counts, row 0 at the top of the window.
pub fn write_pgm(path: Option<&Path>, meta: &Meta, side: usize, counts: &[u64]) -> Result<(), CliError> {
    let max = counts.iter().copied().max().unwrap_or(0).max(1);
    let mut text = String::from("P2\n");
    text.push_str(&meta.comment_lines());
    let _ = writeln!(text, "{side} {side}\n255");
    for row in counts.chunks(side).rev() {
        let line: Vec<String> = row
            .iter()
            .map(|&c| if c == 0 { 0 } else { 1 + c * 254 / max }.to_string())
            .collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    emit(path, &text)
}

/// Bins points into a `side × side` raster over `rect`; row 0 is the bottom.
pub fn raster(points: &[Complex2], rect: &Rect, side: usize) -> Vec<u64> {
    let mut counts = vec![0u64; side * side];
    let bin = |v: f64, lo: f64, width: f64| -> Option<usize> {
        if width == 0.0 {
            return Some(side / 2);
        }
        let t = (v - lo) / width;
        (0.0..=1.0).contains(&t).then(|| ((t * side as f64) as usize).min(side - 1))
    };
    for p in points {
        if let (Some(x), Some(y)) = (bin(p.re, rect.lo.re, rect.width()), bin(p.im, rect.lo.im, rect.height())) {
            counts[y * side + x] += 1;
        }
    }
    counts
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

/// Reads a `seq gen` artifact (explicit terms) or a family record.
pub fn load_window(path: &Path, n: Option<usize>) -> Result<SequenceWindow, CliError> {
    let value = read_json(path)?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::invalid(format!("{}: expected a JSON object", path.display())))?;
    let spec: SequenceSpec = if obj.contains_key("family") {
        let mut record = obj.clone();
        record.remove("meta");
        serde_json::from_value(Value::Object(record)).map_err(CliError::invalid)?
    } else {
        let terms = obj
            .get("terms")
            .ok_or_else(|| CliError::invalid(format!("{}: no terms or family", path.display())))?;
        SequenceSpec::explicit(serde_json::from_value(terms.clone()).map_err(CliError::invalid)?)?
    };
    Ok(match n {
        Some(n) => spec.window(n)?,
        None => spec
            .full_window()
            .map_err(|_| CliError::invalid("sequence has no length limit; pass --n"))?,
    })
}

pub fn parse_complex(s: &str) -> Result<Complex2, CliError> {
    s.parse().map_err(|e| CliError::invalid(format!("complex literal {s:?}: {e}")))
}

fn parse_floats(s: &str, count: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if v.len() == count && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::invalid(format!("{what} needs {count} comma-separated numbers, got {s:?}"))),
    }
}

pub fn parse_rect(s: &str) -> Result<Rect, CliError> {
    let v = parse_floats(s, 4, "rectangle")?;
    Rect::new(Complex2::new(v[0], v[1]), Complex2::new(v[2], v[3])).map_err(CliError::invalid)
}

pub fn parse_matrix(s: &str) -> Result<Matrix2, CliError> {
    let v = parse_floats(s, 4, "matrix")?;
    Ok(Matrix2::new(v[0], v[1], v[2], v[3]))
}

pub fn parse_set(s: &str) -> Result<IndexSet, CliError> {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let int = |p: &str| p.trim().parse::<u64>().map_err(|_| CliError::invalid(format!("index set {s:?}")));
    Ok(match kind {
        "empty" => IndexSet::empty(),
        "arith" => {
            let (q, j) = rest.split_once(':').unwrap_or((rest, "0"));
            IndexSet::arithmetic(int(q)?, int(j)?)?
        }
        "explicit" => IndexSet::explicit(rest.split(',').map(int).collect::<Result<_, _>>()?)?,
        "squares" => {
            let limit = int(rest)?;
            IndexSet::explicit((1..).map(|k: u64| k * k).take_while(|&v| v <= limit).collect())?
        }
        _ => return Err(CliError::invalid(format!("unknown index set kind {kind:?}"))),
    })
}

/// Bounding box of `points`, padded to a non-degenerate square.
pub fn bounding_square(points: &[Complex2]) -> Rect {
    let (mut lo, mut hi) = (Complex2::new(f64::INFINITY, f64::INFINITY), Complex2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in points {
        lo = Complex2::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex2::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    if points.is_empty() {
        return Rect::square(Complex2::ZERO, 1.0).expect("unit square");
    }
    let center = Complex2::new(0.5 * (lo.re + hi.re), 0.5 * (lo.im + hi.im));
    let half = (0.5 * (hi.re - lo.re)).max(0.5 * (hi.im - lo.im)).max(1e-12);
    Rect::square(center, half * (1.0 + 1e-9)).expect("finite box")
}
