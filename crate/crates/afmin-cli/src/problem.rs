//! Plain-text problem files.
//!
//! A file is a key-value header followed by three numeric sections:
//!
//! ```text
//! # comments and blank lines are ignored
//! family smart
//! rows 2
//! cols 1
//! seed 42          # optional: gamma, max_iters, f_tol, step_tol, seed
//! matrix
//! 0.5
//! 0.5
//! data
//! 1 3
//! start
//! 1
//! ```
//!
//! `matrix` is followed by `rows` lines of `cols` whitespace-separated
//! numbers; `data` by one line of `rows` numbers; `start` by one line of
//! `cols` numbers. `family`, `rows` and `cols` must appear before the
//! sections. Parse errors carry the 1-based line number.

use std::fmt;

use afmin::framework::StoppingRule;
use afmin::model::{Family, NonnegMatrix, ProblemInstance, ProblemMatrix, RealMatrix};

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub family: Family,
    pub rows: usize,
    pub cols: usize,
    pub gamma: Option<f64>,
    pub max_iters: Option<usize>,
    pub f_tol: Option<f64>,
    pub step_tol: Option<f64>,
    pub seed: Option<u64>,
    pub matrix: Vec<f64>,
    pub data: Vec<f64>,
    pub start: Vec<f64>,
}

fn parse_numbers(
    line_no: usize,
    line: &str,
    want: usize,
    what: &str,
) -> Result<Vec<f64>, ParseError> {
    let vals: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
    let vals = vals.map_err(|e| err(line_no, format!("bad number in {what}: {e}")))?;
    if vals.len() != want {
        return Err(err(
            line_no,
            format!("{what}: expected {want} values, got {}", vals.len()),
        ));
    }
    Ok(vals)
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut family = None;
        let mut rows = None;
        let mut cols = None;
        let mut gamma = None;
        let mut max_iters = None;
        let mut f_tol = None;
        let mut step_tol = None;
        let mut seed = None;
        let mut matrix: Option<Vec<f64>> = None;
        let mut data: Option<Vec<f64>> = None;
        let mut start: Option<Vec<f64>> = None;

        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        while let Some((line_no, line)) = lines.next() {
            let mut parts = line.splitn(2, char::is_whitespace);
            let key = parts.next().unwrap();
            let value = parts.next().map(str::trim).unwrap_or("");
            match key {
                "family" => {
                    family = Some(Family::parse(value).map_err(|e| err(line_no, e.to_string()))?);
                }
                "rows" | "cols" | "max_iters" | "seed" => {
                    let v: u64 = value
                        .parse()
                        .map_err(|e| err(line_no, format!("bad {key}: {e}")))?;
                    match key {
                        "rows" => rows = Some(v as usize),
                        "cols" => cols = Some(v as usize),
                        "max_iters" => max_iters = Some(v as usize),
                        _ => seed = Some(v),
                    }
                }
                "gamma" | "f_tol" | "step_tol" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|e| err(line_no, format!("bad {key}: {e}")))?;
                    match key {
                        "gamma" => gamma = Some(v),
                        "f_tol" => f_tol = Some(v),
                        _ => step_tol = Some(v),
                    }
                }
                "matrix" => {
                    let (r, c) = match (rows, cols) {
                        (Some(r), Some(c)) => (r, c),
                        _ => return Err(err(line_no, "matrix section before rows/cols")),
                    };
                    let mut entries = Vec::with_capacity(r * c);
                    for row_idx in 0..r {
                        let (ln, l) = lines.next().ok_or_else(|| {
                            err(
                                line_no,
                                format!("matrix: missing row {} of {r}", row_idx + 1),
                            )
                        })?;
                        entries.extend(parse_numbers(ln, l, c, "matrix row")?);
                    }
                    matrix = Some(entries);
                }
                "data" => {
                    let r = rows.ok_or_else(|| err(line_no, "data section before rows"))?;
                    let (ln, l) = lines
                        .next()
                        .ok_or_else(|| err(line_no, "data: missing value line"))?;
                    data = Some(parse_numbers(ln, l, r, "data")?);
                }
                "start" => {
                    let c = cols.ok_or_else(|| err(line_no, "start section before cols"))?;
                    let (ln, l) = lines
                        .next()
                        .ok_or_else(|| err(line_no, "start: missing value line"))?;
                    start = Some(parse_numbers(ln, l, c, "start")?);
                }
                other => return Err(err(line_no, format!("unknown key `{other}`"))),
            }
        }

        Ok(ProblemFile {
            family: family.ok_or_else(|| err(0, "missing `family`"))?,
            rows: rows.ok_or_else(|| err(0, "missing `rows`"))?,
            cols: cols.ok_or_else(|| err(0, "missing `cols`"))?,
            gamma,
            max_iters,
            f_tol,
            step_tol,
            seed,
            matrix: matrix.ok_or_else(|| err(0, "missing `matrix` section"))?,
            data: data.ok_or_else(|| err(0, "missing `data` section"))?,
            start: start.ok_or_else(|| err(0, "missing `start` section"))?,
        })
    }

    pub fn to_instance(&self) -> afmin::Result<ProblemInstance> {
        let matrix = if self.family.is_kl_family() {
            ProblemMatrix::Nonneg(NonnegMatrix::new(
                self.rows,
                self.cols,
                self.matrix.clone(),
            )?)
        } else {
            ProblemMatrix::Real(RealMatrix::new(self.rows, self.cols, self.matrix.clone())?)
        };
        ProblemInstance::new(self.family, matrix, self.data.clone(), self.start.clone())
    }

    /// Stopping rule from the file's options, with CLI overrides applied on
    /// top. Defaults: max_iters 1000, f_tol 0, step_tol 1e-12.
    pub fn rule(
        &self,
        max_iters: Option<usize>,
        f_tol: Option<f64>,
        step_tol: Option<f64>,
    ) -> afmin::Result<StoppingRule> {
        let d = StoppingRule::default();
        StoppingRule::new(
            max_iters.or(self.max_iters).unwrap_or(d.max_iters),
            f_tol.or(self.f_tol).unwrap_or(d.f_tol),
            step_tol.or(self.step_tol).unwrap_or(d.step_tol),
        )
    }

    /// Render back to the file format (used by `gen`; shortest round-trip
    /// float formatting keeps output byte-stable across runs).
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("family {}\n", self.family.name()));
        out.push_str(&format!("rows {}\n", self.rows));
        out.push_str(&format!("cols {}\n", self.cols));
        if let Some(g) = self.gamma {
            out.push_str(&format!("gamma {g}\n"));
        }
        if let Some(m) = self.max_iters {
            out.push_str(&format!("max_iters {m}\n"));
        }
        if let Some(v) = self.f_tol {
            out.push_str(&format!("f_tol {v}\n"));
        }
        if let Some(v) = self.step_tol {
            out.push_str(&format!("step_tol {v}\n"));
        }
        if let Some(s) = self.seed {
            out.push_str(&format!("seed {s}\n"));
        }
        out.push_str("matrix\n");
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.matrix[i * self.cols + j].to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push_str("data\n");
        let line: Vec<String> = self.data.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
        out.push_str("start\n");
        let line: Vec<String> = self.start.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# two-row, one-column instance
family smart
rows 2
cols 1
seed 42
matrix
0.5
0.5
data
1 3
start
1
";

    #[test]
    fn parses_a_valid_file() {
        let pf = ProblemFile::parse(SAMPLE).unwrap();
        assert_eq!(pf.family, Family::Smart);
        assert_eq!((pf.rows, pf.cols), (2, 1));
        assert_eq!(pf.matrix, vec![0.5, 0.5]);
        assert_eq!(pf.data, vec![1.0, 3.0]);
        assert_eq!(pf.start, vec![1.0]);
        assert_eq!(pf.seed, Some(42));
        pf.to_instance().unwrap();
    }

    #[test]
    fn roundtrips_through_render() {
        let pf = ProblemFile::parse(SAMPLE).unwrap();
        let text = pf.render();
        let pf2 = ProblemFile::parse(&text).unwrap();
        assert_eq!(pf2.render(), text);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = SAMPLE.replace("1 3", "1 x");
        let e = ProblemFile::parse(&bad).unwrap_err();
        assert_eq!(e.line, 10);
        assert!(e.to_string().contains("data"));

        let bad = SAMPLE.replace("rows 2", "rows two");
        let e = ProblemFile::parse(&bad).unwrap_err();
        assert_eq!(e.line, 3);

        let bad = "family smart\nmatrix\n1\n";
        let e = ProblemFile::parse(bad).unwrap_err();
        assert!(e.to_string().contains("before rows/cols"));
    }

    #[test]
    fn wrong_arity_is_reported() {
        let bad = SAMPLE.replace("data\n1 3", "data\n1 3 5");
        let e = ProblemFile::parse(&bad).unwrap_err();
        assert!(e.to_string().contains("expected 2 values, got 3"));
    }

    #[test]
    fn family_domain_violations_surface_at_instance_build() {
        let bad = SAMPLE.replace("1 3", "1 -3");
        let pf = ProblemFile::parse(&bad).unwrap();
        assert!(pf.to_instance().is_err());
    }
}
