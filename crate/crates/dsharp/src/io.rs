//! Input files: data columns, quantile-probability tables, loss and expert
//! lists, parameter grids and priors.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dsharp_core::decisions::{Action, DecisionProblem, Loss};
use dsharp_core::q2d::QpData;
use dsharp_core::{BaseModel, Sample};
use serde::Deserialize;

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file))
}

/// Reads numeric rows of `width` columns. A first row that does not parse is
/// taken as a header and must match `header` when one is given.
fn numeric_rows(path: &Path, width: usize, header: Option<&[&str]>) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (k, rec) in reader(path)?.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: malformed CSV", path.display()))?;
        let line = rec.position().map_or(k as u64 + 1, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Option<Vec<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        match parsed {
            None if rows.is_empty() && k == 0 => {
                if let Some(want) = header {
                    let got: Vec<String> = rec.iter().map(str::to_ascii_lowercase).collect();
                    if got.len() != want.len() || got.iter().zip(want).any(|(g, w)| g != w) {
                        bail!("{}:{line}: expected header `{}`", path.display(), want.join(","));
                    }
                }
            }
            None => bail!("{}:{line}: not a number in `{}`", path.display(), rec.iter().collect::<Vec<_>>().join(",")),
            Some(v) if v.len() != width => {
                bail!("{}:{line}: expected {width} column(s), found {}", path.display(), v.len())
            }
            Some(v) => {
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    bail!("{}:{line}: value {bad} is not finite", path.display());
                }
                rows.push((line, v));
            }
        }
    }
    Ok(rows)
}

/// One numeric column, optionally headed `x`.
pub fn read_data(path: &Path) -> Result<Sample> {
    let rows = numeric_rows(path, 1, Some(&["x"]))?;
    if rows.is_empty() {
        bail!("{}: no observations", path.display());
    }
    Ok(Sample::new(rows.into_iter().map(|(_, v)| v[0]).collect())?)
}

pub fn write_data(path: Option<&Path>, sample: &Sample) -> Result<()> {
    let mut out = String::with_capacity(sample.len() * 20 + 2);
    out.push_str("x\n");
    for x in sample.values() {
        out.push_str(&format!("{x}\n"));
    }
    write_text(path, &out)
}

/// Rows `x,p` with strictly increasing `x` and `p`.
pub fn read_qp(path: &Path) -> Result<QpData> {
    let rows = numeric_rows(path, 2, Some(&["x", "p"]))?;
    for (i, w) in rows.windows(2).enumerate() {
        let ((_, a), (line, b)) = (&w[0], &w[1]);
        if !(b[0] > a[0] && b[1] > a[1]) {
            bail!(
                "{}:{line}: row {} ({}, {}) is not above row {} ({}, {}); x and p must both increase",
                path.display(),
                i + 2,
                b[0],
                b[1],
                i + 1,
                a[0],
                a[1]
            );
        }
    }
    Ok(QpData::new(rows.into_iter().map(|(_, v)| (v[0], v[1])).collect())?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LossEntry {
    action: String,
    expr: Option<String>,
    table: Option<Vec<(f64, f64)>>,
}

/// JSON list of `{"action": .., "expr": ..}` or `{"action": .., "table": [[x, loss], ..]}`.
pub fn read_losses(path: &Path) -> Result<DecisionProblem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let entries: Vec<LossEntry> =
        serde_json::from_str(&text).with_context(|| format!("{}: invalid loss list", path.display()))?;
    let mut actions: Vec<Action> = Vec::with_capacity(entries.len());
    for (i, e) in entries.into_iter().enumerate() {
        let at = || format!("{}: loss entry {} (`{}`)", path.display(), i + 1, e.action);
        if e.action.trim().is_empty() {
            bail!("{}: loss entry {} has an empty action name", path.display(), i + 1);
        }
        if actions.iter().any(|a| a.label == e.action) {
            bail!("{}: duplicate action", at());
        }
        let loss = match (&e.expr, &e.table) {
            (Some(src), None) => Loss::expr(src).with_context(at)?,
            (None, Some(t)) => Loss::table(t.clone()).with_context(at)?,
            _ => bail!("{}: give exactly one of `expr` and `table`", at()),
        };
        actions.push(Action { label: e.action.clone(), loss });
    }
    Ok(DecisionProblem::new(actions).with_context(|| format!("{}: invalid decision problem", path.display()))?)
}

/// JSON list of model spec strings.
pub fn read_experts(path: &Path) -> Result<Vec<BaseModel>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let specs: Vec<String> =
        serde_json::from_str(&text).with_context(|| format!("{}: expected a JSON list of model specs", path.display()))?;
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse::<BaseModel>().with_context(|| format!("{}: expert {}", path.display(), i + 1)))
        .collect()
}

/// Parameter grid `name=lo:hi:step[,name=lo:hi:step]`. Points are listed with
/// the first parameter varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub names: Vec<String>,
    pub points: Vec<Vec<f64>>,
}

pub fn parse_grid(spec: &str) -> Result<Grid> {
    let mut names = Vec::new();
    let mut axes: Vec<Vec<f64>> = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, range) = part.split_once('=').ok_or_else(|| anyhow!("grid term `{part}` should look like name=lo:hi:step"))?;
        let nums: Vec<f64> = range
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("grid term `{part}`: bad number `{s}`")))
            .collect::<Result<_>>()?;
        let [lo, hi, step] = nums[..] else {
            bail!("grid term `{part}` needs lo:hi:step");
        };
        if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi >= lo) {
            bail!("grid term `{part}` needs finite lo <= hi and step > 0");
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            bail!("grid term `{part}` has {count} points");
        }
        names.push(name.trim().to_string());
        axes.push((0..count).map(|k| lo + k as f64 * step).collect());
    }
    if axes.is_empty() {
        bail!("empty grid spec");
    }
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        points = points
            .iter()
            .flat_map(|p| axis.iter().map(move |&v| {
                let mut q = p.clone();
                q.push(v);
                q
            }))
            .collect();
    }
    Ok(Grid { names, points })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `uniform` or a CSV whose rows are the parameter values followed by a
/// weight. Every grid point needs exactly one row.
pub fn read_prior(arg: &str, grid: &Grid) -> Result<Vec<f64>> {
    if arg.eq_ignore_ascii_case("uniform") {
        return Ok(vec![1.0; grid.points.len()]);
    }
    let path = Path::new(arg);
    let dim = grid.names.len();
    let rows = numeric_rows(path, dim + 1, None)?;
    let mut prior = vec![f64::NAN; grid.points.len()];
    for (line, row) in &rows {
        let idx = grid
            .points
            .iter()
            .position(|p| p.iter().zip(row).all(|(a, b)| close(*a, *b)))
            .ok_or_else(|| anyhow!("{}:{line}: {:?} is not a grid point", path.display(), &row[..dim]))?;
        if !prior[idx].is_nan() {
            bail!("{}:{line}: grid point {:?} listed twice", path.display(), &row[..dim]);
        }
        prior[idx] = row[dim];
    }
    if let Some(i) = prior.iter().position(|w| w.is_nan()) {
        bail!("{}: no prior weight for grid point {:?}", path.display(), grid.points[i]);
    }
    Ok(prior)
}

/// Parses `j:c[,j:c]` coefficient lists.
pub fn parse_coeffs(spec: &str) -> Result<Vec<(usize, f64)>> {
    spec.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (j, c) = p.split_once(':').ok_or_else(|| anyhow!("coefficient `{p}` should look like j:value"))?;
            let j = j.trim().parse::<usize>().map_err(|_| anyhow!("coefficient `{p}`: bad index"))?;
            let c = c.trim().parse::<f64>().map_err(|_| anyhow!("coefficient `{p}`: bad value"))?;
            Ok((j, c))
        })
        .collect()
}

/// Writes `text` to `path`, or to stdout when no path is given. Files are
/// written through a temporary sibling and renamed, so a failed run never
/// leaves a partial file behind.
pub fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        Some(p) => {
            let mut tmp = p.as_os_str().to_owned();
            tmp.push(".partial");
            std::fs::write(&tmp, text).with_context(|| format!("cannot write {}", p.display()))?;
            std::fs::rename(&tmp, p).with_context(|| format!("cannot write {}", p.display()))?;
        }
    }
    Ok(())
}

/// Columns of equal length as CSV with a header row.
pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| format!("{}", c[i])))?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("{e}"))?;
    write_text(Some(path), &String::from_utf8(bytes)?)
}
