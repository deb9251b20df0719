//! Sheet CSV: header `eps,t,g1..gm,a1..an[,s0]`, one row per node, `eps`
//! outermost. Both parameter grids must be uniform on `[0, 1]`.

use alglab_core::path::HomotopySheet;
use ndarray::Array3;

use crate::InputError;

const UNIFORM_TOL: f64 = 1e-12;

/// A parsed sheet plus the optional `s0` column value.
#[derive(Clone, Debug)]
pub struct SheetFile {
    pub sheet: HomotopySheet,
    pub s0: Option<f64>,
}

fn err(line: u64, msg: impl Into<String>) -> InputError {
    InputError::Csv { line, msg: msg.into() }
}

fn header_layout(h: &csv::StringRecord) -> Result<(usize, usize, bool), InputError> {
    let cols: Vec<&str> = h.iter().map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "eps" || cols[1] != "t" {
        return Err(err(1, "header must start with eps,t"));
    }
    let mut i = 2;
    let mut m = 0;
    while i < cols.len() && cols[i] == format!("g{}", m + 1) {
        m += 1;
        i += 1;
    }
    let mut n = 0;
    while i < cols.len() && cols[i] == format!("a{}", n + 1) {
        n += 1;
        i += 1;
    }
    let s0 = i < cols.len() && cols[i] == "s0";
    if s0 {
        i += 1;
    }
    if i != cols.len() {
        return Err(err(1, format!("unexpected column '{}'", cols[i])));
    }
    if n == 0 {
        return Err(err(1, "no fiber columns a1..an"));
    }
    Ok((m, n, s0))
}

/// `vals[i]` must be `i / (len - 1)`.
fn check_uniform(vals: &[f64], what: &str) -> Result<(), (usize, String)> {
    let k = vals.len() - 1;
    for (i, v) in vals.iter().enumerate() {
        let want = i as f64 / k as f64;
        if (v - want).abs() > UNIFORM_TOL {
            return Err((i, format!("{} grid not uniform: node {} is {} (expected {})", what, i, v, want)));
        }
    }
    Ok(())
}

pub fn read_sheet(text: &str) -> Result<SheetFile, InputError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let (m, n, has_s0) = header_layout(&header)?;
    let mut rows: Vec<(u64, Vec<f64>)> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let vals = rec
            .iter()
            .enumerate()
            .map(|(c, s)| s.parse::<f64>().map_err(|_| err(line, format!("column {}: cannot parse '{}'", c + 1, s))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((line, vals));
    }
    if rows.is_empty() {
        return Err(err(2, "no data rows"));
    }
    // t runs fastest: count rows of the first eps level
    let e0 = rows[0].1[0];
    let n1 = rows.iter().take_while(|r| r.1[0] == e0).count();
    if rows.len() % n1 != 0 {
        return Err(err(rows.last().unwrap().0, format!("{} rows is not a multiple of {} t-nodes", rows.len(), n1)));
    }
    let k1 = rows.len() / n1;
    if n1 < 2 || k1 < 2 {
        return Err(err(2, "need at least two nodes in each direction"));
    }
    let mut base = Array3::zeros((k1, n1, m));
    let mut fiber = Array3::zeros((k1, n1, n));
    let mut eps = Vec::with_capacity(k1);
    let t: Vec<f64> = rows[..n1].iter().map(|r| r.1[1]).collect();
    check_uniform(&t, "t").map_err(|(i, m)| err(rows[i].0, m))?;
    let s0 = if has_s0 { Some(rows[0].1[2 + m + n]) } else { None };
    for (idx, (line, v)) in rows.iter().enumerate() {
        let (e, i) = (idx / n1, idx % n1);
        if i == 0 {
            eps.push(v[0]);
        } else if v[0] != eps[e] {
            return Err(err(*line, format!("eps changes inside a slice ({} vs {})", v[0], eps[e])));
        }
        if (v[1] - t[i]).abs() > UNIFORM_TOL {
            return Err(err(*line, format!("t = {} does not match the first slice ({})", v[1], t[i])));
        }
        if let Some(a) = s0 {
            if v[2 + m + n] != a {
                return Err(err(*line, "s0 must be constant"));
            }
        }
        for c in 0..m {
            base[(e, i, c)] = v[2 + c];
        }
        for c in 0..n {
            fiber[(e, i, c)] = v[2 + m + c];
        }
    }
    check_uniform(&eps, "eps").map_err(|(e, m)| err(rows[e * n1].0, m))?;
    let sheet = HomotopySheet::new(base, fiber).map_err(|e| err(2, e.to_string()))?;
    Ok(SheetFile { sheet, s0 })
}

pub fn write_sheet(sheet: &HomotopySheet, s0: Option<f64>) -> String {
    let (k1, n1, m) = sheet.base.dim();
    let n = sheet.fiber.dim().2;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["eps".to_string(), "t".to_string()];
    header.extend((1..=m).map(|i| format!("g{}", i)));
    header.extend((1..=n).map(|i| format!("a{}", i)));
    if s0.is_some() {
        header.push("s0".into());
    }
    w.write_record(&header).expect("in-memory csv");
    for e in 0..k1 {
        for i in 0..n1 {
            let mut row = vec![(e as f64 / (k1 - 1) as f64).to_string(), (i as f64 / (n1 - 1) as f64).to_string()];
            row.extend((0..m).map(|c| sheet.base[(e, i, c)].to_string()));
            row.extend((0..n).map(|c| sheet.fiber[(e, i, c)].to_string()));
            if let Some(s) = s0 {
                row.push(s.to_string());
            }
            w.write_record(&row).expect("in-memory csv");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}
