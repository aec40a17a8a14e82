//! Piecewise-linear functions on a uniform grid of `[0, 1]` vanishing at 0.
//!
//! A [`GridFn`] with `n_grid = N` stores `N + 1` nodes `t_i = i / N`, each
//! carrying a point of `ℝ^d`. Evaluation between nodes is linear
//! interpolation, so the sup-norm over the nodes equals the sup-norm of the
//! interpolant.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{dim, param, Error, Result};
use crate::linalg::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFnDoc", into = "GridFnDoc")]
pub struct GridFn {
    dim: usize,
    n_grid: usize,
    values: Vec<f64>,
}

/// Wire form: `{dim, n_grid, values}` with `values` row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFnDoc {
    pub dim: usize,
    pub n_grid: usize,
    pub values: Vec<f64>,
}

impl TryFrom<GridFnDoc> for GridFn {
    type Error = Error;

    fn try_from(doc: GridFnDoc) -> Result<Self> {
        GridFn::new(doc.dim, doc.n_grid, doc.values)
    }
}

impl From<GridFn> for GridFnDoc {
    fn from(g: GridFn) -> Self {
        GridFnDoc {
            dim: g.dim,
            n_grid: g.n_grid,
            values: g.values,
        }
    }
}

impl GridFn {
    pub fn new(dim: usize, n_grid: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || n_grid == 0 {
            return param("grid functions need dim ≥ 1 and n_grid ≥ 1");
        }
        if values.len() != dim * (n_grid + 1) {
            return dim_err(dim, n_grid, values.len());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return param("grid values must be finite");
        }
        if values[..dim].iter().any(|v| *v != 0.0) {
            return param("grid functions must vanish at t = 0");
        }
        Ok(GridFn {
            dim,
            n_grid,
            values,
        })
    }

    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return param("a scalar grid function needs at least two nodes");
        }
        let n = values.len() - 1;
        GridFn::new(1, n, values)
    }

    pub fn zeros(dim: usize, n_grid: usize) -> Self {
        GridFn {
            dim,
            n_grid,
            values: vec![0.0; dim * (n_grid + 1)],
        }
    }

    /// Samples a scalar function at the nodes. `f(0)` must be 0.
    pub fn scalar_from_fn(n_grid: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..=n_grid).map(|i| f(i as f64 / n_grid as f64)).collect();
        GridFn::new(1, n_grid, values)
    }

    pub fn from_fn(dim: usize, n_grid: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(dim * (n_grid + 1));
        for i in 0..=n_grid {
            let p = f(i as f64 / n_grid as f64);
            if p.len() != dim {
                return crate::error::dim(format!("point of length {} for dim {dim}", p.len()));
            }
            values.extend(p);
        }
        GridFn::new(dim, n_grid, values)
    }

    /// Stacks scalar functions on a common grid into a vector-valued one.
    pub fn from_coordinates(coords: &[GridFn]) -> Result<Self> {
        let Some(first) = coords.first() else {
            return param("at least one coordinate is required");
        };
        let n = first.n_grid;
        if coords.iter().any(|c| c.dim != 1 || c.n_grid != n) {
            return dim("coordinates must be scalar and share a grid");
        }
        let d = coords.len();
        let mut values = vec![0.0; d * (n + 1)];
        for (k, c) in coords.iter().enumerate() {
            for i in 0..=n {
                values[i * d + k] = c.values[i];
            }
        }
        GridFn::new(d, n, values)
    }

    /// `x · g` for a vector `x` and a scalar function `g`.
    pub fn outer(x: &[f64], g: &GridFn) -> Result<Self> {
        let g_vals = g.scalar_values()?;
        let d = x.len();
        let mut values = Vec::with_capacity(d * g_vals.len());
        for v in g_vals {
            values.extend(x.iter().map(|xi| xi * v));
        }
        GridFn::new(d, g.n_grid, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n_grid as f64
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn scalar_values(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return dim(format!("expected a scalar grid function, got dim {}", self.dim));
        }
        Ok(&self.values)
    }

    pub fn coordinate(&self, k: usize) -> Result<GridFn> {
        if k >= self.dim {
            return dim(format!("coordinate {k} out of range for dim {}", self.dim));
        }
        let values = (0..=self.n_grid).map(|i| self.values[i * self.dim + k]).collect();
        GridFn::new(1, self.n_grid, values)
    }

    pub fn coordinates(&self) -> Vec<GridFn> {
        (0..self.dim).map(|k| self.coordinate(k).expect("in range")).collect()
    }

    /// Linear interpolation at `t ∈ [0, 1]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let s = t.clamp(0.0, 1.0) * self.n_grid as f64;
        let i = (s.floor() as usize).min(self.n_grid - 1);
        let w = s - i as f64;
        let a = self.point(i);
        let b = self.point(i + 1);
        a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect()
    }

    /// `max_i |f(t_i)|` with the Euclidean norm on `ℝ^d`.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .chunks(self.dim)
            .map(norm)
            .fold(0.0, f64::max)
    }

    pub fn sup_dist(&self, other: &GridFn) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .values
            .chunks(self.dim)
            .zip(other.values.chunks(self.dim))
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max))
    }

    pub fn scaled(&self, lambda: f64) -> GridFn {
        GridFn {
            dim: self.dim,
            n_grid: self.n_grid,
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }

    pub fn same_shape(&self, other: &GridFn) -> Result<()> {
        if self.dim != other.dim || self.n_grid != other.n_grid {
            return dim(format!(
                "shape ({}, {}) vs ({}, {})",
                self.dim, self.n_grid, other.dim, other.n_grid
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// CSV with header `t,f_1,...,f_d`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim).map(|k| format!("f_{k}")));
        wtr.write_record(&header)?;
        for i in 0..=self.n_grid {
            let mut rec = vec![format_f64(self.node(i))];
            rec.extend(self.point(i).iter().map(|v| format_f64(*v)));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses the CSV written by [`GridFn::write_csv`]. The `t` column must
    /// be the uniform grid `i / N`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.is_empty() || headers.get(0).map(str::trim) != Some("t") {
            return Err(Error::Input("CSV header must start with column `t`".into()));
        }
        let d = headers.len() - 1;
        if d == 0 {
            return Err(Error::Input("CSV needs at least one value column".into()));
        }
        let mut ts = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != d + 1 {
                return Err(Error::Input(format!(
                    "row {} has {} fields, expected {}",
                    line + 2,
                    rec.len(),
                    d + 1
                )));
            }
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Input(format!("row {}: cannot parse `{field}` as a number", line + 2))
                })?;
                if k == 0 {
                    ts.push(v);
                } else {
                    values.push(v);
                }
            }
        }
        if ts.len() < 2 {
            return Err(Error::Input("CSV needs at least two rows".into()));
        }
        let n = ts.len() - 1;
        for (i, t) in ts.iter().enumerate() {
            if (t - i as f64 / n as f64).abs() > 1e-9 {
                return Err(Error::Input(format!(
                    "row {}: t = {t} is not on the uniform grid",
                    i + 2
                )));
            }
        }
        GridFn::new(d, n, values).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        GridFn::read_csv(s.as_bytes())
    }
}

fn dim_err<T>(d: usize, n: usize, len: usize) -> Result<T> {
    dim(format!(
        "expected {} values for dim {d} and n_grid {n}, got {len}",
        d * (n + 1)
    ))
}

/// Shortest decimal representation that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonzero_start() {
        assert!(GridFn::scalar(vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn interpolation_between_nodes() {
        let g = GridFn::scalar(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(g.eval(0.25), vec![0.5]);
        assert_eq!(g.eval(0.75), vec![0.5]);
        assert_eq!(g.eval(1.0), vec![0.0]);
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let g = GridFn::from_fn(2, 7, |t| vec![t.sin() / 3.0, -t * t * 0.1]).unwrap();
        let back = GridFn::from_csv_str(&g.to_csv_string().unwrap()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn json_roundtrip() {
        let g = GridFn::from_fn(2, 3, |t| vec![t, 2.0 * t]).unwrap();
        let s = g.to_json().unwrap();
        assert!(s.contains("\"n_grid\":3"));
        assert_eq!(GridFn::from_json(&s).unwrap(), g);
        assert!(GridFn::from_json(r#"{"dim":1,"n_grid":2,"values":[1,2,3]}"#).is_err());
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(GridFn::from_csv_str("x,f_1\n0,0\n1,1\n").is_err());
        assert!(GridFn::from_csv_str("t,f_1\n0,0\n1,abc\n").is_err());
        assert!(GridFn::from_csv_str("t,f_1\n0,0\n0.7,1\n").is_err());
    }
}
