//! CSV tables: comma-separated, `.` decimal, mandatory header, floats in
//! shortest round-trip form.

use crate::error::{Error, Result};
use crate::grid::format_f64;
use crate::sim::ClusterReport;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() {
            return Err(Error::Input("CSV header row is mandatory".into()));
        }
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()).map_err(Error::from))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Table { header, rows })
    }

    /// Column `name` parsed as `f64`.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("CSV has no column `{name}`")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r[k].parse::<f64>()
                    .map_err(|_| Error::Input(format!("row {}: `{}` is not a number", i + 2, r[k])))
            })
            .collect()
    }
}

fn coord_names(d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("x_{k}")).collect()
}

/// `replica,n,x_1..x_d` for every tail point.
pub fn points_table(r: &ClusterReport) -> Table {
    let d = r.points.first().map_or(0, |p| p.point.len());
    let mut header = vec!["replica".to_string(), "n".to_string()];
    header.extend(coord_names(d));
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for p in &r.points {
        let mut row = vec![p.replica.to_string(), p.n.to_string()];
        row.extend(p.point.iter().map(|v| format_f64(*v)));
        t.push(row);
    }
    t
}

/// `x_1..x_d` for every δ-net point.
pub fn net_table(r: &ClusterReport) -> Table {
    let d = r.net.points.first().map_or(0, |p| p.len());
    let mut t = Table {
        header: coord_names(d.max(1)),
        rows: Vec::new(),
    };
    for p in &r.net.points {
        t.push(p.iter().map(|v| format_f64(*v)).collect());
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Checkpoint;

    #[test]
    fn round_trip_is_lossless() {
        let pts: Vec<Checkpoint> = (1..50u64)
            .map(|n| Checkpoint {
                n,
                point: vec![(n as f64).sqrt().recip(), -1.0 / 3.0 * n as f64],
            })
            .collect();
        let r = ClusterReport::build(2, &pts, Vec::new(), 0.01, 3).unwrap();
        let t = points_table(&r);
        let back = Table::from_csv(&t.to_csv().unwrap()).unwrap();
        assert_eq!(back, t);
        let x1 = back.column("x_1").unwrap();
        assert!(x1.iter().zip(&r.points).all(|(a, p)| *a == p.point[0]));
        let nt = net_table(&r);
        assert_eq!(Table::from_csv(&nt.to_csv().unwrap()).unwrap(), nt);
    }

    #[test]
    fn missing_column_is_an_input_error() {
        let t = Table::from_csv(b"a,b\n1,2\n").unwrap();
        assert!(matches!(t.column("c"), Err(Error::Input(_))));
        assert_eq!(t.column("b").unwrap(), vec![2.0]);
    }
}
