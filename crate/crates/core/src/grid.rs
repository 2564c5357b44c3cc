//! Scalar fields sampled on uniform tensor-product lattices.
//!
//! Periodic boxes place `res` nodes per axis on [l, u) with spacing
//! extent/res; open boxes include both endpoints with spacing
//! extent/(res-1) and trapezoidal quadrature weights.

use crate::chart::{ChartDomain, Topology};
use crate::error::{FinslerError, Result};

pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub domain: ChartDomain,
    pub resolution: Vec<usize>,
    /// Row-major (axis 0 slowest).
    pub values: Vec<f64>,
    /// Threshold on F*(du) below which a node is treated as gradient-free;
    /// `None` selects the oscillation-scaled default.
    pub grad_mask_eps: Option<f64>,
}

impl GridField {
    pub fn zeros(domain: ChartDomain, resolution: Vec<usize>) -> Result<Self> {
        if resolution.len() != domain.dim {
            return Err(FinslerError::InvalidParameter(
                "resolution rank must match the domain dimension".into(),
            ));
        }
        if resolution.iter().any(|&r| r < MIN_RESOLUTION) {
            return Err(FinslerError::InvalidParameter(format!(
                "resolution must be at least {MIN_RESOLUTION} nodes per axis"
            )));
        }
        let len = resolution.iter().product();
        Ok(GridField {
            domain,
            resolution,
            values: vec![0.0; len],
            grad_mask_eps: None,
        })
    }

    pub fn from_fn(
        domain: ChartDomain,
        resolution: Vec<usize>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let mut field = Self::zeros(domain, resolution)?;
        for idx in 0..field.len() {
            let x = field.node_position(idx);
            field.values[idx] = f(&x);
        }
        Ok(field)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        match self.domain.topology {
            Topology::PeriodicBox => self.domain.extent(axis) / self.resolution[axis] as f64,
            Topology::OpenBox => self.domain.extent(axis) / (self.resolution[axis] - 1) as f64,
        }
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|k| self.spacing(k))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let n = self.dim();
        let mut mi = vec![0usize; n];
        for k in (0..n).rev() {
            mi[k] = idx % self.resolution[k];
            idx /= self.resolution[k];
        }
        mi
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        let mut idx = 0usize;
        for k in 0..self.dim() {
            idx = idx * self.resolution[k] + mi[k];
        }
        idx
    }

    pub fn node_position(&self, idx: usize) -> Vec<f64> {
        let mi = self.multi_index(idx);
        (0..self.dim())
            .map(|k| self.domain.lower[k] + mi[k] as f64 * self.spacing(k))
            .collect()
    }

    /// Neighbor along `axis`; None when stepping out of an open box.
    pub fn neighbor(&self, idx: usize, axis: usize, step: isize) -> Option<usize> {
        let mut mi = self.multi_index(idx);
        let r = self.resolution[axis] as isize;
        let j = mi[axis] as isize + step;
        match self.domain.topology {
            Topology::PeriodicBox => {
                mi[axis] = j.rem_euclid(r) as usize;
                Some(self.flat_index(&mi))
            }
            Topology::OpenBox => {
                if j < 0 || j >= r {
                    None
                } else {
                    mi[axis] = j as usize;
                    Some(self.flat_index(&mi))
                }
            }
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        if self.domain.topology == Topology::PeriodicBox {
            return false;
        }
        let mi = self.multi_index(idx);
        (0..self.dim()).any(|k| mi[k] == 0 || mi[k] == self.resolution[k] - 1)
    }

    /// Quadrature weight of a node (trapezoidal on open boxes).
    pub fn quad_weight(&self, idx: usize) -> f64 {
        let mut w = 1.0;
        let mi = self.multi_index(idx);
        for k in 0..self.dim() {
            let h = self.spacing(k);
            let edge = self.domain.topology == Topology::OpenBox
                && (mi[k] == 0 || mi[k] == self.resolution[k] - 1);
            w *= if edge { 0.5 * h } else { h };
        }
        w
    }

    pub fn oscillation(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    }

    /// Effective mask threshold for the nonzero-gradient set.
    pub fn mask_eps(&self) -> f64 {
        self.grad_mask_eps
            .unwrap_or_else(|| 1e-10 * self.oscillation().max(1e-30) / self.min_spacing())
    }

    /// Central 2nd-order difference of the field along `axis` at `idx`;
    /// one-sided 2nd-order at open-box edges.
    pub fn diff(&self, idx: usize, axis: usize) -> f64 {
        let h = self.spacing(axis);
        match (
            self.neighbor(idx, axis, 1),
            self.neighbor(idx, axis, -1),
        ) {
            (Some(p), Some(m)) => (self.values[p] - self.values[m]) / (2.0 * h),
            (Some(_), None) => {
                let p1 = self.neighbor(idx, axis, 1).unwrap();
                let p2 = self.neighbor(idx, axis, 2).unwrap();
                (-3.0 * self.values[idx] + 4.0 * self.values[p1] - self.values[p2]) / (2.0 * h)
            }
            (None, Some(_)) => {
                let m1 = self.neighbor(idx, axis, -1).unwrap();
                let m2 = self.neighbor(idx, axis, -2).unwrap();
                (3.0 * self.values[idx] - 4.0 * self.values[m1] + self.values[m2]) / (2.0 * h)
            }
            (None, None) => 0.0,
        }
    }

    /// Full finite-difference differential du at a node.
    pub fn differential(&self, idx: usize) -> Vec<f64> {
        (0..self.dim()).map(|k| self.diff(idx, k)).collect()
    }

    /// Second difference along a pair of axes (central; one-sided 2nd-order
    /// pure second difference at open-box edges).
    pub fn second_diff(&self, idx: usize, i: usize, j: usize) -> f64 {
        if i == j {
            let h = self.spacing(i);
            match (self.neighbor(idx, i, 1), self.neighbor(idx, i, -1)) {
                (Some(p), Some(m)) => {
                    (self.values[p] - 2.0 * self.values[idx] + self.values[m]) / (h * h)
                }
                (Some(_), None) => {
                    let p1 = self.neighbor(idx, i, 1).unwrap();
                    let p2 = self.neighbor(idx, i, 2).unwrap();
                    let p3 = self.neighbor(idx, i, 3).unwrap();
                    (2.0 * self.values[idx] - 5.0 * self.values[p1] + 4.0 * self.values[p2]
                        - self.values[p3])
                        / (h * h)
                }
                (None, Some(_)) => {
                    let m1 = self.neighbor(idx, i, -1).unwrap();
                    let m2 = self.neighbor(idx, i, -2).unwrap();
                    let m3 = self.neighbor(idx, i, -3).unwrap();
                    (2.0 * self.values[idx] - 5.0 * self.values[m1] + 4.0 * self.values[m2]
                        - self.values[m3])
                        / (h * h)
                }
                (None, None) => 0.0,
            }
        } else {
            // nested first differences handle edges via `diff`
            let h = self.spacing(j);
            match (self.neighbor(idx, j, 1), self.neighbor(idx, j, -1)) {
                (Some(p), Some(m)) => (self.diff(p, i) - self.diff(m, i)) / (2.0 * h),
                (Some(_), None) => {
                    let p1 = self.neighbor(idx, j, 1).unwrap();
                    let p2 = self.neighbor(idx, j, 2).unwrap();
                    (-3.0 * self.diff(idx, i) + 4.0 * self.diff(p1, i) - self.diff(p2, i))
                        / (2.0 * h)
                }
                (None, Some(_)) => {
                    let m1 = self.neighbor(idx, j, -1).unwrap();
                    let m2 = self.neighbor(idx, j, -2).unwrap();
                    (3.0 * self.diff(idx, i) - 4.0 * self.diff(m1, i) + self.diff(m2, i))
                        / (2.0 * h)
                }
                (None, None) => 0.0,
            }
        }
    }

    /// Header + row-major values, one per line.
    pub fn to_csv(&self) -> String {
        let topo = match self.domain.topology {
            Topology::PeriodicBox => "periodic",
            Topology::OpenBox => "open",
        };
        let res: Vec<String> = self.resolution.iter().map(|r| r.to_string()).collect();
        let bounds: Vec<String> = (0..self.dim())
            .map(|k| format!("{:.17e}:{:.17e}", self.domain.lower[k], self.domain.upper[k]))
            .collect();
        let mut out = format!(
            "# dim {}, res {}, bounds {}, topology {}\n",
            self.dim(),
            res.join(" "),
            bounds.join(" "),
            topo
        );
        for v in &self.values {
            out.push_str(&format!("{:.17e}\n", v));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| FinslerError::Config("empty grid CSV".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| FinslerError::Config("grid CSV must start with a # header".into()))?;
        let mut dim = 0usize;
        let mut res: Vec<usize> = Vec::new();
        let mut lower: Vec<f64> = Vec::new();
        let mut upper: Vec<f64> = Vec::new();
        let mut topo = Topology::PeriodicBox;
        for part in header.split(',') {
            let toks: Vec<&str> = part.split_whitespace().collect();
            match toks.first().copied() {
                Some("dim") => dim = toks[1].parse().map_err(|_| bad_header())?,
                Some("res") => {
                    res = toks[1..]
                        .iter()
                        .map(|t| t.parse().map_err(|_| bad_header()))
                        .collect::<Result<_>>()?
                }
                Some("bounds") => {
                    for b in &toks[1..] {
                        let (l, u) = b.split_once(':').ok_or_else(bad_header)?;
                        lower.push(l.parse().map_err(|_| bad_header())?);
                        upper.push(u.parse().map_err(|_| bad_header())?);
                    }
                }
                Some("topology") => {
                    topo = match toks[1] {
                        "periodic" => Topology::PeriodicBox,
                        "open" => Topology::OpenBox,
                        _ => return Err(bad_header()),
                    }
                }
                _ => return Err(bad_header()),
            }
        }
        if res.len() != dim || lower.len() != dim {
            return Err(bad_header());
        }
        let domain = ChartDomain::new(topo, lower, upper)?;
        let mut field = GridField::zeros(domain, res)?;
        let mut count = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            if count >= field.len() {
                return Err(FinslerError::Config("grid CSV has too many values".into()));
            }
            field.values[count] = line
                .trim()
                .parse()
                .map_err(|_| FinslerError::Config(format!("bad grid value: {line}")))?;
            count += 1;
        }
        if count != field.len() {
            return Err(FinslerError::Config(format!(
                "grid CSV has {count} values, expected {}",
                field.len()
            )));
        }
        Ok(field)
    }
}

fn bad_header() -> FinslerError {
    FinslerError::Config("malformed grid CSV header".into())
}
