//! Sampled densities on rectangular grids with domain metadata.

use crate::error::{Result, RmtError};
use serde::{Deserialize, Serialize};

/// Domain tag for one grid dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    RealLine,
    HalfLine,
    Torus,
}

/// Uniform grid on one axis: `count` points from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        assert!(count >= 2 && max > min);
        GridAxis { min, max, count }
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + self.step() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }
}

/// A density sampled on a rectangular grid (row-major storage, last axis
/// fastest). Values may carry small negative numerical dust; the validated
/// constructor enforces nonnegativity and normalization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridDensity {
    pub domain: Vec<DomainKind>,
    pub axes: Vec<GridAxis>,
    pub values: Vec<f64>,
    /// Per-bin standard errors when this grid is an empirical histogram.
    pub std_err: Option<Vec<f64>>,
    pub symmetric: bool,
}

impl GridDensity {
    /// Unvalidated construction (intermediate results, operator outputs).
    pub fn new_unchecked(domain: Vec<DomainKind>, axes: Vec<GridAxis>, values: Vec<f64>) -> Self {
        assert_eq!(domain.len(), axes.len());
        assert_eq!(values.len(), axes.iter().map(|a| a.count).product::<usize>());
        GridDensity {
            domain,
            axes,
            values,
            std_err: None,
            symmetric: false,
        }
    }

    /// Validated construction: the trapezoid integral must be within `tol`
    /// of one and values nonnegative up to -1e-12 dust.
    pub fn new_density(
        domain: Vec<DomainKind>,
        axes: Vec<GridAxis>,
        values: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        let g = GridDensity::new_unchecked(domain, axes, values);
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(RmtError::Data("non-finite grid value".into()));
        }
        if g.values.iter().any(|&v| v < -1e-12) {
            return Err(RmtError::Data("negative density value".into()));
        }
        let mass = g.trapezoid_integral();
        if (mass - 1.0).abs() > tol {
            return Err(RmtError::Accuracy(format!(
                "grid mass {mass} deviates from 1 by more than {tol}"
            )));
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Convert a flat index to per-axis indices.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            idx[d] = flat % self.axes[d].count;
            flat /= self.axes[d].count;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for d in 0..self.dim() {
            flat = flat * self.axes[d].count + idx[d];
        }
        flat
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.point(i))
            .collect()
    }

    /// Trapezoid-rule integral over the full grid.
    pub fn trapezoid_integral(&self) -> f64 {
        let mut acc = 0.0;
        for flat in 0..self.values.len() {
            let idx = self.unravel(flat);
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                let h = self.axes[d].step();
                w *= if i == 0 || i == self.axes[d].count - 1 {
                    0.5 * h
                } else {
                    h
                };
            }
            acc += w * self.values[flat];
        }
        acc
    }

    /// Rescale so the trapezoid integral is one. Returns the original mass.
    pub fn normalize(&mut self) -> f64 {
        let mass = self.trapezoid_integral();
        if mass > 0.0 {
            for v in &mut self.values {
                *v /= mass;
            }
            if let Some(se) = &mut self.std_err {
                for s in se {
                    *s /= mass;
                }
            }
        }
        mass
    }

    /// Fill a grid by evaluating a callable on every node.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(
        domain: Vec<DomainKind>,
        axes: Vec<GridAxis>,
        mut f: F,
    ) -> Self {
        let total: usize = axes.iter().map(|a| a.count).product();
        let mut g = GridDensity::new_unchecked(domain, axes, vec![0.0; total]);
        for flat in 0..total {
            let idx = g.unravel(flat);
            let p = g.point(&idx);
            g.values[flat] = f(&p);
        }
        g
    }

    /// Max absolute difference on shared nodes (grids must be congruent).
    pub fn max_abs_diff(&self, other: &GridDensity) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Check permutation symmetry via adjacent transpositions (they generate
    /// the full symmetric group). All axes must be congruent. Returns the
    /// max deviation.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        if n < 2 {
            return 0.0;
        }
        let c0 = self.axes[0].count;
        assert!(self.axes.iter().all(|a| a.count == c0));
        let mut worst = 0.0f64;
        for swap in 0..n - 1 {
            for flat in 0..self.values.len() {
                let mut idx = self.unravel(flat);
                idx.swap(swap, swap + 1);
                let other = self.values[self.ravel(&idx)];
                worst = worst.max((self.values[flat] - other).abs());
            }
        }
        worst
    }

    /// Write as CSV with `# key: value` comment headers, one row per node.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, meta: &[(&str, String)]) -> Result<()> {
        for (k, v) in meta {
            writeln!(w, "# {k}: {v}")?;
        }
        let cols: Vec<String> = (0..self.dim()).map(|d| format!("x{}", d + 1)).collect();
        writeln!(w, "{},density", cols.join(","))?;
        for flat in 0..self.values.len() {
            let idx = self.unravel(flat);
            let p = self.point(&idx);
            let coords: Vec<String> = p.iter().map(|x| format!("{x:.12e}")).collect();
            writeln!(w, "{},{:.12e}", coords.join(","), self.values[flat])?;
        }
        Ok(())
    }
}
