use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Axis, TensorGrid};
use crate::error::{grid_err, DunklError, Result};
use crate::exec::map_indexed;

/// Version tag of the serialized field container.
pub const FIELD_VERSION: &str = "dunkl-field-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Space,
    Frequency,
}

/// Real values sampled on a tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: Arc<TensorGrid>,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: Arc<TensorGrid>, values: Vec<f64>) -> Result<SampledField> {
        if values.len() != grid.len() {
            return Err(grid_err(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        Ok(SampledField { grid, values })
    }

    pub fn zeros(grid: Arc<TensorGrid>) -> SampledField {
        let n = grid.len();
        SampledField { grid, values: vec![0.0; n] }
    }

    /// Samples `f` at every grid node.
    pub fn from_fn<F>(grid: Arc<TensorGrid>, f: F) -> SampledField
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let g = Arc::clone(&grid);
        let values = map_indexed(grid.len(), move |i| f(&g.point(i)));
        SampledField { grid, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledField {
        SampledField { grid: Arc::clone(&self.grid), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_with(&self, other: &SampledField, f: impl Fn(f64, f64) -> f64) -> Result<SampledField> {
        self.require_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(SampledField { grid: Arc::clone(&self.grid), values })
    }

    pub fn require_same_grid(&self, other: &SampledField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(grid_err("fields live on different grids"))
        }
    }

    /// `∫ f dμ` by the grid quadrature.
    pub fn integral(&self) -> f64 {
        self.weighted_sum(|v| v)
    }

    pub fn l1_norm(&self) -> f64 {
        self.weighted_sum(f64::abs)
    }

    pub fn l2_norm(&self) -> f64 {
        self.weighted_sum(|v| v * v).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        // Nested sums over axes keep the cost linear in the number of nodes.
        let shape = self.grid.shape();
        let last = shape.len() - 1;
        let mut acc: Vec<f64> = self.values.iter().map(|v| f(*v)).collect();
        for j in (0..=last).rev() {
            let w = &self.grid.axis(j).weights;
            let n = shape[j];
            acc = acc.chunks(n).map(|c| c.iter().zip(w).map(|(a, b)| a * b).sum()).collect();
        }
        acc[0]
    }

    pub fn to_container(&self) -> FieldContainer {
        FieldContainer::from_parts(Domain::Space, &self.grid, self.values.clone(), None)
    }

    pub fn from_container(c: FieldContainer) -> Result<SampledField> {
        let (grid, re, im) = c.into_parts()?;
        if im.as_ref().is_some_and(|v| v.iter().any(|x| *x != 0.0)) {
            return Err(DunklError::Format("real field container carries imaginary values".into()));
        }
        SampledField::new(Arc::new(grid), re)
    }
}

/// Self-describing serialized form of a field (space or frequency side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldContainer {
    pub version: String,
    pub domain: Domain,
    pub multiplicities: Vec<f64>,
    pub axes: Vec<AxisRecord>,
    /// Row-major values, last axis fastest.
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values_imag: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisRecord {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub staggered: bool,
}

impl FieldContainer {
    pub(crate) fn from_parts(domain: Domain, grid: &TensorGrid, re: Vec<f64>, im: Option<Vec<f64>>) -> FieldContainer {
        FieldContainer {
            version: FIELD_VERSION.to_string(),
            domain,
            multiplicities: grid.k(),
            axes: grid
                .axes()
                .iter()
                .map(|a| AxisRecord { nodes: a.nodes.clone(), weights: a.weights.clone(), staggered: a.staggered })
                .collect(),
            values: re,
            values_imag: im,
        }
    }

    pub(crate) fn into_parts(self) -> Result<(TensorGrid, Vec<f64>, Option<Vec<f64>>)> {
        if self.version != FIELD_VERSION {
            return Err(DunklError::Format(format!("unsupported field version {:?}", self.version)));
        }
        if self.axes.len() != self.multiplicities.len() {
            return Err(DunklError::Format("axis count and multiplicity count differ".into()));
        }
        let axes = self
            .axes
            .into_iter()
            .zip(&self.multiplicities)
            .map(|(a, &k)| {
                let mut axis = Axis::from_parts(a.nodes, a.weights, k)?;
                axis.staggered = a.staggered;
                Ok(axis)
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = TensorGrid::new(axes)?;
        if self.values.len() != grid.len() || self.values_imag.as_ref().is_some_and(|v| v.len() != grid.len()) {
            return Err(DunklError::Format("value count does not match the grid".into()));
        }
        Ok((grid, self.values, self.values_imag))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("field container serializes")
    }

    pub fn from_json(s: &str) -> Result<FieldContainer> {
        serde_json::from_str(s).map_err(|e| DunklError::Format(e.to_string()))
    }
}
