use serde::{Deserialize, Serialize};

/// Realization of a process on a finite grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl SamplePath {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(times.len(), values.len());
        Self { times, values }
    }

    pub fn constant(times: &[f64], value: f64) -> Self {
        Self {
            times: times.to_vec(),
            values: vec![value; times.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at grid time `t` (exact match), if present.
    pub fn at(&self, t: f64) -> Option<f64> {
        self.times.iter().position(|&s| s == t).map(|i| self.values[i])
    }

    /// Value at the last grid time.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("nonempty path")
    }

    pub fn add_assign(&mut self, other: &[f64]) {
        for (v, o) in self.values.iter_mut().zip(other) {
            *v += o;
        }
    }
}
