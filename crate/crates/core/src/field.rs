//! Cellwise scalar fields, midpoint quadrature and discrete norms.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::numeric::compensated_sum;

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            values: vec![value; grid.len()],
            grid,
        }
    }

    /// Panics if `values.len()` differs from the grid's cell count.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field length must match grid");
        Self { grid, values }
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn<F: Fn([f64; 2]) -> f64>(grid: Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.center(idx))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Self {
        assert_eq!(self.len(), other.len());
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Midpoint-rule integral over the domain.
    pub fn integral(&self) -> f64 {
        quadrature(self)
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        norm(self, kind)
    }
}

impl Index<usize> for Field {
    type Output = f64;
    fn index(&self, idx: usize) -> &f64 {
        &self.values[idx]
    }
}

impl IndexMut<usize> for Field {
    fn index_mut(&mut self, idx: usize) -> &mut f64 {
        &mut self.values[idx]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
    Lp(f64),
}

/// `h^dim * Σ f_i`, with compensated accumulation.
pub fn quadrature(f: &Field) -> f64 {
    f.grid.cell_volume() * compensated_sum(f.values.iter().copied())
}

pub fn norm(f: &Field, kind: Norm) -> f64 {
    let vol = f.grid.cell_volume();
    let v = &f.values;
    match kind {
        Norm::Linf => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        Norm::L1 => vol * compensated_sum(v.iter().map(|x| x.abs())),
        Norm::L2 => (vol * compensated_sum(v.iter().map(|x| x * x))).sqrt(),
        Norm::Lp(p) => {
            assert!(p >= 1.0, "Lp norm requires p >= 1");
            (vol * compensated_sum(v.iter().map(|x| x.abs().powf(p)))).powf(1.0 / p)
        }
    }
}

/// Discrete L2 distance between two fields on the same grid.
pub fn l2_distance(a: &Field, b: &Field) -> f64 {
    norm(&a.zip_map(b, |x, y| x - y), Norm::L2)
}

pub fn linf_distance(a: &Field, b: &Field) -> f64 {
    norm(&a.zip_map(b, |x, y| x - y), Norm::Linf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_1d(n: usize) -> Grid {
        Grid::new_1d(1.0, n).unwrap()
    }

    #[test]
    fn quadrature_of_constants() {
        for n in [4, 7, 64] {
            let g = Grid::new_2d(1.0, 1.0, n, n + 1).unwrap();
            assert_eq!(quadrature(&Field::constant(g, 1.0)), 1.0);
        }
        let g = Grid::new_1d(3.5, 10).unwrap();
        assert!((quadrature(&Field::constant(g, 2.0)) - 7.0).abs() < 1e-14);
    }

    #[test]
    fn midpoint_rule_exact_for_affine() {
        let f = Field::from_fn(unit_1d(128), |x| x[0]);
        assert!((quadrature(&f) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = unit_1d(16);
        let two = Field::constant(g, 2.0);
        assert!((norm(&two, Norm::L2) - 2.0).abs() < 1e-15);
        assert!((norm(&two, Norm::L1) - 2.0).abs() < 1e-15);
        assert!((norm(&two, Norm::Lp(3.0)) - 2.0).abs() < 1e-14);
        let zero = Field::zeros(g);
        for kind in [Norm::L1, Norm::L2, Norm::Linf, Norm::Lp(1.5)] {
            assert_eq!(norm(&zero, kind), 0.0);
        }
    }

    #[test]
    fn l2_matches_two_pass_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = Grid::new_2d(1.3, 0.7, 33, 21).unwrap();
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let f = Field::from_values(g, vals.clone());
        // two-pass oracle: scale by the max, then sum squares in f64 pairs
        let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut acc = 0.0_f64;
        for chunk in vals.chunks(2) {
            acc += chunk.iter().map(|v| (v / scale).powi(2)).sum::<f64>();
        }
        let oracle = scale * (acc * g.cell_volume()).sqrt();
        let got = norm(&f, Norm::L2);
        assert!(((got - oracle) / oracle).abs() < 1e-13);
    }

    #[test]
    fn quadrature_converges_second_order() {
        let exact = (1.0 - (-2.0_f64).exp()) / 2.0;
        let err = |n: usize| {
            let f = Field::from_fn(unit_1d(n), |x| (-2.0 * x[0]).exp());
            (quadrature(&f) - exact).abs()
        };
        let ratio = err(64) / err(128);
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn quadrature_is_linear(
            a in -5.0..5.0f64,
            b in -5.0..5.0f64,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = Grid::new_2d(1.0, 2.0, 12, 9).unwrap();
            let f = Field::from_values(g, (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect());
            let h = Field::from_values(g, (0..g.len()).map(|_| rng.gen_range(0.0..1.0)).collect());
            let combo = f.zip_map(&h, |x, y| a * x + b * y);
            let lhs = quadrature(&combo);
            let rhs = a * quadrature(&f) + b * quadrature(&h);
            let scale = a.abs() * quadrature(&f).abs() + b.abs() * quadrature(&h).abs() + 1e-300;
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
        }

        #[test]
        fn discrete_holder(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = Grid::new_1d(2.0, 40).unwrap();
            let f = Field::from_values(g, (0..g.len()).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let h = Field::from_values(g, (0..g.len()).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let prod = f.zip_map(&h, |x, y| x * y);
            prop_assert!(norm(&prod, Norm::L1) <= norm(&f, Norm::L2) * norm(&h, Norm::L2) * (1.0 + 1e-14));
        }
    }
}
