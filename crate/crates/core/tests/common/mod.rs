#![allow(dead_code)]

use soliton_lab::warped::{integrate_warped, WarpedTrajectory};
use soliton_lab::{bryant_series_start, IntegrateOptions};

pub fn uniform(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Output times `ε, 0.01, 0.02, … , t_end` for a series-started run.
pub fn bryant_grid(epsilon: f64, t_end: f64) -> Vec<f64> {
    let dt = 0.01;
    let steps = (t_end / dt).round() as usize;
    let mut grid = vec![epsilon];
    grid.extend((1..=steps).map(|k| k as f64 * dt).filter(|&t| t > epsilon));
    grid
}

pub fn bryant_run(n: usize, epsilon: f64, t_end: f64) -> WarpedTrajectory {
    let start = bryant_series_start(n, epsilon).unwrap();
    let opts = IntegrateOptions {
        t_eval: Some(bryant_grid(epsilon, t_end)),
        max_step: 0.05,
        ..Default::default()
    };
    integrate_warped(&start, n, (n - 2) as f64, 0.0, t_end, &opts).unwrap()
}
