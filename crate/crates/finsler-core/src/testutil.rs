//! Shared sampling helpers for the module tests.

use rand::Rng;

pub fn sample_chart_point(rng: &mut impl Rng, n: usize, rmax: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-rmax..rmax)).collect();
        if x.iter().map(|a| a * a).sum::<f64>().sqrt() < rmax {
            return x;
        }
    }
}

pub fn sample_direction(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        if y.iter().map(|a| a * a).sum::<f64>().sqrt() > 0.2 {
            return y;
        }
    }
}
