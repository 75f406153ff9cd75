//! Closed forms of the base objectives, all minimized.

use std::f64::consts::{E, PI};

/// `Σ x_i²`
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `x_1² + 10⁶ Σ_{i>1} x_i²`
pub fn cigar(x: &[f64]) -> f64 {
    match x.split_first() {
        Some((first, rest)) => first * first + 1e6 * sphere(rest),
        None => 0.0,
    }
}

/// `Σ 10^{6(i-1)/(d-1)} x_i²`, condition number 10⁶.
pub fn ellipsoid(x: &[f64]) -> f64 {
    let d = x.len();
    if d == 1 {
        return x[0] * x[0];
    }
    x.iter().enumerate().map(|(i, v)| 10f64.powf(6.0 * i as f64 / (d - 1) as f64) * v * v).sum()
}

/// `10⁶ x_1² + Σ_{i>1} x_i²`
pub fn discus(x: &[f64]) -> f64 {
    match x.split_first() {
        Some((first, rest)) => 1e6 * first * first + sphere(rest),
        None => 0.0,
    }
}

/// `10d + Σ (x_i² − 10 cos 2πx_i)`
pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

/// `1 + Σ x_i²/4000 − Π cos(x_i/√i)`
pub fn griewank(x: &[f64]) -> f64 {
    let sum = sphere(x) / 4000.0;
    let prod: f64 = x.iter().enumerate().map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos()).product();
    1.0 + sum - prod
}

/// `Σ 100 (x_{i+1} − x_i²)² + (1 − x_i)²`, optimum at (1, …, 1).
pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
}

/// `−20 exp(−0.2 √(Σx²/d)) − exp(Σ cos(2πx)/d) + 20 + e`
pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let a = (sphere(x) / d).sqrt();
    let b = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * a).exp() - b.exp() + 20.0 + E
}

pub const LUNACEK_MU1: f64 = 2.5;

/// Lunacek bi-Rastrigin: `min(Σ(x−μ₁)², d + sΣ(x−μ₂)²) + 10Σ(1 − cos 2π(x−μ₁))`
/// with `μ₁ = 2.5`, `s = 1 − 1/(2√(d+20) − 8.2)`, `μ₂ = −√((μ₁² − 1)/s)`.
/// Optimum 0 at `x = μ₁`.
pub fn lunacek(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let s = 1.0 - 1.0 / (2.0 * (d + 20.0).sqrt() - 8.2);
    let mu2 = -((LUNACEK_MU1 * LUNACEK_MU1 - 1.0) / s).sqrt();
    let first: f64 = x.iter().map(|v| (v - LUNACEK_MU1).powi(2)).sum();
    let second: f64 = x.iter().map(|v| (v - mu2).powi(2)).sum();
    let third: f64 = x.iter().map(|v| 1.0 - (2.0 * PI * (v - LUNACEK_MU1)).cos()).sum();
    first.min(d + s * second) + 10.0 * third
}

pub const SCHWEFEL_ARGMIN: f64 = 420.968_746_359_982;

/// `418.9828872724338 d − Σ x_i sin(√|x_i|)`, optimum near 420.9687 per coordinate.
pub fn schwefel(x: &[f64]) -> f64 {
    418.982_887_272_433_8 * x.len() as f64 - x.iter().map(|v| v * v.abs().sqrt().sin()).sum::<f64>()
}

/// 0 on the closed ball of radius `radius`, distance to it outside.
pub fn plateau(x: &[f64], radius: f64) -> f64 {
    (sphere(x).sqrt() - radius).max(0.0)
}

/// `min(‖x‖², ‖x − c‖² − δ)`.
pub fn trap(x: &[f64], offset: &[f64], depth: f64) -> f64 {
    let far: f64 = x.iter().zip(offset).map(|(a, c)| (a - c) * (a - c)).sum();
    sphere(x).min(far - depth)
}
