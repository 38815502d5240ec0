use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_SOBOL_DIM: usize = 64;
/// Longest supported prefix of the sequence.
pub const MAX_SOBOL_POINTS: usize = 1 << 16;

/// First `n` points of an Owen-scrambled `d`-dimensional Sobol sequence.
/// Different seeds give statistically independent scrambles.
pub fn sobol_points(n: usize, d: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if d == 0 || d > MAX_SOBOL_DIM {
        return Err(Error::SobolDimension(d));
    }
    if n == 0 || n > MAX_SOBOL_POINTS {
        return Err(Error::SobolLength {
            requested: n,
            max: MAX_SOBOL_POINTS,
        });
    }
    let seed = (seed ^ (seed >> 32)) as u32;
    Ok((0..n as u32)
        .map(|i| {
            (0..d as u32)
                .map(|k| sobol_burley::sample(i, k, seed) as f64)
                .collect()
        })
        .collect())
}
