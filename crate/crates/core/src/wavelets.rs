//! Dyadic diffusion wavelets `Ψ_j = P^{2^{j-1}} − P^{2^j}`.
//!
//! Powers of the lazy walk are obtained by repeated sparse application to the
//! signal, so a full transform at `J` scales costs exactly `2^J` walk steps and
//! `O(n)` working memory per intermediate.

use crate::graph::{Graph, GraphError};

/// `[P^{2^j} x : j = 0..=scales]`, i.e. `scales + 1` diffused copies of `x`.
pub fn dyadic_diffusion(g: &Graph, x: &[f64], scales: usize) -> Result<Vec<Vec<f64>>, GraphError> {
    assert!(scales >= 1, "wavelet transform needs at least one scale");
    let mut current = g.lazy_walk(x)?;
    let mut scratch = vec![0.0; current.len()];
    let mut out = Vec::with_capacity(scales + 1);
    let mut steps = 1usize;
    out.push(current.clone());
    for j in 1..=scales {
        let target = 1usize << j;
        while steps < target {
            g.lazy_walk_into(&current, &mut scratch);
            std::mem::swap(&mut current, &mut scratch);
            steps += 1;
        }
        out.push(current.clone());
    }
    Ok(out)
}

/// The equivariant wavelet stack `{Ψ_j x : 1 ≤ j ≤ J}` of one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    /// `coeffs[j - 1] = Ψ_j x`.
    pub coeffs: Vec<Vec<f64>>,
    /// `P^{2^J} x`, kept for diagnostics; not a scattering feature.
    pub lowpass: Vec<f64>,
}

impl WaveletCoefficients {
    pub fn scales(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scale(&self, j: usize) -> &[f64] {
        &self.coeffs[j - 1]
    }
}

pub fn wavelet_transform(g: &Graph, x: &[f64], scales: usize) -> Result<WaveletCoefficients, GraphError> {
    let mut diffused = dyadic_diffusion(g, x, scales)?;
    let coeffs = diffused
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect())
        .collect();
    let lowpass = diffused.pop().unwrap_or_default();
    Ok(WaveletCoefficients { coeffs, lowpass })
}
