//! Multidimensional FFT over row-major arrays (last axis fastest).

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

pub(crate) fn fftn(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let total: usize = shape.iter().product();
    assert_eq!(total, data.len());
    let mut planner = FftPlanner::new();
    let mut stride = 1;
    for &m in shape.iter().rev() {
        if m > 1 {
            let fft = planner.plan_fft(m, direction);
            let mut buf = vec![Complex64::default(); m];
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for block in 0..total / (m * stride) {
                for inner in 0..stride {
                    let base = block * m * stride + inner;
                    for (i, b) in buf.iter_mut().enumerate() {
                        *b = data[base + i * stride];
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for (i, b) in buf.iter().enumerate() {
                        data[base + i * stride] = *b;
                    }
                }
            }
        }
        stride *= m;
    }
}

/// Σ_k x_k e^{+2πi j·k/M}, unnormalized.
pub(crate) fn synthesize(data: &mut [Complex64], shape: &[usize]) {
    fftn(data, shape, FftDirection::Inverse)
}

/// (1/N) Σ_k x_k e^{−2πi j·k/M}: Fourier coefficients of grid samples.
pub(crate) fn analyze(data: &mut [Complex64], shape: &[usize]) {
    fftn(data, shape, FftDirection::Forward);
    let n = data.len() as f64;
    for v in data.iter_mut() {
        *v /= n;
    }
}
