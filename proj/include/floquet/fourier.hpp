#pragma once

#include "floquet/common.hpp"

namespace floquet {

// FFT-backed helpers for 1-periodic sampled functions. Sample matrices hold
// one component per row and one grid node per column (nt columns).

/// Discrete Fourier coefficients c_m, m = 0..nt-1 (frequency m > nt/2 aliases
/// to m - nt), normalized so samples(t_i) = sum_m c_m e^{2 pi i m t_i}.
MatC fourierCoefficients(const MatC& samples);

/// Inverse of fourierCoefficients.
MatC fourierSamples(const MatC& coeffs);

/// Signed frequency of coefficient index m on an nt-point grid.
inline int signedFrequency(int m, int nt) { return (m <= nt / 2) ? m : m - nt; }

/// Derivative samples of a periodic function by spectral differentiation.
/// The Nyquist mode is dropped, the standard convention for even nt.
MatC spectralDerivative(const MatC& samples);

/// Evaluate the trigonometric interpolant at arbitrary t from Fourier
/// coefficients. The Nyquist coefficient is split symmetrically.
VecC evalTrigInterp(const MatC& coeffs, double t);

/// Dense spectral differentiation matrix D for an nt-point periodic grid:
/// (D u)(t_i) = u'(t_i) exactly for trig polynomials of degree < nt/2.
MatC spectralDiffMatrix(int nt);

}  // namespace floquet
