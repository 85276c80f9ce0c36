#include "floquet/fourier.hpp"

#include <unsupported/Eigen/FFT>

namespace floquet {

namespace {

void fftRow(Eigen::FFT<double>& fft, const MatC& in, MatC& out, bool inverse) {
  const int nt = static_cast<int>(in.cols());
  std::vector<Complex> buf(nt), res(nt);
  for (int r = 0; r < in.rows(); ++r) {
    for (int c = 0; c < nt; ++c) buf[c] = in(r, c);
    if (inverse)
      fft.inv(res, buf);
    else
      fft.fwd(res, buf);
    for (int c = 0; c < nt; ++c) out(r, c) = res[c];
  }
}

}  // namespace

MatC fourierCoefficients(const MatC& samples) {
  Eigen::FFT<double> fft;
  MatC out(samples.rows(), samples.cols());
  fftRow(fft, samples, out, false);
  out /= static_cast<double>(samples.cols());
  return out;
}

MatC fourierSamples(const MatC& coeffs) {
  Eigen::FFT<double> fft;
  MatC out(coeffs.rows(), coeffs.cols());
  fftRow(fft, coeffs * static_cast<double>(coeffs.cols()), out, true);
  return out;
}

MatC spectralDerivative(const MatC& samples) {
  const int nt = static_cast<int>(samples.cols());
  MatC coeffs = fourierCoefficients(samples);
  for (int m = 0; m < nt; ++m) {
    int f = signedFrequency(m, nt);
    if (2 * m == nt) f = 0;  // Nyquist
    coeffs.col(m) *= Complex(0.0, kTwoPi * f);
  }
  return fourierSamples(coeffs);
}

VecC evalTrigInterp(const MatC& coeffs, double t) {
  const int nt = static_cast<int>(coeffs.cols());
  VecC out = VecC::Zero(coeffs.rows());
  for (int m = 0; m < nt; ++m) {
    const int f = signedFrequency(m, nt);
    if (2 * m == nt) {
      out += coeffs.col(m) * std::cos(kTwoPi * f * t);
    } else {
      out += coeffs.col(m) * std::exp(Complex(0.0, kTwoPi * f * t));
    }
  }
  return out;
}

MatC spectralDiffMatrix(int nt) {
  // Row r of the identity is the cardinal function of node r; its spectral
  // derivative sampled at node i gives D(i, r).
  MatC id = MatC::Identity(nt, nt);
  return spectralDerivative(id).transpose();
}

}  // namespace floquet
