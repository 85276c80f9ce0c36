#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace floquet {

using Complex = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * EIGEN_PI;

/// Problem-file or expression syntax error. CLI exit code 2.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: singular system, ambiguous rank decision, integrator
/// breakdown. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked property fell outside its tolerance. CLI exit code 4.
class PropertyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reduce t to [0,1).
inline double mod1(double t) {
  double r = t - std::floor(t);
  return (r < 1.0) ? r : 0.0;
}

/// Equispaced samples of [0,1). nt is a power of two so that FFT-based
/// differentiation applies and the trapezoid rule integrates trigonometric
/// polynomials of degree < nt/2 exactly.
struct TimeGrid {
  int nt = 256;

  static bool isPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

  double dt() const { return 1.0 / nt; }
  double point(long i) const { return static_cast<double>(i) / nt; }
  /// i mod nt mapped to [0, nt), valid for negative i.
  int phase(long i) const {
    long r = i % nt;
    return static_cast<int>(r < 0 ? r + nt : r);
  }
  bool operator==(const TimeGrid& o) const { return nt == o.nt; }
};

/// The two SPD Gram matrices realizing the X- and Y-inner products on C^n.
struct InnerProductPair {
  MatR gramX;
  MatR gramY;

  static InnerProductPair identity(int n) {
    return InnerProductPair{MatR::Identity(n, n), MatR::Identity(n, n)};
  }

  int dim() const { return static_cast<int>(gramY.rows()); }

  /// (x, y)_Y = y^H G_Y x  (linear in the first argument).
  Complex dotY(const VecC& x, const VecC& y) const {
    return y.dot(gramY.cast<Complex>() * x);
  }
  double dotY(const VecR& x, const VecR& y) const { return y.dot(gramY * x); }

  double normY(const VecC& x) const { return std::sqrt(std::abs(dotY(x, x))); }
  double normY(const VecR& x) const { return std::sqrt(x.dot(gramY * x)); }
  double normX(const VecC& x) const {
    return std::sqrt(std::abs(x.dot(gramX.cast<Complex>() * x).real()));
  }
  double normX(const VecR& x) const { return std::sqrt(x.dot(gramX * x)); }

  void validate(double symTol = 1e-12) const;
};

/// Grid-aligned time window: nodes i/nt for integer i in [i0, i1].
struct WindowGrid {
  long i0 = 0;
  long i1 = 0;
  int nt = 256;

  long count() const { return i1 - i0 + 1; }
  double time(long k) const { return static_cast<double>(i0 + k) / nt; }
  long index(long k) const { return i0 + k; }
  int phase(long k) const {
    long r = (i0 + k) % nt;
    return static_cast<int>(r < 0 ? r + nt : r);
  }
  /// Node position of global grid index i, or -1 if outside.
  long locate(long i) const { return (i >= i0 && i <= i1) ? i - i0 : -1; }
};

/// Sampled path on a window; columns are time nodes.
template <class Scalar>
struct PathT {
  WindowGrid w;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> samples;

  PathT() = default;
  PathT(const WindowGrid& win, int dim)
      : w(win),
        samples(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(
            dim, win.count())) {}

  int dim() const { return static_cast<int>(samples.rows()); }
};

using PathC = PathT<Complex>;
using PathR = PathT<double>;

inline PathC toComplex(const PathR& p) {
  PathC q;
  q.w = p.w;
  q.samples = p.samples.cast<Complex>();
  return q;
}

std::string formatComplex(const Complex& z);

}  // namespace floquet
