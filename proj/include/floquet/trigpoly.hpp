#pragma once

#include "floquet/common.hpp"

namespace floquet {

/// Scalar 1-periodic trigonometric polynomial stored as complex Fourier
/// coefficients: p(t) = sum_{|m| <= deg} c_m e^{2 pi i m t}. The
/// representation is intrinsically periodic, so p(t+1) = p(t) holds exactly.
class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(Complex constant);

  static TrigPoly cosine(int m, Complex amplitude = 1.0);
  static TrigPoly sine(int m, Complex amplitude = 1.0);

  int degree() const { return deg_; }
  bool isZero() const;
  /// True when all sample values are real (conjugate-symmetric coefficients).
  bool isReal(double tol = 0.0) const;

  Complex coeff(int m) const;
  void setCoeff(int m, Complex c);

  Complex eval(double t) const;
  double evalReal(double t) const { return eval(t).real(); }

  TrigPoly derivative() const;
  TrigPoly conjugated() const;

  TrigPoly& operator+=(const TrigPoly& o);
  TrigPoly& operator-=(const TrigPoly& o);
  friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
  friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b);
  friend TrigPoly operator*(Complex s, TrigPoly a);
  TrigPoly pow(int e) const;

  double maxAbsCoeff() const;
  /// Drop exact-zero leading harmonics (no tolerance rounding).
  void shrink();

  bool identicalTo(const TrigPoly& o) const;  // bit-exact coefficient tables

  /// Canonical expression string: "c0 + a*cos(2*pi*m*t) + b*sin(2*pi*m*t)".
  std::string toString(bool realProblem) const;

 private:
  // coefficient for frequency m at index m + deg_; empty means zero
  int deg_ = 0;
  std::vector<Complex> c_;

  void ensureDegree(int d);
};

}  // namespace floquet
