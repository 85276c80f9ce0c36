#pragma once

#include <optional>

#include "floquet/expr.hpp"

namespace floquet {

/// The 1-periodic coefficient A(t): an n x n matrix of trigonometric
/// polynomials, evaluated exactly at any t.
struct PeriodicMatrixFunction {
  int n = 0;
  std::vector<TrigPoly> entries;  // row-major, n*n

  const TrigPoly& at(int i, int j) const { return entries[i * n + j]; }
  TrigPoly& at(int i, int j) { return entries[i * n + j]; }

  MatC eval(double t) const;
  int maxDegree() const;
  bool isReal(double tol = 0.0) const;
  double normBound() const;  // sum of coefficient magnitudes, crude sup bound
};

/// Evaluate A at t (argument reduced mod 1 first).
MatC evalOperator(const PeriodicMatrixFunction& a, double t);

/// A*(t) = gramY^{-1} A(t)^H gramY, the Y-adjoint.
MatC adjointAt(const PeriodicMatrixFunction& a, const InnerProductPair& ip,
               double t);

/// Polynomial nonlinearity f(t, mu, u) with trig-polynomial coefficients.
/// Tangency (no constant and no linear-in-u part at mu = mu0) is checked at
/// construction.
struct NonlinearTerm {
  int dim = 0;      // state dimension
  int nparams = 0;  // parameter dimension d
  VecR mu0;
  double muRadius = 1.0;
  std::vector<PolyExpr> comps;  // per output component

  int degree() const;
  VecC eval(double t, const VecC& mu, const VecC& u) const;
  VecR evalReal(double t, const VecR& mu, const VecR& u) const;
  /// True when f(t, mu, 0) == 0 identically in mu (syntactic check).
  bool vanishesAtZeroState() const;
  void checkTangency() const;  // throws ParseError naming the bad monomial
};

struct StripSpec {
  double beta1 = -0.5;
  double beta2 = 0.5;
  double margin = 1e-6;
};

struct ProblemSpec {
  int dim = 0;
  InnerProductPair ip;
  PeriodicMatrixFunction op;
  std::optional<NonlinearTerm> f;
  StripSpec strip;
  TimeGrid grid;
  bool realFlag = true;

  void validate() const;
};

/// Parse the documented problem-file format.
ProblemSpec parseProblem(const std::string& text);
ProblemSpec parseProblemFile(const std::string& path);

/// Canonical serialization; parseProblem(serializeProblem(s)) reproduces the
/// coefficient tables bit-exactly.
std::string serializeProblem(const ProblemSpec& spec);

VecC evalNonlinearity(const NonlinearTerm& f, double t, const VecC& mu,
                      const VecC& u);

}  // namespace floquet
