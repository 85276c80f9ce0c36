#pragma once

#include <functional>

#include "floquet/problem.hpp"

namespace floquet {

struct IntegratorConfig {
  int substeps = 16;  // RK4 substeps per grid interval
  double tolLiouville = 1e-8;
  double tolResidualFactor = 1e-7;  // residual bound is factor * max|A|
};

struct IntegratorInfo {
  int order = 4;
  int substeps = 16;
  long steps = 0;
  double estimatedLocalError = 0.0;
  double liouvilleError = 0.0;   // relative det M error
  double residual = 0.0;         // max grid residual of U' + A U
};

/// Fundamental solution U(t) of u' + A(t)u = 0 with U(0) = I, sampled on the
/// grid, together with the monodromy M = U(1) and the stored inverses.
struct FundamentalSolution {
  TimeGrid grid;
  std::vector<MatC> u;     // U(t_i), i = 0..nt-1
  std::vector<MatC> uinv;  // U(t_i)^{-1}
  MatC monodromy;
  MatC monodromyInv;
  IntegratorInfo info;

  int dim() const { return static_cast<int>(monodromy.rows()); }

  /// U at an arbitrary grid index (cocycle extension: U(t+1) = U(t) M).
  MatC at(long index) const;
  MatC invAt(long index) const;
};

FundamentalSolution fundamentalMatrix(const ProblemSpec& spec,
                                      const IntegratorConfig& cfg = {});

/// Adjoint evolution W(t) with W' = A*(t) W, W(0) = I, obtained from the
/// identity W = G^{-1} U^{-H} G; W(1) is the adjoint monodromy.
struct AdjointSolution {
  std::vector<MatC> w;
  MatC monodromy;
};
AdjointSolution adjointSolution(const FundamentalSolution& f,
                                const InnerProductPair& ip);

/// Integrate u' + A(t)u = forcing from t0 to t1; output sampled at grid
/// spacing starting at t0. forcing may be empty (homogeneous).
struct Trajectory {
  std::vector<double> times;
  MatC samples;  // n x times
};
Trajectory propagate(const ProblemSpec& spec, double t0, double t1,
                     const VecC& u0,
                     const std::function<VecC(double)>& forcing = nullptr,
                     const IntegratorConfig& cfg = {});

/// Max norm of U'(t_i) + A(t_i) U(t_i) over the grid, derivative from
/// 8th-order centered differences on the monodromy-extended samples.
double fundamentalResidual(const FundamentalSolution& f,
                           const ProblemSpec& spec);

}  // namespace floquet
