#pragma once

#include <map>
#include <mutex>
#include <optional>

#include "floquet/realform.hpp"
#include "floquet/splitting.hpp"

namespace floquet {

/// Cutoff chi(r): 1 on [0,1], 0 on [2,inf), a polynomial smoothstep of order
/// smoothOrder in between.
struct CutoffConfig {
  double epsilon = 0.2;
  int smoothOrder = 4;

  double chi(double r) const;
  double cutoffFactor(double coeffNorm, double stateNormX) const {
    return chi(coeffNorm / epsilon) * chi(stateNormX / epsilon);
  }
};

/// Exponentially weighted window around a grid-aligned anchor. The half
/// width is chosen so the dropped tails stay below 0.01 * tolFp.
struct WeightedWindow {
  double gamma = 0.25;
  long tauIndex = 0;
  long halfPeriods = 0;
  int nt = 256;

  WindowGrid window() const {
    return WindowGrid{tauIndex - halfPeriods * nt, tauIndex + halfPeriods * nt,
                      nt};
  }
  double tau() const { return static_cast<double>(tauIndex) / nt; }
};

WeightedWindow makeWeightedWindow(double beta, double gamma, double tolFp,
                                  long tauIndex, int nt);

struct WeightedNorms {
  double l2 = 0.0;  // plain weighted L2
  double h1 = 0.0;  // with the derivative term
};

/// e^{-2 gamma |t - tau|}-weighted L2/H1 norms of a coefficient path.
template <class Scalar>
WeightedNorms weightedCoeffNorms(const PathT<Scalar>& p, double tau,
                                 double gamma);

/// Weighted Y/X norms of a state path (X adds the Y-norm of the derivative).
template <class Scalar>
WeightedNorms weightedStateNorms(const PathT<Scalar>& p,
                                 const InnerProductPair& ip, double tau,
                                 double gamma);

struct FixedPointDiagnostics {
  int iterations = 0;
  double finalDiff = 0.0;
  double contractionFactor = 0.0;  // geometric mean of the last ratios
  bool converged = false;
};

template <class Scalar>
struct FpResult {
  PathT<Scalar> u;  // coefficient path
  PathT<Scalar> v;  // remainder path
  FixedPointDiagnostics diag;
};

/// Coordinate adapter for the reduction machinery over real problems.
class RealReduction {
 public:
  using Scalar = double;
  using Vec = VecR;
  using Mat = MatR;

  RealReduction(const ProblemSpec& spec,
                std::shared_ptr<const FundamentalSolution> fund,
                std::shared_ptr<const RealProjectorBundle> bundle);

  const ProblemSpec& spec() const { return *spec_; }
  int reducedDim() const { return bundle_->totalMultiplicity(); }
  int dim() const { return bundle_->dim(); }
  const Mat& reducedMatrix() const { return r_; }
  double beta() const;

  Vec extractAt(double t, const Vec& full) const {
    return bundle_->extractAt(t, full);
  }
  Vec reconstructU(double t, const Vec& coeffs) const {
    return bundle_->reconstructU(t, coeffs);
  }
  Vec applyQ(double t, const Vec& full) const {
    return bundle_->applyQ(t, full);
  }
  Vec evalF(double t, const VecR& mu, const Vec& full) const;
  double normX(const Vec& full) const { return spec_->ip.normX(full); }

  PathT<double> solveV(const PathT<double>& qf) const;

 private:
  const ProblemSpec* spec_;
  std::shared_ptr<const FundamentalSolution> fund_;
  std::shared_ptr<const RealProjectorBundle> bundle_;
  std::optional<DichotomyGreen> green_;
  Mat r_;
};

/// Same adapter over the complex bundle (problems not flagged real).
class ComplexReduction {
 public:
  using Scalar = Complex;
  using Vec = VecC;
  using Mat = MatC;

  ComplexReduction(const ProblemSpec& spec,
                   std::shared_ptr<const FundamentalSolution> fund,
                   std::shared_ptr<const ProjectorBundle> bundle);

  const ProblemSpec& spec() const { return *spec_; }
  int reducedDim() const { return bundle_->totalMultiplicity(); }
  int dim() const { return bundle_->dim(); }
  const Mat& reducedMatrix() const { return r_; }
  double beta() const;

  Vec extractAt(double t, const Vec& full) const {
    return bundle_->extractAt(t, full);
  }
  Vec reconstructU(double t, const Vec& coeffs) const {
    return bundle_->reconstructU(t, coeffs);
  }
  Vec applyQ(double t, const Vec& full) const {
    return bundle_->applyQ(t, full);
  }
  Vec evalF(double t, const VecR& mu, const Vec& full) const;
  double normX(const Vec& full) const { return spec_->ip.normX(full); }

  PathT<Complex> solveV(const PathT<Complex>& qf) const;

 private:
  const ProblemSpec* spec_;
  std::shared_ptr<const FundamentalSolution> fund_;
  std::shared_ptr<const ProjectorBundle> bundle_;
  std::optional<DichotomyGreen> green_;
  Mat r_;
};

struct FixedPointConfig {
  double tolFp = 1e-9;
  int maxIter = 60;
};

/// Contraction iteration for the cutoff-modified system: (u, V) is mapped
/// through the model solver until the successive weighted-norm difference
/// drops below tolFp.
template <class Red>
FpResult<typename Red::Scalar> fixedPoint(
    const Red& red, const CutoffConfig& cut, const WeightedWindow& win,
    const VecR& mu, const typename Red::Vec& xi,
    const FixedPointConfig& cfg = {},
    const FpResult<typename Red::Scalar>* warmStart = nullptr);

/// Linear model problem: u from the finite system with data (F, xi), V from
/// the dichotomy Green operator applied to G; reports the stability
/// constants of the two bounds.
template <class Red>
struct ModelSolveReport {
  PathT<typename Red::Scalar> u, v;
  double constU = 0.0;  // ||u||_H1 / (|xi| + ||F||_L2)
  double constV = 0.0;  // ||V||_X / ||G||_Y
};
template <class Red>
ModelSolveReport<Red> modelSolveK(const Red& red, const WeightedWindow& win,
                                  const PathT<typename Red::Scalar>& bigF,
                                  const typename Red::Vec& xi,
                                  const PathT<typename Red::Scalar>& bigG);

/// The reduction function h(tau, mu, xi) = V(tau) evaluated by cached
/// fixed-point solves; thread-safe value cache keyed by the quantized
/// arguments.
class ManifoldMap {
 public:
  ManifoldMap(RealReduction red, CutoffConfig cut, double gamma,
              FixedPointConfig cfg = {});

  const RealReduction& reduction() const { return red_; }
  const CutoffConfig& cutoff() const { return cut_; }
  double gamma() const { return gamma_; }
  const FixedPointConfig& config() const { return cfg_; }

  /// h at a grid-aligned tau.
  VecR value(double tau, const VecR& mu, const VecR& xi) const;
  /// Full fixed-point solve (no value cache, warm-started).
  FpResult<double> solve(long tauIndex, const VecR& mu, const VecR& xi) const;

  FixedPointDiagnostics lastDiagnostics() const;

 private:
  RealReduction red_;
  CutoffConfig cut_;
  double gamma_;
  FixedPointConfig cfg_;
  long halfPeriods_;

  mutable std::mutex lock_;
  mutable std::map<std::vector<long long>, VecR> cache_;
  mutable std::optional<FpResult<double>> warm_;
  mutable FixedPointDiagnostics lastDiag_;
};

struct ReducedTrajectory {
  std::vector<double> times;  // grid-aligned
  MatR coeffs;                // reduced coordinates per time
  MatR hval;                  // h along the trajectory
};

/// RK4 integration of the reduced system D_t u = R u + f(t, mu, U + h);
/// aborts when the trajectory leaves the ball of radius w1Radius.
ReducedTrajectory integrateReduced(const ManifoldMap& map, const VecR& mu,
                                   const VecR& xi0, double t0, double t1,
                                   long stepNodes, double w1Radius);

/// || L u_lift - f(t, mu, u_lift) || along the lifted trajectory at sampled
/// interior times, time derivative by centered differences on the grid.
double liftResidual(const ManifoldMap& map, const VecR& mu,
                    const ReducedTrajectory& traj, int samples = 8);

struct CaptureReport {
  double maxDeviation = 0.0;  // ||V(t) - h(t, u(t))|| after burn-in
  double burnIn = 3.0;
  bool pass = false;
};

/// Integrate the full nonlinear system and compare its remainder against h.
CaptureReport verifyBoundedSolutionCapture(const ManifoldMap& map,
                                           const VecR& mu, const VecR& u0,
                                           double tEnd, double burnIn,
                                           double tol);

struct PeriodicityReport {
  double periodicityError = 0.0;     // h(tau+1) vs h(tau)
  double zeroSectionError = 0.0;     // h(tau, mu, 0) when f(., mu, 0) = 0
  bool zeroSectionApplicable = false;
  bool pass = false;
};

PeriodicityReport verifyPeriodicityAndParameters(const ManifoldMap& map,
                                                 const VecR& muProbe,
                                                 const VecR& xiProbe,
                                                 double tol);

}  // namespace floquet
