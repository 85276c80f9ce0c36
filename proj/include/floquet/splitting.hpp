#pragma once

#include "floquet/projector.hpp"

namespace floquet {

/// Homogeneous solution basis Phi^k_{j,m}(t) = e^{lambda_k t} sum_{n<=m}
/// t^n/n! phi^k_{j,m-n}(t).
class PhiBasis {
 public:
  explicit PhiBasis(std::shared_ptr<const ProjectorBundle> bundle);

  const ProjectorBundle& bundle() const { return *bundle_; }
  int count() const { return bundle_->totalMultiplicity(); }

  VecC eval(const ThetaIndex& i, double t) const;
  /// sum_i c_i Phi_i(t) in theta order.
  VecC combine(const VecC& coeffs, double t) const;

  /// Yhat-norm bound of L Phi_{j,m} assembled from the chain residuals.
  double residual(const ProblemSpec& spec) const;

 private:
  std::shared_ptr<const ProjectorBundle> bundle_;
};

/// Splitting of C^n into monodromy-invariant parts by multiplier modulus:
/// |mu| < radiusLow (minus), |mu| > radiusHigh (plus), the rest (mid).
/// P_minus = basisMinus * coordMinus and likewise for plus.
struct SpectralSplit {
  double radiusLow = 0.0, radiusHigh = 0.0;
  MatC basisMinus, coordMinus, restMinus;
  MatC basisPlus, coordPlus, restPlus;
  int dimMid = 0;
  double rhoMinus = 0.0;    // spectral radius of the minus-side period map
  double rhoPlusInv = 0.0;  // spectral radius of the inverse plus-side map
  double conditionZ = 1.0;  // conditioning of the combined basis

  int dimMinus() const { return static_cast<int>(basisMinus.cols()); }
  int dimPlus() const { return static_cast<int>(basisPlus.cols()); }
  MatC projMinus() const { return basisMinus * coordMinus; }
  MatC projPlus() const { return basisPlus * coordPlus; }
};

SpectralSplit spectralSplit(const MatC& monodromy, double radiusLow,
                            double radiusHigh, double tolCluster = 1e-7,
                            double tolRank = 1e-7);

/// Green operator of the exponential dichotomy on the complement subspace:
///   V(t) =  int_{-inf}^t U(t) P_- U(s)^{-1} g(s) ds
///         - int_t^{inf}  U(t) P_+ U(s)^{-1} g(s) ds,
/// evaluated on grid windows with per-period renormalized propagation and
/// end-corrected trapezoid quadrature.
class DichotomyGreen {
 public:
  DichotomyGreen(std::shared_ptr<const FundamentalSolution> fund,
                 SpectralSplit split, double beta1, double beta2);

  const SpectralSplit& split() const { return split_; }
  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }
  /// decay margins of the two sided propagators relative to the strip edges
  double marginMinus() const;
  double marginPlus() const;

  /// Solve L V = g for the forcing sampled on a window (assumed zero
  /// outside); g must satisfy Q g = g up to tolerance for the remainder
  /// interpretation, but the kernel applies to any path. breakIndices lists
  /// global grid indices where g jumps, so the quadrature never interpolates
  /// across them.
  PathC solve(const PathC& g, const std::vector<long>& breakIndices = {}) const;

 private:
  std::shared_ptr<const FundamentalSolution> fund_;
  SpectralSplit split_;
  double beta1_, beta2_;
};

/// Dichotomy Green operator for the projector complement: splits at the two
/// strip radii and checks that P_- + P_+ matches I - P(0) on the bundle.
DichotomyGreen dichotomyGreen(std::shared_ptr<const FundamentalSolution> fund,
                              const ProjectorBundle& bundle,
                              const StripSpec& strip, double tolProj = 1e-7);

/// u(t) = e^{R(t-tau)} xi + int_tau^t e^{R(t-s)} f(s) ds on the window of f,
/// fourth-order exponential integrator with Gauss nodes on each interval.
template <class Scalar>
PathT<Scalar> solveFinite(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& r,
    const PathT<Scalar>& f, long tauIndex,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& xi);

/// Derivative of window samples by 8th-order finite differences (one-sided
/// stencils near the edges).
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> windowDerivative(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& samples,
    double dt);

/// || D_t u - R u - f || on the interior of the window, quadrature norm.
template <class Scalar>
double finiteResidual(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& r,
    const PathT<Scalar>& u, const PathT<Scalar>& f);

/// || L V - g ||, interior quadrature norm, derivative by windowDerivative.
double remainderResidual(const ProblemSpec& spec, const PathC& v,
                         const PathC& g);

struct SplitEstimate {
  std::vector<double> tau;
  std::vector<double> lhs;    // ||V; X(tau, tau+1)||
  std::vector<double> rhs;    // int mu(t - tau) ||Qf; Y(t,t+1)|| dt
  std::vector<double> ratio;  // lhs/rhs, 0 when both vanish
  double maxRatio = 0.0, minPositiveRatio = 0.0;
};

/// Weighted-estimate report for the remainder V against the forcing Qf.
SplitEstimate splitEstimate(const ProblemSpec& spec, const PathC& v,
                            const PathC& qf, const std::vector<double>& taus,
                            double beta1, double beta2);

struct AsymptoticExpansion {
  VecC coeffs;                    // theta order
  double expansionResidual = 0.0; // sup-norm of w - sum c Phi over the window
  PathC difference;               // u2 - u1
};

/// Difference of the two one-sided solutions of L u = f expanded in the Phi
/// basis by pointwise biorthogonality at t = 0 (which must lie in the
/// window).
AsymptoticExpansion asymptoticDifference(
    const ProblemSpec& spec, std::shared_ptr<const FundamentalSolution> fund,
    const PhiBasis& basis, const PathC& f,
    const std::vector<long>& breakIndices = {}, double tolRem = 1e-6);

struct BoundedExpansion {
  VecC coeffs;
  double reconstructionError = 0.0;
  double homogeneousResidual = 0.0;
};

/// Expansion of a polynomially bounded homogeneous solution in the Phi
/// basis; throws when the growth windows violate the strip bounds.
BoundedExpansion expandBoundedSolution(const ProblemSpec& spec,
                                       const PhiBasis& basis, const PathC& u,
                                       double tolRem = 1e-6);

}  // namespace floquet
