#pragma once

#include <memory>

#include "floquet/pencil.hpp"

namespace floquet {

/// Index triple (k, j, m) into the chain table; ordered lexicographically
/// with eigenvalues sorted by (Re lambda, Im lambda).
struct ThetaIndex {
  int k = 0;
  int j = 0;
  int m = 0;
};

struct ProjectorConfig {
  double tolProj = 1e-7;
};

/// Pointwise projector P(t) built from a normalized chain system:
///   P(t) v = sum_{(k,j,m)} (v, psi^k_{j,m}(t))_Y phi^k_{j, m_kj-1-m}(t).
/// Chains are evaluated from stored samples on grid points and by
/// trigonometric interpolation elsewhere.
class ProjectorBundle {
 public:
  explicit ProjectorBundle(std::shared_ptr<const NormalizedChainSystem> sys,
                           ProjectorConfig cfg = {});

  const NormalizedChainSystem& system() const { return *sys_; }
  const std::vector<ThetaIndex>& theta() const { return theta_; }
  int totalMultiplicity() const { return static_cast<int>(theta_.size()); }
  int dim() const { return dim_; }
  const TimeGrid& grid() const { return sys_->grid; }

  VecC phi(const ThetaIndex& i, double t) const;
  VecC psi(const ThetaIndex& i, double t) const;
  /// phi^k_{j, m_kj-1-m}(t), the basis function paired with coefficient
  /// (k, j, m).
  VecC phiFlip(const ThetaIndex& i, double t) const;
  Complex lambda(int k) const { return sys_->entries[k].eig.lambda; }

  VecC applyP(double t, const VecC& v) const;
  VecC applyQ(double t, const VecC& v) const;
  MatC matrixP(double t) const;

  /// Coefficient vector {(u, psi^k_{j,m}(t))_Y} in theta order.
  VecC extractAt(double t, const VecC& u) const;
  PathC extractCoefficients(const PathC& u) const;
  VecC reconstructU(double t, const VecC& coeffs) const;

  /// The M x M constant matrix with (R u)^k_{j,m} = lambda_k u^k_{j,m} +
  /// u^k_{j,m-1}.
  MatC buildR() const;

 private:
  std::shared_ptr<const NormalizedChainSystem> sys_;
  ProjectorConfig cfg_;
  std::vector<ThetaIndex> theta_;
  int dim_ = 0;

  const MatC& phiSamples(const ThetaIndex& i) const;
  const MatC& psiSamples(const ThetaIndex& i) const;
  VecC evalChain(const MatC& samples, const MatC& coeffs, double t) const;
};

/// L u = D_t u + A(t) u for a path sampled on the periodic grid, derivative
/// by spectral differentiation.
MatC applyLPeriodic(const ProblemSpec& spec, const MatC& samples);

/// The scalar-system route for L(P u) (coefficientwise first-order
/// operators), for comparison against the direct evaluation.
MatC applyLPviaCoefficients(const ProjectorBundle& bundle,
                            const ProblemSpec& spec, const MatC& samples);

struct CommutationReport {
  double maxCommutator = 0.0;     // max over paths of ||L(Pu) - P(Lu)||_Yhat
  double maxTwoPathGap = 0.0;     // Eq-route vs direct route for L(Pu)
  bool pass = false;
  double tol = 0.0;
};

/// Commutation check on sampled periodic paths.
CommutationReport verifyCommutation(const ProjectorBundle& bundle,
                                    const ProblemSpec& spec,
                                    const std::vector<MatC>& testPaths,
                                    double tol = 1e-6);

/// Random trigonometric-polynomial path synthesis on the problem grid
/// (conjugate-symmetric when the problem is real).
MatC synthesizeTrigPath(const ProblemSpec& spec, int degree, uint64_t seed);

}  // namespace floquet
