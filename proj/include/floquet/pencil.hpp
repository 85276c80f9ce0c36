#pragma once

#include "floquet/propagator.hpp"

namespace floquet {

struct PencilConfig {
  double tolCluster = 1e-7;   // multiplier clustering, relative
  double tolRank = 1e-7;      // rank decisions, relative to ||M||
  double tolChain = 1e-8;     // chain residual, times problem scale
  double tolBiorth = 1e-8;
  double tolPointwise = 1e-7;
};

/// One pencil eigenvalue in the strip, with its Jordan structure. lambda is
/// the branch with Im in [0, 2*pi); mu = e^lambda is the Floquet multiplier.
struct PencilEigenvalue {
  Complex lambda;
  Complex mu;
  int geometric = 0;          // J_k
  std::vector<int> partial;   // m_{k,1} >= m_{k,2} >= ...
  int algebraic = 0;          // sum of partial
  double clusterSpread = 0.0; // max in-cluster multiplier distance
};

/// Sampled periodic chain functions of one eigenvalue: fn[j][m] holds the
/// n x nt samples of the m-th generalized function of chain j.
struct ChainSet {
  std::vector<std::vector<MatC>> fn;
  std::vector<std::vector<MatC>> fourier;  // cached coefficients, same shape
  double maxResidual = 0.0;

  int chains() const { return static_cast<int>(fn.size()); }
  int length(int j) const { return static_cast<int>(fn[j].size()); }
  void cacheFourier();
};

struct EigenPair {
  PencilEigenvalue eig;
  ChainSet phi;
  ChainSet psi;
  double gramCondition = 0.0;
  double biorthError = 0.0;
};

/// All eigenvalues in the strip with chains normalized per the unique
/// biorthogonality relations; entries sorted by (Re lambda, Im lambda).
struct NormalizedChainSystem {
  std::vector<EigenPair> entries;
  TimeGrid grid;
  InnerProductPair ip;
  StripSpec strip;
  int totalMultiplicity = 0;
  double maxChainResidual = 0.0;
  double maxAdjointResidual = 0.0;
  double maxBiorthError = 0.0;
};

std::vector<PencilEigenvalue> stripEigenvalues(const FundamentalSolution& f,
                                               const StripSpec& strip,
                                               const PencilConfig& cfg = {});

ChainSet jordanChains(const ProblemSpec& spec, const FundamentalSolution& f,
                      const PencilEigenvalue& eig,
                      const PencilConfig& cfg = {});

ChainSet adjointChains(const ProblemSpec& spec, const FundamentalSolution& f,
                       const PencilEigenvalue& eig,
                       const PencilConfig& cfg = {});

/// Replace the adjoint chains by the unique recombination satisfying the
/// normalization pairing, then verify the full biorthogonality table.
NormalizedChainSystem normalize(const ProblemSpec& spec,
                                const FundamentalSolution& f,
                                const std::vector<PencilEigenvalue>& eigs,
                                std::vector<ChainSet> phis,
                                std::vector<ChainSet> psis,
                                const PencilConfig& cfg = {});

/// Convenience: strip eigenvalues, both chain families, normalization.
NormalizedChainSystem buildChainSystem(const ProblemSpec& spec,
                                       const FundamentalSolution& f,
                                       const PencilConfig& cfg = {});

struct PointwiseReport {
  double maxDeviation = 0.0;
  bool pass = false;
  double tol = 0.0;
};
PointwiseReport verifyPointwiseBiorthogonality(
    const NormalizedChainSystem& sys, double tol = 1e-7);

/// Pencil residual || (D_t + A + lambda) phi_{j,m} + phi_{j,m-1} ||_Yhat of a
/// sampled chain (adjoint = true checks the -D_t + A* + conj(lambda) side).
double chainResidual(const ProblemSpec& spec, Complex lambda,
                     const std::vector<MatC>& chain, bool adjoint);

/// Quadrature pairing (a, b)_Yhat of two sampled periodic functions.
Complex pairYhat(const InnerProductPair& ip, const MatC& a, const MatC& b);

// --- independent collocation oracle ---------------------------------------

struct CollocationEigen {
  Complex lambda;      // Im in [0, 2*pi)
  int algebraic = 0;
};

/// Eigenvalues of the global space-time collocation matrix inside the strip,
/// folded to Im in [0, 2*pi). nc is the number of collocation nodes; odd
/// counts avoid the rank-deficient Nyquist mode of even periodic grids.
std::vector<CollocationEigen> collocationEigens(const ProblemSpec& spec,
                                                int nc = 33,
                                                double tolCluster = 1e-6);

/// ||A(beta + i xi)^{-1}||, Yhat operator norm, per sweep point.
std::vector<double> resolventSweep(const ProblemSpec& spec, double beta,
                                   const std::vector<double>& xiGrid,
                                   int nc = 33);

}  // namespace floquet
