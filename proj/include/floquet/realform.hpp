#pragma once

#include "floquet/projector.hpp"

namespace floquet {

/// Re-numeration of the eigenvalues on the imaginary axis for a real
/// problem: sigma conjugate pairs with Im in (0, pi), plus optional
/// exceptional points at 0 (identified with 2*pi*i) and at pi*i.
struct RealPairing {
  int sigma = 0;
  std::vector<int> sEntry;        // bundle entry of lambda_s, s = 1..sigma
  std::vector<int> partnerEntry;  // entry of lambda_{-s} = 2 pi i - lambda_s
  int zeroEntry = -1;             // -1 when absent
  int piEntry = -1;

  int eps0() const { return zeroEntry >= 0 ? 1 : 0; }
  int epsSigma1() const { return piEntry >= 0 ? 1 : 0; }
};

RealPairing renumber(const std::vector<PencilEigenvalue>& eigs, bool realFlag,
                     double tol = 1e-8);

/// One coordinate of the real reduced system. Hat/Tilde are the real and
/// imaginary coefficient parts of an s-block; exceptional blocks carry only
/// Hat coordinates.
struct RealCoord {
  enum class Block { Pair, Zero, Pi };
  enum class Part { Hat, Tilde };
  Block block;
  Part part;
  int s = 0;      // 0-based index into sEntry for Pair blocks
  int entry = 0;  // bundle entry index
  int j = 0;
  int m = 0;
};

/// Real-valued pointwise projector and coefficient map for real problems
/// built over the complex chain system. Exceptional chains are re-phased to
/// real representatives (anti-periodic ones through the e^{i pi t} transfer)
/// and hard-thresholded.
class RealProjectorBundle {
 public:
  RealProjectorBundle(std::shared_ptr<const ProjectorBundle> bundle,
                      RealPairing pairing, double tolImag = 1e-8);

  const ProjectorBundle& complexBundle() const { return *bundle_; }
  const RealPairing& pairing() const { return pairing_; }
  const std::vector<RealCoord>& layout() const { return layout_; }
  int dim() const { return bundle_->dim(); }
  int totalMultiplicity() const { return static_cast<int>(layout_.size()); }
  double rephaseResidual() const { return rephaseResidual_; }

  VecR applyP(double t, const VecR& v) const;
  VecR applyQ(double t, const VecR& v) const;
  MatR matrixP(double t) const;

  VecR extractAt(double t, const VecR& u) const;
  PathR extractCoefficients(const PathR& u) const;
  VecR reconstructU(double t, const VecR& coeffs) const;

  /// Real reduced matrix: 2x2 rotation blocks [[0, mu],[-mu, 0]] with unit
  /// chain coupling, and nilpotent blocks for the exceptional eigenvalues.
  MatR buildRealR() const;

 private:
  std::shared_ptr<const ProjectorBundle> bundle_;
  RealPairing pairing_;
  std::vector<RealCoord> layout_;
  // unit phases making the exceptional chains real, one per chain
  std::vector<Complex> zeroPhases_, piPhases_;
  double rephaseResidual_ = 0.0;

  Complex chainPhase(int entry, int j, bool antiPeriodic) const;
  VecC exceptionalPhi(const RealCoord& c, double t, bool flip) const;
  VecC exceptionalPsi(const RealCoord& c, double t) const;
};

struct ConjugationReport {
  double conjugationError = 0.0;  // P_{conj lambda} vs conj(P_lambda)
  double shiftError = 0.0;        // P_{lambda - 2 pi i} vs P_lambda
  bool pass = false;
};

/// Conjugation and 2*pi*i-shift identities of the per-eigenvalue projectors,
/// checked as matrix identities over the grid.
ConjugationReport verifyConjugation(const ProjectorBundle& bundle,
                                    double tol = 1e-9);

struct RealSystemCheck {
  PathR coeffs;              // real layout
  double reImMismatch = 0.0; // real coordinates vs Re/Im of the complex ones
};

/// Real right-hand-side coefficients of a real forcing path, with the
/// consistency check against the complex coefficient route.
RealSystemCheck realSystemRhs(const RealProjectorBundle& real,
                              const PathR& f);

/// Per-eigenvalue projector matrix (one k only); helper for the conjugation
/// checks and the sum decomposition.
MatC matrixPEntry(const ProjectorBundle& bundle, int entry, double t);

}  // namespace floquet
