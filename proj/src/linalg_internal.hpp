#pragma once

// Internal helpers shared by the pencil and splitting translation units.

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <functional>
#include <map>
#include <vector>

#include "floquet/common.hpp"

namespace floquet::detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Orthonormal basis of the (approximate) kernel of a, rank decided by the
/// absolute singular-value threshold tol.
inline MatC kernelBasis(const MatC& a, double tol, int* defect = nullptr) {
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int n = static_cast<int>(sv.size());
  int k = 0;
  while (k < n && sv[n - 1 - k] <= tol) ++k;
  if (defect) *defect = k;
  return svd.matrixV().rightCols(k);
}

/// Orthonormal basis of the range of a (left singular vectors above tol).
inline MatC rangeBasis(const MatC& a, double tol) {
  Eigen::JacobiSVD<MatC> svd(a, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  int k = 0;
  while (k < sv.size() && sv[k] > tol) ++k;
  return svd.matrixU().leftCols(k);
}

/// log(b/mu) for b with all eigenvalues clustered at mu; nilpotent, computed
/// by the Mercator series which terminates at the matrix dimension.
inline MatC nilpotentLog(const MatC& b, Complex mu) {
  const int a = static_cast<int>(b.rows());
  MatC x = b / mu - MatC::Identity(a, a);
  MatC term = x;
  MatC out = MatC::Zero(a, a);
  for (int p = 1; p <= a; ++p) {
    out += (p % 2 == 1 ? 1.0 : -1.0) / p * term;
    term = term * x;
  }
  return out;
}

struct ClusteredMultiplier {
  Complex mu;
  int count = 0;
  double spread = 0.0;
};

inline std::vector<ClusteredMultiplier> clusterMultipliers(const VecC& mus,
                                                           double tolAbs) {
  const int n = static_cast<int>(mus.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(mus[i] - mus[j]) <= tolAbs) parent[find(i)] = find(j);
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<ClusteredMultiplier> out;
  for (const auto& [root, idx] : groups) {
    ClusteredMultiplier c;
    Complex sum = 0.0;
    for (int i : idx) sum += mus[i];
    c.mu = sum / static_cast<double>(idx.size());
    c.count = static_cast<int>(idx.size());
    for (int i : idx) c.spread = std::max(c.spread, std::abs(mus[i] - c.mu));
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.mu.real() != b.mu.real()) return a.mu.real() < b.mu.real();
    return a.mu.imag() < b.mu.imag();
  });
  return out;
}

/// ordering with a small tolerance so near-ties in Re do not flip between
/// computation routes
inline bool lambdaLess(Complex a, Complex b) {
  if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
  return a.imag() < b.imag();
}

inline Complex canonicalLambda(Complex mu) {
  Complex l = std::log(mu);
  double im = l.imag();
  while (im < 0.0) im += kTwoPi;
  while (im >= kTwoPi) im -= kTwoPi;
  return Complex(l.real(), im);
}

/// Restriction of m to the invariant subspace of the multiplier cluster at
/// mu with algebraic multiplicity alg.
inline void invariantRestriction(const MatC& m, Complex mu, int alg,
                                 double tolRank, MatC* basis,
                                 MatC* restricted) {
  const int n = static_cast<int>(m.rows());
  MatC shifted = m - mu * MatC::Identity(n, n);
  MatC power = MatC::Identity(n, n);
  for (int p = 0; p < alg; ++p) power = power * shifted;
  double tol = tolRank * std::pow(std::max(1.0, m.norm()), alg);
  int defect = 0;
  MatC w = kernelBasis(power, tol, &defect);
  if (defect != alg)
    throw NumericError(
        "rank decision ambiguous: invariant subspace dimension " +
        std::to_string(defect) + " != algebraic multiplicity " +
        std::to_string(alg));
  *basis = w;
  *restricted = w.adjoint() * m * w;
}

inline double spectralRadius(const MatC& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::ComplexEigenSolver<MatC> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace floquet::detail
