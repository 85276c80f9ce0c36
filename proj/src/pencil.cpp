#include "floquet/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>

#include "floquet/fourier.hpp"
#include "linalg_internal.hpp"

namespace floquet {

namespace {

using namespace detail;

const Complex kI(0.0, 1.0);

struct JordanStructure {
  int geometric = 0;
  std::vector<int> partial;
};

/// Partial multiplicities of a (numerically) nilpotent matrix from kernel
/// dimensions of its powers.
JordanStructure nilpotentStructure(const MatC& nil, double tol) {
  const int a = static_cast<int>(nil.rows());
  std::vector<int> kdim{0};
  MatC p = MatC::Identity(a, a);
  for (int k = 1; k <= a; ++k) {
    p = p * nil;
    int d = 0;
    kernelBasis(p, tol, &d);
    kdim.push_back(d);
    if (d == a) break;
  }
  if (kdim.back() != a)
    throw NumericError("rank decision ambiguous: nilpotent part does not "
                       "exhaust the cluster space");
  JordanStructure s;
  s.geometric = kdim[1];
  // number of blocks of size >= k is kdim[k] - kdim[k-1]
  std::vector<int> atLeast;
  for (size_t k = 1; k < kdim.size(); ++k) atLeast.push_back(kdim[k] - kdim[k - 1]);
  for (int j = 0; j < s.geometric; ++j) {
    int len = 0;
    for (size_t k = 0; k < atLeast.size(); ++k)
      if (atLeast[k] >= j + 1) len = static_cast<int>(k) + 1;
    s.partial.push_back(len);
  }
  std::sort(s.partial.begin(), s.partial.end(), std::greater<int>());
  return s;
}

/// Deterministic chain vectors (restricted coordinates) of a nilpotent
/// matrix: eigenvectors per descending length, orthonormalized in the pulled
/// back Yhat metric gram; generalized vectors as minimal-norm bordered least
/// squares constrained to stay in range(nil^k).
std::vector<std::vector<VecC>> nilpotentChains(const MatC& nil,
                                               const std::vector<int>& lengths,
                                               const MatC& gram, double tol) {
  const int a = static_cast<int>(nil.rows());
  const int maxLen = lengths.empty() ? 0 : lengths.front();

  std::vector<MatC> ranges(static_cast<size_t>(maxLen) + 1);  // range(nil^k)
  ranges[0] = MatC::Identity(a, a);
  MatC pw = MatC::Identity(a, a);
  for (int k = 1; k <= maxLen; ++k) {
    pw = pw * nil;
    ranges[static_cast<size_t>(k)] = rangeBasis(pw, tol);
  }
  MatC ker = kernelBasis(nil, tol);

  std::vector<VecC> chosenEigvecs;
  std::vector<std::vector<VecC>> chains;

  for (size_t j = 0; j < lengths.size(); ++j) {
    const int len = lengths[j];
    // eigenvector candidates: ker(nil) intersect range(nil^{len-1})
    const MatC& r = ranges[static_cast<size_t>(len - 1)];
    MatC outside = ker - r * (r.adjoint() * ker);
    MatC combos = kernelBasis(outside, tol);
    if (combos.cols() == 0)
      throw NumericError("chain construction failure: empty eigenvector space");
    MatC cand = ker * combos;  // columns span the admissible eigenvectors

    // Gram-Schmidt in the Yhat metric against previously chosen eigenvectors
    VecC v0;
    bool found = false;
    for (int c = 0; c < cand.cols() && !found; ++c) {
      VecC v = cand.col(c);
      for (const auto& u : chosenEigvecs) {
        Complex proj = (u.adjoint() * gram * v)(0) / (u.adjoint() * gram * u)(0);
        v -= proj * u;
      }
      double nrm = std::sqrt(std::abs((v.adjoint() * gram * v)(0).real()));
      if (nrm > 1e-8) {
        v0 = v / nrm;
        found = true;
      }
    }
    if (!found)
      throw NumericError("chain construction failure: eigenvector selection "
                         "exhausted");
    chosenEigvecs.push_back(v0);

    std::vector<VecC> chain{v0};
    for (int m = 1; m < len; ++m) {
      const MatC& r2 = ranges[static_cast<size_t>(len - 1 - m)];
      MatC lhs = nil * r2;
      VecC z = lhs.completeOrthogonalDecomposition().solve(chain.back());
      VecC vm = r2 * z;
      if ((nil * vm - chain.back()).norm() > 1e3 * tol)
        throw NumericError("chain construction failure: bordered solve residual");
      chain.push_back(vm);
    }
    chains.push_back(std::move(chain));
  }
  return chains;
}

/// Pulled-back Yhat Gram of x -> e^{sgn*lambda*t} E(t) x for sampled
/// evolution E (exponent sign +1 adjoint, -1 forward).
MatC pulledBackGram(const std::vector<MatC>& evo, const MatC& basis,
                    const InnerProductPair& ip, Complex lambda, int sign) {
  const int nt = static_cast<int>(evo.size());
  const int a = static_cast<int>(basis.cols());
  MatC g = MatC::Zero(a, a);
  MatC gy = ip.gramY.cast<Complex>();
  for (int i = 0; i < nt; ++i) {
    double t = static_cast<double>(i) / nt;
    double w = std::exp(2.0 * sign * lambda.real() * t);
    MatC e = evo[static_cast<size_t>(i)] * basis;
    g += (w / nt) * (e.adjoint() * gy * e);
  }
  return g;
}

}  // namespace

void ChainSet::cacheFourier() {
  fourier.clear();
  fourier.resize(fn.size());
  for (size_t j = 0; j < fn.size(); ++j)
    for (const auto& s : fn[j]) fourier[j].push_back(fourierCoefficients(s));
}

Complex pairYhat(const InnerProductPair& ip, const MatC& a, const MatC& b) {
  const int nt = static_cast<int>(a.cols());
  MatC gy = ip.gramY.cast<Complex>();
  Complex s = 0.0;
  for (int i = 0; i < nt; ++i) s += b.col(i).dot(gy * a.col(i));
  return s / static_cast<double>(nt);
}

std::vector<PencilEigenvalue> stripEigenvalues(const FundamentalSolution& f,
                                               const StripSpec& strip,
                                               const PencilConfig& cfg) {
  Eigen::ComplexEigenSolver<MatC> es(f.monodromy, false);
  VecC mus = es.eigenvalues();

  const double scale = std::max(1.0, mus.cwiseAbs().maxCoeff());
  for (int i = 0; i < mus.size(); ++i) {
    double lm = std::log(std::abs(mus[i]));
    if (std::abs(lm - strip.beta1) <= strip.margin ||
        std::abs(lm - strip.beta2) <= strip.margin)
      throw NumericError(
          "strip-boundary violation: multiplier modulus exp(" +
          std::to_string(lm) + ") within margin of a strip boundary");
  }

  auto clusters = clusterMultipliers(mus, cfg.tolCluster * scale);
  std::vector<PencilEigenvalue> out;
  const double rlo = std::exp(strip.beta1), rhi = std::exp(strip.beta2);
  for (const auto& c : clusters) {
    double r = std::abs(c.mu);
    if (r <= rlo || r >= rhi) continue;
    PencilEigenvalue e;
    e.mu = c.mu;
    e.lambda = canonicalLambda(c.mu);
    e.algebraic = c.count;
    e.clusterSpread = c.spread;
    // Jordan structure from the restricted nilpotent part
    MatC basis, b;
    invariantRestriction(f.monodromy, c.mu, c.count, cfg.tolRank, &basis, &b);
    MatC nil = nilpotentLog(b, c.mu);
    JordanStructure js = nilpotentStructure(nil, cfg.tolRank * scale);
    e.geometric = js.geometric;
    e.partial = js.partial;
    if (std::accumulate(e.partial.begin(), e.partial.end(), 0) != e.algebraic)
      throw NumericError("ill-conditioned multiplier cluster: partial "
                         "multiplicities do not sum to the cluster size");
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return lambdaLess(a.lambda, b.lambda);
  });
  return out;
}

double chainResidual(const ProblemSpec& spec, Complex lambda,
                     const std::vector<MatC>& chain, bool adjoint) {
  const int nt = spec.grid.nt;
  double worst = 0.0;
  for (size_t m = 0; m < chain.size(); ++m) {
    MatC d = spectralDerivative(chain[m]);
    MatC res(spec.dim, nt);
    for (int i = 0; i < nt; ++i) {
      double t = spec.grid.point(i);
      if (!adjoint) {
        res.col(i) = d.col(i) + (evalOperator(spec.op, t) +
                                 lambda * MatC::Identity(spec.dim, spec.dim)) *
                                    chain[m].col(i);
      } else {
        res.col(i) = -d.col(i) + (adjointAt(spec.op, spec.ip, t) +
                                  std::conj(lambda) *
                                      MatC::Identity(spec.dim, spec.dim)) *
                                     chain[m].col(i);
      }
      if (m > 0) res.col(i) += chain[m - 1].col(i);
    }
    worst = std::max(worst, std::sqrt(std::abs(pairYhat(spec.ip, res, res))));
  }
  return worst;
}

namespace {

ChainSet buildChains(const ProblemSpec& spec, const FundamentalSolution& f,
                     const PencilEigenvalue& eig, const PencilConfig& cfg,
                     bool adjoint) {
  const int nt = spec.grid.nt;
  const double scale = std::max(1.0, f.monodromy.norm());

  std::vector<MatC> evo;  // sampled evolution used for reconstruction
  MatC m;                 // its period map
  Complex mu, expFactor;
  if (!adjoint) {
    evo = f.u;
    m = f.monodromy;
    mu = eig.mu;
  } else {
    AdjointSolution a = adjointSolution(f, spec.ip);
    evo = std::move(a.w);
    m = a.monodromy;
    mu = 1.0 / std::conj(eig.mu);
  }

  MatC basis, b;
  invariantRestriction(m, mu, eig.algebraic, cfg.tolRank, &basis, &b);
  MatC nil = nilpotentLog(b, mu);
  if (adjoint) nil = -nil;  // period map restricted is mu * exp(-N) here

  JordanStructure js = nilpotentStructure(nil, cfg.tolRank * scale);
  if (js.partial != eig.partial)
    throw NumericError("adjoint/forward Jordan structures disagree");

  MatC gram = pulledBackGram(evo, basis, spec.ip, eig.lambda, adjoint ? 1 : -1);
  auto chains =
      nilpotentChains(nil, eig.partial, gram, cfg.tolRank * scale);

  ChainSet cs;
  cs.fn.resize(chains.size());
  for (size_t j = 0; j < chains.size(); ++j) {
    std::vector<MatC> built;
    for (size_t mIdx = 0; mIdx < chains[j].size(); ++mIdx) {
      VecC v = basis * chains[j][mIdx];
      MatC fnSamples(spec.dim, nt);
      for (int i = 0; i < nt; ++i) {
        double t = spec.grid.point(i);
        VecC ivp = evo[static_cast<size_t>(i)] * v;
        VecC val;
        if (!adjoint) {
          // phi_m(t) = e^{-lambda t} U(t) v_m - sum_{k>=1} t^k/k! phi_{m-k}(t)
          val = std::exp(-eig.lambda * t) * ivp;
          for (size_t k = 1; k <= mIdx; ++k)
            val -= std::pow(t, static_cast<double>(k)) / factorial(static_cast<int>(k)) *
                   built[mIdx - k].col(i);
        } else {
          // psi_m(t) = e^{conj(lambda) t} sum_k t^k/k! W(t) w_{m-k}
          VecC acc = ivp;
          for (size_t k = 1; k <= mIdx; ++k) {
            VecC w = basis * chains[j][mIdx - k];
            acc += std::pow(t, static_cast<double>(k)) /
                   factorial(static_cast<int>(k)) *
                   (evo[static_cast<size_t>(i)] * w);
          }
          val = std::exp(std::conj(eig.lambda) * t) * acc;
        }
        fnSamples.col(i) = val;
      }
      built.push_back(std::move(fnSamples));
    }
    cs.fn[j] = std::move(built);
  }

  for (size_t j = 0; j < cs.fn.size(); ++j)
    cs.maxResidual = std::max(
        cs.maxResidual, chainResidual(spec, eig.lambda, cs.fn[j], adjoint));
  double tol = cfg.tolChain * std::max(1.0, spec.op.normBound());
  if (cs.maxResidual > tol)
    throw NumericError("chain residual " + std::to_string(cs.maxResidual) +
                       " exceeds tolerance " + std::to_string(tol));
  cs.cacheFourier();
  return cs;
}

}  // namespace

ChainSet jordanChains(const ProblemSpec& spec, const FundamentalSolution& f,
                      const PencilEigenvalue& eig, const PencilConfig& cfg) {
  return buildChains(spec, f, eig, cfg, false);
}

ChainSet adjointChains(const ProblemSpec& spec, const FundamentalSolution& f,
                       const PencilEigenvalue& eig, const PencilConfig& cfg) {
  return buildChains(spec, f, eig, cfg, true);
}

namespace {

// flatten (j, m) -> linear index per spec ordering
std::vector<std::pair<int, int>> flatIndices(const std::vector<int>& partial) {
  std::vector<std::pair<int, int>> idx;
  for (size_t j = 0; j < partial.size(); ++j)
    for (int m = 0; m < partial[j]; ++m)
      idx.push_back({static_cast<int>(j), m});
  return idx;
}

}  // namespace

NormalizedChainSystem normalize(const ProblemSpec& spec,
                                const FundamentalSolution& f,
                                const std::vector<PencilEigenvalue>& eigs,
                                std::vector<ChainSet> phis,
                                std::vector<ChainSet> psis,
                                const PencilConfig& cfg) {
  NormalizedChainSystem sys;
  sys.grid = spec.grid;
  sys.ip = spec.ip;
  sys.strip = spec.strip;

  for (size_t k = 0; k < eigs.size(); ++k) {
    const auto& eig = eigs[k];
    auto idx = flatIndices(eig.partial);
    const int a = eig.algebraic;

    MatC s(a, a), e = MatC::Zero(a, a);
    for (int r = 0; r < a; ++r) {
      auto [j, m] = idx[static_cast<size_t>(r)];
      for (int c = 0; c < a; ++c) {
        auto [jj, mm] = idx[static_cast<size_t>(c)];
        s(r, c) = pairYhat(spec.ip, phis[k].fn[j][static_cast<size_t>(m)],
                           psis[k].fn[jj][static_cast<size_t>(mm)]);
        if (j == jj && m == eig.partial[static_cast<size_t>(j)] - 1 - mm)
          e(r, c) = 1.0;
      }
    }

    Eigen::JacobiSVD<MatC> svd(s);
    double cond = svd.singularValues()(0) /
                  std::max(svd.singularValues()(a - 1), 1e-300);
    if (!(svd.singularValues()(a - 1) > 1e-12 * svd.singularValues()(0)))
      throw NumericError("singular Gram block (defective numerical chains)");

    MatC tr = s.partialPivLu().solve(e).conjugate();

    // psi_new[col] = sum_r psi_old[r] * tr(r, col)
    ChainSet fresh;
    fresh.fn.resize(phis[k].fn.size());
    for (int c = 0; c < a; ++c) {
      auto [jj, mm] = idx[static_cast<size_t>(c)];
      MatC acc = MatC::Zero(spec.dim, spec.grid.nt);
      for (int r = 0; r < a; ++r) {
        auto [j2, m2] = idx[static_cast<size_t>(r)];
        acc += tr(r, c) * psis[k].fn[j2][static_cast<size_t>(m2)];
      }
      fresh.fn[static_cast<size_t>(jj)].push_back(std::move(acc));
    }
    fresh.maxResidual =
        [&] {
          double worst = 0.0;
          for (const auto& ch : fresh.fn)
            worst = std::max(worst,
                             chainResidual(spec, eig.lambda, ch, true));
          return worst;
        }();
    double tolC = cfg.tolChain * std::max(1.0, spec.op.normBound());
    if (fresh.maxResidual > 10.0 * tolC)
      throw NumericError("normalized adjoint chains lost the chain property");
    fresh.cacheFourier();

    EigenPair pair;
    pair.eig = eig;
    pair.phi = std::move(phis[k]);
    pair.psi = std::move(fresh);
    pair.gramCondition = cond;
    sys.entries.push_back(std::move(pair));
    sys.totalMultiplicity += a;
    sys.maxChainResidual =
        std::max(sys.maxChainResidual, sys.entries.back().phi.maxResidual);
    sys.maxAdjointResidual =
        std::max(sys.maxAdjointResidual, sys.entries.back().psi.maxResidual);
  }

  // full biorthogonality check, including cross-eigenvalue pairs
  for (auto& ek : sys.entries) {
    double worst = 0.0;
    for (auto& eK : sys.entries) {
      for (int j = 0; j < ek.phi.chains(); ++j)
        for (int m = 0; m < ek.phi.length(j); ++m)
          for (int J = 0; J < eK.psi.chains(); ++J)
            for (int M = 0; M < eK.psi.length(J); ++M) {
              Complex v = pairYhat(
                  spec.ip, ek.phi.fn[j][static_cast<size_t>(m)],
                  eK.psi.fn[J][static_cast<size_t>(
                      eK.eig.partial[static_cast<size_t>(J)] - 1 - M)]);
              double expect = (&ek == &eK && j == J && m == M) ? 1.0 : 0.0;
              worst = std::max(worst, std::abs(v - expect));
            }
    }
    ek.biorthError = worst;
    sys.maxBiorthError = std::max(sys.maxBiorthError, worst);
  }
  if (sys.maxBiorthError > cfg.tolBiorth)
    throw NumericError("biorthogonality residual " +
                       std::to_string(sys.maxBiorthError) + " exceeds " +
                       std::to_string(cfg.tolBiorth));
  return sys;
}

NormalizedChainSystem buildChainSystem(const ProblemSpec& spec,
                                       const FundamentalSolution& f,
                                       const PencilConfig& cfg) {
  auto eigs = stripEigenvalues(f, spec.strip, cfg);
  std::vector<ChainSet> phis, psis;
  for (const auto& e : eigs) {
    phis.push_back(jordanChains(spec, f, e, cfg));
    psis.push_back(adjointChains(spec, f, e, cfg));
  }
  return normalize(spec, f, eigs, std::move(phis), std::move(psis), cfg);
}

PointwiseReport verifyPointwiseBiorthogonality(const NormalizedChainSystem& sys,
                                               double tol) {
  PointwiseReport rep;
  rep.tol = tol;
  MatC gy = sys.ip.gramY.cast<Complex>();
  const int nt = sys.grid.nt;
  for (const auto& ek : sys.entries)
    for (const auto& eK : sys.entries)
      for (int j = 0; j < ek.phi.chains(); ++j)
        for (int m = 0; m < ek.phi.length(j); ++m)
          for (int J = 0; J < eK.psi.chains(); ++J)
            for (int M = 0; M < eK.psi.length(J); ++M) {
              const MatC& a =
                  ek.phi.fn[j][static_cast<size_t>(
                      ek.eig.partial[static_cast<size_t>(j)] - 1 - m)];
              const MatC& b = eK.psi.fn[J][static_cast<size_t>(M)];
              double expect =
                  (&ek == &eK && j == J && m == M) ? 1.0 : 0.0;
              for (int i = 0; i < nt; ++i) {
                Complex v = b.col(i).dot(gy * a.col(i));
                rep.maxDeviation =
                    std::max(rep.maxDeviation, std::abs(v - expect));
              }
            }
  rep.pass = rep.maxDeviation <= tol;
  return rep;
}

// --- collocation oracle ------------------------------------------------------

namespace {

MatC collocationMatrix(const ProblemSpec& spec, int nc) {
  MatC t = spectralDiffMatrix(nc);
  const int n = spec.dim;
  MatC c = MatC::Zero(n * nc, n * nc);
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nc; ++j)
      c.block(i * n, j * n, n, n) =
          t(i, j) * MatC::Identity(n, n);
    c.block(i * n, i * n, n, n) +=
        spec.op.eval(static_cast<double>(i) / nc);
  }
  return c;
}

}  // namespace

std::vector<CollocationEigen> collocationEigens(const ProblemSpec& spec,
                                                int nc, double tolCluster) {
  MatC c = -collocationMatrix(spec, nc);
  Eigen::ComplexEigenSolver<MatC> es(c, false);
  VecC lam = es.eigenvalues();

  // keep strip eigenvalues away from the aliasing region
  std::vector<Complex> inStrip;
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i].real() > spec.strip.beta1 && lam[i].real() < spec.strip.beta2 &&
        std::abs(lam[i].imag()) < 0.75 * EIGEN_PI * nc)
      inStrip.push_back(lam[i]);

  // pick a window Im in [shift, shift + 2*pi) whose boundary stays clear of
  // every eigenvalue, so each 2*pi*i tower contributes exactly one member
  double shift = 0.0;
  for (double s : {0.0, 0.3, 0.6, 0.9, 1.2, 1.5}) {
    bool ok = true;
    for (const auto& z : inStrip) {
      double im = z.imag() - s;
      double frac = im - kTwoPi * std::floor(im / kTwoPi);
      if (std::min(frac, kTwoPi - frac) < 0.05) ok = false;
    }
    if (ok) {
      shift = s;
      break;
    }
  }

  std::vector<Complex> window;
  for (const auto& z : inStrip) {
    if (z.imag() < shift || z.imag() >= shift + kTwoPi) continue;
    double im = z.imag();
    // canonical branch Im in [0, 2*pi); the 0.05 boundary clearance makes
    // the wrap decision unambiguous
    if (im > kTwoPi - 0.05) im -= kTwoPi;
    if (std::abs(im) < 1e-300) im = 0.0;
    window.push_back(Complex(z.real(), im));
  }

  VecC v(static_cast<long>(window.size()));
  for (size_t i = 0; i < window.size(); ++i) v[static_cast<long>(i)] = window[i];
  auto clusters = clusterMultipliers(v, tolCluster);

  std::vector<CollocationEigen> out;
  for (const auto& cl : clusters) {
    CollocationEigen ce;
    ce.lambda = cl.mu;
    ce.algebraic = cl.count;
    out.push_back(ce);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return lambdaLess(a.lambda, b.lambda);
  });
  return out;
}

std::vector<double> resolventSweep(const ProblemSpec& spec, double beta,
                                   const std::vector<double>& xiGrid, int nc) {
  const int n = spec.dim;
  MatC base = collocationMatrix(spec, nc);

  Eigen::SelfAdjointEigenSolver<MatR> es(spec.ip.gramY);
  MatR ghalf = es.operatorSqrt();
  MatR ghalfInv = es.operatorInverseSqrt();
  MatC big = MatC::Identity(n * nc, n * nc);
  MatC bigInv = big;
  for (int i = 0; i < nc; ++i) {
    big.block(i * n, i * n, n, n) = ghalf.cast<Complex>();
    bigInv.block(i * n, i * n, n, n) = ghalfInv.cast<Complex>();
  }

  std::vector<double> out;
  for (double xi : xiGrid) {
    MatC c = base + Complex(beta, xi) * MatC::Identity(n * nc, n * nc);
    MatC w = big * c * bigInv;
    Eigen::JacobiSVD<MatC> svd(w);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin < 1e-12 * svd.singularValues()(0))
      throw NumericError(
          "resolvent sweep hit a singular system: delta_beta contains an "
          "eigenvalue (xi = " +
          std::to_string(xi) + ")");
    out.push_back(1.0 / smin);
  }
  return out;
}

}  // namespace floquet
