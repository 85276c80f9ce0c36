#include "floquet/splitting.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "floquet/fourier.hpp"
#include "linalg_internal.hpp"

namespace floquet {

using detail::clusterMultipliers;
using detail::invariantRestriction;
using detail::spectralRadius;

// --- PhiBasis ----------------------------------------------------------------

PhiBasis::PhiBasis(std::shared_ptr<const ProjectorBundle> bundle)
    : bundle_(std::move(bundle)) {
  if (!bundle_) throw NumericError("phi basis needs a projector bundle");
}

VecC PhiBasis::eval(const ThetaIndex& i, double t) const {
  VecC out = VecC::Zero(bundle_->dim());
  double tn = 1.0;
  for (int n = 0; n <= i.m; ++n) {
    out += tn * bundle_->phi(ThetaIndex{i.k, i.j, i.m - n}, t);
    tn *= t / (n + 1);
  }
  return std::exp(bundle_->lambda(i.k) * t) * out;
}

VecC PhiBasis::combine(const VecC& coeffs, double t) const {
  VecC out = VecC::Zero(bundle_->dim());
  const auto& theta = bundle_->theta();
  for (size_t r = 0; r < theta.size(); ++r)
    out += coeffs[static_cast<long>(r)] * eval(theta[r], t);
  return out;
}

double PhiBasis::residual(const ProblemSpec& spec) const {
  // L Phi_{j,m} telescopes into the pencil residuals of the chain, so a
  // certified bound follows from those without differentiating Phi itself.
  double worst = 0.0;
  const auto& sys = bundle_->system();
  for (const auto& e : sys.entries) {
    double eT = std::exp(std::abs(e.eig.lambda.real()));
    for (int j = 0; j < e.phi.chains(); ++j) {
      double r = chainResidual(spec, e.eig.lambda, e.phi.fn[j], false);
      worst = std::max(worst, r * e.phi.length(j) * eT);
    }
  }
  return worst;
}

// --- spectral split ------------------------------------------------------------

SpectralSplit spectralSplit(const MatC& monodromy, double radiusLow,
                            double radiusHigh, double tolCluster,
                            double tolRank) {
  const int n = static_cast<int>(monodromy.rows());
  Eigen::ComplexEigenSolver<MatC> es(monodromy, false);
  VecC mus = es.eigenvalues();
  const double scale = std::max(1.0, mus.cwiseAbs().maxCoeff());
  auto clusters = clusterMultipliers(mus, tolCluster * scale);

  SpectralSplit s;
  s.radiusLow = radiusLow;
  s.radiusHigh = radiusHigh;

  std::vector<MatC> minusBases, midBases, plusBases;
  for (const auto& c : clusters) {
    double r = std::abs(c.mu);
    MatC basis, rest;
    invariantRestriction(monodromy, c.mu, c.count, tolRank, &basis, &rest);
    if (r < radiusLow)
      minusBases.push_back(basis);
    else if (r > radiusHigh)
      plusBases.push_back(basis);
    else if (radiusLow == radiusHigh)
      throw NumericError("multiplier on the splitting circle");
    else
      midBases.push_back(basis);
  }

  auto hcat = [&](const std::vector<MatC>& parts) {
    int cols = 0;
    for (const auto& p : parts) cols += static_cast<int>(p.cols());
    MatC out(n, cols);
    int at = 0;
    for (const auto& p : parts) {
      out.middleCols(at, p.cols()) = p;
      at += static_cast<int>(p.cols());
    }
    return out;
  };
  MatC bMinus = hcat(minusBases), bMid = hcat(midBases), bPlus = hcat(plusBases);
  s.dimMid = static_cast<int>(bMid.cols());

  MatC z(n, n);
  z << bMinus, bMid, bPlus;
  Eigen::PartialPivLU<MatC> lu(z);
  Eigen::JacobiSVD<MatC> svd(z);
  s.conditionZ = svd.singularValues()(0) /
                 std::max(svd.singularValues()(n - 1), 1e-300);
  if (s.conditionZ > 1e10)
    throw NumericError("invariant subspace basis is badly conditioned");
  MatC zinv = lu.inverse();

  s.basisMinus = bMinus;
  s.coordMinus = zinv.topRows(bMinus.cols());
  s.basisPlus = bPlus;
  s.coordPlus = zinv.bottomRows(bPlus.cols());
  s.restMinus = s.coordMinus * monodromy * s.basisMinus;
  s.restPlus = s.coordPlus * monodromy * s.basisPlus;
  s.rhoMinus = spectralRadius(s.restMinus);
  s.rhoPlusInv = s.restPlus.rows() == 0
                     ? 0.0
                     : spectralRadius(s.restPlus.inverse());
  return s;
}

// --- dichotomy Green operator ---------------------------------------------------

DichotomyGreen::DichotomyGreen(std::shared_ptr<const FundamentalSolution> fund,
                               SpectralSplit split, double beta1, double beta2)
    : fund_(std::move(fund)), split_(std::move(split)), beta1_(beta1),
      beta2_(beta2) {
  if (!fund_) throw NumericError("dichotomy needs a fundamental solution");
  if (split_.dimMinus() > 0 && split_.rhoMinus >= std::exp(beta1_))
    throw NumericError("minus-side spectral radius reaches the strip edge");
  if (split_.dimPlus() > 0 &&
      split_.rhoPlusInv >= std::exp(-beta2_))
    throw NumericError("plus-side spectral radius reaches the strip edge");
}

double DichotomyGreen::marginMinus() const {
  if (split_.dimMinus() == 0) return std::numeric_limits<double>::infinity();
  return beta1_ - std::log(split_.rhoMinus);
}

double DichotomyGreen::marginPlus() const {
  if (split_.dimPlus() == 0) return std::numeric_limits<double>::infinity();
  return -beta2_ - std::log(split_.rhoPlusInv);
}

namespace {

long floorDiv(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// cubic interpolation of column vectors at node position base + a, with the
// stencil clamped to [ulo, uhi] so it never crosses a forcing break
template <class Getter>
VecC interpClamped(const Getter& value, long base, double a, long ulo,
                   long uhi, int dim) {
  long count = uhi - ulo + 1;
  if (count <= 0) return VecC::Zero(dim);
  int pts = static_cast<int>(std::min<long>(4, count));
  long s0 = std::clamp<long>(base - 1, ulo, uhi - (pts - 1));
  VecC out = VecC::Zero(dim);
  for (int k = 0; k < pts; ++k) {
    double wk = 1.0;
    for (int l = 0; l < pts; ++l) {
      if (l == k) continue;
      double xk = static_cast<double>(s0 + k - base);
      double xl = static_cast<double>(s0 + l - base);
      wk *= (a - xl) / (xk - xl);
    }
    out += wk * value(s0 + k);
  }
  return out;
}

}  // namespace

PathC DichotomyGreen::solve(const PathC& g,
                            const std::vector<long>& breakIndices) const {
  const WindowGrid& w = g.w;
  const int nt = w.nt;
  const long n = w.count();
  const double h = 1.0 / nt;
  const int dim = fund_->dim();
  PathC out(w, dim);
  if (n <= 1) return out;

  // smooth-piece boundaries in node positions; samples at interior breaks
  // are never read (the two one-sided limits are extrapolated instead)
  std::vector<long> bounds{0, n - 1};
  for (long b : breakIndices) {
    long pos = w.locate(b);
    if (pos > 0 && pos < n - 1) bounds.push_back(pos);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  std::vector<bool> tainted(static_cast<size_t>(n), false);
  for (size_t k = 1; k + 1 < bounds.size(); ++k)
    tainted[static_cast<size_t>(bounds[k])] = true;

  // usable stencil range for the interval (i, i+1)
  auto usableRange = [&](long i, long* ulo, long* uhi) {
    size_t k = 0;
    while (k + 2 < bounds.size() && bounds[k + 1] <= i) ++k;
    *ulo = bounds[k] + (tainted[static_cast<size_t>(bounds[k])] ? 1 : 0);
    *uhi = bounds[k + 1] - (tainted[static_cast<size_t>(bounds[k + 1])] ? 1 : 0);
  };

  const double ga = 0.5 - std::sqrt(3.0) / 6.0;
  const double gb = 0.5 + std::sqrt(3.0) / 6.0;

  std::vector<long> period(static_cast<size_t>(n));
  for (long j = 0; j < n; ++j) period[static_cast<size_t>(j)] = floorDiv(w.index(j), nt);

  auto runSide = [&](const MatC& basisSide, const MatC& coord,
                     const MatC& rest, bool backward,
                     std::vector<VecC>* z) {
    const int r = static_cast<int>(basisSide.cols());
    std::vector<VecC> y(static_cast<size_t>(n));
    for (long j = 0; j < n; ++j)
      y[static_cast<size_t>(j)] =
          coord * (fund_->uinv[static_cast<size_t>(w.phase(j))] * g.samples.col(j));

    MatC restInv = rest.inverse();
    MatC step = backward ? restInv : rest;

    // The phase kernel jumps by the period map across period boundaries;
    // stencil values are pulled into the frame of the current interval so
    // the interpolated integrand is smooth.
    auto integrate = [&](long i) -> VecC {
      long ulo, uhi;
      usableRange(i, &ulo, &uhi);
      long pi = period[static_cast<size_t>(i)];
      auto framed = [&](long j) -> VecC {
        long d = pi - period[static_cast<size_t>(j)];
        VecC v = y[static_cast<size_t>(j)];
        for (long k = 0; k < d; ++k) v = rest * v;
        for (long k = 0; k > d; --k) v = restInv * v;
        return v;
      };
      VecC ja = interpClamped(framed, i, ga, ulo, uhi, r);
      VecC jb = interpClamped(framed, i, gb, ulo, uhi, r);
      return (h / 2.0) * (ja + jb);
    };

    z->assign(static_cast<size_t>(n), VecC::Zero(r));
    if (!backward) {
      for (long i = 0; i + 1 < n; ++i) {
        long dp = period[static_cast<size_t>(i + 1)] - period[static_cast<size_t>(i)];
        VecC zi = (*z)[static_cast<size_t>(i)] + integrate(i);
        (*z)[static_cast<size_t>(i + 1)] = dp == 0 ? zi : VecC(step * zi);
      }
    } else {
      for (long i = n - 2; i >= 0; --i) {
        long dp = period[static_cast<size_t>(i + 1)] - period[static_cast<size_t>(i)];
        VecC zi = (*z)[static_cast<size_t>(i + 1)];
        if (dp != 0) zi = step * zi;
        (*z)[static_cast<size_t>(i)] = zi + integrate(i);
      }
    }
  };

  std::vector<VecC> zf, zb;
  const bool hasMinus = split_.dimMinus() > 0;
  const bool hasPlus = split_.dimPlus() > 0;
  if (hasMinus)
    runSide(split_.basisMinus, split_.coordMinus, split_.restMinus, false, &zf);
  if (hasPlus)
    runSide(split_.basisPlus, split_.coordPlus, split_.restPlus, true, &zb);

  for (long i = 0; i < n; ++i) {
    VecC total = VecC::Zero(dim);
    if (hasMinus) total += split_.basisMinus * zf[static_cast<size_t>(i)];
    if (hasPlus) total -= split_.basisPlus * zb[static_cast<size_t>(i)];
    out.samples.col(i) = fund_->u[static_cast<size_t>(w.phase(i))] * total;
  }
  return out;
}

DichotomyGreen dichotomyGreen(std::shared_ptr<const FundamentalSolution> fund,
                              const ProjectorBundle& bundle,
                              const StripSpec& strip, double tolProj) {
  SpectralSplit split = spectralSplit(fund->monodromy, std::exp(strip.beta1),
                                      std::exp(strip.beta2));
  // P_- + P_+ must complement the strip projector at t = 0
  MatC sum = split.projMinus() + split.projPlus();
  MatC q0 = MatC::Identity(fund->dim(), fund->dim()) - bundle.matrixP(0.0);
  if ((sum - q0).norm() > tolProj * fund->dim())
    throw NumericError(
        "dichotomy projections do not match the projector complement");
  return DichotomyGreen(std::move(fund), std::move(split), strip.beta1,
                        strip.beta2);
}

// --- finite system solver -------------------------------------------------------

namespace {

// cubic Lagrange weights for nodes at offsets x0..x3 evaluated at a
std::array<double, 4> lagrange4(const std::array<double, 4>& x, double a) {
  std::array<double, 4> w{};
  for (int i = 0; i < 4; ++i) {
    double v = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      v *= (a - x[j]) / (x[i] - x[j]);
    }
    w[i] = v;
  }
  return w;
}

}  // namespace

template <class Scalar>
PathT<Scalar> solveFinite(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& r,
    const PathT<Scalar>& f, long tauIndex,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& xi) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const WindowGrid& w = f.w;
  const long n = w.count();
  const long tpos = w.locate(tauIndex);
  if (tpos < 0) throw NumericError("solveFinite: tau outside the window");
  const double h = 1.0 / w.nt;
  const int m = static_cast<int>(r.rows());

  PathT<Scalar> u(w, m);

  const double g1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double g2 = 0.5 + std::sqrt(3.0) / 6.0;

  Mat eFwd = (r * Scalar(h)).exp();
  Mat eF1 = (r * Scalar((1.0 - g1) * h)).exp();
  Mat eF2 = (r * Scalar((1.0 - g2) * h)).exp();
  Mat eBwd = (r * Scalar(-h)).exp();
  Mat eB1 = (r * Scalar(-g1 * h)).exp();
  Mat eB2 = (r * Scalar(-g2 * h)).exp();

  auto fAt = [&](long base, double a) -> Vec {
    // cubic interpolation of f at node position base + a, a in (0,1)
    long s0 = std::clamp<long>(base - 1, 0, n - 4);
    std::array<double, 4> xs;
    for (int k = 0; k < 4; ++k)
      xs[static_cast<size_t>(k)] = static_cast<double>(s0 + k - base);
    auto wts = lagrange4(xs, a);
    Vec out = Vec::Zero(m);
    for (int k = 0; k < 4; ++k)
      out += Scalar(wts[static_cast<size_t>(k)]) * f.samples.col(s0 + k);
    return out;
  };

  u.samples.col(tpos) = xi;
  for (long i = tpos; i + 1 < n; ++i) {
    Vec q = Scalar(h / 2.0) * (eF1 * fAt(i, g1) + eF2 * fAt(i, g2));
    u.samples.col(i + 1) = eFwd * u.samples.col(i) + q;
  }
  for (long i = tpos; i > 0; --i) {
    Vec q = Scalar(h / 2.0) * (eB1 * fAt(i - 1, g1) + eB2 * fAt(i - 1, g2));
    u.samples.col(i - 1) = eBwd * u.samples.col(i) - q;
  }
  return u;
}

template PathT<double> solveFinite<double>(
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>&,
    const PathT<double>&, long, const Eigen::Matrix<double, Eigen::Dynamic, 1>&);
template PathT<Complex> solveFinite<Complex>(
    const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>&,
    const PathT<Complex>&, long,
    const Eigen::Matrix<Complex, Eigen::Dynamic, 1>&);

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> windowDerivative(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& samples,
    double dt) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const long n = samples.cols();
  Mat d = Mat::Zero(samples.rows(), n);
  static const double wc[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0,
                               -1.0 / 280.0};
  for (long i = 0; i < n; ++i) {
    if (i >= 4 && i + 4 < n) {
      for (int k = 1; k <= 4; ++k)
        d.col(i) += Scalar(wc[k - 1] / dt) *
                    (samples.col(i + k) - samples.col(i - k));
    } else {
      // one-sided 5-point fourth-order stencils at the edges
      long s0 = std::clamp<long>(i - 2, 0, n - 5);
      double x = static_cast<double>(i - s0);
      // differentiate the degree-4 Lagrange interpolant at x
      for (int k = 0; k < 5; ++k) {
        double wsum = 0.0;
        for (int l = 0; l < 5; ++l) {
          if (l == k) continue;
          double prod = 1.0;
          for (int q = 0; q < 5; ++q) {
            if (q == k || q == l) continue;
            prod *= (x - q) / (k - q);
          }
          wsum += prod / (k - l);
        }
        d.col(i) += Scalar(wsum / dt) * samples.col(s0 + k);
      }
    }
  }
  return d;
}

template MatR windowDerivative<double>(const MatR&, double);
template MatC windowDerivative<Complex>(const MatC&, double);

template <class Scalar>
double finiteResidual(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& r,
    const PathT<Scalar>& u, const PathT<Scalar>& f) {
  const double h = 1.0 / u.w.nt;
  auto d = windowDerivative<Scalar>(u.samples, h);
  double acc = 0.0;
  long lo = std::min<long>(4, u.w.count() - 1);
  long hi = std::max<long>(u.w.count() - 5, 0);
  for (long i = lo; i <= hi; ++i) {
    auto res = (d.col(i) - r * u.samples.col(i) - f.samples.col(i)).eval();
    acc += res.squaredNorm() * h;
  }
  return std::sqrt(acc);
}

template double finiteResidual<double>(const MatR&, const PathT<double>&,
                                       const PathT<double>&);
template double finiteResidual<Complex>(const MatC&, const PathT<Complex>&,
                                        const PathT<Complex>&);

double remainderResidual(const ProblemSpec& spec, const PathC& v,
                         const PathC& g) {
  const double h = 1.0 / v.w.nt;
  MatC d = windowDerivative<Complex>(v.samples, h);
  double acc = 0.0;
  long lo = std::min<long>(4, v.w.count() - 1);
  long hi = std::max<long>(v.w.count() - 5, 0);
  for (long i = lo; i <= hi; ++i) {
    VecC res = d.col(i) + evalOperator(spec.op, v.w.time(i)) * v.samples.col(i) -
               g.samples.col(i);
    acc += std::pow(spec.ip.normY(res), 2) * h;
  }
  return std::sqrt(acc);
}

// --- weighted estimate ---------------------------------------------------------

SplitEstimate splitEstimate(const ProblemSpec& spec, const PathC& v,
                            const PathC& qf, const std::vector<double>& taus,
                            double beta1, double beta2) {
  SplitEstimate est;
  const int nt = spec.grid.nt;
  const double h = 1.0 / nt;
  const long n = v.w.count();

  MatC dv = windowDerivative<Complex>(v.samples, h);

  // sliding one-period Y-norms of Qf
  std::vector<double> qfSq(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i)
    qfSq[static_cast<size_t>(i)] =
        std::pow(spec.ip.normY(VecC(qf.samples.col(i))), 2);

  auto windowNormQf = [&](long start) {
    double acc = 0.0;
    for (long i = start; i <= start + nt && i < n; ++i) {
      double wq = (i == start || i == start + nt) ? 0.5 : 1.0;
      acc += wq * qfSq[static_cast<size_t>(i)] * h;
    }
    return std::sqrt(acc);
  };

  // decaying Green weight of -(D_t - beta1)(D_t - beta2)
  auto mu = [&](double s) {
    return s >= 0 ? std::exp(beta1 * s) : std::exp(beta2 * s);
  };

  for (double tau : taus) {
    long tpos = v.w.locate(std::lround(tau * nt));
    if (tpos < 0 || tpos + nt >= n) continue;
    double lhsSq = 0.0;
    for (long i = tpos; i <= tpos + nt; ++i) {
      double wq = (i == tpos || i == tpos + nt) ? 0.5 : 1.0;
      lhsSq += wq * h *
               (std::pow(spec.ip.normX(VecC(v.samples.col(i))), 2) +
                std::pow(spec.ip.normY(VecC(dv.col(i))), 2));
    }
    double rhs = 0.0;
    for (long i = 0; i + nt < n; ++i)
      rhs += h * mu(v.w.time(i) - tau) * windowNormQf(i);

    double lhs = std::sqrt(lhsSq);
    est.tau.push_back(tau);
    est.lhs.push_back(lhs);
    est.rhs.push_back(rhs);
    double ratio = (rhs > 1e-14) ? lhs / rhs : (lhs > 1e-12 ? 1e300 : 0.0);
    est.ratio.push_back(ratio);
  }
  for (double r : est.ratio) {
    est.maxRatio = std::max(est.maxRatio, r);
    if (r > 0.0)
      est.minPositiveRatio = est.minPositiveRatio == 0.0
                                 ? r
                                 : std::min(est.minPositiveRatio, r);
  }
  return est;
}

// --- asymptotics ----------------------------------------------------------------

AsymptoticExpansion asymptoticDifference(
    const ProblemSpec& spec, std::shared_ptr<const FundamentalSolution> fund,
    const PhiBasis& basis, const PathC& f,
    const std::vector<long>& breakIndices, double tolRem) {
  const double r1 = std::exp(spec.strip.beta1);
  const double r2 = std::exp(spec.strip.beta2);
  DichotomyGreen g1(fund, spectralSplit(fund->monodromy, r1, r1),
                    spec.strip.beta1, spec.strip.beta1);
  DichotomyGreen g2(fund, spectralSplit(fund->monodromy, r2, r2),
                    spec.strip.beta2, spec.strip.beta2);
  PathC u1 = g1.solve(f, breakIndices);
  PathC u2 = g2.solve(f, breakIndices);

  AsymptoticExpansion ex;
  ex.difference = PathC(f.w, fund->dim());
  ex.difference.samples = u2.samples - u1.samples;

  long zeroPos = f.w.locate(0);
  if (zeroPos < 0)
    throw NumericError("asymptoticDifference: t = 0 must lie in the window");

  const ProjectorBundle& bundle = basis.bundle();
  VecC raw = bundle.extractAt(0.0, ex.difference.samples.col(zeroPos));
  // c_{j,q} pairs with psi_{j, m_kj-1-q}: flip within each chain
  const auto& theta = bundle.theta();
  ex.coeffs = VecC::Zero(raw.size());
  for (size_t a = 0; a < theta.size(); ++a) {
    const auto& i = theta[a];
    int len =
        bundle.system().entries[i.k].eig.partial[static_cast<size_t>(i.j)];
    for (size_t b = 0; b < theta.size(); ++b) {
      const auto& o = theta[b];
      if (o.k == i.k && o.j == i.j && o.m == len - 1 - i.m)
        ex.coeffs[static_cast<long>(a)] = raw[static_cast<long>(b)];
    }
  }

  for (long c = 0; c < f.w.count(); ++c) {
    VecC recon = basis.combine(ex.coeffs, f.w.time(c));
    ex.expansionResidual =
        std::max(ex.expansionResidual,
                 (recon - VecC(ex.difference.samples.col(c))).norm());
  }
  if (ex.expansionResidual > tolRem * std::max(1.0, ex.coeffs.norm()) * 100)
    throw NumericError("asymptotic expansion residual too large; a strip "
                       "eigenvalue was probably missed");
  return ex;
}

BoundedExpansion expandBoundedSolution(const ProblemSpec& spec,
                                       const PhiBasis& basis, const PathC& u,
                                       double tolRem) {
  BoundedExpansion ex;
  const int nt = spec.grid.nt;
  const long n = u.w.count();

  // homogeneous residual on the interior
  PathC zero(u.w, static_cast<int>(u.samples.rows()));
  ex.homogeneousResidual = remainderResidual(spec, u, zero);
  double scale = std::max(1.0, u.samples.cwiseAbs().maxCoeff());
  if (ex.homogeneousResidual > 1e-5 * scale)
    throw NumericError("expandBoundedSolution: path is not a homogeneous "
                       "solution");

  // growth precondition: forward at most e^{beta2 t}, backward at most
  // e^{beta1 t}, checked on one-period norms with a factor-10 slack
  auto periodNorm = [&](long start) {
    double acc = 0.0;
    for (long i = start; i <= start + nt && i < n; ++i)
      acc += std::pow(spec.ip.normX(VecC(u.samples.col(i))), 2) / nt;
    return std::sqrt(acc);
  };
  long zeroPos = u.w.locate(0);
  if (zeroPos < 0)
    throw NumericError("expandBoundedSolution: t = 0 must lie in the window");
  double r0 = periodNorm(zeroPos);
  for (long start = zeroPos; start + nt < n; start += nt) {
    double t = u.w.time(start);
    if (periodNorm(start) > 10.0 * r0 * std::exp(spec.strip.beta2 * t))
      throw NumericError("growth precondition violated (forward)");
  }
  for (long start = zeroPos; start >= 0; start -= nt) {
    double t = u.w.time(start);
    if (periodNorm(start) > 10.0 * r0 * std::exp(spec.strip.beta1 * t))
      throw NumericError("growth precondition violated (backward)");
  }

  const ProjectorBundle& bundle = basis.bundle();
  VecC raw = bundle.extractAt(0.0, u.samples.col(zeroPos));
  const auto& theta = bundle.theta();
  ex.coeffs = VecC::Zero(raw.size());
  for (size_t a = 0; a < theta.size(); ++a) {
    const auto& i = theta[a];
    int len =
        bundle.system().entries[i.k].eig.partial[static_cast<size_t>(i.j)];
    for (size_t b = 0; b < theta.size(); ++b) {
      const auto& o = theta[b];
      if (o.k == i.k && o.j == i.j && o.m == len - 1 - i.m)
        ex.coeffs[static_cast<long>(a)] = raw[static_cast<long>(b)];
    }
  }

  for (long c = 0; c < n; ++c) {
    VecC recon = basis.combine(ex.coeffs, u.w.time(c));
    ex.reconstructionError =
        std::max(ex.reconstructionError,
                 (recon - VecC(u.samples.col(c))).norm());
  }
  if (ex.reconstructionError > 100 * tolRem * scale)
    throw NumericError("expandBoundedSolution: reconstruction failed");
  return ex;
}

}  // namespace floquet
