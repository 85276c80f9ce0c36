#include "floquet/manifold.hpp"

#include <cmath>

namespace floquet {

// --- cutoff -------------------------------------------------------------------

namespace {

double binom(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

// smoothstep of order p on [0,1]: C^p, 0 -> 1
double smoothstep(int p, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double acc = 0.0;
  for (int k = 0; k <= p; ++k)
    acc += binom(p + k, k) * binom(2 * p + 1, p - k) * std::pow(-x, k);
  return acc * std::pow(x, p + 1);
}

}  // namespace

double CutoffConfig::chi(double r) const {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  return 1.0 - smoothstep(smoothOrder, r - 1.0);
}

WeightedWindow makeWeightedWindow(double beta, double gamma, double tolFp,
                                  long tauIndex, int nt) {
  if (!(gamma > 0.0) || gamma > beta + 1e-12)
    throw NumericError("gamma must lie in (0, beta]");
  WeightedWindow w;
  w.gamma = gamma;
  w.tauIndex = tauIndex;
  w.nt = nt;
  w.halfPeriods =
      static_cast<long>(std::ceil(std::log(100.0 / tolFp) / gamma)) + 1;
  return w;
}

// --- weighted norms -------------------------------------------------------------

template <class Scalar>
WeightedNorms weightedCoeffNorms(const PathT<Scalar>& p, double tau,
                                 double gamma) {
  WeightedNorms out;
  const double h = 1.0 / p.w.nt;
  auto d = windowDerivative<Scalar>(p.samples, h);
  double l2 = 0.0, h1 = 0.0;
  for (long c = 0; c < p.w.count(); ++c) {
    double wq = (c == 0 || c + 1 == p.w.count()) ? 0.5 : 1.0;
    double wgt = wq * h * std::exp(-2.0 * gamma * std::abs(p.w.time(c) - tau));
    double a = p.samples.col(c).squaredNorm();
    double b = d.col(c).squaredNorm();
    l2 += wgt * a;
    h1 += wgt * (a + b);
  }
  out.l2 = std::sqrt(l2);
  out.h1 = std::sqrt(h1);
  return out;
}

template WeightedNorms weightedCoeffNorms<double>(const PathT<double>&, double,
                                                  double);
template WeightedNorms weightedCoeffNorms<Complex>(const PathT<Complex>&,
                                                   double, double);

template <class Scalar>
WeightedNorms weightedStateNorms(const PathT<Scalar>& p,
                                 const InnerProductPair& ip, double tau,
                                 double gamma) {
  WeightedNorms out;
  const double h = 1.0 / p.w.nt;
  auto d = windowDerivative<Scalar>(p.samples, h);
  MatR gx = ip.gramX, gy = ip.gramY;
  double l2 = 0.0, h1 = 0.0;
  for (long c = 0; c < p.w.count(); ++c) {
    double wq = (c == 0 || c + 1 == p.w.count()) ? 0.5 : 1.0;
    double wgt = wq * h * std::exp(-2.0 * gamma * std::abs(p.w.time(c) - tau));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vc = p.samples.col(c);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dc = d.col(c);
    double xn = std::abs(vc.dot(gx.template cast<Scalar>() * vc));
    double yn = std::abs(dc.dot(gy.template cast<Scalar>() * dc));
    double yv = std::abs(vc.dot(gy.template cast<Scalar>() * vc));
    l2 += wgt * yv;
    h1 += wgt * (xn + yn);
  }
  out.l2 = std::sqrt(l2);  // weighted Y norm
  out.h1 = std::sqrt(h1);  // weighted X norm
  return out;
}

template WeightedNorms weightedStateNorms<double>(const PathT<double>&,
                                                  const InnerProductPair&,
                                                  double, double);
template WeightedNorms weightedStateNorms<Complex>(const PathT<Complex>&,
                                                   const InnerProductPair&,
                                                   double, double);

// --- reductions -----------------------------------------------------------------

RealReduction::RealReduction(const ProblemSpec& spec,
                             std::shared_ptr<const FundamentalSolution> fund,
                             std::shared_ptr<const RealProjectorBundle> bundle)
    : spec_(&spec), fund_(std::move(fund)), bundle_(std::move(bundle)) {
  green_.emplace(
      dichotomyGreen(fund_, bundle_->complexBundle(), spec_->strip));
  r_ = bundle_->buildRealR();
}

double RealReduction::beta() const {
  return std::min(-spec_->strip.beta1, spec_->strip.beta2);
}

VecR RealReduction::evalF(double t, const VecR& mu, const Vec& full) const {
  if (!spec_->f) return VecR::Zero(dim());
  return spec_->f->evalReal(t, mu, full);
}

PathT<double> RealReduction::solveV(const PathT<double>& qf) const {
  PathC vc = green_->solve(toComplex(qf));
  PathT<double> out(qf.w, dim());
  double imag = vc.samples.imag().cwiseAbs().maxCoeff();
  double scale = std::max(1.0, vc.samples.cwiseAbs().maxCoeff());
  if (imag > 1e-9 * scale)
    throw NumericError("real remainder solve produced an imaginary part");
  out.samples = vc.samples.real();
  return out;
}

ComplexReduction::ComplexReduction(
    const ProblemSpec& spec, std::shared_ptr<const FundamentalSolution> fund,
    std::shared_ptr<const ProjectorBundle> bundle)
    : spec_(&spec), fund_(std::move(fund)), bundle_(std::move(bundle)) {
  green_.emplace(dichotomyGreen(fund_, *bundle_, spec_->strip));
  r_ = bundle_->buildR();
}

double ComplexReduction::beta() const {
  return std::min(-spec_->strip.beta1, spec_->strip.beta2);
}

VecC ComplexReduction::evalF(double t, const VecR& mu, const Vec& full) const {
  if (!spec_->f) return VecC::Zero(dim());
  return spec_->f->eval(t, mu.cast<Complex>(), full);
}

PathT<Complex> ComplexReduction::solveV(const PathT<Complex>& qf) const {
  return green_->solve(qf);
}

// --- fixed point ----------------------------------------------------------------

template <class Red>
FpResult<typename Red::Scalar> fixedPoint(
    const Red& red, const CutoffConfig& cut, const WeightedWindow& win,
    const VecR& mu, const typename Red::Vec& xi, const FixedPointConfig& cfg,
    const FpResult<typename Red::Scalar>* warmStart) {
  using Scalar = typename Red::Scalar;
  using Path = PathT<Scalar>;
  using Vec = typename Red::Vec;

  const WindowGrid w = win.window();
  const int m = red.reducedDim();
  const int n = red.dim();
  const double tau = win.tau();

  FpResult<Scalar> cur;
  if (warmStart && warmStart->u.w.i0 == w.i0 && warmStart->u.w.i1 == w.i1) {
    cur = *warmStart;
    // re-anchor the warm start to the new initial value
    long tpos = w.locate(win.tauIndex);
    Vec shift = xi - Vec(cur.u.samples.col(tpos));
    for (long c = 0; c < w.count(); ++c) cur.u.samples.col(c) += shift;
  } else {
    cur.u = Path(w, m);
    cur.v = Path(w, n);
    Path zero(w, m);
    cur.u = solveFinite<Scalar>(red.reducedMatrix(), zero, win.tauIndex, xi);
  }

  FixedPointDiagnostics diag;
  double prevDiff = -1.0;
  std::vector<double> ratios;
  int stall = 0;

  Path fc(w, m), qf(w, n);
  for (int iter = 0; iter < cfg.maxIter; ++iter) {
    for (long c = 0; c < w.count(); ++c) {
      double t = w.time(c);
      Vec ufull = red.reconstructU(t, cur.u.samples.col(c));
      Vec full = ufull + Vec(cur.v.samples.col(c));
      double cutf = cut.cutoffFactor(cur.u.samples.col(c).norm(),
                                     red.normX(Vec(cur.v.samples.col(c))));
      Vec fval = cutf == 0.0 ? Vec(Vec::Zero(n))
                             : Vec(cutf * red.evalF(t, mu, full));
      fc.samples.col(c) = red.extractAt(t, fval);
      qf.samples.col(c) = red.applyQ(t, fval);
    }
    Path newU = solveFinite<Scalar>(red.reducedMatrix(), fc, win.tauIndex, xi);
    Path newV = red.solveV(qf);

    Path du(w, m), dv(w, n);
    du.samples = newU.samples - cur.u.samples;
    dv.samples = newV.samples - cur.v.samples;
    double diff = std::max(weightedCoeffNorms<Scalar>(du, tau, win.gamma).l2,
                           weightedStateNorms<Scalar>(dv, red.spec().ip, tau,
                                                      win.gamma).h1);
    cur.u = std::move(newU);
    cur.v = std::move(newV);
    diag.iterations = iter + 1;
    diag.finalDiff = diff;
    if (prevDiff > 0.0 && diff > 1e-15) {
      double ratio = diff / prevDiff;
      ratios.push_back(ratio);
      stall = ratio >= 1.0 ? stall + 1 : 0;
      if (stall >= 5)
        throw NumericError(
            "fixed point is not contracting (5 consecutive ratios >= 1); "
            "reduce epsilon or adjust gamma");
    }
    prevDiff = diff;
    if (diff <= cfg.tolFp) {
      diag.converged = true;
      break;
    }
  }
  if (!diag.converged)
    throw NumericError("fixed point did not converge within " +
                       std::to_string(cfg.maxIter) + " iterations");
  if (!ratios.empty()) {
    double g = 1.0;
    size_t tail = std::min<size_t>(ratios.size(), 5);
    for (size_t i = ratios.size() - tail; i < ratios.size(); ++i)
      g *= ratios[i];
    diag.contractionFactor = std::pow(g, 1.0 / tail);
  }
  cur.diag = diag;
  return cur;
}

template FpResult<double> fixedPoint<RealReduction>(
    const RealReduction&, const CutoffConfig&, const WeightedWindow&,
    const VecR&, const VecR&, const FixedPointConfig&,
    const FpResult<double>*);
template FpResult<Complex> fixedPoint<ComplexReduction>(
    const ComplexReduction&, const CutoffConfig&, const WeightedWindow&,
    const VecR&, const VecC&, const FixedPointConfig&,
    const FpResult<Complex>*);

template <class Red>
ModelSolveReport<Red> modelSolveK(const Red& red, const WeightedWindow& win,
                                  const PathT<typename Red::Scalar>& bigF,
                                  const typename Red::Vec& xi,
                                  const PathT<typename Red::Scalar>& bigG) {
  using Scalar = typename Red::Scalar;
  ModelSolveReport<Red> rep;
  rep.u = solveFinite<Scalar>(red.reducedMatrix(), bigF, win.tauIndex, xi);
  rep.v = red.solveV(bigG);
  double tau = win.tau();
  double uh1 = weightedCoeffNorms<Scalar>(rep.u, tau, win.gamma).h1;
  double fl2 = weightedCoeffNorms<Scalar>(bigF, tau, win.gamma).l2;
  double vx = weightedStateNorms<Scalar>(rep.v, red.spec().ip, tau, win.gamma).h1;
  double gy = weightedStateNorms<Scalar>(bigG, red.spec().ip, tau, win.gamma).l2;
  double denomU = xi.norm() + fl2;
  rep.constU = denomU > 1e-14 ? uh1 / denomU : 0.0;
  rep.constV = gy > 1e-14 ? vx / gy : 0.0;
  return rep;
}

template ModelSolveReport<RealReduction> modelSolveK<RealReduction>(
    const RealReduction&, const WeightedWindow&, const PathT<double>&,
    const VecR&, const PathT<double>&);
template ModelSolveReport<ComplexReduction> modelSolveK<ComplexReduction>(
    const ComplexReduction&, const WeightedWindow&, const PathT<Complex>&,
    const VecC&, const PathT<Complex>&);

// --- manifold map ---------------------------------------------------------------

ManifoldMap::ManifoldMap(RealReduction red, CutoffConfig cut, double gamma,
                         FixedPointConfig cfg)
    : red_(std::move(red)), cut_(cut), gamma_(gamma), cfg_(cfg) {
  halfPeriods_ = makeWeightedWindow(red_.beta(), gamma_, cfg_.tolFp, 0,
                                    red_.spec().grid.nt)
                     .halfPeriods;
}

FpResult<double> ManifoldMap::solve(long tauIndex, const VecR& mu,
                                    const VecR& xi) const {
  WeightedWindow win;
  win.gamma = gamma_;
  win.tauIndex = tauIndex;
  win.halfPeriods = halfPeriods_;
  win.nt = red_.spec().grid.nt;

  std::optional<FpResult<double>> warm;
  {
    std::lock_guard<std::mutex> g(lock_);
    if (warm_ && warm_->u.w.i0 == win.window().i0 &&
        warm_->u.w.i1 == win.window().i1)
      warm = *warm_;
  }
  FpResult<double> res =
      fixedPoint<RealReduction>(red_, cut_, win, mu, xi, cfg_,
                                warm ? &*warm : nullptr);
  {
    std::lock_guard<std::mutex> g(lock_);
    warm_ = res;
    lastDiag_ = res.diag;
  }
  return res;
}

VecR ManifoldMap::value(double tau, const VecR& mu, const VecR& xi) const {
  const int nt = red_.spec().grid.nt;
  double idxF = tau * nt;
  long tauIndex = std::lround(idxF);
  if (std::abs(idxF - tauIndex) > 1e-9 * std::max(1.0, std::abs(idxF)))
    throw NumericError("manifold evaluation requires a grid-aligned tau");

  // cache on (tau mod 1, mu, xi), quantized
  std::vector<long long> key;
  key.push_back(static_cast<long long>(((tauIndex % nt) + nt) % nt));
  auto quant = [](double v) {
    return static_cast<long long>(std::llround(v * 1e12));
  };
  for (long i = 0; i < mu.size(); ++i) key.push_back(quant(mu[i]));
  for (long i = 0; i < xi.size(); ++i) key.push_back(quant(xi[i]));
  {
    std::lock_guard<std::mutex> g(lock_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }

  // anchor within [0,1): the problem data is 1-periodic
  long anchor = ((tauIndex % nt) + nt) % nt;
  FpResult<double> res = solve(anchor, mu, xi);
  long tpos = res.v.w.locate(anchor);
  VecR h = res.v.samples.col(tpos);
  {
    std::lock_guard<std::mutex> g(lock_);
    cache_[key] = h;
  }
  return h;
}

FixedPointDiagnostics ManifoldMap::lastDiagnostics() const {
  std::lock_guard<std::mutex> g(lock_);
  return lastDiag_;
}

// --- reduced dynamics -------------------------------------------------------------

ReducedTrajectory integrateReduced(const ManifoldMap& map, const VecR& mu,
                                   const VecR& xi0, double t0, double t1,
                                   long stepNodes, double w1Radius) {
  const RealReduction& red = map.reduction();
  const int nt = red.spec().grid.nt;
  if (stepNodes <= 0 || stepNodes % 2 != 0)
    throw NumericError("stepNodes must be a positive even node count");
  const double dt = static_cast<double>(stepNodes) / nt;

  auto rhs = [&](double t, const VecR& u) -> VecR {
    VecR h = map.value(t, mu, u);
    VecR full = red.reconstructU(t, u) + h;
    VecR f = red.evalF(t, mu, full);
    return red.reducedMatrix() * u + red.extractAt(t, f);
  };

  ReducedTrajectory traj;
  long steps = std::lround((t1 - t0) / dt);
  traj.coeffs.resize(red.reducedDim(), steps + 1);
  traj.hval.resize(red.dim(), steps + 1);

  VecR u = xi0;
  for (long s = 0; s <= steps; ++s) {
    double t = t0 + s * dt;
    if (u.norm() > w1Radius)
      throw NumericError("reduced trajectory left the W1 ball at t = " +
                         std::to_string(t));
    traj.times.push_back(t);
    traj.coeffs.col(s) = u;
    traj.hval.col(s) = map.value(t, mu, u);
    if (s == steps) break;
    VecR k1 = rhs(t, u);
    VecR k2 = rhs(t + dt / 2, u + (dt / 2) * k1);
    VecR k3 = rhs(t + dt / 2, u + (dt / 2) * k2);
    VecR k4 = rhs(t + dt, u + dt * k3);
    u = u + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return traj;
}

double liftResidual(const ManifoldMap& map, const VecR& mu,
                    const ReducedTrajectory& traj, int samples) {
  const RealReduction& red = map.reduction();
  const int nt = red.spec().grid.nt;
  const double h = 1.0 / nt;
  if (traj.times.size() < 3) return 0.0;

  // dense cubic interpolation of the reduced coordinates between knots
  auto coeffAt = [&](double t) -> VecR {
    const auto& ts = traj.times;
    size_t n = ts.size();
    size_t i = 0;
    while (i + 1 < n && ts[i + 1] <= t) ++i;
    size_t s0 = std::min(std::max<long>(0, static_cast<long>(i) - 1),
                         static_cast<long>(n - 4));
    VecR out = VecR::Zero(traj.coeffs.rows());
    for (size_t k = s0; k < s0 + 4; ++k) {
      double wk = 1.0;
      for (size_t l = s0; l < s0 + 4; ++l) {
        if (l == k) continue;
        wk *= (t - ts[l]) / (ts[k] - ts[l]);
      }
      out += wk * traj.coeffs.col(static_cast<long>(k));
    }
    return out;
  };

  auto lift = [&](double t) -> VecR {
    VecR u = coeffAt(t);
    return red.reconstructU(t, u) + map.value(t, mu, u);
  };

  double worst = 0.0;
  double lo = traj.times.front() + 2 * h;
  double hi = traj.times.back() - 2 * h;
  for (int s = 0; s < samples; ++s) {
    double t = lo + (hi - lo) * s / std::max(1, samples - 1);
    // snap to grid so all map evaluations stay grid-aligned
    t = std::round(t * nt) / nt;
    // fourth-order centered derivative
    VecR d = (8.0 * (lift(t + h) - lift(t - h)) -
              (lift(t + 2 * h) - lift(t - 2 * h))) /
             (12.0 * h);
    VecR full = lift(t);
    VecR res = d + red.spec().op.eval(mod1(t)).real() * full -
               red.evalF(t, mu, full);
    worst = std::max(worst, res.norm());
  }
  return worst;
}

CaptureReport verifyBoundedSolutionCapture(const ManifoldMap& map,
                                           const VecR& mu, const VecR& u0,
                                           double tEnd, double burnIn,
                                           double tol) {
  const RealReduction& red = map.reduction();
  const ProblemSpec& spec = red.spec();
  const int nt = spec.grid.nt;

  // direct RK4 integration of the full nonlinear system
  const double h = 1.0 / (nt * 16);
  auto rhs = [&](double t, const VecR& x) -> VecR {
    return -(spec.op.eval(mod1(t)).real() * x) + red.evalF(t, mu, x);
  };
  CaptureReport rep;
  rep.burnIn = burnIn;
  VecR x = u0;
  long steps = std::lround(tEnd / h);
  for (long s = 0; s < steps; ++s) {
    double t = s * h;
    VecR k1 = rhs(t, x);
    VecR k2 = rhs(t + h / 2, x + (h / 2) * k1);
    VecR k3 = rhs(t + h / 2, x + (h / 2) * k2);
    VecR k4 = rhs(t + h, x + h * k3);
    x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    double tn = (s + 1) * h;
    double idxF = tn * nt;
    long idx = std::lround(idxF);
    bool onGrid = std::abs(idxF - idx) < 1e-9;
    if (!onGrid || tn < burnIn) continue;
    if (idx % (nt / 8) != 0) continue;  // sample 8 per period
    VecR coeffs = red.extractAt(tn, x);
    VecR v = x - red.reconstructU(tn, coeffs);
    VecR hval = map.value(tn, mu, coeffs);
    rep.maxDeviation = std::max(rep.maxDeviation, (v - hval).norm());
  }
  rep.pass = rep.maxDeviation <= tol;
  return rep;
}

PeriodicityReport verifyPeriodicityAndParameters(const ManifoldMap& map,
                                                 const VecR& muProbe,
                                                 const VecR& xiProbe,
                                                 double tol) {
  PeriodicityReport rep;
  const ProblemSpec& spec = map.reduction().spec();
  const int nt = spec.grid.nt;
  for (int k = 0; k < 4; ++k) {
    long anchor = static_cast<long>(k) * (nt / 4);
    FpResult<double> a = map.solve(anchor, muProbe, xiProbe);
    FpResult<double> b = map.solve(anchor + nt, muProbe, xiProbe);
    VecR ha = a.v.samples.col(a.v.w.locate(anchor));
    VecR hb = b.v.samples.col(b.v.w.locate(anchor + nt));
    rep.periodicityError = std::max(rep.periodicityError, (ha - hb).norm());
  }
  if (spec.f && spec.f->vanishesAtZeroState()) {
    rep.zeroSectionApplicable = true;
    VecR zero = VecR::Zero(map.reduction().reducedDim());
    for (double tau : {0.0, 0.25}) {
      VecR h = map.value(tau, muProbe, zero);
      rep.zeroSectionError = std::max(rep.zeroSectionError, h.norm());
    }
  }
  rep.pass = rep.periodicityError <= tol &&
             (!rep.zeroSectionApplicable || rep.zeroSectionError <= tol);
  return rep;
}

}  // namespace floquet
