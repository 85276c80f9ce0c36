#include "doctest.h"

#include "floquet/manifold.hpp"

using namespace floquet;

namespace {

std::string problemPath(const char* name) {
  return std::string(FLOQUET_PROBLEM_DIR) + "/" + name;
}

struct Setup {
  ProblemSpec spec;
  std::shared_ptr<FundamentalSolution> fund;
  std::shared_ptr<NormalizedChainSystem> sys;
  std::shared_ptr<ProjectorBundle> bundle;
  std::shared_ptr<RealProjectorBundle> realBundle;
};

Setup make(const char* name) {
  Setup s;
  s.spec = parseProblemFile(problemPath(name));
  s.fund = std::make_shared<FundamentalSolution>(fundamentalMatrix(s.spec));
  s.sys = std::make_shared<NormalizedChainSystem>(
      buildChainSystem(s.spec, *s.fund));
  s.bundle = std::make_shared<ProjectorBundle>(s.sys);
  auto eigs = stripEigenvalues(*s.fund, s.spec.strip);
  s.realBundle = std::make_shared<RealProjectorBundle>(
      s.bundle, renumber(eigs, s.spec.realFlag));
  return s;
}

ManifoldMap makeMap(Setup& s, double epsilon = 0.2, double tolFp = 1e-9) {
  RealReduction red(s.spec, s.fund, s.realBundle);
  CutoffConfig cut;
  cut.epsilon = epsilon;
  double gamma = red.beta() / 2.0;
  FixedPointConfig cfg;
  cfg.tolFp = tolFp;
  return ManifoldMap(std::move(red), cut, gamma, cfg);
}

}  // namespace

TEST_CASE("cutoff smoothstep regions") {
  CutoffConfig cut;
  cut.epsilon = 0.1;
  CHECK(cut.chi(0.5) == 1.0);
  CHECK(cut.chi(1.0) == 1.0);
  CHECK(cut.chi(2.0) == 0.0);
  CHECK(cut.chi(3.0) == 0.0);
  double mid = cut.chi(1.5);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  CHECK(cut.cutoffFactor(0.05, 0.05) == 1.0);
  CHECK(cut.cutoffFactor(0.3, 0.0) == 0.0);
  // monotone decreasing on [1,2]
  for (double r = 1.0; r < 1.95; r += 0.05)
    CHECK(cut.chi(r + 0.05) <= cut.chi(r) + 1e-15);
}

TEST_CASE("weighted norms closed forms") {
  const int nt = 64;
  const long T = 20;
  WindowGrid w{-T * nt, T * nt, nt};
  double gamma = 0.5;

  SUBCASE("constant path") {
    PathR p(w, 1);
    p.samples.setConstant(3.0);
    WeightedNorms n = weightedCoeffNorms<double>(p, 0.0, gamma);
    double exact = 3.0 * std::sqrt((1.0 - std::exp(-2.0 * gamma * T)) / gamma);
    CHECK(n.l2 == doctest::Approx(exact).epsilon(1e-4));
  }
  SUBCASE("zero path") {
    PathR p(w, 2);
    WeightedNorms n = weightedCoeffNorms<double>(p, 0.0, gamma);
    CHECK(n.l2 == 0.0);
    CHECK(n.h1 == 0.0);
  }
  SUBCASE("weight-cancelling growth") {
    PathR p(w, 1);
    for (long c = 0; c < w.count(); ++c)
      p.samples(0, c) = std::exp(gamma * std::abs(w.time(c)));
    WeightedNorms n = weightedCoeffNorms<double>(p, 0.0, gamma);
    CHECK(n.l2 * n.l2 == doctest::Approx(2.0 * T).epsilon(1e-3));
  }
}

TEST_CASE("model problem with no forcing is the free flow") {
  Setup s = make("e5.floq");
  RealReduction red(s.spec, s.fund, s.realBundle);
  WeightedWindow win = makeWeightedWindow(red.beta(), red.beta() / 2, 1e-9, 0,
                                          s.spec.grid.nt);
  WindowGrid w = win.window();
  PathR zeroF(w, red.reducedDim());
  PathR zeroG(w, red.dim());
  VecR xi(1);
  xi << 0.05;
  auto rep = modelSolveK<RealReduction>(red, win, zeroF, xi, zeroG);
  // R = [0]: free flow is constant
  for (long c = 0; c < w.count(); c += 500)
    CHECK(rep.u.samples(0, c) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(rep.v.samples.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rep.constU > 0.0);

  // the bound constant is stable under a tau shift
  WeightedWindow win2 = win;
  win2.tauIndex = 3 * s.spec.grid.nt;
  PathR zeroF2(win2.window(), red.reducedDim());
  PathR zeroG2(win2.window(), red.dim());
  auto rep2 = modelSolveK<RealReduction>(red, win2, zeroF2, xi, zeroG2);
  CHECK(rep2.constU == doctest::Approx(rep.constU).epsilon(1e-6));
}

TEST_CASE("fixed point at the origin and tangency") {
  Setup s = make("e5.floq");
  ManifoldMap map = makeMap(s);
  VecR mu = VecR::Zero(1);
  VecR zero = VecR::Zero(1);

  VecR h0 = map.value(0.0, mu, zero);
  CHECK(h0.norm() <= 1e-9);
  CHECK(map.lastDiagnostics().converged);

  // finite-difference Jacobian at the origin
  double delta = 1e-4 * map.cutoff().epsilon;
  VecR xiP(1), xiM(1);
  xiP << delta;
  xiM << -delta;
  VecR hp = map.value(0.0, mu, xiP);
  VecR hm = map.value(0.0, mu, xiM);
  CHECK(((hp - hm) / (2 * delta)).norm() <= 1e-8);
}

TEST_CASE("quadratic and quartic manifold coefficients of the model problem") {
  Setup s = make("e5.floq");
  ManifoldMap map = makeMap(s);
  VecR mu = VecR::Zero(1);

  // fit h(x) = c2 x^2 + c4 x^4 + c6 x^6 on the sample set
  std::vector<double> xs, hs;
  for (double x = 0.02; x <= 0.1 + 1e-12; x += 0.01) {
    VecR xi(1);
    xi << x;
    VecR h = map.value(0.0, mu, xi);
    CHECK(map.lastDiagnostics().contractionFactor < 1.0);
    xs.push_back(x);
    hs.push_back(h[1]);
    CHECK(std::abs(h[0]) < 1e-8);  // h lies in the complement (e2 direction)
  }
  Eigen::MatrixXd a(xs.size(), 3);
  Eigen::VectorXd b(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    double x2 = xs[i] * xs[i];
    a(static_cast<long>(i), 0) = x2;
    a(static_cast<long>(i), 1) = x2 * x2;
    a(static_cast<long>(i), 2) = x2 * x2 * x2;
    b(static_cast<long>(i)) = hs[i];
  }
  Eigen::VectorXd fit = a.colPivHouseholderQr().solve(b);
  CHECK(fit[0] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fit[1] == doctest::Approx(-2.0).epsilon(0.1));
}

TEST_CASE("periodic coefficient variant reproduces the periodic ansatz") {
  Setup s = make("e5p.floq");
  ManifoldMap map = makeMap(s);
  VecR mu(0);

  // h(0, x) ~ c(0) x^2 with c(0) = 1 + 1/(2(1+4pi^2))
  double expect = 1.0 + 1.0 / (2.0 * (1.0 + 4.0 * EIGEN_PI * EIGEN_PI));
  std::vector<double> xs{0.02, 0.03, 0.04};
  Eigen::MatrixXd a(3, 2);
  Eigen::VectorXd b(3);
  for (int i = 0; i < 3; ++i) {
    VecR xi(1);
    xi << xs[static_cast<size_t>(i)];
    VecR h = map.value(0.0, mu, xi);
    a(i, 0) = xs[static_cast<size_t>(i)] * xs[static_cast<size_t>(i)];
    a(i, 1) = std::pow(xs[static_cast<size_t>(i)], 4);
    b(i) = h[1];
  }
  Eigen::VectorXd fit = a.colPivHouseholderQr().solve(b);
  CHECK(std::abs(fit[0] - expect) <= 1e-3);
}

TEST_CASE("contraction factor shrinks with epsilon") {
  Setup s = make("e5.floq");
  VecR mu = VecR::Zero(1);
  VecR xi(1);
  xi << 0.05;
  double f1, f2, f3;
  {
    ManifoldMap m = makeMap(s, 0.2);
    m.value(0.0, mu, xi);
    f1 = m.lastDiagnostics().contractionFactor;
  }
  {
    ManifoldMap m = makeMap(s, 0.1);
    m.value(0.0, mu, xi);
    f2 = m.lastDiagnostics().contractionFactor;
  }
  {
    ManifoldMap m = makeMap(s, 0.05);
    m.value(0.0, mu, xi);
    f3 = m.lastDiagnostics().contractionFactor;
  }
  CHECK(f1 < 1.0);
  CHECK(f2 <= f1 * 1.05);
  CHECK(f3 <= f2 * 1.05);
}

TEST_CASE("reduced trajectory follows the scalar oracle") {
  Setup s = make("e5.floq");
  ManifoldMap map = makeMap(s);
  VecR mu = VecR::Zero(1);
  VecR xi(1);
  xi << 0.05;

  long stepNodes = s.spec.grid.nt / 4;
  ReducedTrajectory traj =
      integrateReduced(map, mu, xi, 0.0, 8.0, stepNodes, 0.5);

  // oracle: dx/dt = x^3 - 2 x^5, classic RK4 with a fine step
  double x = 0.05;
  double dt = 1e-3;
  auto g = [](double v) { return v * v * v - 2.0 * std::pow(v, 5); };
  std::vector<double> oracle{x};
  for (double t = 0.0; t < 8.0 - 1e-12; t += dt) {
    double k1 = g(x), k2 = g(x + dt / 2 * k1), k3 = g(x + dt / 2 * k2),
           k4 = g(x + dt * k3);
    x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  double xT = traj.coeffs(0, traj.coeffs.cols() - 1);
  CHECK(std::abs(xT - x) <= 0.02 * std::abs(x));

  // zero initial data stays at the origin
  ReducedTrajectory z = integrateReduced(map, mu, VecR::Zero(1), 0.0, 2.0,
                                         stepNodes, 0.5);
  CHECK(z.coeffs.cwiseAbs().maxCoeff() <= 1e-9);

  // lift residual along the trajectory
  CHECK(liftResidual(map, mu, traj, 6) <= 1e-5);
}

TEST_CASE("backward run matches the forward run of the reflected field") {
  Setup s = make("e5.floq");
  ManifoldMap map = makeMap(s);
  VecR mu = VecR::Zero(1);
  VecR xi(1);
  xi << 0.05;
  long stepNodes = s.spec.grid.nt / 4;
  // x -> -x is a symmetry of the model nonlinearity, so the mirrored
  // trajectory solves the same reduced equation
  ReducedTrajectory fwd = integrateReduced(map, mu, xi, 0.0, 4.0, stepNodes, 0.5);
  VecR xiNeg(1);
  xiNeg << -0.05;
  ReducedTrajectory mirror =
      integrateReduced(map, mu, xiNeg, 0.0, 4.0, stepNodes, 0.5);
  for (long c = 0; c < fwd.coeffs.cols(); c += 4)
    CHECK(std::abs(fwd.coeffs(0, c) + mirror.coeffs(0, c)) <= 1e-9);
}

TEST_CASE("bounded solutions are captured by the manifold") {
  Setup s = make("e5.floq");
  ManifoldMap map = makeMap(s);
  VecR mu = VecR::Zero(1);
  VecR xi(1);
  xi << 0.05;

  SUBCASE("on-manifold start agrees immediately") {
    VecR u0 = map.reduction().reconstructU(0.0, xi) + map.value(0.0, mu, xi);
    CaptureReport rep = verifyBoundedSolutionCapture(map, mu, u0, 4.0, 0.5,
                                                     1e-4);
    CHECK(rep.pass);
  }
  SUBCASE("perturbed start decays onto the manifold") {
    VecR u0 = map.reduction().reconstructU(0.0, xi) + map.value(0.0, mu, xi);
    u0[1] += 1e-3;
    CaptureReport rep = verifyBoundedSolutionCapture(map, mu, u0, 7.0, 3.0,
                                                     1e-4);
    CHECK(rep.pass);
  }
  SUBCASE("zero solution is captured identically") {
    CaptureReport rep = verifyBoundedSolutionCapture(
        map, mu, VecR::Zero(2), 2.0, 0.5, 1e-9);
    CHECK(rep.pass);
  }
}

TEST_CASE("periodicity in t and the zero section in mu") {
  Setup s = make("e5.floq");
  ManifoldMap map = makeMap(s);
  VecR muProbe(1);
  muProbe << 0.3;  // inside the parameter box, away from mu0
  VecR xiProbe(1);
  xiProbe << 0.05;
  PeriodicityReport rep = verifyPeriodicityAndParameters(map, muProbe, xiProbe,
                                                         1e-9);
  CHECK(rep.pass);
  CHECK(rep.periodicityError <= 1e-9);
  CHECK(rep.zeroSectionApplicable);
  CHECK(rep.zeroSectionError <= 1e-9);
}

TEST_CASE("the manifold moves continuously with a coefficient perturbation") {
  Setup base = make("e5.floq");
  ManifoldMap mapA = makeMap(base);

  // A(t, mu) = A(t) + delta B(t) with a small periodic B
  std::string text = serializeProblem(base.spec);
  ProblemSpec pert = parseProblem(text);
  pert.op.at(1, 1) += TrigPoly::cosine(1, 1e-3);
  Setup s2;
  s2.spec = pert;
  s2.fund = std::make_shared<FundamentalSolution>(fundamentalMatrix(s2.spec));
  s2.sys = std::make_shared<NormalizedChainSystem>(
      buildChainSystem(s2.spec, *s2.fund));
  s2.bundle = std::make_shared<ProjectorBundle>(s2.sys);
  auto eigs = stripEigenvalues(*s2.fund, s2.spec.strip);
  s2.realBundle = std::make_shared<RealProjectorBundle>(
      s2.bundle, renumber(eigs, true));
  ManifoldMap mapB = makeMap(s2);

  VecR mu = VecR::Zero(1);
  VecR xi(1);
  xi << 0.05;
  VecR ha = mapA.value(0.0, mu, xi);
  VecR hb = mapB.value(0.0, mu, xi);
  CHECK((ha - hb).norm() <= 0.1);          // continuity scale
  CHECK((ha - hb).norm() <= 50 * 1e-3);    // linear response bound
}
