#include "doctest.h"

#include "floquet/fourier.hpp"
#include "floquet/projector.hpp"

using namespace floquet;

namespace {

std::string problemPath(const char* name) {
  return std::string(FLOQUET_PROBLEM_DIR) + "/" + name;
}

struct Setup {
  ProblemSpec spec;
  FundamentalSolution fund;
  std::shared_ptr<NormalizedChainSystem> sys;
  std::unique_ptr<ProjectorBundle> bundle;
};

Setup make(const char* name) {
  Setup s;
  s.spec = parseProblemFile(problemPath(name));
  s.fund = fundamentalMatrix(s.spec);
  s.sys = std::make_shared<NormalizedChainSystem>(
      buildChainSystem(s.spec, s.fund));
  s.bundle = std::make_unique<ProjectorBundle>(s.sys);
  return s;
}

}  // namespace

TEST_CASE("apply_P reproduces eigenfunctions and kills the complement") {
  for (const char* name : {"e1.floq", "e3.floq", "e4.floq"}) {
    CAPTURE(name);
    Setup s = make(name);
    const auto& theta = s.bundle->theta();
    for (double t : {0.0, 0.3125, 0.7}) {
      // range reproduction on every eigenfunction
      for (const auto& i : theta) {
        if (i.m != 0) continue;
        VecC v = s.bundle->phi(ThetaIndex{i.k, i.j, 0}, t);
        CHECK((s.bundle->applyP(t, v) - v).norm() <= 1e-7 * (1 + v.norm()));
      }
      // complement annihilation
      VecC w = VecC::Ones(s.spec.dim);
      VecC q = s.bundle->applyQ(t, w);
      CHECK(s.bundle->applyP(t, q).norm() <= 1e-7 * (1 + w.norm()));
    }
  }
}

TEST_CASE("diagonal constant case maps (1,1,1) to e1") {
  Setup s = make("e1.floq");
  VecC v = VecC::Ones(3);
  VecC p = s.bundle->applyP(0.42, v);
  VecC expect = VecC::Zero(3);
  expect[0] = 1.0;
  CHECK((p - expect).norm() < 1e-9);
}

TEST_CASE("idempotency and rank constancy on the grid") {
  for (const char* name : {"e1.floq", "e2.floq", "e3.floq", "e4.floq",
                           "e4pi.floq", "mathieu.floq"}) {
    CAPTURE(name);
    Setup s = make(name);
    int expectRank = s.bundle->totalMultiplicity();
    double worst = 0.0;
    for (int i = 0; i < s.spec.grid.nt; i += 1) {
      MatC p = s.bundle->matrixP(s.spec.grid.point(i));
      worst = std::max(worst, (p * p - p).norm());
      Eigen::JacobiSVD<MatC> svd(p);
      int rank = 0;
      for (int r = 0; r < svd.singularValues().size(); ++r)
        if (svd.singularValues()[r] > 0.5) ++rank;
      CHECK(rank == expectRank);
    }
    CHECK(worst <= 1e-7);
  }
}

TEST_CASE("extract_coefficients of a flipped chain is an indicator path") {
  Setup s = make("e3.floq");
  const auto& e = s.sys->entries[0];
  // u(t) = phi_{1, m_kj-1-m}(t) with m = 1 -> coefficient (0,0,1) constant 1
  WindowGrid w{0, s.spec.grid.nt - 1, s.spec.grid.nt};
  PathC u(w, 2);
  for (long i = 0; i < w.count(); ++i)
    u.samples.col(i) = e.phi.fn[0][0].col(i);  // flip of m = 1
  PathC c = s.bundle->extractCoefficients(u);
  for (long i = 0; i < w.count(); ++i) {
    CHECK(std::abs(c.samples(1, i) - Complex(1.0)) < 1e-8);
    CHECK(std::abs(c.samples(0, i)) < 1e-8);
  }

  // zero path maps to zero
  PathC z(w, 2);
  PathC cz = s.bundle->extractCoefficients(z);
  CHECK(cz.samples.norm() == 0.0);

  // complement path maps to ~zero coefficients
  PathC q(w, 2);
  for (long i = 0; i < w.count(); ++i) {
    VecC v(2);
    v << 0.3, -1.1;
    q.samples.col(i) = s.bundle->applyQ(w.time(i), v);
  }
  PathC cq = s.bundle->extractCoefficients(q);
  CHECK(cq.samples.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("reconstruction matches extract-then-evaluate") {
  Setup s = make("e4.floq");
  MatC path = synthesizeTrigPath(s.spec, 6, 99);
  for (int i = 0; i < s.spec.grid.nt; i += 17) {
    double t = s.spec.grid.point(i);
    VecC coeffs = s.bundle->extractAt(t, path.col(i));
    VecC rec = s.bundle->reconstructU(t, coeffs);
    VecC direct = s.bundle->applyP(t, path.col(i));
    CHECK((rec - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
  }
}

TEST_CASE("build_R on the bundled examples") {
  Setup e1 = make("e1.floq");
  MatC r1 = e1.bundle->buildR();
  REQUIRE(r1.rows() == 1);
  CHECK(std::abs(r1(0, 0)) < 1e-10);

  Setup e3 = make("e3.floq");
  MatC r3 = e3.bundle->buildR();
  REQUIRE(r3.rows() == 2);
  CHECK(std::abs(r3(0, 0)) < 1e-9);
  CHECK(std::abs(r3(1, 1)) < 1e-9);
  CHECK(std::abs(r3(0, 1)) == 0.0);
  CHECK(std::abs(r3(1, 0) - Complex(1.0)) == 0.0);

  Setup e4pi = make("e4pi.floq");
  MatC r4 = e4pi.bundle->buildR();
  REQUIRE(r4.rows() == 2);
  CHECK(std::abs(r4(0, 0) - Complex(0, EIGEN_PI)) < 1e-10);
  CHECK(std::abs(r4(1, 1) - Complex(0, EIGEN_PI)) < 1e-10);
  CHECK(std::abs(r4(0, 1)) == 0.0);
  CHECK(std::abs(r4(1, 0)) == 0.0);
}

TEST_CASE("commutation of L and P on random trig paths") {
  for (const char* name : {"e1.floq", "e3.floq", "e4.floq"}) {
    CAPTURE(name);
    Setup s = make(name);
    std::vector<MatC> paths;
    for (int k = 0; k < 20; ++k)
      paths.push_back(synthesizeTrigPath(s.spec, 8, 1000 + k));
    CommutationReport rep = verifyCommutation(*s.bundle, s.spec, paths, 1e-6);
    CHECK(rep.pass);
    CHECK(rep.maxCommutator <= 1e-6);
    CHECK(rep.maxTwoPathGap <= 1e-6);
  }
}

TEST_CASE("homogeneous solutions and complement paths commute trivially") {
  Setup s = make("e3.floq");
  const int nt = s.spec.grid.nt;
  // Phi_{1,1}(t) restricted to one period is not periodic, but the
  // eigenfunction phi_{1,0} is a periodic homogeneous solution of L
  MatC u = s.sys->entries[0].phi.fn[0][0];
  MatC lu = applyLPeriodic(s.spec, u);
  CHECK(std::sqrt(std::abs(pairYhat(s.spec.ip, lu, lu))) < 1e-8);

  // a path in the complement stays in the complement under L
  MatC qpath(2, nt);
  MatC raw = synthesizeTrigPath(s.spec, 5, 7);
  for (int i = 0; i < nt; ++i)
    qpath.col(i) = s.bundle->applyQ(s.spec.grid.point(i), raw.col(i));
  MatC lq = applyLPeriodic(s.spec, qpath);
  double worst = 0.0;
  for (int i = 0; i < nt; ++i)
    worst = std::max(
        worst, s.bundle->applyP(s.spec.grid.point(i), lq.col(i)).norm());
  CHECK(worst <= 1e-6);
}
