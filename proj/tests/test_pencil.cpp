#include "doctest.h"

#include "floquet/fourier.hpp"
#include "floquet/pencil.hpp"

using namespace floquet;

namespace {

std::string problemPath(const char* name) {
  return std::string(FLOQUET_PROBLEM_DIR) + "/" + name;
}

struct Loaded {
  ProblemSpec spec;
  FundamentalSolution fund;
};

Loaded load(const char* name) {
  Loaded l{parseProblemFile(problemPath(name)), {}};
  l.fund = fundamentalMatrix(l.spec);
  return l;
}

}  // namespace

TEST_CASE("strip eigenvalues of the bundled linear problems") {
  SUBCASE("constant diagonal keeps only lambda = 0") {
    auto [spec, f] = load("e1.floq");
    auto eigs = stripEigenvalues(f, spec.strip);
    REQUIRE(eigs.size() == 1);
    CHECK(std::abs(eigs[0].lambda) < 1e-10);
    CHECK(eigs[0].geometric == 1);
    CHECK(eigs[0].partial == std::vector<int>{1});
  }
  SUBCASE("nilpotent coupling has one chain of length two") {
    auto [spec, f] = load("e3.floq");
    auto eigs = stripEigenvalues(f, spec.strip);
    REQUIRE(eigs.size() == 1);
    CHECK(std::abs(eigs[0].lambda) < 1e-9);
    CHECK(eigs[0].geometric == 1);
    CHECK(eigs[0].partial == std::vector<int>{2});
  }
  SUBCASE("rotation with omega = pi/2 gives a simple pair") {
    auto [spec, f] = load("e4.floq");
    auto eigs = stripEigenvalues(f, spec.strip);
    REQUIRE(eigs.size() == 2);
    CHECK(std::abs(eigs[0].lambda - Complex(0.0, EIGEN_PI / 2)) < 1e-10);
    CHECK(std::abs(eigs[1].lambda - Complex(0.0, 3 * EIGEN_PI / 2)) < 1e-10);
    CHECK(eigs[0].algebraic == 1);
    CHECK(eigs[1].algebraic == 1);
  }
  SUBCASE("rotation with omega = pi merges at lambda = i pi, two chains") {
    auto [spec, f] = load("e4pi.floq");
    auto eigs = stripEigenvalues(f, spec.strip);
    REQUIRE(eigs.size() == 1);
    CHECK(std::abs(eigs[0].lambda - Complex(0.0, EIGEN_PI)) < 1e-10);
    CHECK(eigs[0].geometric == 2);
    CHECK(eigs[0].partial == std::vector<int>({1, 1}));
  }
  SUBCASE("strip boundary on a multiplier is rejected") {
    auto [spec, f] = load("e1.floq");
    StripSpec bad = spec.strip;
    bad.beta2 = 2.0;  // multiplier e^2 sits on the boundary
    CHECK_THROWS_AS(stripEigenvalues(f, bad), NumericError);
  }
}

TEST_CASE("jordan chains of the scalar cosine problem match the closed form") {
  auto [spec, f] = load("e2.floq");
  auto eigs = stripEigenvalues(f, spec.strip);
  REQUIRE(eigs.size() == 1);
  ChainSet phi = jordanChains(spec, f, eigs[0]);
  REQUIRE(phi.chains() == 1);
  REQUIRE(phi.length(0) == 1);
  // phi(t) = c exp(-sin(2 pi t)/(2 pi)); the ratio against the closed form
  // must be constant
  const MatC& fn = phi.fn[0][0];
  Complex c0 = fn(0, 0);
  for (int i = 0; i < spec.grid.nt; i += 5) {
    double t = spec.grid.point(i);
    Complex expect = c0 * std::exp(-std::sin(kTwoPi * t) / kTwoPi);
    CHECK(std::abs(fn(0, i) - expect) < 1e-10 * std::abs(c0));
  }

  ChainSet psi = adjointChains(spec, f, eigs[0]);
  const MatC& fnA = psi.fn[0][0];
  Complex a0 = fnA(0, 0);
  for (int i = 0; i < spec.grid.nt; i += 5) {
    double t = spec.grid.point(i);
    Complex expect = a0 * std::exp(std::sin(kTwoPi * t) / kTwoPi);
    CHECK(std::abs(fnA(0, i) - expect) < 1e-10 * std::abs(a0));
  }
}

TEST_CASE("jordan chain of E3 has the documented structure") {
  auto [spec, f] = load("e3.floq");
  auto eigs = stripEigenvalues(f, spec.strip);
  ChainSet phi = jordanChains(spec, f, eigs[0]);
  REQUIRE(phi.chains() == 1);
  REQUIRE(phi.length(0) == 2);

  // eigenvector is a constant multiple of e1
  const MatC& p0 = phi.fn[0][0];
  Complex c = p0(0, 0);
  CHECK(p0.row(1).cwiseAbs().maxCoeff() < 1e-9);
  for (int i = 0; i < spec.grid.nt; i += 7)
    CHECK(std::abs(p0(0, i) - c) < 1e-9 * std::abs(c));

  // generalized function: second component is the constant -c, first is
  // -c sin(2 pi t)/(2 pi) plus an admissible constant
  const MatC& p1 = phi.fn[0][1];
  for (int i = 0; i < spec.grid.nt; i += 7)
    CHECK(std::abs(p1(1, i) + c) < 1e-8 * std::abs(c));
  Complex alpha = p1(0, 0);
  for (int i = 0; i < spec.grid.nt; i += 7) {
    double t = spec.grid.point(i);
    Complex expect = alpha + c * std::sin(kTwoPi * t) / kTwoPi;
    CHECK(std::abs(p1(0, i) - expect) < 1e-8 * std::abs(c));
  }

  // adjoint eigenvector is a constant multiple of e2
  ChainSet psi = adjointChains(spec, f, eigs[0]);
  const MatC& q0 = psi.fn[0][0];
  CHECK(q0.row(0).cwiseAbs().maxCoeff() < 1e-9);
  for (int i = 0; i < spec.grid.nt; i += 7)
    CHECK(std::abs(q0(1, i) - q0(1, 0)) < 1e-9 * std::abs(q0(1, 0)));
}

TEST_CASE("chains of the constant diagonal problem are constant") {
  auto [spec, f] = load("e1.floq");
  auto eigs = stripEigenvalues(f, spec.strip);
  ChainSet phi = jordanChains(spec, f, eigs[0]);
  const MatC& fn = phi.fn[0][0];
  CHECK(fn.row(1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fn.row(2).cwiseAbs().maxCoeff() < 1e-10);
  for (int i = 1; i < spec.grid.nt; ++i)
    CHECK(std::abs(fn(0, i) - fn(0, 0)) < 1e-10);
}

TEST_CASE("normalization delivers the biorthogonality table") {
  for (const char* name : {"e1.floq", "e2.floq", "e3.floq", "e4.floq",
                           "e4pi.floq", "mathieu.floq"}) {
    CAPTURE(name);
    auto [spec, f] = load(name);
    NormalizedChainSystem sys = buildChainSystem(spec, f);
    CHECK(sys.maxBiorthError <= 1e-8);
    CHECK(sys.maxChainResidual <= 1e-8 * std::max(1.0, spec.op.normBound()));
    CHECK(sys.maxAdjointResidual <=
          10 * 1e-8 * std::max(1.0, spec.op.normBound()));
  }
}

TEST_CASE("self-adjoint constant case: psi equals phi after normalization") {
  auto [spec, f] = load("e1.floq");
  NormalizedChainSystem sys = buildChainSystem(spec, f);
  REQUIRE(sys.entries.size() == 1);
  const auto& e = sys.entries[0];
  double diff = (e.phi.fn[0][0] - e.psi.fn[0][0]).cwiseAbs().maxCoeff();
  double alt = (e.phi.fn[0][0] + e.psi.fn[0][0]).cwiseAbs().maxCoeff();
  CHECK(std::min(diff, alt) < 1e-9);
  Complex pairing = pairYhat(spec.ip, e.phi.fn[0][0], e.psi.fn[0][0]);
  CHECK(std::abs(pairing - Complex(1.0)) < 1e-10);
}

TEST_CASE("pointwise biorthogonality holds at every grid point") {
  for (const char* name : {"e1.floq", "e3.floq", "e4.floq", "e4pi.floq"}) {
    CAPTURE(name);
    auto [spec, f] = load(name);
    NormalizedChainSystem sys = buildChainSystem(spec, f);
    PointwiseReport rep = verifyPointwiseBiorthogonality(sys, 1e-7);
    CHECK(rep.pass);
    if (std::string(name) == "e3.floq") CHECK(rep.maxDeviation <= 1e-8);
  }
}

TEST_CASE("shift covariance: e^{2 pi i t} phi is a chain for lambda - 2 pi i") {
  auto [spec, f] = load("e3.floq");
  auto eigs = stripEigenvalues(f, spec.strip);
  ChainSet phi = jordanChains(spec, f, eigs[0]);
  std::vector<MatC> shifted;
  for (const auto& fn : phi.fn[0]) {
    MatC s = fn;
    for (int i = 0; i < spec.grid.nt; ++i)
      s.col(i) *= std::exp(Complex(0.0, kTwoPi * spec.grid.point(i)));
    shifted.push_back(s);
  }
  Complex shiftedLambda = eigs[0].lambda - Complex(0.0, kTwoPi);
  CHECK(chainResidual(spec, shiftedLambda, shifted, false) < 1e-7);
}

TEST_CASE("conjugate symmetry of the strip spectrum for real problems") {
  auto [spec, f] = load("e4.floq");
  auto eigs = stripEigenvalues(f, spec.strip);
  REQUIRE(eigs.size() == 2);
  // conj(lambda) mod 2 pi i must be in the set with equal multiplicity
  for (const auto& e : eigs) {
    Complex conj = std::conj(e.lambda);
    double im = conj.imag();
    while (im < 0) im += kTwoPi;
    bool found = false;
    for (const auto& o : eigs)
      if (std::abs(o.lambda - Complex(conj.real(), im)) < 1e-9 &&
          o.algebraic == e.algebraic)
        found = true;
    CHECK(found);
  }
}

TEST_CASE("collocation oracle agrees with the monodromy route") {
  for (const char* name : {"e1.floq", "e2.floq", "e3.floq", "e4.floq",
                           "e4pi.floq", "mathieu.floq"}) {
    CAPTURE(name);
    auto [spec, f] = load(name);
    auto eigs = stripEigenvalues(f, spec.strip);
    auto coll = collocationEigens(spec, 33);
    REQUIRE(coll.size() == eigs.size());
    int totalA = 0, totalB = 0;
    for (size_t i = 0; i < eigs.size(); ++i) {
      CHECK(std::abs(coll[i].lambda - eigs[i].lambda) <= 1e-6);
      totalA += eigs[i].algebraic;
      totalB += coll[i].algebraic;
    }
    CHECK(totalA == totalB);
  }
}

TEST_CASE("collocation eigenvalue of the Mathieu-type scalar problem") {
  ProblemSpec spec = parseProblemFile(problemPath("mathieu.floq"));
  auto coll = collocationEigens(spec, 33);
  REQUIRE(coll.size() == 1);
  CHECK(std::abs(coll[0].lambda - Complex(-0.3, 0.0)) < 1e-8);
}

TEST_CASE("resolvent sweep matches the Fourier diagonalization oracle") {
  ProblemSpec spec = parseProblem(R"(
[space]
dimension = 1
[operator]
A[1,1] = 1
[strip]
beta1 = -1/2
beta2 = 1/2
[grid]
nt = 64
[flags]
real = true
)");
  std::vector<double> xi;
  for (int k = -48; k <= 48; ++k) xi.push_back(6.0 * EIGEN_PI * k / 48.0);
  auto norms = resolventSweep(spec, 0.0, xi, 33);
  for (size_t i = 0; i < xi.size(); ++i) {
    double best = 0.0;
    for (int m = -16; m < 16; ++m)
      best = std::max(best, 1.0 / std::abs(Complex(1.0, xi[i] + kTwoPi * m)));
    CHECK(norms[i] == doctest::Approx(best).epsilon(0.01));
  }
}

TEST_CASE("resolvent sweep periodicity across one vertical period") {
  ProblemSpec spec = parseProblemFile(problemPath("e1.floq"));
  std::vector<double> base, extended;
  for (int k = 0; k < 24; ++k) base.push_back(kTwoPi * k / 24.0);
  for (int k = -72; k < 72; ++k) extended.push_back(kTwoPi * k / 24.0);
  auto a = resolventSweep(spec, 0.5, base, 33);
  auto b = resolventSweep(spec, 0.5, extended, 33);
  double maxA = *std::max_element(a.begin(), a.end());
  double maxB = *std::max_element(b.begin(), b.end());
  CHECK(std::abs(maxA - maxB) <= 0.05 * maxA);
}

TEST_CASE("resolvent sweep rejects beta on an eigenvalue line") {
  ProblemSpec spec = parseProblem(R"(
[space]
dimension = 1
[operator]
A[1,1] = 1
[strip]
beta1 = -2
beta2 = 2
[grid]
nt = 64
[flags]
real = true
)");
  std::vector<double> xi{0.0, 0.5, 1.0};
  CHECK_THROWS_AS(resolventSweep(spec, -1.0, xi, 33), NumericError);
}
