#include "doctest.h"

#include "floquet/propagator.hpp"

using namespace floquet;

namespace {

std::string problemPath(const char* name) {
  return std::string(FLOQUET_PROBLEM_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("monodromy of the constant diagonal system") {
  ProblemSpec spec = parseProblemFile(problemPath("e1.floq"));
  FundamentalSolution f = fundamentalMatrix(spec);
  MatC expect = MatC::Zero(3, 3);
  expect(0, 0) = 1.0;
  expect(1, 1) = std::exp(-2.0);
  expect(2, 2) = std::exp(2.0);
  CHECK((f.monodromy - expect).norm() < 1e-12);
  CHECK(f.info.liouvilleError < 1e-10);
}

TEST_CASE("scalar cosine coefficient integrates to the identity multiplier") {
  ProblemSpec spec = parseProblemFile(problemPath("e2.floq"));
  FundamentalSolution f = fundamentalMatrix(spec);
  CHECK(std::abs(f.monodromy(0, 0) - Complex(1.0)) < 1e-12);

  ProblemSpec mat = parseProblemFile(problemPath("mathieu.floq"));
  FundamentalSolution fm = fundamentalMatrix(mat);
  CHECK(std::abs(fm.monodromy(0, 0) - std::exp(Complex(-0.3))) < 1e-12);
}

TEST_CASE("nilpotent coupling monodromy") {
  ProblemSpec spec = parseProblemFile(problemPath("e3.floq"));
  FundamentalSolution f = fundamentalMatrix(spec);
  MatC expect(2, 2);
  expect << 1.0, -1.0, 0.0, 1.0;
  CHECK((f.monodromy - expect).norm() < 1e-12);
}

TEST_CASE("propagation of monodromy eigenvectors and forced paths") {
  ProblemSpec spec = parseProblemFile(problemPath("e1.floq"));
  FundamentalSolution f = fundamentalMatrix(spec);

  VecC u0 = VecC::Zero(3);
  u0[1] = 1.0;
  Trajectory tr = propagate(spec, 0.0, 1.0, u0);
  CHECK((tr.samples.col(tr.samples.cols() - 1) - std::exp(-2.0) * u0).norm() <
        1e-10);

  // zero operator with constant forcing: u = u0 + c (t - t0)
  ProblemSpec zero = parseProblem(R"(
[space]
dimension = 2
[operator]
A[1,1] = 0
[strip]
beta1 = -1
beta2 = 1
[grid]
nt = 64
[flags]
real = true
)");
  VecC c(2);
  c << 1.0, -2.0;
  Trajectory tz = propagate(zero, 0.0, 2.0, VecC::Zero(2),
                            [&](double) { return c; });
  CHECK((tz.samples.col(tz.samples.cols() - 1) - 2.0 * c).norm() < 1e-10);
}

TEST_CASE("E3 propagation with exact quadrature endpoint") {
  ProblemSpec spec = parseProblemFile(problemPath("e3.floq"));
  VecC u0(2);
  u0 << 0.0, 1.0;
  Trajectory tr = propagate(spec, 0.0, 1.0, u0);
  VecC expect(2);
  expect << -1.0, 1.0;
  CHECK((tr.samples.col(tr.samples.cols() - 1) - expect).norm() < 1e-10);
}

TEST_CASE("cocycle property over two periods") {
  ProblemSpec spec = parseProblemFile(problemPath("e3.floq"));
  FundamentalSolution f = fundamentalMatrix(spec);
  VecC u0(2);
  u0 << 0.7, -0.3;
  Trajectory tr = propagate(spec, 0.0, 2.0, u0);
  // endpoint equals M^2 u0
  VecC expect = f.monodromy * f.monodromy * u0;
  CHECK((tr.samples.col(tr.samples.cols() - 1) - expect).norm() <
        1e-8 * expect.norm());
  // midpoint at t in [1,2] equals U(t-1) M u0
  long mid = (tr.samples.cols() - 1) / 2 + 32;
  double t = tr.times[static_cast<size_t>(mid)];
  REQUIRE(t > 1.0);
  long k = std::lround((t - 1.0) * spec.grid.nt);
  VecC expectMid = f.u[static_cast<size_t>(k)] * f.monodromy * u0;
  CHECK((tr.samples.col(mid) - expectMid).norm() < 1e-8 * expectMid.norm());
}

TEST_CASE("refinement convergence is fourth order") {
  ProblemSpec spec = parseProblemFile(problemPath("mathieu.floq"));
  spec.grid.nt = 32;  // coarse grid keeps the errors above the float floor
  IntegratorConfig c1, c2, c4;
  c1.substeps = 1;
  c2.substeps = 2;
  c4.substeps = 4;
  // relax the accuracy gates for the deliberately coarse runs
  for (IntegratorConfig* c : {&c1, &c2, &c4}) {
    c->tolResidualFactor = 1e-3;
    c->tolLiouville = 1e-3;
  }
  MatC m1 = fundamentalMatrix(spec, c1).monodromy;
  MatC m2 = fundamentalMatrix(spec, c2).monodromy;
  MatC m4 = fundamentalMatrix(spec, c4).monodromy;
  MatC mref = fundamentalMatrix(spec).monodromy;
  double e1 = (m1 - mref).norm();
  double e2 = (m2 - mref).norm();
  double e4 = (m4 - mref).norm();
  CHECK(e1 / e2 >= 14.0);
  CHECK(e2 / e4 >= 14.0);
}

TEST_CASE("grid residual of the fundamental solution is small") {
  for (const char* name : {"e1.floq", "e2.floq", "e3.floq", "e4.floq"}) {
    ProblemSpec spec = parseProblemFile(problemPath(name));
    FundamentalSolution f = fundamentalMatrix(spec);
    CHECK(f.info.residual <= 1e-7 * spec.op.normBound());
  }
}

TEST_CASE("monodromy extension indexing") {
  ProblemSpec spec = parseProblemFile(problemPath("e4.floq"));
  FundamentalSolution f = fundamentalMatrix(spec);
  int nt = spec.grid.nt;
  CHECK((f.at(nt) - f.monodromy).norm() < 1e-12);
  CHECK((f.at(-nt) - f.monodromyInv).norm() < 1e-12);
  CHECK((f.at(nt + 3) - f.u[3] * f.monodromy).norm() < 1e-12);
  CHECK((f.at(-1) - f.u[static_cast<size_t>(nt - 1)] * f.monodromyInv).norm() <
        1e-12);
  CHECK((f.invAt(nt + 3) - f.monodromyInv * f.uinv[3]).norm() < 1e-12);
}
