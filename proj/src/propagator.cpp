#include "floquet/propagator.hpp"

#include <Eigen/LU>

namespace floquet {

namespace {

// one classical RK4 step of X' = -A(t)X + F(t) (matrix- or vector-valued)
template <class State, class Rhs>
State rk4Step(const Rhs& rhs, double t, double h, const State& x) {
  State k1 = rhs(t, x);
  State k2 = rhs(t + 0.5 * h, x + (0.5 * h) * k1);
  State k3 = rhs(t + 0.5 * h, x + (0.5 * h) * k2);
  State k4 = rhs(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

MatC FundamentalSolution::at(long index) const {
  const int nt = grid.nt;
  long p = index >= 0 ? index / nt : -((-index + nt - 1) / nt);
  int ph = grid.phase(index);
  MatC base = u[static_cast<size_t>(ph)];
  if (p == 0) return base;
  MatC mp = MatC::Identity(dim(), dim());
  const MatC& factor = p > 0 ? monodromy : monodromyInv;
  for (long i = 0; i < std::abs(p); ++i) mp = factor * mp;
  return base * mp;
}

MatC FundamentalSolution::invAt(long index) const {
  const int nt = grid.nt;
  long p = index >= 0 ? index / nt : -((-index + nt - 1) / nt);
  int ph = grid.phase(index);
  MatC base = uinv[static_cast<size_t>(ph)];
  if (p == 0) return base;
  MatC mp = MatC::Identity(dim(), dim());
  const MatC& factor = p > 0 ? monodromyInv : monodromy;
  for (long i = 0; i < std::abs(p); ++i) mp = factor * mp;
  return mp * base;
}

FundamentalSolution fundamentalMatrix(const ProblemSpec& spec,
                                      const IntegratorConfig& cfg) {
  if (cfg.substeps < 1) throw NumericError("substeps must be >= 1");
  const int n = spec.dim;
  const int nt = spec.grid.nt;
  const double h = 1.0 / (static_cast<double>(nt) * cfg.substeps);

  auto rhs = [&](double t, const MatC& x) -> MatC { return -(spec.op.eval(mod1(t)) * x); };

  FundamentalSolution f;
  f.grid = spec.grid;
  f.u.reserve(static_cast<size_t>(nt));
  f.uinv.reserve(static_cast<size_t>(nt));

  MatC cur = MatC::Identity(n, n);
  long steps = 0;
  for (int i = 0; i < nt; ++i) {
    f.u.push_back(cur);
    for (int s = 0; s < cfg.substeps; ++s) {
      double t = (static_cast<double>(i) * cfg.substeps + s) * h;
      cur = rk4Step(rhs, t, h, cur);
      ++steps;
      if (!cur.allFinite())
        throw NumericError("integrator overflow near t = " + std::to_string(t));
    }
  }
  f.monodromy = cur;
  f.info.substeps = cfg.substeps;
  f.info.steps = steps;

  // step-halving estimate of the local error, one interval probe
  {
    MatC id = MatC::Identity(n, n);
    MatC a = rk4Step(rhs, 0.0, 2.0 * h, id);
    MatC b = rk4Step(rhs, 0.0, h, id);
    b = rk4Step(rhs, h, h, b);
    f.info.estimatedLocalError = (a - b).norm() / 15.0;
  }

  Eigen::PartialPivLU<MatC> lu(f.monodromy);
  double detAbs = std::abs(lu.determinant());
  if (detAbs < 1e-300) throw NumericError("singular monodromy matrix");
  f.monodromyInv = lu.inverse();

  for (int i = 0; i < nt; ++i) {
    Eigen::PartialPivLU<MatC> lui(f.u[static_cast<size_t>(i)]);
    if (std::abs(lui.determinant()) < 1e-300)
      throw NumericError("singular fundamental matrix at t = " +
                         std::to_string(spec.grid.point(i)));
    f.uinv.push_back(lui.inverse());
  }

  // Liouville: det M = exp(-int_0^1 tr A); the trace integral of a trig
  // polynomial over one period is its constant Fourier coefficient.
  Complex trInt = 0.0;
  for (int i = 0; i < n; ++i) trInt += spec.op.at(i, i).coeff(0);
  Complex detM = lu.determinant();
  double expected = std::exp(-trInt.real());
  f.info.liouvilleError =
      std::abs(detM - std::exp(-trInt)) / std::max(expected, 1e-300);
  if (f.info.liouvilleError > cfg.tolLiouville)
    throw NumericError("Liouville determinant check failed: rel err = " +
                       std::to_string(f.info.liouvilleError));

  f.info.residual = fundamentalResidual(f, spec);
  double tolRes = cfg.tolResidualFactor * spec.op.normBound();
  if (f.info.residual > tolRes)
    throw NumericError("fundamental solution residual " +
                       std::to_string(f.info.residual) + " exceeds " +
                       std::to_string(tolRes));
  return f;
}

AdjointSolution adjointSolution(const FundamentalSolution& f,
                                const InnerProductPair& ip) {
  AdjointSolution a;
  MatC g = ip.gramY.cast<Complex>();
  Eigen::LLT<MatC> llt(g);
  a.w.reserve(f.u.size());
  for (const auto& ui : f.uinv) a.w.push_back(llt.solve(ui.adjoint() * g));
  a.monodromy = llt.solve(f.monodromyInv.adjoint() * g);
  return a;
}

Trajectory propagate(const ProblemSpec& spec, double t0, double t1,
                     const VecC& u0, const std::function<VecC(double)>& forcing,
                     const IntegratorConfig& cfg) {
  if (!(t0 < t1)) throw NumericError("propagate requires t0 < t1");
  const int nt = spec.grid.nt;
  const double dt = 1.0 / nt;
  const double h = dt / cfg.substeps;

  auto rhs = [&](double t, const VecC& x) -> VecC {
    VecC r = -(spec.op.eval(mod1(t)) * x);
    if (forcing) r += forcing(t);
    return r;
  };

  Trajectory traj;
  long nsteps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-12));
  traj.samples.resize(u0.size(), nsteps + 1);
  VecC cur = u0;
  traj.times.push_back(t0);
  traj.samples.col(0) = cur;
  for (long i = 0; i < nsteps; ++i) {
    double ta = t0 + i * dt;
    double tb = std::min(t0 + (i + 1) * dt, t1);
    int sub = cfg.substeps;
    double hh = (tb - ta) / sub;
    for (int s = 0; s < sub; ++s) cur = rk4Step(rhs, ta + s * hh, hh, cur);
    if (!cur.allFinite())
      throw NumericError("integrator overflow near t = " + std::to_string(tb));
    traj.times.push_back(tb);
    traj.samples.col(i + 1) = cur;
  }
  (void)h;
  return traj;
}

double fundamentalResidual(const FundamentalSolution& f,
                           const ProblemSpec& spec) {
  const int nt = f.grid.nt;
  const double dt = 1.0 / nt;
  // 8th-order centered stencil
  static const double w[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  double worst = 0.0;
  for (int i = 0; i < nt; ++i) {
    MatC d = MatC::Zero(f.dim(), f.dim());
    for (int k = 1; k <= 4; ++k)
      d += (w[k - 1] / dt) * (f.at(i + k) - f.at(i - k));
    MatC res = d + spec.op.eval(f.grid.point(i)) * f.u[static_cast<size_t>(i)];
    worst = std::max(worst, res.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace floquet
