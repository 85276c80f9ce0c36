#include "floquet/projector.hpp"

#include <random>

#include "floquet/fourier.hpp"

namespace floquet {

ProjectorBundle::ProjectorBundle(std::shared_ptr<const NormalizedChainSystem> sys,
                                 ProjectorConfig cfg)
    : sys_(std::move(sys)), cfg_(cfg) {
  if (!sys_) throw NumericError("projector bundle needs a chain system");
  for (size_t k = 0; k < sys_->entries.size(); ++k) {
    const auto& e = sys_->entries[k];
    if (!e.phi.fn.empty() && !e.phi.fn[0].empty())
      dim_ = static_cast<int>(e.phi.fn[0][0].rows());
    for (int j = 0; j < e.phi.chains(); ++j)
      for (int m = 0; m < e.phi.length(j); ++m)
        theta_.push_back(ThetaIndex{static_cast<int>(k), j, m});
  }
}

const MatC& ProjectorBundle::phiSamples(const ThetaIndex& i) const {
  return sys_->entries[i.k].phi.fn[i.j][static_cast<size_t>(i.m)];
}

const MatC& ProjectorBundle::psiSamples(const ThetaIndex& i) const {
  return sys_->entries[i.k].psi.fn[i.j][static_cast<size_t>(i.m)];
}

VecC ProjectorBundle::evalChain(const MatC& samples, const MatC& coeffs,
                                double t) const {
  const int nt = sys_->grid.nt;
  double tr = mod1(t);
  double idxF = tr * nt;
  long idx = std::lround(idxF);
  if (std::abs(idxF - idx) < 1e-9 * nt)
    return samples.col(sys_->grid.phase(idx));
  return evalTrigInterp(coeffs, tr);
}

VecC ProjectorBundle::phi(const ThetaIndex& i, double t) const {
  return evalChain(phiSamples(i),
                   sys_->entries[i.k].phi.fourier[i.j][static_cast<size_t>(i.m)],
                   t);
}

VecC ProjectorBundle::psi(const ThetaIndex& i, double t) const {
  return evalChain(psiSamples(i),
                   sys_->entries[i.k].psi.fourier[i.j][static_cast<size_t>(i.m)],
                   t);
}

VecC ProjectorBundle::phiFlip(const ThetaIndex& i, double t) const {
  const auto& e = sys_->entries[i.k];
  ThetaIndex f{i.k, i.j, e.eig.partial[static_cast<size_t>(i.j)] - 1 - i.m};
  return phi(f, t);
}

VecC ProjectorBundle::applyP(double t, const VecC& v) const {
  VecC out = VecC::Zero(dim_);
  VecC gv = sys_->ip.gramY.cast<Complex>() * v;
  for (const auto& i : theta_) {
    Complex coeff = psi(i, t).dot(gv);  // (v, psi)_Y
    out += coeff * phiFlip(i, t);
  }
  return out;
}

VecC ProjectorBundle::applyQ(double t, const VecC& v) const {
  return v - applyP(t, v);
}

MatC ProjectorBundle::matrixP(double t) const {
  MatC p = MatC::Zero(dim_, dim_);
  MatC gy = sys_->ip.gramY.cast<Complex>();
  for (const auto& i : theta_)
    p += phiFlip(i, t) * (psi(i, t).adjoint() * gy);
  return p;
}

VecC ProjectorBundle::extractAt(double t, const VecC& u) const {
  VecC out(totalMultiplicity());
  VecC gu = sys_->ip.gramY.cast<Complex>() * u;
  for (size_t r = 0; r < theta_.size(); ++r)
    out[static_cast<long>(r)] = psi(theta_[r], t).dot(gu);
  return out;
}

PathC ProjectorBundle::extractCoefficients(const PathC& u) const {
  PathC out(u.w, totalMultiplicity());
  for (long c = 0; c < u.w.count(); ++c)
    out.samples.col(c) = extractAt(u.w.time(c), u.samples.col(c));
  return out;
}

VecC ProjectorBundle::reconstructU(double t, const VecC& coeffs) const {
  VecC out = VecC::Zero(dim_);
  for (size_t r = 0; r < theta_.size(); ++r)
    out += coeffs[static_cast<long>(r)] * phiFlip(theta_[r], t);
  return out;
}

MatC ProjectorBundle::buildR() const {
  const int m = totalMultiplicity();
  MatC r = MatC::Zero(m, m);
  for (int row = 0; row < m; ++row) {
    const auto& i = theta_[static_cast<size_t>(row)];
    r(row, row) = sys_->entries[i.k].eig.lambda;
    if (i.m > 0) r(row, row - 1) = 1.0;
  }
  return r;
}

MatC applyLPeriodic(const ProblemSpec& spec, const MatC& samples) {
  MatC d = spectralDerivative(samples);
  for (int i = 0; i < samples.cols(); ++i)
    d.col(i) += evalOperator(spec.op, spec.grid.point(i)) * samples.col(i);
  return d;
}

MatC applyLPviaCoefficients(const ProjectorBundle& bundle,
                            const ProblemSpec& spec, const MatC& samples) {
  const int nt = spec.grid.nt;
  const auto& theta = bundle.theta();
  const int m = bundle.totalMultiplicity();

  MatC coeffs(m, nt);
  for (int i = 0; i < nt; ++i)
    coeffs.col(i) = bundle.extractAt(spec.grid.point(i), samples.col(i));
  MatC dcoeffs = spectralDerivative(coeffs);

  MatC out = MatC::Zero(samples.rows(), nt);
  for (int r = 0; r < m; ++r) {
    const auto& idx = theta[static_cast<size_t>(r)];
    Complex lam = bundle.lambda(idx.k);
    for (int i = 0; i < nt; ++i) {
      Complex scalar = dcoeffs(r, i) - lam * coeffs(r, i);
      if (idx.m > 0) scalar -= coeffs(r - 1, i);  // u^k_{j,m-1} term
      out.col(i) += scalar * bundle.phiFlip(idx, spec.grid.point(i));
    }
  }
  return out;
}

CommutationReport verifyCommutation(const ProjectorBundle& bundle,
                                    const ProblemSpec& spec,
                                    const std::vector<MatC>& testPaths,
                                    double tol) {
  CommutationReport rep;
  rep.tol = tol;
  const int nt = spec.grid.nt;
  for (const auto& u : testPaths) {
    MatC lu = applyLPeriodic(spec, u);
    MatC pu(u.rows(), nt), plu(u.rows(), nt);
    for (int i = 0; i < nt; ++i) {
      double t = spec.grid.point(i);
      pu.col(i) = bundle.applyP(t, u.col(i));
      plu.col(i) = bundle.applyP(t, lu.col(i));
    }
    MatC lpu = applyLPeriodic(spec, pu);
    MatC diff = lpu - plu;
    rep.maxCommutator =
        std::max(rep.maxCommutator,
                 std::sqrt(std::abs(pairYhat(spec.ip, diff, diff))));
    MatC viaCoeffs = applyLPviaCoefficients(bundle, spec, u);
    MatC gap = viaCoeffs - lpu;
    rep.maxTwoPathGap = std::max(
        rep.maxTwoPathGap, std::sqrt(std::abs(pairYhat(spec.ip, gap, gap))));
  }
  rep.pass = rep.maxCommutator <= tol && rep.maxTwoPathGap <= tol;
  return rep;
}

MatC synthesizeTrigPath(const ProblemSpec& spec, int degree, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  const int nt = spec.grid.nt;
  MatC coeffs = MatC::Zero(spec.dim, nt);
  for (int r = 0; r < spec.dim; ++r) {
    for (int m = -degree; m <= degree; ++m) {
      double decay = 1.0 / (1.0 + m * m);
      Complex c(dist(rng), dist(rng));
      int idx = m >= 0 ? m : m + nt;
      coeffs(r, idx) += decay * c;
    }
  }
  if (spec.realFlag) {
    // conjugate-symmetric coefficients give a real sampled path
    MatC sym = coeffs;
    for (int r = 0; r < spec.dim; ++r)
      for (int m = 0; m < nt; ++m) {
        int neg = (nt - m) % nt;
        sym(r, m) = 0.5 * (coeffs(r, m) + std::conj(coeffs(r, neg)));
      }
    coeffs = sym;
  }
  return fourierSamples(coeffs);
}

}  // namespace floquet
