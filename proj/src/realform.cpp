#include "floquet/realform.hpp"

namespace floquet {

namespace {
const Complex kI(0.0, 1.0);
constexpr double kPi = EIGEN_PI;
}

RealPairing renumber(const std::vector<PencilEigenvalue>& eigs, bool realFlag,
                     double tol) {
  if (!realFlag)
    throw NumericError("renumber requires a problem flagged real");
  RealPairing p;
  std::vector<int> upper, lower;
  for (size_t k = 0; k < eigs.size(); ++k) {
    const auto& e = eigs[k];
    if (std::abs(e.lambda.real()) > 1e-7)
      throw NumericError(
          "real re-numeration expects eigenvalues on the imaginary axis "
          "(delta_0 strip)");
    double im = e.lambda.imag();
    if (std::abs(im) <= tol || std::abs(im - kTwoPi) <= tol)
      p.zeroEntry = static_cast<int>(k);
    else if (std::abs(im - EIGEN_PI) <= tol)
      p.piEntry = static_cast<int>(k);
    else if (im < EIGEN_PI)
      upper.push_back(static_cast<int>(k));
    else
      lower.push_back(static_cast<int>(k));
  }
  for (int k : upper) {
    double target = kTwoPi - eigs[static_cast<size_t>(k)].lambda.imag();
    int found = -1;
    for (int l : lower)
      if (std::abs(eigs[static_cast<size_t>(l)].lambda.imag() - target) <=
              1e-7 &&
          eigs[static_cast<size_t>(l)].partial ==
              eigs[static_cast<size_t>(k)].partial)
        found = l;
    if (found < 0)
      throw NumericError(
          "unpaired eigenvalue at Im lambda = " +
          std::to_string(eigs[static_cast<size_t>(k)].lambda.imag()));
    p.sEntry.push_back(k);
    p.partnerEntry.push_back(found);
  }
  if (upper.size() != lower.size())
    throw NumericError("conjugate partner count mismatch");
  p.sigma = static_cast<int>(p.sEntry.size());
  return p;
}

Complex RealProjectorBundle::chainPhase(int entry, int j,
                                        bool antiPeriodic) const {
  const auto& sys = bundle_->system();
  const auto& chain = sys.entries[static_cast<size_t>(entry)].phi.fn[j];
  const int nt = sys.grid.nt;
  // phase e^{i theta} minimizing the imaginary part of the whole chain:
  // theta = -arg(sum v^2)/2 over all stacked samples
  Complex s = 0.0;
  for (const auto& fn : chain)
    for (int c = 0; c < nt; ++c) {
      double t = sys.grid.point(c);
      Complex tw = antiPeriodic ? std::exp(kI * (kPi * t)) : Complex(1.0);
      for (int r = 0; r < fn.rows(); ++r) {
        Complex v = tw * fn(r, c);
        s += v * v;
      }
    }
  double theta = -std::arg(s) / 2.0;
  return std::exp(kI * theta);
}

RealProjectorBundle::RealProjectorBundle(
    std::shared_ptr<const ProjectorBundle> bundle, RealPairing pairing,
    double tolImag)
    : bundle_(std::move(bundle)), pairing_(std::move(pairing)) {
  const auto& sys = bundle_->system();
  const int nt = sys.grid.nt;

  for (int s = 0; s < pairing_.sigma; ++s) {
    int e = pairing_.sEntry[static_cast<size_t>(s)];
    const auto& entry = sys.entries[static_cast<size_t>(e)];
    for (int j = 0; j < entry.phi.chains(); ++j)
      for (int m = 0; m < entry.phi.length(j); ++m) {
        layout_.push_back(RealCoord{RealCoord::Block::Pair,
                                    RealCoord::Part::Hat, s, e, j, m});
        layout_.push_back(RealCoord{RealCoord::Block::Pair,
                                    RealCoord::Part::Tilde, s, e, j, m});
      }
  }
  auto addExceptional = [&](int e, RealCoord::Block block,
                            std::vector<Complex>* phases, bool anti) {
    if (e < 0) return;
    const auto& entry = sys.entries[static_cast<size_t>(e)];
    for (int j = 0; j < entry.phi.chains(); ++j) {
      Complex c = chainPhase(e, j, anti);
      phases->push_back(c);
      // residual imaginary mass after the optimal rotation
      for (int m = 0; m < entry.phi.length(j); ++m) {
        const MatC& fphi = entry.phi.fn[j][static_cast<size_t>(m)];
        const MatC& fpsi = entry.psi.fn[j][static_cast<size_t>(m)];
        for (int col = 0; col < nt; ++col) {
          double t = sys.grid.point(col);
          Complex tw = anti ? std::exp(kI * (kPi * t)) : Complex(1.0);
          rephaseResidual_ =
              std::max(rephaseResidual_,
                       (c * tw * fphi.col(col)).imag().cwiseAbs().maxCoeff());
          rephaseResidual_ =
              std::max(rephaseResidual_,
                       (c * tw * fpsi.col(col)).imag().cwiseAbs().maxCoeff());
        }
      }
      for (int m = 0; m < entry.phi.length(j); ++m)
        layout_.push_back(RealCoord{block, RealCoord::Part::Hat, -1, e, j, m});
    }
  };
  addExceptional(pairing_.zeroEntry, RealCoord::Block::Zero, &zeroPhases_,
                 false);
  addExceptional(pairing_.piEntry, RealCoord::Block::Pi, &piPhases_, true);

  if (rephaseResidual_ > tolImag)
    throw NumericError("re-phasing failure: residual imaginary part " +
                       std::to_string(rephaseResidual_));
}

VecC RealProjectorBundle::exceptionalPhi(const RealCoord& c, double t,
                                         bool flip) const {
  const auto& sys = bundle_->system();
  int len = sys.entries[static_cast<size_t>(c.entry)]
                .eig.partial[static_cast<size_t>(c.j)];
  ThetaIndex idx{c.entry, c.j, flip ? len - 1 - c.m : c.m};
  VecC phi = bundle_->phi(idx, t);
  Complex phase = (c.block == RealCoord::Block::Zero)
                      ? zeroPhases_[static_cast<size_t>(c.j)]
                      : piPhases_[static_cast<size_t>(c.j)] *
                            std::exp(kI * (kPi * t));
  return phase * phi;
}

VecC RealProjectorBundle::exceptionalPsi(const RealCoord& c, double t) const {
  ThetaIndex idx{c.entry, c.j, c.m};
  VecC psi = bundle_->psi(idx, t);
  Complex phase = (c.block == RealCoord::Block::Zero)
                      ? zeroPhases_[static_cast<size_t>(c.j)]
                      : piPhases_[static_cast<size_t>(c.j)] *
                            std::exp(kI * (kPi * t));
  return phase * psi;
}

VecR RealProjectorBundle::extractAt(double t, const VecR& u) const {
  VecR out(totalMultiplicity());
  VecC uc = u.cast<Complex>();
  VecC gu = bundle_->system().ip.gramY.cast<Complex>() * uc;
  for (size_t r = 0; r < layout_.size(); ++r) {
    const auto& c = layout_[r];
    if (c.block == RealCoord::Block::Pair) {
      Complex coeff = bundle_->psi(ThetaIndex{c.entry, c.j, c.m}, t).dot(gu);
      out[static_cast<long>(r)] =
          c.part == RealCoord::Part::Hat ? coeff.real() : -coeff.imag();
    } else {
      Complex coeff = exceptionalPsi(c, t).dot(gu);
      out[static_cast<long>(r)] = coeff.real();
    }
  }
  return out;
}

PathR RealProjectorBundle::extractCoefficients(const PathR& u) const {
  PathR out(u.w, totalMultiplicity());
  for (long c = 0; c < u.w.count(); ++c)
    out.samples.col(c) = extractAt(u.w.time(c), u.samples.col(c));
  return out;
}

VecR RealProjectorBundle::reconstructU(double t, const VecR& coeffs) const {
  VecR out = VecR::Zero(dim());
  for (size_t r = 0; r < layout_.size(); ++r) {
    const auto& c = layout_[r];
    double v = coeffs[static_cast<long>(r)];
    if (v == 0.0) continue;
    if (c.block == RealCoord::Block::Pair) {
      VecC phiF = bundle_->phiFlip(ThetaIndex{c.entry, c.j, c.m}, t);
      if (c.part == RealCoord::Part::Hat)
        out += 2.0 * v * phiF.real();
      else
        out += 2.0 * v * phiF.imag();
    } else {
      out += v * exceptionalPhi(c, t, true).real();
    }
  }
  return out;
}

VecR RealProjectorBundle::applyP(double t, const VecR& v) const {
  return reconstructU(t, extractAt(t, v));
}

VecR RealProjectorBundle::applyQ(double t, const VecR& v) const {
  return v - applyP(t, v);
}

MatR RealProjectorBundle::matrixP(double t) const {
  MatR p(dim(), dim());
  for (int i = 0; i < dim(); ++i) {
    VecR e = VecR::Zero(dim());
    e[i] = 1.0;
    p.col(i) = applyP(t, e);
  }
  return p;
}

MatR RealProjectorBundle::buildRealR() const {
  const int m = totalMultiplicity();
  MatR r = MatR::Zero(m, m);
  const auto& sys = bundle_->system();
  for (int row = 0; row < m; ++row) {
    const auto& c = layout_[static_cast<size_t>(row)];
    if (c.block == RealCoord::Block::Pair) {
      double mu = sys.entries[static_cast<size_t>(c.entry)].eig.lambda.imag();
      if (c.part == RealCoord::Part::Hat) {
        r(row, row + 1) = mu;  // hat' = +mu tilde + hat_{m-1} + fhat
        if (c.m > 0) r(row, row - 2) = 1.0;
      } else {
        r(row, row - 1) = -mu;  // tilde' = -mu hat + tilde_{m-1} + ftilde
        if (c.m > 0) r(row, row - 2) = 1.0;
      }
    } else {
      if (c.m > 0) r(row, row - 1) = 1.0;
    }
  }
  return r;
}

MatC matrixPEntry(const ProjectorBundle& bundle, int entry, double t) {
  MatC p = MatC::Zero(bundle.dim(), bundle.dim());
  MatC gy = bundle.system().ip.gramY.cast<Complex>();
  for (const auto& i : bundle.theta()) {
    if (i.k != entry) continue;
    p += bundle.phiFlip(i, t) * (bundle.psi(i, t).adjoint() * gy);
  }
  return p;
}

ConjugationReport verifyConjugation(const ProjectorBundle& bundle,
                                    double tol) {
  ConjugationReport rep;
  const auto& sys = bundle.system();
  const int nt = sys.grid.nt;

  for (size_t k = 0; k < sys.entries.size(); ++k) {
    Complex lam = sys.entries[k].eig.lambda;
    // partner with lambda' = conj(lambda) mod 2 pi i
    double targetIm = std::fmod(kTwoPi - lam.imag(), kTwoPi);
    int partner = -1;
    for (size_t l = 0; l < sys.entries.size(); ++l)
      if (std::abs(sys.entries[l].eig.lambda.imag() - targetIm) < 1e-7 &&
          std::abs(sys.entries[l].eig.lambda.real() - lam.real()) < 1e-7)
        partner = static_cast<int>(l);
    if (partner < 0) continue;
    for (int i = 0; i < nt; i += 8) {
      double t = sys.grid.point(i);
      MatC a = matrixPEntry(bundle, static_cast<int>(k), t);
      MatC b = matrixPEntry(bundle, partner, t);
      rep.conjugationError =
          std::max(rep.conjugationError, (b - a.conjugate()).norm());
    }
  }

  // shift identity: the e^{2 pi i t}-multiplied chains represent
  // lambda - 2 pi i and rebuild the same pointwise projector
  for (size_t k = 0; k < sys.entries.size(); ++k) {
    const auto& e = sys.entries[k];
    for (int i = 0; i < nt; i += 8) {
      double t = sys.grid.point(i);
      Complex tw = std::exp(Complex(0.0, kTwoPi * t));
      MatC p = MatC::Zero(bundle.dim(), bundle.dim());
      MatC gy = sys.ip.gramY.cast<Complex>();
      for (int j = 0; j < e.phi.chains(); ++j)
        for (int m = 0; m < e.phi.length(j); ++m) {
          int len = e.eig.partial[static_cast<size_t>(j)];
          VecC phiF =
              tw * e.phi.fn[j][static_cast<size_t>(len - 1 - m)].col(i);
          VecC psiM = tw * e.psi.fn[j][static_cast<size_t>(m)].col(i);
          p += phiF * (psiM.adjoint() * gy);
        }
      MatC direct = matrixPEntry(bundle, static_cast<int>(k), t);
      rep.shiftError = std::max(rep.shiftError, (p - direct).norm());
    }
  }
  rep.pass = rep.conjugationError <= tol && rep.shiftError <= tol;
  return rep;
}

RealSystemCheck realSystemRhs(const RealProjectorBundle& real,
                              const PathR& f) {
  RealSystemCheck check;
  check.coeffs = real.extractCoefficients(f);
  const ProjectorBundle& cb = real.complexBundle();
  const auto& layout = real.layout();
  for (long c = 0; c < f.w.count(); ++c) {
    double t = f.w.time(c);
    VecC fc = f.samples.col(c).cast<Complex>();
    VecC complexCoeffs = cb.extractAt(t, fc);
    for (size_t r = 0; r < layout.size(); ++r) {
      const auto& rc = layout[r];
      if (rc.block != RealCoord::Block::Pair) continue;
      for (size_t a = 0; a < cb.theta().size(); ++a) {
        const auto& th = cb.theta()[a];
        if (th.k == rc.entry && th.j == rc.j && th.m == rc.m) {
          Complex z = complexCoeffs[static_cast<long>(a)];
          double want = rc.part == RealCoord::Part::Hat ? z.real() : -z.imag();
          check.reImMismatch = std::max(
              check.reImMismatch,
              std::abs(check.coeffs.samples(static_cast<long>(r), c) - want));
        }
      }
    }
  }
  return check;
}

}  // namespace floquet
