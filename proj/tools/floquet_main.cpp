// Command-line front end: spectrum, chains, project, split, asym, realform,
// reduce and verify over a problem file.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "floquet/manifold.hpp"
#include "floquet/report.hpp"

using namespace floquet;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string problemFile;
  std::string outDir = ".";
  std::string inputCsv;
  int gridNt = 0;
  double window = 4.0;
  double gamma = 0.0;
  double epsilon = 0.2;
  uint64_t seed = 2026;
  double tolProj = 1e-7;
  double tolComm = 1e-6;
  double tolRem = 1e-6;
  double tolFp = 1e-9;
  double tolBiorth = 1e-8;
};

int threadBudget() {
  const char* env = std::getenv("FLOQUET_THREADS");
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (!env) return static_cast<int>(hw);
  int v = std::atoi(env);
  if (v < 1) return 1;
  return std::min<int>(v, static_cast<int>(hw));
}

std::string readFileText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Session {
  CommonOpts opts;
  std::string runId;
  ProblemSpec spec;
  std::shared_ptr<FundamentalSolution> fund;
  std::shared_ptr<NormalizedChainSystem> sys;
  std::shared_ptr<ProjectorBundle> bundle;
  json manifest;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  void emit(const std::string& name, const std::string& body) {
    std::filesystem::create_directories(opts.outDir);
    std::string full = "# run " + runId + "\n" + body;
    writeFile(opts.outDir + "/" + name, full);
    manifest["artifacts"].push_back({{"name", name}, {"hash", fnv1aHex(full)}});
  }

  void finish(const std::string& command) {
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["run_id"] = runId;
    manifest["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::filesystem::create_directories(opts.outDir);
    writeFile(opts.outDir + "/manifest.json", manifest.dump(2) + "\n");
  }
};

Session openSession(const CommonOpts& opts, bool needChains = true) {
  Session s;
  s.opts = opts;
  std::string text = readFileText(opts.problemFile);
  s.spec = parseProblem(text);
  if (opts.gridNt > 0) {
    s.spec.grid.nt = opts.gridNt;
    s.spec.validate();
  }
  std::ostringstream cfg;
  cfg << text << "|nt=" << s.spec.grid.nt << "|window=" << opts.window
      << "|gamma=" << opts.gamma << "|epsilon=" << opts.epsilon
      << "|seed=" << opts.seed;
  s.runId = fnv1aHex(cfg.str());
  s.manifest["problem_file"] = opts.problemFile;
  s.manifest["problem_hash"] = fnv1aHex(text);
  s.manifest["grid_nt"] = s.spec.grid.nt;
  s.manifest["tolerances"] = {{"proj", opts.tolProj},
                              {"comm", opts.tolComm},
                              {"rem", opts.tolRem},
                              {"fp", opts.tolFp},
                              {"biorth", opts.tolBiorth}};
  s.manifest["artifacts"] = json::array();

  s.fund = std::make_shared<FundamentalSolution>(fundamentalMatrix(s.spec));
  if (needChains) {
    s.sys = std::make_shared<NormalizedChainSystem>(
        buildChainSystem(s.spec, *s.fund));
    s.bundle = std::make_shared<ProjectorBundle>(s.sys);
  }
  return s;
}

PathC readForcing(const Session& s, const std::string& path) {
  std::vector<double> times;
  MatC samples;
  parseTrajectoryCsv(readFileText(path), &times, &samples);
  if (samples.rows() != s.spec.dim)
    throw ParseError("input CSV dimension does not match the problem");
  const int nt = s.spec.grid.nt;
  if (times.size() < 2) throw ParseError("input CSV needs at least two rows");
  WindowGrid w;
  w.nt = nt;
  w.i0 = std::lround(times.front() * nt);
  w.i1 = std::lround(times.back() * nt);
  if (w.count() != static_cast<long>(times.size()))
    throw ParseError("input CSV must be sampled on the problem grid");
  for (size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] * nt - (w.i0 + static_cast<long>(i))) > 1e-6)
      throw ParseError("input CSV times are not grid-aligned");
  PathC p;
  p.w = w;
  p.samples = samples;
  return p;
}

std::vector<double> pathTimes(const WindowGrid& w) {
  std::vector<double> t;
  for (long c = 0; c < w.count(); ++c) t.push_back(w.time(c));
  return t;
}

int runSpectrum(const CommonOpts& opts) {
  Session s = openSession(opts);
  json report;
  report["eigenvalues"] = json::array();
  for (const auto& e : s.sys->entries) {
    report["eigenvalues"].push_back({{"lambda_re", e.eig.lambda.real()},
                                     {"lambda_im", e.eig.lambda.imag()},
                                     {"multiplier_re", e.eig.mu.real()},
                                     {"multiplier_im", e.eig.mu.imag()},
                                     {"geometric", e.eig.geometric},
                                     {"partial", e.eig.partial},
                                     {"algebraic", e.eig.algebraic},
                                     {"chain_residual", e.phi.maxResidual},
                                     {"adjoint_residual", e.psi.maxResidual},
                                     {"biorth_error", e.biorthError},
                                     {"gram_condition", e.gramCondition}});
  }
  auto coll = collocationEigens(s.spec);
  report["collocation"] = json::array();
  double gap = 0.0;
  for (size_t i = 0; i < coll.size(); ++i) {
    report["collocation"].push_back({{"lambda_re", coll[i].lambda.real()},
                                     {"lambda_im", coll[i].lambda.imag()},
                                     {"algebraic", coll[i].algebraic}});
    if (i < s.sys->entries.size())
      gap = std::max(gap,
                     std::abs(coll[i].lambda - s.sys->entries[i].eig.lambda));
  }
  report["oracle_gap"] = gap;
  s.manifest["spectrum"] = report;
  s.emit("spectrum.json", report.dump(2) + "\n");
  s.finish("spectrum");
  std::cout << "spectrum: " << s.sys->entries.size()
            << " eigenvalue(s), oracle gap " << gap << "\n";
  return 0;
}

int runChains(const CommonOpts& opts) {
  Session s = openSession(opts);
  const int nt = s.spec.grid.nt;
  std::vector<std::string> header{"t"};
  std::vector<std::vector<double>> rows(static_cast<size_t>(nt));
  for (int i = 0; i < nt; ++i)
    rows[static_cast<size_t>(i)].push_back(s.spec.grid.point(i));
  for (size_t k = 0; k < s.sys->entries.size(); ++k) {
    const auto& e = s.sys->entries[k];
    for (int j = 0; j < e.phi.chains(); ++j)
      for (int m = 0; m < e.phi.length(j); ++m)
        for (const char* fam : {"phi", "psi"}) {
          const MatC& fn = (fam[1] == 'h')
                               ? e.phi.fn[j][static_cast<size_t>(m)]
                               : e.psi.fn[j][static_cast<size_t>(m)];
          for (int r = 0; r < s.spec.dim; ++r) {
            std::ostringstream name;
            name << fam << k << "_" << j << "_" << m << "_" << (r + 1);
            header.push_back("re_" + name.str());
            header.push_back("im_" + name.str());
            for (int i = 0; i < nt; ++i) {
              rows[static_cast<size_t>(i)].push_back(fn(r, i).real());
              rows[static_cast<size_t>(i)].push_back(fn(r, i).imag());
            }
          }
        }
  }
  s.emit("chains.csv", csvBody(header, rows));
  s.finish("chains");
  std::cout << "chains: wrote chains.csv (residuals phi "
            << s.sys->maxChainResidual << ", psi "
            << s.sys->maxAdjointResidual << ")\n";
  return 0;
}

int runProject(const CommonOpts& opts) {
  Session s = openSession(opts);
  PathC traj = readForcing(s, opts.inputCsv);
  PathC upart(traj.w, s.spec.dim), vpart(traj.w, s.spec.dim);
  PathC coeffs = s.bundle->extractCoefficients(traj);
  for (long c = 0; c < traj.w.count(); ++c) {
    double t = traj.w.time(c);
    upart.samples.col(c) = s.bundle->applyP(t, traj.samples.col(c));
    vpart.samples.col(c) = traj.samples.col(c) - upart.samples.col(c);
  }
  s.emit("u_part.csv", trajectoryCsv(pathTimes(traj.w), upart.samples));
  s.emit("v_part.csv", trajectoryCsv(pathTimes(traj.w), vpart.samples));
  s.emit("coefficients.csv", trajectoryCsv(pathTimes(traj.w), coeffs.samples));
  s.finish("project");
  std::cout << "project: wrote u_part.csv, v_part.csv, coefficients.csv\n";
  return 0;
}

int runSplit(const CommonOpts& opts) {
  Session s = openSession(opts);
  PathC f = readForcing(s, opts.inputCsv);
  DichotomyGreen green = dichotomyGreen(s.fund, *s.bundle, s.spec.strip);

  PathC fc = s.bundle->extractCoefficients(f);
  long tauIndex = std::clamp<long>(0, f.w.i0, f.w.i1);
  PathC uc = solveFinite<Complex>(s.bundle->buildR(), fc, tauIndex,
                                  VecC::Zero(s.bundle->totalMultiplicity()));
  PathC qf(f.w, s.spec.dim);
  for (long c = 0; c < f.w.count(); ++c)
    qf.samples.col(c) = s.bundle->applyQ(f.w.time(c), f.samples.col(c));
  PathC v = green.solve(qf);
  PathC u(f.w, s.spec.dim);
  for (long c = 0; c < f.w.count(); ++c)
    u.samples.col(c) = s.bundle->reconstructU(f.w.time(c), uc.samples.col(c));

  std::vector<double> taus;
  for (long k = f.w.i0 / s.spec.grid.nt; k <= f.w.i1 / s.spec.grid.nt - 1; ++k)
    taus.push_back(static_cast<double>(k));
  SplitEstimate est = splitEstimate(s.spec, v, qf, taus, s.spec.strip.beta1,
                                    s.spec.strip.beta2);

  s.emit("u.csv", trajectoryCsv(pathTimes(f.w), u.samples));
  s.emit("v.csv", trajectoryCsv(pathTimes(f.w), v.samples));
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < est.tau.size(); ++i)
    rows.push_back({est.tau[i], est.lhs[i], est.rhs[i], est.ratio[i]});
  s.emit("estimate.csv", csvBody({"tau", "lhs", "rhs", "ratio"}, rows));

  PathC total(f.w, s.spec.dim);
  total.samples = u.samples + v.samples;
  double residual = remainderResidual(s.spec, total, f);
  s.manifest["split_residual"] = residual;
  s.finish("split");
  std::cout << "split: residual " << residual << ", max ratio " << est.maxRatio
            << "\n";
  return 0;
}

int runAsym(const CommonOpts& opts) {
  Session s = openSession(opts);
  PathC f = readForcing(s, opts.inputCsv);
  auto basisBundle = std::make_shared<const ProjectorBundle>(*s.bundle);
  PhiBasis basis(basisBundle);
  AsymptoticExpansion ex =
      asymptoticDifference(s.spec, s.fund, basis, f, {}, opts.tolRem);
  std::vector<std::vector<double>> rows;
  const auto& theta = s.bundle->theta();
  for (size_t r = 0; r < theta.size(); ++r)
    rows.push_back({static_cast<double>(theta[r].k),
                    static_cast<double>(theta[r].j),
                    static_cast<double>(theta[r].m),
                    ex.coeffs[static_cast<long>(r)].real(),
                    ex.coeffs[static_cast<long>(r)].imag()});
  s.emit("asym_coefficients.csv",
         csvBody({"k", "j", "m", "re_c", "im_c"}, rows));
  s.manifest["expansion_residual"] = ex.expansionResidual;
  s.finish("asym");
  std::cout << "asym: expansion residual " << ex.expansionResidual << "\n";
  return 0;
}

int runRealform(const CommonOpts& opts) {
  Session s = openSession(opts);
  if (!s.spec.realFlag)
    throw ParseError("realform requires a problem with real = true");
  auto eigs = stripEigenvalues(*s.fund, s.spec.strip);
  RealPairing pairing = renumber(eigs, true);
  auto rb = std::make_shared<RealProjectorBundle>(s.bundle, pairing);

  MatR r = rb->buildRealR();
  std::vector<std::string> header;
  for (int c = 0; c < r.cols(); ++c) header.push_back("c" + std::to_string(c));
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < r.rows(); ++i) {
    std::vector<double> row;
    for (int c = 0; c < r.cols(); ++c) row.push_back(r(i, c));
    rows.push_back(std::move(row));
  }
  s.emit("r_real.csv", csvBody(header, rows));

  json layout = json::array();
  for (const auto& c : rb->layout()) {
    std::string block =
        c.block == RealCoord::Block::Pair
            ? "pair"
            : (c.block == RealCoord::Block::Zero ? "zero" : "pi");
    layout.push_back(
        {{"block", block},
         {"part", c.part == RealCoord::Part::Hat ? "hat" : "tilde"},
         {"s", c.s},
         {"entry", c.entry},
         {"j", c.j},
         {"m", c.m}});
  }
  json info = {{"sigma", pairing.sigma},
               {"eps0", pairing.eps0()},
               {"eps_sigma_plus_1", pairing.epsSigma1()},
               {"layout", layout},
               {"rephase_residual", rb->rephaseResidual()}};
  s.emit("realform.json", info.dump(2) + "\n");
  s.finish("realform");
  std::cout << "realform: sigma " << pairing.sigma << ", eps0 "
            << pairing.eps0() << ", eps_{sigma+1} " << pairing.epsSigma1()
            << "\n";
  return 0;
}

int runReduce(const CommonOpts& opts, double xiMax, int xiCount, double muVal,
              double trajX0, double trajT1) {
  Session s = openSession(opts);
  if (!s.spec.realFlag)
    throw ParseError("reduce currently requires a real problem");
  if (!s.spec.f) throw ParseError("reduce requires a nonlinearity");

  auto eigs = stripEigenvalues(*s.fund, s.spec.strip);
  auto rb =
      std::make_shared<RealProjectorBundle>(s.bundle, renumber(eigs, true));
  RealReduction red(s.spec, s.fund, rb);
  CutoffConfig cut;
  cut.epsilon = opts.epsilon;
  double gamma = opts.gamma > 0 ? opts.gamma : red.beta() / 2.0;
  FixedPointConfig cfg;
  cfg.tolFp = opts.tolFp;
  ManifoldMap map(std::move(red), cut, gamma, cfg);

  const int m = map.reduction().reducedDim();
  VecR mu = VecR::Constant(std::max(0, s.spec.f->nparams), muVal);

  std::vector<std::vector<double>> rows(static_cast<size_t>(xiCount));
  std::vector<json> diags(static_cast<size_t>(xiCount));
  int workers = std::max(1, std::min(threadBudget(), xiCount));
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < xiCount; i = next++) {
      VecR xi = VecR::Zero(m);
      xi[0] = xiCount > 1 ? xiMax * i / (xiCount - 1) : xiMax;
      VecR h = map.value(0.0, mu, xi);
      auto d = map.lastDiagnostics();
      std::vector<double> row{0.0, xi[0]};
      for (long r = 0; r < h.size(); ++r) row.push_back(h[r]);
      rows[static_cast<size_t>(i)] = std::move(row);
      diags[static_cast<size_t>(i)] = {{"xi", xi[0]},
                                       {"iterations", d.iterations},
                                       {"contraction", d.contractionFactor},
                                       {"final_diff", d.finalDiff}};
    }
  };
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  std::vector<std::string> header{"tau", "xi1"};
  for (int r = 0; r < s.spec.dim; ++r)
    header.push_back("h" + std::to_string(r + 1));
  s.emit("h_samples.csv", csvBody(header, rows));

  json diagnostics;
  diagnostics["solves"] = diags;
  diagnostics["gamma"] = gamma;
  diagnostics["epsilon"] = cut.epsilon;

  if (trajX0 != 0.0) {
    VecR xi0 = VecR::Zero(m);
    xi0[0] = trajX0;
    ReducedTrajectory traj = integrateReduced(
        map, mu, xi0, 0.0, trajT1, s.spec.grid.nt / 4, 2.5 * cut.epsilon);
    std::vector<std::vector<double>> trows;
    for (size_t i = 0; i < traj.times.size(); ++i) {
      std::vector<double> row{traj.times[i]};
      for (long r = 0; r < traj.coeffs.rows(); ++r)
        row.push_back(traj.coeffs(r, static_cast<long>(i)));
      for (long r = 0; r < traj.hval.rows(); ++r)
        row.push_back(traj.hval(r, static_cast<long>(i)));
      trows.push_back(std::move(row));
    }
    std::vector<std::string> theader{"t"};
    for (int r = 0; r < m; ++r) theader.push_back("u" + std::to_string(r + 1));
    for (int r = 0; r < s.spec.dim; ++r)
      theader.push_back("h" + std::to_string(r + 1));
    s.emit("reduced_trajectory.csv", csvBody(theader, trows));
    diagnostics["lift_residual"] = liftResidual(map, mu, traj, 6);
  }

  s.emit("diagnostics.json", diagnostics.dump(2) + "\n");
  s.finish("reduce");
  std::cout << "reduce: wrote h_samples.csv";
  if (trajX0 != 0.0) std::cout << ", reduced_trajectory.csv";
  std::cout << "\n";
  return 0;
}

int runVerify(const CommonOpts& opts) {
  Session s = openSession(opts);
  bool pass = true;
  json checks = json::array();
  auto record = [&](const std::string& name, bool ok, double value,
                    double tol) {
    checks.push_back(
        {{"check", name}, {"pass", ok}, {"value", value}, {"tol", tol}});
    std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << value << " vs "
              << tol << ")\n";
    pass = pass && ok;
  };

  auto coll = collocationEigens(s.spec);
  double gap = 1e300;
  bool sizeOk = coll.size() == s.sys->entries.size();
  if (sizeOk) {
    gap = 0.0;
    int algA = 0, algB = 0;
    for (size_t i = 0; i < coll.size(); ++i) {
      gap = std::max(gap,
                     std::abs(coll[i].lambda - s.sys->entries[i].eig.lambda));
      algA += coll[i].algebraic;
      algB += s.sys->entries[i].eig.algebraic;
    }
    sizeOk = algA == algB;
  }
  record("spectrum_oracle", sizeOk && gap <= 1e-6, gap, 1e-6);

  record("biorthogonality", s.sys->maxBiorthError <= opts.tolBiorth,
         s.sys->maxBiorthError, opts.tolBiorth);

  PointwiseReport pw = verifyPointwiseBiorthogonality(*s.sys, opts.tolProj);
  record("pointwise_biorthogonality", pw.pass, pw.maxDeviation, pw.tol);

  double idem = 0.0;
  for (int i = 0; i < s.spec.grid.nt; i += 4) {
    MatC p = s.bundle->matrixP(s.spec.grid.point(i));
    idem = std::max(idem, (p * p - p).norm());
  }
  record("projector_idempotency", idem <= opts.tolProj, idem, opts.tolProj);

  std::vector<MatC> paths;
  for (int k = 0; k < 20; ++k)
    paths.push_back(synthesizeTrigPath(s.spec, 8, opts.seed + k));
  CommutationReport comm =
      verifyCommutation(*s.bundle, s.spec, paths, opts.tolComm);
  record("commutation", comm.pass,
         std::max(comm.maxCommutator, comm.maxTwoPathGap), opts.tolComm);

  {
    DichotomyGreen green = dichotomyGreen(s.fund, *s.bundle, s.spec.strip);
    const int nt = s.spec.grid.nt;
    WindowGrid w{-3 * nt, 4 * nt, nt};
    PathC f(w, s.spec.dim);
    for (long c = 0; c < w.count(); ++c) {
      double t = w.time(c);
      double b = (t <= 0.0 || t >= 1.0) ? 0.0
                                        : std::exp(-1.0 / (t * (1.0 - t)));
      f.samples.col(c) = VecC::Constant(s.spec.dim, Complex(b));
    }
    PathC fc = s.bundle->extractCoefficients(f);
    PathC uc = solveFinite<Complex>(s.bundle->buildR(), fc, 0,
                                    VecC::Zero(s.bundle->totalMultiplicity()));
    PathC qf(w, s.spec.dim);
    for (long c = 0; c < w.count(); ++c)
      qf.samples.col(c) = s.bundle->applyQ(w.time(c), f.samples.col(c));
    PathC v = green.solve(qf);
    PathC total(w, s.spec.dim);
    for (long c = 0; c < w.count(); ++c)
      total.samples.col(c) =
          s.bundle->reconstructU(w.time(c), uc.samples.col(c)) +
          v.samples.col(c);
    double res = remainderResidual(s.spec, total, f);
    record("splitting_residual", res <= 2 * opts.tolRem, res, 2 * opts.tolRem);

    PathC zf(w, s.spec.dim);
    PathC vz = green.solve(zf);
    double vmax = vz.samples.cwiseAbs().maxCoeff();
    record("uniqueness_Qf_zero", vmax <= 1e-8, vmax, 1e-8);
  }

  if (s.spec.realFlag) {
    ConjugationReport conj = verifyConjugation(*s.bundle, 1e-9);
    record("conjugation_and_shift", conj.pass,
           std::max(conj.conjugationError, conj.shiftError), 1e-9);
    bool onAxis = true;
    for (const auto& e : s.sys->entries)
      if (std::abs(e.eig.lambda.real()) > 1e-7) onAxis = false;
    if (onAxis) {
      auto eigs = stripEigenvalues(*s.fund, s.spec.strip);
      auto rb = std::make_shared<RealProjectorBundle>(s.bundle,
                                                      renumber(eigs, true));
      std::mt19937_64 rng(opts.seed);
      std::normal_distribution<double> dist;
      double worst = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        VecR v(s.spec.dim);
        for (int i = 0; i < s.spec.dim; ++i) v[i] = dist(rng);
        for (double t : {0.0, 0.25, 0.625}) {
          VecR pr = rb->applyP(t, v);
          VecC pc = s.bundle->applyP(t, v.cast<Complex>());
          worst = std::max(worst, (pr - pc.real()).norm());
        }
      }
      record("real_complex_projector", worst <= 1e-9, worst, 1e-9);

      if (s.spec.f) {
        RealReduction red(s.spec, s.fund, rb);
        CutoffConfig cut;
        cut.epsilon = opts.epsilon;
        double gamma = opts.gamma > 0 ? opts.gamma : red.beta() / 2.0;
        FixedPointConfig cfg;
        cfg.tolFp = opts.tolFp;
        ManifoldMap map(std::move(red), cut, gamma, cfg);
        VecR mu = VecR::Zero(std::max(0, s.spec.f->nparams));
        VecR zero = VecR::Zero(map.reduction().reducedDim());
        VecR h0 = map.value(0.0, mu, zero);
        record("manifold_tangency", h0.norm() <= opts.tolFp * 10, h0.norm(),
               opts.tolFp * 10);
      }
    }
  }

  s.manifest["checks"] = checks;
  s.finish("verify");
  if (!pass) throw PropertyError("verification failed");
  std::cout << "verify: all checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet spectral splitting and center manifold toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  double xiMax = 0.1, muVal = 0.0, trajX0 = 0.0, trajT1 = 8.0;
  int xiCount = 9;

  auto addCommon = [&](CLI::App* sub, bool needsInput = false) {
    sub->add_option("--problem", opts.problemFile, "problem file")->required();
    sub->add_option("--out", opts.outDir, "output directory");
    sub->add_option("--grid-nt", opts.gridNt, "grid override (power of two)");
    sub->add_option("--window", opts.window, "window half-width in periods");
    sub->add_option("--gamma", opts.gamma, "weight exponent");
    sub->add_option("--epsilon", opts.epsilon, "cutoff radius");
    sub->add_option("--seed", opts.seed, "random seed");
    sub->add_option("--tol-proj", opts.tolProj, "projector tolerance");
    sub->add_option("--tol-comm", opts.tolComm, "commutation tolerance");
    sub->add_option("--tol-rem", opts.tolRem, "remainder tolerance");
    sub->add_option("--tol-fp", opts.tolFp, "fixed point tolerance");
    sub->add_option("--tol-biorth", opts.tolBiorth,
                    "biorthogonality tolerance");
    if (needsInput)
      sub->add_option("--input", opts.inputCsv, "input CSV")->required();
  };

  auto* spectrum = app.add_subcommand("spectrum", "pencil eigenvalue report");
  addCommon(spectrum);
  auto* chains = app.add_subcommand("chains", "chain samples CSV");
  addCommon(chains);
  auto* project =
      app.add_subcommand("project", "split a trajectory into U/V parts");
  addCommon(project, true);
  auto* split =
      app.add_subcommand("split", "solve the split system for a forcing");
  addCommon(split, true);
  auto* asym =
      app.add_subcommand("asym", "two-weight asymptotic coefficients");
  addCommon(asym, true);
  auto* realform =
      app.add_subcommand("realform", "real reduced matrix and layout");
  addCommon(realform);
  auto* reduce = app.add_subcommand("reduce", "center manifold samples");
  addCommon(reduce);
  reduce->add_option("--xi-max", xiMax, "largest xi sample");
  reduce->add_option("--xi-count", xiCount, "number of xi samples");
  reduce->add_option("--mu", muVal, "parameter value");
  reduce->add_option("--traj-x0", trajX0, "reduced trajectory start");
  reduce->add_option("--traj-t1", trajT1, "reduced trajectory end time");
  auto* verify = app.add_subcommand("verify", "run the property suite");
  addCommon(verify);

  try {
    app.parse(argc, argv);
    if (spectrum->parsed()) return runSpectrum(opts);
    if (chains->parsed()) return runChains(opts);
    if (project->parsed()) return runProject(opts);
    if (split->parsed()) return runSplit(opts);
    if (asym->parsed()) return runAsym(opts);
    if (realform->parsed()) return runRealform(opts);
    if (reduce->parsed())
      return runReduce(opts, xiMax, xiCount, muVal, trajX0, trajT1);
    if (verify->parsed()) return runVerify(opts);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const PropertyError& e) {
    std::cerr << "property failure: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
