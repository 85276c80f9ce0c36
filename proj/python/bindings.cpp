#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "floquet/manifold.hpp"
#include "floquet/report.hpp"

namespace py = pybind11;
using namespace floquet;

namespace {

/// Bundles the per-problem state behind the main operations: fundamental
/// solution, chain system, projector and (for real problems) the real form.
class System {
 public:
  explicit System(const std::string& text) : spec_(parseProblem(text)) {
    fund_ = std::make_shared<FundamentalSolution>(fundamentalMatrix(spec_));
    sys_ = std::make_shared<NormalizedChainSystem>(
        buildChainSystem(spec_, *fund_));
    bundle_ = std::make_shared<ProjectorBundle>(sys_);
  }

  static System fromFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return System(ss.str());
  }

  int dim() const { return spec_.dim; }
  int gridNt() const { return spec_.grid.nt; }
  bool real() const { return spec_.realFlag; }
  std::string serialized() const { return serializeProblem(spec_); }

  MatC monodromy() const { return fund_->monodromy; }

  py::list spectrum() const {
    py::list out;
    for (const auto& e : sys_->entries) {
      py::dict d;
      d["lambda"] = e.eig.lambda;
      d["multiplier"] = e.eig.mu;
      d["geometric"] = e.eig.geometric;
      d["partial"] = e.eig.partial;
      d["algebraic"] = e.eig.algebraic;
      d["chain_residual"] = e.phi.maxResidual;
      d["adjoint_residual"] = e.psi.maxResidual;
      d["biorth_error"] = e.biorthError;
      out.append(d);
    }
    return out;
  }

  py::list collocationSpectrum(int nc) const {
    py::list out;
    for (const auto& c : collocationEigens(spec_, nc)) {
      py::dict d;
      d["lambda"] = c.lambda;
      d["algebraic"] = c.algebraic;
      out.append(d);
    }
    return out;
  }

  std::vector<double> resolvent(double beta, const std::vector<double>& xi,
                                int nc) const {
    return resolventSweep(spec_, beta, xi, nc);
  }

  MatC operatorAt(double t) const { return evalOperator(spec_.op, t); }
  MatC adjointOperatorAt(double t) const {
    return adjointAt(spec_.op, spec_.ip, t);
  }

  MatC projectorMatrix(double t) const { return bundle_->matrixP(t); }
  VecC applyP(double t, const VecC& v) const { return bundle_->applyP(t, v); }
  VecC applyQ(double t, const VecC& v) const { return bundle_->applyQ(t, v); }
  VecC extract(double t, const VecC& u) const {
    return bundle_->extractAt(t, u);
  }
  VecC reconstruct(double t, const VecC& c) const {
    return bundle_->reconstructU(t, c);
  }
  MatC reducedMatrix() const { return bundle_->buildR(); }

  py::dict split(const std::vector<double>& times, const MatC& forcing) const {
    PathC f = toPath(times, forcing);
    DichotomyGreen green = dichotomyGreen(fund_, *bundle_, spec_.strip);
    PathC fc = bundle_->extractCoefficients(f);
    long tau = std::clamp<long>(0, f.w.i0, f.w.i1);
    PathC uc = solveFinite<Complex>(bundle_->buildR(), fc, tau,
                                    VecC::Zero(bundle_->totalMultiplicity()));
    PathC qf(f.w, spec_.dim);
    for (long c = 0; c < f.w.count(); ++c)
      qf.samples.col(c) = bundle_->applyQ(f.w.time(c), f.samples.col(c));
    PathC v = green.solve(qf);
    MatC u(spec_.dim, f.w.count());
    for (long c = 0; c < f.w.count(); ++c)
      u.col(c) = bundle_->reconstructU(f.w.time(c), uc.samples.col(c));
    PathC total(f.w, spec_.dim);
    total.samples = u + v.samples;
    py::dict out;
    out["u"] = u;
    out["v"] = MatC(v.samples);
    out["coefficients"] = MatC(uc.samples);
    out["residual"] = remainderResidual(spec_, total, f);
    return out;
  }

  py::dict asym(const std::vector<double>& times, const MatC& forcing,
                const std::vector<long>& breaks) const {
    PathC f = toPath(times, forcing);
    PhiBasis basis(bundle_);
    AsymptoticExpansion ex =
        asymptoticDifference(spec_, fund_, basis, f, breaks);
    py::dict out;
    out["coefficients"] = VecC(ex.coeffs);
    out["expansion_residual"] = ex.expansionResidual;
    return out;
  }

  py::dict manifold(double tau, const VecR& mu, const VecR& xi,
                    double epsilon, double gamma, double tolFp) const {
    ManifoldMap& map = manifoldMap(epsilon, gamma, tolFp);
    VecR h = map.value(tau, mu, xi);
    auto d = map.lastDiagnostics();
    py::dict out;
    out["h"] = h;
    out["iterations"] = d.iterations;
    out["contraction"] = d.contractionFactor;
    out["converged"] = d.converged;
    return out;
  }

  py::dict reducedTrajectory(const VecR& mu, const VecR& xi0, double t1,
                             double epsilon, double gamma, double tolFp) const {
    ManifoldMap& map = manifoldMap(epsilon, gamma, tolFp);
    ReducedTrajectory traj = integrateReduced(
        map, mu, xi0, 0.0, t1, spec_.grid.nt / 4, 2.5 * epsilon);
    py::dict out;
    out["times"] = traj.times;
    out["coefficients"] = MatR(traj.coeffs);
    out["h"] = MatR(traj.hval);
    return out;
  }

 private:
  ProblemSpec spec_;
  std::shared_ptr<FundamentalSolution> fund_;
  std::shared_ptr<NormalizedChainSystem> sys_;
  std::shared_ptr<ProjectorBundle> bundle_;
  mutable std::shared_ptr<ManifoldMap> map_;
  mutable double mapEps_ = 0.0, mapGamma_ = 0.0, mapTol_ = 0.0;

  PathC toPath(const std::vector<double>& times, const MatC& samples) const {
    if (static_cast<long>(times.size()) != samples.cols())
      throw ParseError("times and samples disagree");
    if (samples.rows() != spec_.dim) throw ParseError("dimension mismatch");
    WindowGrid w;
    w.nt = spec_.grid.nt;
    w.i0 = std::lround(times.front() * w.nt);
    w.i1 = std::lround(times.back() * w.nt);
    if (w.count() != static_cast<long>(times.size()))
      throw ParseError("samples must sit on the problem grid");
    PathC p;
    p.w = w;
    p.samples = samples;
    return p;
  }

  ManifoldMap& manifoldMap(double epsilon, double gamma, double tolFp) const {
    if (!spec_.realFlag)
      throw NumericError("manifold operations require a real problem");
    if (!map_ || mapEps_ != epsilon || mapGamma_ != gamma || mapTol_ != tolFp) {
      auto eigs = stripEigenvalues(*fund_, spec_.strip);
      auto rb = std::make_shared<RealProjectorBundle>(bundle_,
                                                      renumber(eigs, true));
      RealReduction red(spec_, fund_, rb);
      CutoffConfig cut;
      cut.epsilon = epsilon;
      double g = gamma > 0 ? gamma : red.beta() / 2.0;
      map_ = std::make_shared<ManifoldMap>(std::move(red), cut, g,
                                           FixedPointConfig{tolFp, 60});
      mapEps_ = epsilon;
      mapGamma_ = gamma;
      mapTol_ = tolFp;
    }
    return *map_;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Floquet spectral splitting and center manifold reduction";

  py::register_exception<ParseError>(m, "ProblemParseError");
  py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<PropertyError>(m, "PropertyCheckError");

  py::class_<System>(m, "System")
      .def(py::init<const std::string&>(), py::arg("text"))
      .def_static("from_file", &System::fromFile, py::arg("path"))
      .def_property_readonly("dim", &System::dim)
      .def_property_readonly("grid_nt", &System::gridNt)
      .def_property_readonly("real", &System::real)
      .def("serialize", &System::serialized)
      .def("monodromy", &System::monodromy)
      .def("spectrum", &System::spectrum)
      .def("collocation_spectrum", &System::collocationSpectrum,
           py::arg("nc") = 33)
      .def("resolvent_sweep", &System::resolvent, py::arg("beta"),
           py::arg("xi"), py::arg("nc") = 33)
      .def("operator_at", &System::operatorAt, py::arg("t"))
      .def("adjoint_operator_at", &System::adjointOperatorAt, py::arg("t"))
      .def("projector_matrix", &System::projectorMatrix, py::arg("t"))
      .def("apply_p", &System::applyP, py::arg("t"), py::arg("v"))
      .def("apply_q", &System::applyQ, py::arg("t"), py::arg("v"))
      .def("extract_coefficients", &System::extract, py::arg("t"),
           py::arg("u"))
      .def("reconstruct", &System::reconstruct, py::arg("t"),
           py::arg("coefficients"))
      .def("reduced_matrix", &System::reducedMatrix)
      .def("split", &System::split, py::arg("times"), py::arg("forcing"))
      .def("asym", &System::asym, py::arg("times"), py::arg("forcing"),
           py::arg("breaks") = std::vector<long>{})
      .def("manifold", &System::manifold, py::arg("tau"), py::arg("mu"),
           py::arg("xi"), py::arg("epsilon") = 0.2, py::arg("gamma") = 0.0,
           py::arg("tol_fp") = 1e-9)
      .def("reduced_trajectory", &System::reducedTrajectory, py::arg("mu"),
           py::arg("xi0"), py::arg("t1"), py::arg("epsilon") = 0.2,
           py::arg("gamma") = 0.0, py::arg("tol_fp") = 1e-9);

  m.attr("__version__") = "0.1.0";
}
