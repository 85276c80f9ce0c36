#include "floquet/problem.hpp"

#include <Eigen/Eigenvalues>

#include <fstream>
#include <sstream>

namespace floquet {

// --- InnerProductPair -------------------------------------------------------

void InnerProductPair::validate(double symTol) const {
  auto check = [&](const MatR& g, const char* name) {
    if (g.rows() != g.cols()) throw ParseError(std::string(name) + " not square");
    double scale = std::max(1.0, g.norm());
    if ((g - g.transpose()).norm() > symTol * scale)
      throw ParseError(std::string(name) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatR> es(g);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw ParseError(std::string(name) + " is not positive definite");
  };
  check(gramX, "gram_x");
  check(gramY, "gram_y");
  if (gramX.rows() != gramY.rows())
    throw ParseError("gram_x and gram_y dimensions differ");
}

// --- PeriodicMatrixFunction --------------------------------------------------

MatC PeriodicMatrixFunction::eval(double t) const {
  MatC m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = at(i, j).eval(t);
  return m;
}

int PeriodicMatrixFunction::maxDegree() const {
  int d = 0;
  for (const auto& e : entries) d = std::max(d, e.degree());
  return d;
}

bool PeriodicMatrixFunction::isReal(double tol) const {
  for (const auto& e : entries)
    if (!e.isReal(tol)) return false;
  return true;
}

double PeriodicMatrixFunction::normBound() const {
  double s = 0.0;
  for (const auto& e : entries)
    for (int m = -e.degree(); m <= e.degree(); ++m) s += std::abs(e.coeff(m));
  return std::max(s, 1e-300);
}

MatC evalOperator(const PeriodicMatrixFunction& a, double t) {
  return a.eval(mod1(t));
}

MatC adjointAt(const PeriodicMatrixFunction& a, const InnerProductPair& ip,
               double t) {
  MatC at = evalOperator(a, t);
  MatC g = ip.gramY.cast<Complex>();
  return g.llt().solve(at.adjoint() * g);
}

// --- NonlinearTerm -----------------------------------------------------------

int NonlinearTerm::degree() const {
  int d = 0;
  for (const auto& c : comps) d = std::max(d, c.degree());
  return d;
}

VecC NonlinearTerm::eval(double t, const VecC& mu, const VecC& u) const {
  VecC out(dim);
  for (int i = 0; i < dim; ++i) out[i] = comps[i].eval(mod1(t), mu, u);
  return out;
}

VecR NonlinearTerm::evalReal(double t, const VecR& mu, const VecR& u) const {
  VecR out(dim);
  for (int i = 0; i < dim; ++i) out[i] = comps[i].evalReal(mod1(t), mu, u);
  return out;
}

bool NonlinearTerm::vanishesAtZeroState() const {
  for (const auto& c : comps)
    for (const auto& [k, poly] : c.terms())
      if (k.uDegree() == 0 && !poly.isZero()) return false;
  return true;
}

void NonlinearTerm::checkTangency() const {
  for (int i = 0; i < dim; ++i) {
    PolyExpr atMu0 = comps[i].substituteMu(mu0);
    for (const auto& [k, poly] : atMu0.terms()) {
      if (poly.isZero()) continue;
      if (k.uDegree() <= 1) {
        std::ostringstream os;
        os << "tangency violation in f" << (i + 1) << ": monomial "
           << k.toString() << " has u-degree " << k.uDegree()
           << " at mu = mu0";
        throw ParseError(os.str());
      }
    }
  }
}

VecC evalNonlinearity(const NonlinearTerm& f, double t, const VecC& mu,
                      const VecC& u) {
  return f.eval(t, mu, u);
}

// --- ProblemSpec ---------------------------------------------------------------

void ProblemSpec::validate() const {
  if (dim <= 0) throw ParseError("dimension must be positive");
  if (!TimeGrid::isPowerOfTwo(grid.nt))
    throw ParseError("grid nt must be a power of two");
  ip.validate();
  if (ip.dim() != dim) throw ParseError("gram matrix dimension mismatch");
  if (static_cast<int>(op.entries.size()) != dim * dim)
    throw ParseError("operator dimension mismatch");
  if (!(strip.beta1 < strip.beta2))
    throw ParseError("strip requires beta1 < beta2");
  if (realFlag && !op.isReal(0.0))
    throw ParseError("operator has complex entries but problem is flagged real");
  if (f) {
    if (f->dim != dim) throw ParseError("nonlinearity dimension mismatch");
    f->checkTangency();
    if (realFlag)
      for (const auto& c : f->comps)
        if (!c.isReal(0.0))
          throw ParseError("nonlinearity has complex coefficients in a real problem");
  }
}

// --- problem file parser --------------------------------------------------------

namespace {

struct Line {
  int no;
  std::string text;
};

[[noreturn]] void failAt(int line, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line << ": " << msg;
  throw ParseError(os.str());
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// Parse "[[a, b], [c, d]]" into a matrix; entries are expressions without t.
MatR parseMatrixLiteral(const std::string& text, int lineNo) {
  std::vector<std::vector<double>> rows;
  size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  };
  skip();
  if (pos >= text.size() || text[pos] != '[') failAt(lineNo, "expected '['");
  ++pos;
  while (true) {
    skip();
    if (pos >= text.size()) failAt(lineNo, "unterminated matrix literal");
    if (text[pos] == ']') {
      ++pos;
      break;
    }
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    if (text[pos] != '[') failAt(lineNo, "expected '[' to open a row");
    size_t end = text.find(']', pos);
    if (end == std::string::npos) failAt(lineNo, "unterminated row");
    std::string row = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    std::vector<double> vals;
    std::string cell;
    std::istringstream rs(row);
    while (std::getline(rs, cell, ',')) {
      cell = trim(cell);
      if (cell.empty()) failAt(lineNo, "empty matrix entry");
      ExprPtr e = parseExpression(cell, lineNo);
      TrigPoly p = evalToTrigPoly(e);
      if (p.degree() > 0) failAt(lineNo, "gram entries must be constants");
      vals.push_back(p.coeff(0).real());
    }
    rows.push_back(vals);
  }
  if (rows.empty()) failAt(lineNo, "empty matrix literal");
  size_t ncols = rows[0].size();
  MatR m(static_cast<long>(rows.size()), static_cast<long>(ncols));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != ncols) failAt(lineNo, "ragged matrix literal");
    for (size_t j = 0; j < ncols; ++j)
      m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  }
  return m;
}

VecR parseVectorLiteral(const std::string& text, int lineNo) {
  std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    failAt(lineNo, "expected '[v1, v2, ...]'");
  std::string inner = t.substr(1, t.size() - 2);
  std::vector<double> vals;
  std::string cell;
  std::istringstream rs(inner);
  while (std::getline(rs, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    ExprPtr e = parseExpression(cell, lineNo);
    TrigPoly p = evalToTrigPoly(e);
    vals.push_back(p.coeff(0).real());
  }
  VecR v(static_cast<long>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v[static_cast<long>(i)] = vals[i];
  return v;
}

double parseScalar(const std::string& text, int lineNo) {
  ExprPtr e = parseExpression(text, lineNo);
  TrigPoly p = evalToTrigPoly(e);
  if (p.degree() > 0) failAt(lineNo, "expected a constant");
  return p.coeff(0).real();
}

}  // namespace

ProblemSpec parseProblem(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  int lineNo = 0;
  std::string section;

  ProblemSpec spec;
  spec.dim = -1;
  std::optional<MatR> gramX, gramY;
  std::map<std::pair<int, int>, std::pair<std::string, int>> opEntries;
  std::map<int, std::pair<std::string, int>> fEntries;
  int nparams = 0;
  std::optional<VecR> mu0;
  double muRadius = 1.0;
  bool sawStrip = false, sawNonlin = false;

  while (std::getline(in, raw)) {
    ++lineNo;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (section != "space" && section != "operator" &&
          section != "nonlinearity" && section != "strip" &&
          section != "grid" && section != "flags")
        failAt(lineNo, "unknown section [" + section + "]");
      if (section == "nonlinearity") sawNonlin = true;
      if (section == "strip") sawStrip = true;
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) failAt(lineNo, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) failAt(lineNo, "expected 'key = value'");

    if (section == "space") {
      if (key == "dimension")
        spec.dim = static_cast<int>(parseScalar(value, lineNo));
      else if (key == "gram_x")
        gramX = parseMatrixLiteral(value, lineNo);
      else if (key == "gram_y")
        gramY = parseMatrixLiteral(value, lineNo);
      else
        failAt(lineNo, "unknown key '" + key + "' in [space]");
    } else if (section == "operator") {
      // A[i,j] = expr, 1-based indices
      if (key.size() < 6 || key.rfind("A[", 0) != 0 || key.back() != ']')
        failAt(lineNo, "operator keys look like A[i,j]");
      std::string idx = key.substr(2, key.size() - 3);
      size_t comma = idx.find(',');
      if (comma == std::string::npos) failAt(lineNo, "operator keys look like A[i,j]");
      int i = 0, j = 0;
      try {
        i = std::stoi(trim(idx.substr(0, comma)));
        j = std::stoi(trim(idx.substr(comma + 1)));
      } catch (const std::exception&) {
        failAt(lineNo, "bad operator index");
      }
      opEntries[{i, j}] = {value, lineNo};
    } else if (section == "nonlinearity") {
      if (key == "parameters")
        nparams = static_cast<int>(parseScalar(value, lineNo));
      else if (key == "mu0")
        mu0 = parseVectorLiteral(value, lineNo);
      else if (key == "mu_radius")
        muRadius = parseScalar(value, lineNo);
      else if (key.size() >= 2 && key[0] == 'f') {
        int i = 0;
        try {
          i = std::stoi(key.substr(1));
        } catch (const std::exception&) {
          failAt(lineNo, "unknown key '" + key + "' in [nonlinearity]");
        }
        fEntries[i] = {value, lineNo};
      } else
        failAt(lineNo, "unknown key '" + key + "' in [nonlinearity]");
    } else if (section == "strip") {
      if (key == "beta1")
        spec.strip.beta1 = parseScalar(value, lineNo);
      else if (key == "beta2")
        spec.strip.beta2 = parseScalar(value, lineNo);
      else if (key == "margin")
        spec.strip.margin = parseScalar(value, lineNo);
      else
        failAt(lineNo, "unknown key '" + key + "' in [strip]");
    } else if (section == "grid") {
      if (key == "nt")
        spec.grid.nt = static_cast<int>(parseScalar(value, lineNo));
      else
        failAt(lineNo, "unknown key '" + key + "' in [grid]");
    } else if (section == "flags") {
      if (key == "real") {
        if (value == "true")
          spec.realFlag = true;
        else if (value == "false")
          spec.realFlag = false;
        else
          failAt(lineNo, "real = true|false");
      } else
        failAt(lineNo, "unknown key '" + key + "' in [flags]");
    } else {
      failAt(lineNo, "key outside any section");
    }
  }

  if (spec.dim <= 0) throw ParseError("missing dimension in [space]");
  const int n = spec.dim;
  spec.ip.gramX = gramX.value_or(MatR::Identity(n, n));
  spec.ip.gramY = gramY.value_or(MatR::Identity(n, n));

  spec.op.n = n;
  spec.op.entries.assign(static_cast<size_t>(n) * n, TrigPoly());
  for (const auto& [ij, ve] : opEntries) {
    auto [i, j] = ij;
    if (i < 1 || i > n || j < 1 || j > n)
      failAt(ve.second, "operator index out of range");
    ExprPtr e = parseExpression(ve.first, ve.second);
    spec.op.at(i - 1, j - 1) = evalToTrigPoly(e);
  }

  if (sawNonlin && !fEntries.empty()) {
    NonlinearTerm f;
    f.dim = n;
    f.nparams = nparams;
    f.mu0 = mu0.value_or(VecR::Zero(nparams));
    if (f.mu0.size() != nparams)
      throw ParseError("mu0 length does not match parameters");
    f.muRadius = muRadius;
    f.comps.assign(static_cast<size_t>(n), PolyExpr(n, nparams));
    for (const auto& [i, ve] : fEntries) {
      if (i < 1 || i > n) failAt(ve.second, "nonlinearity component out of range");
      ExprPtr e = parseExpression(ve.first, ve.second);
      f.comps[static_cast<size_t>(i - 1)] = evalToPoly(e, n, nparams);
    }
    spec.f = std::move(f);
  }

  if (!sawStrip) throw ParseError("missing [strip] section");
  spec.validate();
  return spec;
}

ProblemSpec parseProblemFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseProblem(ss.str());
}

std::string serializeProblem(const ProblemSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "[space]\n";
  os << "dimension = " << spec.dim << "\n";
  auto emitMat = [&](const char* key, const MatR& m) {
    os << key << " = [";
    for (int i = 0; i < m.rows(); ++i) {
      os << (i ? ", [" : "[");
      for (int j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
      os << "]";
    }
    os << "]\n";
  };
  if (!spec.ip.gramX.isIdentity(0.0)) emitMat("gram_x", spec.ip.gramX);
  if (!spec.ip.gramY.isIdentity(0.0)) emitMat("gram_y", spec.ip.gramY);
  os << "\n[operator]\n";
  for (int i = 0; i < spec.dim; ++i)
    for (int j = 0; j < spec.dim; ++j) {
      if (spec.op.at(i, j).isZero()) continue;
      os << "A[" << (i + 1) << "," << (j + 1)
         << "] = " << spec.op.at(i, j).toString(spec.realFlag) << "\n";
    }
  if (spec.f) {
    os << "\n[nonlinearity]\n";
    if (spec.f->nparams > 0) {
      os << "parameters = " << spec.f->nparams << "\n";
      os << "mu0 = [";
      for (int i = 0; i < spec.f->mu0.size(); ++i)
        os << (i ? ", " : "") << spec.f->mu0[i];
      os << "]\n";
      os << "mu_radius = " << spec.f->muRadius << "\n";
    }
    for (int i = 0; i < spec.dim; ++i) {
      const PolyExpr& c = spec.f->comps[static_cast<size_t>(i)];
      if (c.terms().empty()) continue;
      os << "f" << (i + 1) << " = " << c.toString(spec.realFlag) << "\n";
    }
  }
  os << "\n[strip]\n";
  os << "beta1 = " << spec.strip.beta1 << "\n";
  os << "beta2 = " << spec.strip.beta2 << "\n";
  if (spec.strip.margin != 1e-6) os << "margin = " << spec.strip.margin << "\n";
  os << "\n[grid]\n";
  os << "nt = " << spec.grid.nt << "\n";
  os << "\n[flags]\n";
  os << "real = " << (spec.realFlag ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace floquet
