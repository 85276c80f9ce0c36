#pragma once

#include <map>
#include <memory>
#include <optional>

#include "floquet/trigpoly.hpp"

namespace floquet {

/// Exponent multi-index of one monomial u1^a1...un^an * mu1^g1...mud^gd.
struct MonomialKey {
  std::vector<int> u;
  std::vector<int> mu;

  int uDegree() const;
  int totalDegree() const;
  bool operator<(const MonomialKey& o) const;
  std::string toString() const;
};

/// Polynomial in the state components and parameters whose coefficients are
/// trigonometric polynomials in t.
class PolyExpr {
 public:
  PolyExpr() = default;
  PolyExpr(int nu, int nmu) : nu_(nu), nmu_(nmu) {}
  static PolyExpr constant(int nu, int nmu, const TrigPoly& c);
  static PolyExpr variableU(int nu, int nmu, int index);
  static PolyExpr variableMu(int nu, int nmu, int index);

  int nu() const { return nu_; }
  int nmu() const { return nmu_; }
  const std::map<MonomialKey, TrigPoly>& terms() const { return terms_; }

  void add(const MonomialKey& k, const TrigPoly& c);

  PolyExpr& operator+=(const PolyExpr& o);
  PolyExpr& operator-=(const PolyExpr& o);
  friend PolyExpr operator*(const PolyExpr& a, const PolyExpr& b);
  PolyExpr pow(int e) const;
  PolyExpr scaled(Complex s) const;

  /// Substitute mu = mu0; result depends on u (and t) only.
  PolyExpr substituteMu(const VecR& mu0) const;

  Complex eval(double t, const VecC& mu, const VecC& u) const;
  double evalReal(double t, const VecR& mu, const VecR& u) const;

  int degree() const;
  bool isReal(double tol = 0.0) const;
  void prune();  // drop exactly-zero coefficient polynomials

  std::string toString(bool realProblem) const;

 private:
  int nu_ = 0;
  int nmu_ = 0;
  std::map<MonomialKey, TrigPoly> terms_;
};

// --- expression AST -------------------------------------------------------

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind {
    Number,
    Pi,
    TimeVar,
    StateVar,  // u<k>, payload index
    ParamVar,  // mu<k>
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,  // rhs literal integer in payload
    Cos,
    Sin
  };
  Kind kind;
  double value = 0.0;  // Number
  int index = 0;       // StateVar/ParamVar (1-based), Pow exponent
  ExprPtr a, b;
  int line = 0, col = 0;
};

/// Parse an arithmetic expression in t, u1..un, mu1..mud, pi, cos, sin.
/// line/col offsets are used for error reporting.
ExprPtr parseExpression(const std::string& text, int lineNo);

/// Evaluate an AST in the polynomial algebra. `t` may appear only inside
/// cos/sin arguments that are linear in t with frequency an integer multiple
/// of 2*pi.
PolyExpr evalToPoly(const ExprPtr& e, int nu, int nmu);

/// Evaluate an AST that must reduce to a trigonometric polynomial in t alone.
TrigPoly evalToTrigPoly(const ExprPtr& e);

}  // namespace floquet
