#include "floquet/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace floquet {

// --- MonomialKey -----------------------------------------------------------

int MonomialKey::uDegree() const {
  int d = 0;
  for (int e : u) d += e;
  return d;
}

int MonomialKey::totalDegree() const {
  int d = uDegree();
  for (int e : mu) d += e;
  return d;
}

bool MonomialKey::operator<(const MonomialKey& o) const {
  if (u != o.u) return u < o.u;
  return mu < o.mu;
}

std::string MonomialKey::toString() const {
  std::ostringstream os;
  bool first = true;
  auto emit = [&](const char* name, int i, int e) {
    if (e == 0) return;
    if (!first) os << "*";
    os << name << (i + 1);
    if (e > 1) os << "^" << e;
    first = false;
  };
  for (size_t i = 0; i < u.size(); ++i) emit("u", static_cast<int>(i), u[i]);
  for (size_t i = 0; i < mu.size(); ++i) emit("mu", static_cast<int>(i), mu[i]);
  if (first) os << "1";
  return os.str();
}

// --- PolyExpr ---------------------------------------------------------------

PolyExpr PolyExpr::constant(int nu, int nmu, const TrigPoly& c) {
  PolyExpr p(nu, nmu);
  if (!c.isZero())
    p.terms_[MonomialKey{std::vector<int>(nu, 0), std::vector<int>(nmu, 0)}] =
        c;
  return p;
}

PolyExpr PolyExpr::variableU(int nu, int nmu, int index) {
  PolyExpr p(nu, nmu);
  MonomialKey k{std::vector<int>(nu, 0), std::vector<int>(nmu, 0)};
  k.u[static_cast<size_t>(index - 1)] = 1;
  p.terms_[k] = TrigPoly(1.0);
  return p;
}

PolyExpr PolyExpr::variableMu(int nu, int nmu, int index) {
  PolyExpr p(nu, nmu);
  MonomialKey k{std::vector<int>(nu, 0), std::vector<int>(nmu, 0)};
  k.mu[static_cast<size_t>(index - 1)] = 1;
  p.terms_[k] = TrigPoly(1.0);
  return p;
}

void PolyExpr::add(const MonomialKey& k, const TrigPoly& c) {
  auto it = terms_.find(k);
  if (it == terms_.end())
    terms_[k] = c;
  else
    it->second += c;
}

PolyExpr& PolyExpr::operator+=(const PolyExpr& o) {
  for (const auto& [k, c] : o.terms_) add(k, c);
  return *this;
}

PolyExpr& PolyExpr::operator-=(const PolyExpr& o) {
  for (const auto& [k, c] : o.terms_) add(k, Complex(-1.0) * c);
  return *this;
}

PolyExpr operator*(const PolyExpr& a, const PolyExpr& b) {
  PolyExpr r(a.nu_, a.nmu_);
  for (const auto& [ka, ca] : a.terms_) {
    for (const auto& [kb, cb] : b.terms_) {
      MonomialKey k = ka;
      for (size_t i = 0; i < k.u.size(); ++i) k.u[i] += kb.u[i];
      for (size_t i = 0; i < k.mu.size(); ++i) k.mu[i] += kb.mu[i];
      r.add(k, ca * cb);
    }
  }
  return r;
}

PolyExpr PolyExpr::pow(int e) const {
  PolyExpr r = PolyExpr::constant(nu_, nmu_, TrigPoly(1.0));
  for (int i = 0; i < e; ++i) r = r * (*this);
  return r;
}

PolyExpr PolyExpr::scaled(Complex s) const {
  PolyExpr r(nu_, nmu_);
  for (const auto& [k, c] : terms_) r.terms_[k] = s * c;
  return r;
}

PolyExpr PolyExpr::substituteMu(const VecR& mu0) const {
  PolyExpr r(nu_, 0);
  for (const auto& [k, c] : terms_) {
    double f = 1.0;
    for (size_t i = 0; i < k.mu.size(); ++i)
      f *= std::pow(mu0[static_cast<long>(i)], k.mu[i]);
    if (f == 0.0) continue;
    MonomialKey nk{k.u, {}};
    r.add(nk, Complex(f) * c);
  }
  r.prune();
  return r;
}

Complex PolyExpr::eval(double t, const VecC& mu, const VecC& u) const {
  Complex out = 0.0;
  for (const auto& [k, c] : terms_) {
    Complex v = c.eval(t);
    for (size_t i = 0; i < k.u.size(); ++i)
      for (int e = 0; e < k.u[i]; ++e) v *= u[static_cast<long>(i)];
    for (size_t i = 0; i < k.mu.size(); ++i)
      for (int e = 0; e < k.mu[i]; ++e) v *= mu[static_cast<long>(i)];
    out += v;
  }
  return out;
}

double PolyExpr::evalReal(double t, const VecR& mu, const VecR& u) const {
  return eval(t, mu.cast<Complex>(), u.cast<Complex>()).real();
}

int PolyExpr::degree() const {
  int d = 0;
  for (const auto& [k, c] : terms_)
    if (!c.isZero()) d = std::max(d, k.totalDegree());
  return d;
}

bool PolyExpr::isReal(double tol) const {
  for (const auto& [k, c] : terms_)
    if (!c.isReal(tol)) return false;
  return true;
}

void PolyExpr::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second.isZero())
      it = terms_.erase(it);
    else
      ++it;
  }
}

std::string PolyExpr::toString(bool realProblem) const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, c] : terms_) {
    if (c.isZero()) continue;
    if (!first) os << " + ";
    os << "(" << c.toString(realProblem) << ")";
    std::string mono = k.toString();
    if (mono != "1") os << "*" << mono;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

// --- tokenizer / parser -----------------------------------------------------

namespace {

struct Token {
  enum class Type { Number, Ident, Op, End };
  Type type = Type::End;
  double num = 0.0;
  std::string text;
  char op = 0;
  int col = 0;
};

class Lexer {
 public:
  Lexer(const std::string& s, int line) : s_(s), line_(line) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }
  [[noreturn]] void fail(const std::string& msg, int col) const {
    std::ostringstream os;
    os << "line " << line_ << ", col " << col + 1 << ": " << msg;
    throw ParseError(os.str());
  }
  int line() const { return line_; }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
    tok_ = Token{};
    tok_.col = static_cast<int>(pos_);
    if (pos_ >= s_.size()) {
      tok_.type = Token::Type::End;
      return;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t end = pos_;
      while (end < s_.size() &&
             (std::isdigit(static_cast<unsigned char>(s_[end])) ||
              s_[end] == '.' || s_[end] == 'e' || s_[end] == 'E' ||
              ((s_[end] == '+' || s_[end] == '-') && end > pos_ &&
               (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
        ++end;
      tok_.type = Token::Type::Number;
      try {
        tok_.num = std::stod(s_.substr(pos_, end - pos_));
      } catch (const std::exception&) {
        fail("malformed numeric literal", static_cast<int>(pos_));
      }
      pos_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t end = pos_;
      while (end < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[end])) ||
              s_[end] == '_'))
        ++end;
      tok_.type = Token::Type::Ident;
      tok_.text = s_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    if (std::string("+-*/^()").find(c) != std::string::npos) {
      tok_.type = Token::Type::Op;
      tok_.op = c;
      ++pos_;
      return;
    }
    fail(std::string("unexpected character '") + c + "'",
         static_cast<int>(pos_));
  }

  std::string s_;
  size_t pos_ = 0;
  int line_;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& s, int line) : lex_(s, line) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    if (lex_.peek().type != Token::Type::End)
      lex_.fail("trailing input after expression", lex_.peek().col);
    return e;
  }

 private:
  ExprPtr make(ExprNode::Kind k, ExprPtr a = nullptr, ExprPtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    n->line = lex_.line();
    n->col = lex_.peek().col;
    return n;
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (lex_.peek().type == Token::Type::Op &&
           (lex_.peek().op == '+' || lex_.peek().op == '-')) {
      char op = lex_.take().op;
      ExprPtr rhs = term();
      e = make(op == '+' ? ExprNode::Kind::Add : ExprNode::Kind::Sub, e, rhs);
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (lex_.peek().type == Token::Type::Op &&
           (lex_.peek().op == '*' || lex_.peek().op == '/')) {
      char op = lex_.take().op;
      ExprPtr rhs = factor();
      e = make(op == '*' ? ExprNode::Kind::Mul : ExprNode::Kind::Div, e, rhs);
    }
    return e;
  }

  ExprPtr factor() {
    if (lex_.peek().type == Token::Type::Op && lex_.peek().op == '-') {
      lex_.take();
      return make(ExprNode::Kind::Neg, factor());
    }
    if (lex_.peek().type == Token::Type::Op && lex_.peek().op == '+') {
      lex_.take();
      return factor();
    }
    ExprPtr base = atom();
    if (lex_.peek().type == Token::Type::Op && lex_.peek().op == '^') {
      int col = lex_.peek().col;
      lex_.take();
      bool neg = false;
      if (lex_.peek().type == Token::Type::Op && lex_.peek().op == '-') {
        neg = true;
        lex_.take();
      }
      if (lex_.peek().type != Token::Type::Number)
        lex_.fail("exponent must be an integer literal", col);
      Token t = lex_.take();
      double v = t.num;
      if (v != std::floor(v))
        lex_.fail("exponent must be an integer literal", t.col);
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Pow;
      n->a = base;
      n->index = static_cast<int>(v) * (neg ? -1 : 1);
      n->line = lex_.line();
      return n;
    }
    return base;
  }

  ExprPtr atom() {
    const Token& p = lex_.peek();
    if (p.type == Token::Type::Number) {
      Token t = lex_.take();
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::Number;
      n->value = t.num;
      n->line = lex_.line();
      return n;
    }
    if (p.type == Token::Type::Ident) {
      Token t = lex_.take();
      if (t.text == "pi") return make(ExprNode::Kind::Pi);
      if (t.text == "t") return make(ExprNode::Kind::TimeVar);
      if (t.text == "cos" || t.text == "sin") {
        if (!(lex_.peek().type == Token::Type::Op && lex_.peek().op == '('))
          lex_.fail("expected '(' after " + t.text, t.col);
        lex_.take();
        ExprPtr arg = expr();
        if (!(lex_.peek().type == Token::Type::Op && lex_.peek().op == ')'))
          lex_.fail("expected ')'", lex_.peek().col);
        lex_.take();
        return make(t.text == "cos" ? ExprNode::Kind::Cos : ExprNode::Kind::Sin,
                    arg);
      }
      auto varIndex = [&](size_t prefixLen) -> int {
        std::string digits = t.text.substr(prefixLen);
        if (digits.empty()) return -1;
        for (char ch : digits)
          if (!std::isdigit(static_cast<unsigned char>(ch))) return -1;
        return std::stoi(digits);
      };
      if (t.text.size() > 1 && t.text[0] == 'u') {
        int idx = varIndex(1);
        if (idx >= 1) {
          auto n = std::make_shared<ExprNode>();
          n->kind = ExprNode::Kind::StateVar;
          n->index = idx;
          n->line = lex_.line();
          return n;
        }
      }
      if (t.text.size() > 2 && t.text.rfind("mu", 0) == 0) {
        int idx = varIndex(2);
        if (idx >= 1) {
          auto n = std::make_shared<ExprNode>();
          n->kind = ExprNode::Kind::ParamVar;
          n->index = idx;
          n->line = lex_.line();
          return n;
        }
      }
      lex_.fail("unknown identifier '" + t.text + "'", t.col);
    }
    if (p.type == Token::Type::Op && p.op == '(') {
      lex_.take();
      ExprPtr e = expr();
      if (!(lex_.peek().type == Token::Type::Op && lex_.peek().op == ')'))
        lex_.fail("expected ')'", lex_.peek().col);
      lex_.take();
      return e;
    }
    lex_.fail("expected a value", p.col);
  }

  Lexer lex_;
};

// linear-in-t value for cos/sin arguments
struct LinT {
  double c0 = 0.0;
  double c1 = 0.0;  // coefficient of t
};

LinT evalLinT(const ExprPtr& e) {
  auto bad = [&](const std::string& m) -> LinT {
    std::ostringstream os;
    os << "line " << e->line << ": " << m;
    throw ParseError(os.str());
  };
  switch (e->kind) {
    case ExprNode::Kind::Number:
      return {e->value, 0.0};
    case ExprNode::Kind::Pi:
      return {EIGEN_PI, 0.0};
    case ExprNode::Kind::TimeVar:
      return {0.0, 1.0};
    case ExprNode::Kind::Add: {
      LinT a = evalLinT(e->a), b = evalLinT(e->b);
      return {a.c0 + b.c0, a.c1 + b.c1};
    }
    case ExprNode::Kind::Sub: {
      LinT a = evalLinT(e->a), b = evalLinT(e->b);
      return {a.c0 - b.c0, a.c1 - b.c1};
    }
    case ExprNode::Kind::Neg: {
      LinT a = evalLinT(e->a);
      return {-a.c0, -a.c1};
    }
    case ExprNode::Kind::Mul: {
      LinT a = evalLinT(e->a), b = evalLinT(e->b);
      if (a.c1 != 0.0 && b.c1 != 0.0)
        return bad("trig argument must be linear in t");
      return {a.c0 * b.c0, a.c0 * b.c1 + a.c1 * b.c0};
    }
    case ExprNode::Kind::Div: {
      LinT a = evalLinT(e->a), b = evalLinT(e->b);
      if (b.c1 != 0.0) return bad("cannot divide by t inside trig argument");
      if (b.c0 == 0.0) return bad("division by zero");
      return {a.c0 / b.c0, a.c1 / b.c0};
    }
    case ExprNode::Kind::Pow: {
      LinT a = evalLinT(e->a);
      if (a.c1 != 0.0 && e->index != 1)
        return bad("trig argument must be linear in t");
      if (e->index < 0) {
        if (a.c0 == 0.0) return bad("division by zero");
        return {std::pow(a.c0, e->index), 0.0};
      }
      return {std::pow(a.c0, e->index), e->index == 1 ? a.c1 : 0.0};
    }
    default:
      return bad("only numbers, pi and t may appear inside cos/sin");
  }
}

PolyExpr trigOfLin(const LinT& arg, bool isCos, int nu, int nmu, int line) {
  double ratio = arg.c1 / kTwoPi;
  double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9) {
    std::ostringstream os;
    os << "line " << line
       << ": trig frequency must be an integer multiple of 2*pi (got " << arg.c1
       << ")";
    throw ParseError(os.str());
  }
  int m = static_cast<int>(rounded);
  double ph = arg.c0;
  // cos(2 pi m t + ph), sin(2 pi m t + ph) expanded over the basis
  TrigPoly c = TrigPoly::cosine(m), s = TrigPoly::sine(m);
  TrigPoly out;
  if (isCos)
    out = Complex(std::cos(ph)) * c - Complex(std::sin(ph)) * s;
  else
    out = Complex(std::sin(ph)) * c + Complex(std::cos(ph)) * s;
  return PolyExpr::constant(nu, nmu, out);
}

PolyExpr evalPoly(const ExprPtr& e, int nu, int nmu) {
  auto bad = [&](const std::string& m) -> PolyExpr {
    std::ostringstream os;
    os << "line " << e->line << ": " << m;
    throw ParseError(os.str());
  };
  switch (e->kind) {
    case ExprNode::Kind::Number:
      return PolyExpr::constant(nu, nmu, TrigPoly(e->value));
    case ExprNode::Kind::Pi:
      return PolyExpr::constant(nu, nmu, TrigPoly(EIGEN_PI));
    case ExprNode::Kind::TimeVar:
      return bad("bare t is not periodic; use cos/sin of 2*pi*t multiples");
    case ExprNode::Kind::StateVar:
      if (e->index > nu) return bad("state variable index out of range");
      return PolyExpr::variableU(nu, nmu, e->index);
    case ExprNode::Kind::ParamVar:
      if (e->index > nmu) return bad("parameter index out of range");
      return PolyExpr::variableMu(nu, nmu, e->index);
    case ExprNode::Kind::Add: {
      PolyExpr a = evalPoly(e->a, nu, nmu);
      a += evalPoly(e->b, nu, nmu);
      return a;
    }
    case ExprNode::Kind::Sub: {
      PolyExpr a = evalPoly(e->a, nu, nmu);
      a -= evalPoly(e->b, nu, nmu);
      return a;
    }
    case ExprNode::Kind::Neg:
      return evalPoly(e->a, nu, nmu).scaled(-1.0);
    case ExprNode::Kind::Mul:
      return evalPoly(e->a, nu, nmu) * evalPoly(e->b, nu, nmu);
    case ExprNode::Kind::Div: {
      PolyExpr b = evalPoly(e->b, nu, nmu);
      if (b.degree() > 0 || b.terms().size() > 1)
        return bad("division only by constants");
      Complex divisor =
          b.terms().empty() ? Complex(0.0) : b.terms().begin()->second.coeff(0);
      if (b.terms().size() == 1 && b.terms().begin()->second.degree() > 0)
        return bad("division only by constants");
      if (divisor == 0.0) return bad("division by zero");
      return evalPoly(e->a, nu, nmu).scaled(1.0 / divisor);
    }
    case ExprNode::Kind::Pow: {
      if (e->index < 0) {
        PolyExpr a = evalPoly(e->a, nu, nmu);
        if (a.degree() > 0 || a.terms().size() > 1 ||
            (a.terms().size() == 1 && a.terms().begin()->second.degree() > 0))
          return bad("negative powers only of constants");
        Complex base =
            a.terms().empty() ? Complex(0.0) : a.terms().begin()->second.coeff(0);
        if (base == 0.0) return bad("division by zero");
        return PolyExpr::constant(nu, nmu,
                                  TrigPoly(std::pow(base, e->index)));
      }
      return evalPoly(e->a, nu, nmu).pow(e->index);
    }
    case ExprNode::Kind::Cos:
    case ExprNode::Kind::Sin:
      return trigOfLin(evalLinT(e->a), e->kind == ExprNode::Kind::Cos, nu, nmu,
                       e->line);
  }
  return bad("unreachable");
}

}  // namespace

ExprPtr parseExpression(const std::string& text, int lineNo) {
  Parser p(text, lineNo);
  return p.parse();
}

PolyExpr evalToPoly(const ExprPtr& e, int nu, int nmu) {
  PolyExpr p = evalPoly(e, nu, nmu);
  p.prune();
  return p;
}

TrigPoly evalToTrigPoly(const ExprPtr& e) {
  PolyExpr p = evalPoly(e, 0, 0);
  p.prune();
  if (p.terms().empty()) return TrigPoly();
  if (p.terms().size() > 1)
    throw ParseError("operator entry must not contain state variables");
  return p.terms().begin()->second;
}

}  // namespace floquet
