#include "floquet/trigpoly.hpp"

#include <algorithm>
#include <sstream>

namespace floquet {

namespace {
const Complex kI(0.0, 1.0);

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace

TrigPoly::TrigPoly(Complex constant) : deg_(0), c_(1, constant) {}

TrigPoly TrigPoly::cosine(int m, Complex amplitude) {
  TrigPoly p;
  p.ensureDegree(std::abs(m));
  p.setCoeff(m, p.coeff(m) + 0.5 * amplitude);
  p.setCoeff(-m, p.coeff(-m) + 0.5 * amplitude);
  return p;
}

TrigPoly TrigPoly::sine(int m, Complex amplitude) {
  TrigPoly p;
  p.ensureDegree(std::abs(m));
  p.setCoeff(m, p.coeff(m) - 0.5 * kI * amplitude);
  p.setCoeff(-m, p.coeff(-m) + 0.5 * kI * amplitude);
  return p;
}

bool TrigPoly::isZero() const {
  for (const auto& z : c_)
    if (z != 0.0) return false;
  return true;
}

bool TrigPoly::isReal(double tol) const {
  for (int m = -deg_; m <= deg_; ++m) {
    Complex d = coeff(m) - std::conj(coeff(-m));
    if (std::abs(d) > tol) return false;
  }
  return true;
}

Complex TrigPoly::coeff(int m) const {
  if (c_.empty() || std::abs(m) > deg_) return 0.0;
  return c_[static_cast<size_t>(m + deg_)];
}

void TrigPoly::setCoeff(int m, Complex c) {
  ensureDegree(std::abs(m));
  c_[static_cast<size_t>(m + deg_)] = c;
}

void TrigPoly::ensureDegree(int d) {
  if (c_.empty()) {
    deg_ = 0;
    c_.assign(1, Complex(0.0));
  }
  if (d <= deg_) return;
  std::vector<Complex> nc(2 * d + 1, Complex(0.0));
  for (int m = -deg_; m <= deg_; ++m) nc[static_cast<size_t>(m + d)] = coeff(m);
  deg_ = d;
  c_ = std::move(nc);
}

Complex TrigPoly::eval(double t) const {
  Complex out = 0.0;
  for (int m = -deg_; m <= deg_; ++m) {
    Complex cm = coeff(m);
    if (cm == 0.0) continue;
    out += cm * std::exp(kI * (kTwoPi * m * t));
  }
  return out;
}

TrigPoly TrigPoly::derivative() const {
  TrigPoly d;
  d.ensureDegree(deg_);
  for (int m = -deg_; m <= deg_; ++m)
    d.setCoeff(m, coeff(m) * kI * (kTwoPi * m));
  d.shrink();
  return d;
}

TrigPoly TrigPoly::conjugated() const {
  TrigPoly r;
  r.ensureDegree(deg_);
  for (int m = -deg_; m <= deg_; ++m) r.setCoeff(m, std::conj(coeff(-m)));
  return r;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& o) {
  ensureDegree(o.deg_);
  for (int m = -o.deg_; m <= o.deg_; ++m) setCoeff(m, coeff(m) + o.coeff(m));
  return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& o) {
  ensureDegree(o.deg_);
  for (int m = -o.deg_; m <= o.deg_; ++m) setCoeff(m, coeff(m) - o.coeff(m));
  return *this;
}

TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
  TrigPoly r;
  if (a.isZero() || b.isZero()) return r;
  r.ensureDegree(a.deg_ + b.deg_);
  for (int p = -a.deg_; p <= a.deg_; ++p) {
    Complex cp = a.coeff(p);
    if (cp == 0.0) continue;
    for (int q = -b.deg_; q <= b.deg_; ++q) {
      Complex cq = b.coeff(q);
      if (cq == 0.0) continue;
      r.setCoeff(p + q, r.coeff(p + q) + cp * cq);
    }
  }
  r.shrink();
  return r;
}

TrigPoly operator*(Complex s, TrigPoly a) {
  for (auto& z : a.c_) z *= s;
  return a;
}

TrigPoly TrigPoly::pow(int e) const {
  TrigPoly r(1.0);
  for (int i = 0; i < e; ++i) r = r * (*this);
  return r;
}

double TrigPoly::maxAbsCoeff() const {
  double m = 0.0;
  for (const auto& z : c_) m = std::max(m, std::abs(z));
  return m;
}

void TrigPoly::shrink() {
  while (deg_ > 0 && coeff(deg_) == 0.0 && coeff(-deg_) == 0.0) {
    c_.erase(c_.begin());
    c_.pop_back();
    --deg_;
  }
}

bool TrigPoly::identicalTo(const TrigPoly& o) const {
  int d = std::max(deg_, o.deg_);
  for (int m = -d; m <= d; ++m) {
    Complex a = coeff(m), b = o.coeff(m);
    if (a.real() != b.real() || a.imag() != b.imag()) return false;
  }
  return true;
}

std::string TrigPoly::toString(bool realProblem) const {
  std::ostringstream os;
  bool first = true;
  auto emit = [&](double v, const std::string& basis) {
    if (v == 0.0) return;
    if (!first) os << (v < 0 ? " - " : " + ");
    if (first && v < 0) os << "-";
    double a = std::abs(v);
    if (basis.empty())
      os << num(a);
    else if (a == 1.0)
      os << basis;
    else
      os << num(a) << "*" << basis;
    first = false;
  };
  if (realProblem || isReal(0.0)) {
    emit(coeff(0).real(), "");
    for (int m = 1; m <= deg_; ++m) {
      Complex cm = coeff(m);
      emit(2.0 * cm.real(), "cos(2*pi*" + std::to_string(m) + "*t)");
      emit(-2.0 * cm.imag(), "sin(2*pi*" + std::to_string(m) + "*t)");
    }
  } else {
    // complex coefficients: emit cos/sin split with explicit imaginary parts
    auto emitC = [&](Complex v, const std::string& basis) {
      if (v == 0.0) return;
      if (!first) os << " + ";
      os << "(" << num(v.real()) << (v.imag() < 0 ? " - " : " + ")
         << num(std::abs(v.imag())) << "*i)";
      if (!basis.empty()) os << "*" << basis;
      first = false;
    };
    emitC(coeff(0), "");
    for (int m = 1; m <= deg_; ++m) {
      emitC(coeff(m) + coeff(-m), "cos(2*pi*" + std::to_string(m) + "*t)");
      emitC(kI * (coeff(m) - coeff(-m)),
            "sin(2*pi*" + std::to_string(m) + "*t)");
    }
  }
  if (first) os << "0";
  return os.str();
}

std::string formatComplex(const Complex& z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real();
  if (z.imag() != 0.0)
    os << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

}  // namespace floquet
