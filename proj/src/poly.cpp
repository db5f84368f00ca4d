#include "wassos/poly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace wassos {

Exponent::Exponent(std::vector<int> powers) : powers_(std::move(powers)) {
  for (int p : powers_) {
    if (p < 0) throw std::invalid_argument("negative exponent");
  }
}

int Exponent::degree() const {
  return std::accumulate(powers_.begin(), powers_.end(), 0);
}

Exponent Exponent::operator+(const Exponent& other) const {
  if (other.nvars() != nvars()) throw DimensionError("exponent length mismatch");
  Exponent out(*this);
  for (std::size_t i = 0; i < powers_.size(); ++i) out.powers_[i] += other.powers_[i];
  return out;
}

Exponent Exponent::lifted() const {
  Exponent out(*this);
  out.powers_.push_back(0);
  return out;
}

bool GrlexLess::operator()(const Exponent& a, const Exponent& b) const {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da < db;
  // Same degree: x1 before x2, i.e. lexicographically larger powers first.
  return std::lexicographical_compare(b.powers().begin(), b.powers().end(),
                                      a.powers().begin(), a.powers().end());
}

Poly::Poly(std::size_t nvars) : nvars_(nvars) {
  if (nvars == 0) throw std::invalid_argument("polynomial needs at least one variable");
}

Poly Poly::constant(std::size_t nvars, double c) {
  Poly p(nvars);
  p.add_term(Exponent(nvars), c);
  return p;
}

Poly Poly::variable(std::size_t nvars, std::size_t index) {
  if (index >= nvars) throw DimensionError("variable index out of range");
  std::vector<int> powers(nvars, 0);
  powers[index] = 1;
  return monomial(Exponent(std::move(powers)));
}

Poly Poly::monomial(const Exponent& e, double c) {
  Poly p(e.nvars());
  p.add_term(e, c);
  return p;
}

int Poly::total_degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e.degree());
  return d;
}

double Poly::coefficient(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double Poly::constant_term() const { return coefficient(Exponent(nvars_)); }

double Poly::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

void Poly::add_term(const Exponent& e, double c) {
  if (e.nvars() != nvars_) throw DimensionError("exponent length does not match polynomial");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kDropTolerance) terms_.erase(it);
}

double Poly::eval(std::span<const double> point) const {
  if (point.size() != nvars_) throw DimensionError("point length does not match polynomial");
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (std::size_t i = 0; i < nvars_; ++i) {
      for (int k = 0; k < e[i]; ++k) t *= point[i];
    }
    sum += t;
  }
  return sum;
}

Poly Poly::lift() const {
  Poly out(nvars_ + 1);
  for (const auto& [e, c] : terms_) out.terms_.emplace(e.lifted(), c);
  return out;
}

Poly Poly::scale_variables(std::span<const double> scale) const {
  if (scale.size() != nvars_) throw DimensionError("scale length does not match polynomial");
  Poly out(nvars_);
  for (const auto& [e, c] : terms_) {
    double f = c;
    for (std::size_t i = 0; i < nvars_; ++i) f *= std::pow(scale[i], e[i]);
    out.add_term(e, f);
  }
  return out;
}

Poly Poly::derivative(std::size_t index) const {
  if (index >= nvars_) throw DimensionError("variable index out of range");
  Poly out(nvars_);
  for (const auto& [e, c] : terms_) {
    if (e[index] == 0) continue;
    std::vector<int> powers = e.powers();
    const int p = powers[index]--;
    out.add_term(Exponent(std::move(powers)), c * p);
  }
  return out;
}

Poly Poly::operator-() const {
  Poly out(*this);
  for (auto& [e, c] : out.terms_) c = -c;
  return out;
}

Poly& Poly::operator+=(const Poly& other) {
  if (other.nvars_ != nvars_) throw DimensionError("polynomial dimension mismatch in add");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  if (other.nvars_ != nvars_) throw DimensionError("polynomial dimension mismatch in subtract");
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Poly& Poly::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    if (std::abs(it->second) < kDropTolerance) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.nvars_ != b.nvars_) throw DimensionError("polynomial dimension mismatch in multiply");
  // Accumulate the full convolution before cleanup so that intermediate
  // cancellations are not truncated term by term.
  Poly::TermMap acc;
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) acc[ea + eb] += ca * cb;
  }
  Poly out(a.nvars_);
  for (auto& [e, c] : acc) {
    if (std::abs(c) >= Poly::kDropTolerance) out.terms_.emplace(e, c);
  }
  return out;
}

std::string Poly::to_string(bool lifted_names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  // Highest degree first reads more naturally.
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    double mag = std::abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    const bool is_const = e.degree() == 0;
    if (is_const || mag != 1.0) {
      os << mag;
      if (!is_const) os << "*";
    }
    bool first_factor = true;
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (e[i] == 0) continue;
      if (!first_factor) os << "*";
      first_factor = false;
      if (lifted_names && i + 1 == nvars_) {
        os << "xt";
      } else {
        os << "x" << (i + 1);
      }
      if (e[i] > 1) os << "^" << e[i];
    }
  }
  return os.str();
}

Poly add(const Poly& a, const Poly& b) { return a + b; }
Poly mul(const Poly& a, const Poly& b) { return a * b; }
double eval(const Poly& a, std::span<const double> point) { return a.eval(point); }
Poly lift(const Poly& a) { return a.lift(); }

namespace {

void enumerate_exponents(std::size_t n, int remaining, std::vector<int>& powers,
                         std::size_t pos, std::vector<Exponent>& out) {
  if (pos + 1 == n) {
    for (int p = 0; p <= remaining; ++p) {
      powers[pos] = p;
      out.emplace_back(powers);
    }
    powers[pos] = 0;
    return;
  }
  for (int p = 0; p <= remaining; ++p) {
    powers[pos] = p;
    enumerate_exponents(n, remaining - p, powers, pos + 1, out);
  }
  powers[pos] = 0;
}

}  // namespace

std::vector<Exponent> monomial_basis(std::size_t n, int d) {
  if (n == 0) throw std::invalid_argument("monomial basis needs n >= 1");
  if (d < 0) throw std::invalid_argument("monomial basis needs d >= 0");
  std::vector<Exponent> out;
  out.reserve(binomial(n + d, d));
  std::vector<int> powers(n, 0);
  enumerate_exponents(n, d, powers, 0, out);
  std::sort(out.begin(), out.end(), GrlexLess{});
  return out;
}

Poly squared_distance(std::span<const double> center) {
  const std::size_t n = center.size();
  Poly p(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> sq(n, 0);
    sq[i] = 2;
    p.add_term(Exponent(sq), 1.0);
    std::vector<int> lin(n, 0);
    lin[i] = 1;
    p.add_term(Exponent(lin), -2.0 * center[i]);
    p.add_term(Exponent(n), center[i] * center[i]);
  }
  return p;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace wassos
