#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wassos {

/// Raised when two polynomials (or a polynomial and a point) disagree on the
/// number of variables.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Multi-index of a monomial x1^p1 * ... * xn^pn.
class Exponent {
 public:
  Exponent() = default;
  explicit Exponent(std::size_t nvars) : powers_(nvars, 0) {}
  explicit Exponent(std::vector<int> powers);

  std::size_t nvars() const { return powers_.size(); }
  int degree() const;
  int operator[](std::size_t i) const { return powers_[i]; }
  const std::vector<int>& powers() const { return powers_; }

  Exponent operator+(const Exponent& other) const;
  /// Appends a zero power for one extra trailing variable.
  Exponent lifted() const;

  bool operator==(const Exponent&) const = default;

 private:
  std::vector<int> powers_;
};

/// Graded lexicographic order: lower total degree first; within a degree,
/// larger powers of earlier variables first (1, x1, x2, x1^2, x1*x2, x2^2).
struct GrlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

/// Sparse multivariate polynomial with double coefficients.
///
/// Coefficients whose magnitude falls below kDropTolerance after any
/// arithmetic are removed, so the zero polynomial has no terms.
class Poly {
 public:
  static constexpr double kDropTolerance = 1e-14;
  using TermMap = std::map<Exponent, double, GrlexLess>;

  explicit Poly(std::size_t nvars = 1);

  static Poly constant(std::size_t nvars, double c);
  static Poly variable(std::size_t nvars, std::size_t index);
  static Poly monomial(const Exponent& e, double c = 1.0);

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int total_degree() const;
  double coefficient(const Exponent& e) const;
  double constant_term() const;
  /// Largest coefficient magnitude; 0 for the zero polynomial.
  double max_abs_coefficient() const;

  /// Adds c to the coefficient of e (with drop-tolerance cleanup).
  void add_term(const Exponent& e, double c);

  double eval(std::span<const double> point) const;

  /// Embeds into nvars()+1 variables; the new last variable does not appear.
  Poly lift() const;
  /// Substitutes x_i -> scale[i] * x_i.
  Poly scale_variables(std::span<const double> scale) const;
  /// Partial derivative with respect to variable `index`.
  Poly derivative(std::size_t index) const;

  Poly operator-() const;
  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  Poly& operator*=(double s);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, double s) { return a *= s; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b);

  bool operator==(const Poly& other) const = default;

  /// Human-readable form using x1..xn, with `xt` for the last variable when
  /// `lifted_names` is set.
  std::string to_string(bool lifted_names = false) const;

 private:
  std::size_t nvars_;
  TermMap terms_;
};

Poly add(const Poly& a, const Poly& b);
Poly mul(const Poly& a, const Poly& b);
double eval(const Poly& a, std::span<const double> point);
Poly lift(const Poly& a);

/// All exponents in n variables with total degree <= d, graded-lex ordered.
std::vector<Exponent> monomial_basis(std::size_t n, int d);

/// ||x - center||^2 in length(center) variables.
Poly squared_distance(std::span<const double> center);

/// Binomial coefficient C(n, k) as a size_t.
std::size_t binomial(std::size_t n, std::size_t k);

/// Parses text such as "-4*x1^3 + 9*x1^2 - 6.75*x1 - 7.3125".
///
/// Variables are x1..x<nvars>. When `lifted` is true the result has nvars+1
/// variables and `xt` names the extra one. Supports + - * / ^ (non-negative
/// integer powers) and parentheses; division only by constants.
Poly parse_poly(std::string_view text, std::size_t nvars, bool lifted = false);

}  // namespace wassos
