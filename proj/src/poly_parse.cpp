#include <cctype>
#include <cstdlib>
#include <string>

#include "wassos/poly.hpp"

namespace wassos {
namespace {

class Parser {
 public:
  Parser(std::string_view text, std::size_t nvars, bool lifted)
      : text_(text), base_(nvars), total_(lifted ? nvars + 1 : nvars), lifted_(lifted) {}

  Poly run() {
    skip_ws();
    if (pos_ == text_.size()) fail("empty polynomial");
    Poly p = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("parse_poly: " + what + " at offset " + std::to_string(pos_) +
                                " in \"" + std::string(text_) + "\"");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Poly expr() {
    Poly acc = term();
    for (;;) {
      if (accept('+')) {
        acc += term();
      } else if (accept('-')) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  Poly term() {
    Poly acc = unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * unary();
      } else if (accept('/')) {
        Poly d = unary();
        if (d.total_degree() > 0 || d.is_zero()) fail("division only by a nonzero constant");
        acc *= 1.0 / d.constant_term();
      } else {
        return acc;
      }
    }
  }

  Poly unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Poly power() {
    Poly base = atom();
    if (!accept('^')) return base;
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected non-negative integer exponent");
    const int k = std::stoi(std::string(text_.substr(start, pos_ - start)));
    Poly out = Poly::constant(total_, 1.0);
    for (int i = 0; i < k; ++i) out = out * base;
    return out;
  }

  Poly atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Poly inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == 'x') return variable();
    fail("unexpected character");
  }

  Poly number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("bad number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return Poly::constant(total_, v);
  }

  Poly variable() {
    ++pos_;  // 'x'
    if (pos_ < text_.size() && text_[pos_] == 't') {
      if (!lifted_) fail("xt only allowed in lifted polynomials");
      ++pos_;
      return Poly::variable(total_, base_);
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected variable index");
    const std::size_t idx = std::stoul(std::string(text_.substr(start, pos_ - start)));
    if (idx < 1 || idx > base_) fail("variable index out of range");
    return Poly::variable(total_, idx - 1);
  }

  std::string_view text_;
  std::size_t base_;
  std::size_t total_;
  bool lifted_;
  std::size_t pos_ = 0;
};

}  // namespace

Poly parse_poly(std::string_view text, std::size_t nvars, bool lifted) {
  if (nvars == 0) throw std::invalid_argument("parse_poly: nvars must be positive");
  return Parser(text, nvars, lifted).run();
}

}  // namespace wassos
