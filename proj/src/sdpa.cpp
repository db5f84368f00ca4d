#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include "wassos/backend.hpp"

namespace wassos {

namespace {

constexpr const char* kTag = "* wassos";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SdpaEntry {
  std::size_t mat;
  std::size_t blk;
  std::size_t i;
  std::size_t j;
  double value;

  bool operator<(const SdpaEntry& o) const {
    return std::tie(mat, blk, i, j) < std::tie(o.mat, o.blk, o.i, o.j);
  }
};

void emit_row(const ConicStandardForm& form, const ConicRow& row, std::size_t mat, double sign,
              std::vector<SdpaEntry>& out) {
  const std::size_t lp_block = form.block_sizes.size() + 1;
  for (const auto& g : row.psd) {
    const double v = g.i == g.j ? g.coef : g.coef / 2.0;
    out.push_back({mat, g.block + 1, g.i + 1, g.j + 1, sign * v});
  }
  for (const auto& [k, c] : row.linear) {
    const double v = sign * c;
    if (k < form.num_nonneg) {
      out.push_back({mat, lp_block, k + 1, k + 1, v});
    } else {
      const std::size_t f = k - form.num_nonneg;
      const std::size_t plus = form.num_nonneg + 2 * f + 1;
      out.push_back({mat, lp_block, plus, plus, v});
      out.push_back({mat, lp_block, plus + 1, plus + 1, -v});
    }
  }
}

}  // namespace

void export_sdpa(const ConicStandardForm& form, std::ostream& out) {
  const std::size_t lp_size = form.num_nonneg + 2 * form.num_free;
  const std::size_t nblock = form.block_sizes.size() + (lp_size > 0 ? 1 : 0);
  out << kTag << " sense=" << (form.sense == Sense::Minimize ? "minimize" : "maximize")
      << " free=" << form.num_free << " offset=" << fmt(form.objective_offset) << "\n";
  out << form.rows.size() << "\n" << nblock << "\n";
  std::string sizes;
  for (std::size_t b : form.block_sizes) sizes += (sizes.empty() ? "" : " ") + std::to_string(b);
  if (lp_size > 0) sizes += (sizes.empty() ? "-" : " -") + std::to_string(lp_size);
  out << sizes << "\n";
  std::string rhs;
  for (std::size_t k = 0; k < form.rhs.size(); ++k) rhs += (k ? " " : "") + fmt(form.rhs[k]);
  out << rhs << "\n";

  std::vector<SdpaEntry> entries;
  const double obj_sign = form.sense == Sense::Minimize ? -1.0 : 1.0;
  emit_row(form, form.objective, 0, obj_sign, entries);
  for (std::size_t k = 0; k < form.rows.size(); ++k) emit_row(form, form.rows[k], k + 1, 1.0, entries);
  std::sort(entries.begin(), entries.end());
  for (const auto& e : entries) {
    if (e.value == 0.0) continue;
    out << e.mat << " " << e.blk << " " << e.i << " " << e.j << " " << fmt(e.value) << "\n";
  }
}

std::string export_sdpa_string(const ConicStandardForm& form) {
  std::ostringstream os;
  export_sdpa(form, os);
  return os.str();
}

void export_sdpa_file(const ConicStandardForm& form, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  export_sdpa(form, out);
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

struct Token {
  std::string text;
  std::size_t line;
};

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens, std::size_t last_line)
      : tokens_(std::move(tokens)), last_line_(last_line) {}

  bool done() const { return pos_ >= tokens_.size(); }
  std::size_t line() const { return done() ? last_line_ : tokens_[pos_].line; }

  long long integer(const char* what) {
    if (done()) throw SdpaParseError(std::string("unexpected end of file, expected ") + what, line());
    const Token& t = tokens_[pos_];
    char* end = nullptr;
    const long long v = std::strtoll(t.text.c_str(), &end, 10);
    if (end == t.text.c_str() || *end != '\0') {
      // Some writers print integers as floats such as "2.0".
      const double d = std::strtod(t.text.c_str(), &end);
      if (end == t.text.c_str() || *end != '\0' || d != static_cast<double>(static_cast<long long>(d))) {
        throw SdpaParseError(std::string("expected integer ") + what + ", got '" + t.text + "'", t.line);
      }
      ++pos_;
      return static_cast<long long>(d);
    }
    ++pos_;
    return v;
  }

  double real(const char* what) {
    if (done()) throw SdpaParseError(std::string("unexpected end of file, expected ") + what, line());
    const Token& t = tokens_[pos_];
    char* end = nullptr;
    const double v = std::strtod(t.text.c_str(), &end);
    if (end == t.text.c_str() || *end != '\0') {
      throw SdpaParseError(std::string("expected number ") + what + ", got '" + t.text + "'", t.line);
    }
    ++pos_;
    return v;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t last_line_;
  std::size_t pos_ = 0;
};

void parse_tag(const std::string& line, ConicStandardForm& form, std::size_t& free_count) {
  std::istringstream is(line.substr(std::string(kTag).size()));
  std::string kv;
  while (is >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "sense") {
      form.sense = val == "minimize" ? Sense::Minimize : Sense::Maximize;
    } else if (key == "free") {
      free_count = std::stoul(val);
    } else if (key == "offset") {
      form.objective_offset = std::strtod(val.c_str(), nullptr);
    }
  }
}

}  // namespace

ConicStandardForm parse_sdpa(std::istream& in) {
  ConicStandardForm form;
  // Without our tag the file is read as a plain SDPA dual: maximize F0 . Y.
  form.sense = Sense::Maximize;
  std::size_t free_count = 0;

  std::vector<Token> tokens;
  std::string line;
  std::size_t lineno = 0;
  bool header_started = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_started) {
      if (!line.empty() && (line[0] == '*' || line[0] == '"')) {
        if (line.rfind(kTag, 0) == 0) parse_tag(line, form, free_count);
        continue;
      }
    }
    header_started = true;
    for (char& c : line) {
      if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
    }
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) tokens.push_back({tok, lineno});
  }
  TokenStream ts(std::move(tokens), lineno);

  const long long m = ts.integer("constraint count");
  if (m < 0) throw SdpaParseError("negative constraint count", ts.line());
  const long long nblock = ts.integer("block count");
  if (nblock < 0) throw SdpaParseError("negative block count", ts.line());

  struct BlockInfo {
    bool lp;
    std::size_t index;  // PSD block number or LP offset
    std::size_t size;
  };
  std::vector<BlockInfo> blocks;
  std::size_t lp_total = 0;
  for (long long b = 0; b < nblock; ++b) {
    const std::size_t at = ts.line();
    const long long s = ts.integer("block size");
    if (s == 0) throw SdpaParseError("zero block size", at);
    if (s > 0) {
      blocks.push_back({false, form.block_sizes.size(), static_cast<std::size_t>(s)});
      form.block_sizes.push_back(static_cast<std::size_t>(s));
    } else {
      blocks.push_back({true, lp_total, static_cast<std::size_t>(-s)});
      lp_total += static_cast<std::size_t>(-s);
    }
  }
  if (2 * free_count > lp_total) throw SdpaParseError("free count exceeds LP block size", ts.line());
  form.num_free = free_count;
  form.num_nonneg = lp_total - 2 * free_count;

  for (long long k = 0; k < m; ++k) form.rhs.push_back(ts.real("cost entry"));
  form.rows.resize(static_cast<std::size_t>(m));

  while (!ts.done()) {
    const std::size_t at = ts.line();
    const long long mat = ts.integer("matrix number");
    const long long blk = ts.integer("block number");
    long long i = ts.integer("row index");
    long long j = ts.integer("column index");
    const double v = ts.real("entry value");
    if (mat < 0 || mat > m) throw SdpaParseError("matrix number out of range", at);
    if (blk < 1 || blk > nblock) throw SdpaParseError("block number out of range", at);
    const BlockInfo& info = blocks[static_cast<std::size_t>(blk - 1)];
    if (i < 1 || j < 1 || static_cast<std::size_t>(i) > info.size ||
        static_cast<std::size_t>(j) > info.size) {
      throw SdpaParseError("entry index out of range", at);
    }
    if (i > j) std::swap(i, j);
    ConicRow& row = mat == 0 ? form.objective : form.rows[static_cast<std::size_t>(mat - 1)];
    const double sign = (mat == 0 && form.sense == Sense::Minimize) ? -1.0 : 1.0;
    if (!info.lp) {
      const double coef = i == j ? v : 2.0 * v;
      row.psd.push_back({info.index, static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1),
                         sign * coef});
      continue;
    }
    if (i != j) throw SdpaParseError("off-diagonal entry in LP block", at);
    const std::size_t pos = info.index + static_cast<std::size_t>(i - 1);
    if (pos < form.num_nonneg) {
      row.linear.emplace_back(pos, sign * v);
    } else if ((pos - form.num_nonneg) % 2 == 0) {
      row.linear.emplace_back(form.num_nonneg + (pos - form.num_nonneg) / 2, sign * v);
    }
    // The second half of a split free variable mirrors the first; skip it.
  }
  form.canonicalize();
  return form;
}

ConicStandardForm parse_sdpa_string(const std::string& text) {
  std::istringstream is(text);
  return parse_sdpa(is);
}

ConicStandardForm parse_sdpa_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_sdpa(in);
}

}  // namespace wassos
