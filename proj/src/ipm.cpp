#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "wassos/backend.hpp"

namespace wassos {

namespace {

template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Nonnegative columns that couple several row groups are folded into those
// groups as long as the merged group stays this small; otherwise they are
// eliminated through the dense reduced system.
constexpr std::size_t kMergeLimit = 256;
constexpr int kMaxRefinementRounds = 20;
constexpr double kRefinementTarget = 1e-15;
// Refinement stops once a round fails to shrink the residual by this factor.
constexpr double kRefinementContraction = 0.5;
constexpr int kNoProgressIterations = 12;

/// Entry of a symmetric constraint matrix in trace form; off-diagonal
/// coefficients appear twice, at (p, q) and (q, p).
template <typename T>
struct Sym {
  int p;
  int q;
  T v;
};

template <typename T>
struct BlockRow {
  int row;
  std::vector<Sym<T>> e;
};

template <typename T>
struct Block {
  int n = 0;
  std::vector<BlockRow<T>> rows;
  MatT<T> C;
  int comp = -1;
};

template <typename T>
struct Column {
  std::vector<std::pair<int, T>> e;
  T c = 0;
  bool is_free = false;
  bool ignored = false;
  int comp = -1;
  int wide = -1;
};

template <typename T>
struct Component {
  using Mat = MatT<T>;
  std::vector<int> rows;
  std::vector<int> wide;  // wide columns touching this component
  Mat B;                  // local rows x wide
  Mat M;
  Eigen::LLT<Mat> llt;
  Mat Q;  // M^{-1} B
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }
  std::size_t size(std::size_t a) { return size_[find(a)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

template <typename T>
struct Direction {
  std::vector<MatT<T>> dX, dZ;
  VecT<T> dx, dz, dy;
};

template <typename T>
T max_step_psd(const MatT<T>& X, const MatT<T>& dX) {
  using Mat = MatT<T>;
  if (X.rows() == 0) return std::numeric_limits<T>::infinity();
  Eigen::LLT<Mat> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat L = llt.matrixL().solve(dX);
  Mat S = llt.matrixL().solve(L.transpose());
  S = 0.5 * (S + S.transpose());
  T lmin;
  if (S.rows() == 1) {
    lmin = S(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    lmin = es.eigenvalues().minCoeff();
  }
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<T>::infinity();
}

template <typename T>
T min_eigenvalue(const MatT<T>& S) {
  using Mat = MatT<T>;
  if (S.rows() == 0) return std::numeric_limits<T>::infinity();
  if (S.rows() == 1) return S(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <typename T>
class Ipm {
 public:
  using Mat = MatT<T>;
  using Vec = VecT<T>;
  using Direction = wassos::Direction<T>;

  Ipm(const ConicStandardForm& form, const SolverOptions& opt) : form_(form), opt_(opt) {}

  SolveResult run();

 private:
  bool setup(SolveResult& res);
  void initial_point();
  Vec apply_A(const std::vector<Mat>& X, const Vec& x) const;
  void apply_AT(const Vec& y, std::vector<Mat>& S, Vec& s) const;
  bool factor();
  void assemble(const std::vector<Mat>& H, const Vec& hl, const Vec& v, Direction& d) const;
  void solve_schur(const Vec& h, const Vec& rw, Vec& dy, Vec& v) const;
  void direction(T sigma_mu, const Direction* pred, Direction& d) const;
  T primal_step(const Direction& d) const;
  T dual_step(const Direction& d) const;
  void finish(SolveResult& res, SolveStatus status) const;

  const ConicStandardForm& form_;
  SolverOptions opt_;

  // Scaled minimization data.
  int m_ = 0;
  std::vector<int> orig_row_;
  std::vector<T> row_scale_;
  Vec b_;
  T bscale_ = 1.0;
  T cscale_ = 1.0;
  T obj_sign_ = 1.0;
  std::vector<Block<T>> blocks_;
  std::vector<Column<T>> cols_;
  int nn_ = 0;
  T nu_ = 0.0;

  // Schur structure.
  std::vector<Component<T>> comps_;
  std::vector<int> row_comp_;
  std::vector<int> row_local_;
  std::vector<int> orphan_rows_;
  std::vector<int> orphan_index_;
  std::vector<int> wide_cols_;
  Eigen::PartialPivLU<Mat> reduced_lu_;

  // Iterate.
  std::vector<Mat> X_, Z_, Zinv_;
  Vec x_, z_, y_;

  // Per-iteration residuals.
  Vec rp_;
  std::vector<Mat> Rd_;
  Vec rd_;
};

template <typename T>
bool Ipm<T>::setup(SolveResult& res) {
  const std::size_t nb = form_.block_sizes.size();
  const std::size_t nl = form_.num_linear();
  nn_ = static_cast<int>(form_.num_nonneg);
  obj_sign_ = form_.sense == Sense::Minimize ? 1.0 : -1.0;
  if (form_.rhs.size() != form_.rows.size()) throw std::invalid_argument("solve: rhs size mismatch");

  auto check_row = [&](const ConicRow& r) {
    for (const auto& g : r.psd) {
      if (g.block >= nb || g.i >= form_.block_sizes[g.block] || g.j >= form_.block_sizes[g.block]) {
        throw std::invalid_argument("solve: PSD entry out of range");
      }
    }
    for (const auto& [k, c] : r.linear) {
      if (k >= nl) throw std::invalid_argument("solve: linear entry out of range");
    }
  };
  check_row(form_.objective);
  for (const auto& r : form_.rows) check_row(r);

  for (std::size_t b = 0; b < nb; ++b) {
    if (form_.block_sizes[b] > opt_.max_block_size) {
      res.message = "PSD block of size " + std::to_string(form_.block_sizes[b]) +
                    " exceeds the embedded solver scope; use export-only mode";
      return false;
    }
  }

  // Row equilibration and removal of empty rows.
  std::vector<T> scaled_rhs;
  for (std::size_t k = 0; k < form_.rows.size(); ++k) {
    const auto& r = form_.rows[k];
    T s2 = 0.0;
    for (const auto& g : r.psd) s2 += g.i == g.j ? g.coef * g.coef : 0.5 * g.coef * g.coef;
    for (const auto& [idx, c] : r.linear) s2 += c * c;
    if (s2 == 0.0) {
      if (form_.rhs[k] != 0.0) {
        res.status = SolveStatus::Infeasible;
        res.message = "constraint " + std::to_string(k) + " reads 0 = " + std::to_string(form_.rhs[k]);
        return false;
      }
      continue;
    }
    const T s = std::sqrt(s2);
    orig_row_.push_back(static_cast<int>(k));
    row_scale_.push_back(s);
    scaled_rhs.push_back(form_.rhs[k] / s);
  }
  m_ = static_cast<int>(orig_row_.size());
  b_ = Vec::Zero(m_);
  for (int w = 0; w < m_; ++w) b_(w) = scaled_rhs[w];
  bscale_ = std::max(T(1), m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
  b_ /= bscale_;

  blocks_.assign(nb, Block<T>{});
  for (std::size_t b = 0; b < nb; ++b) {
    blocks_[b].n = static_cast<int>(form_.block_sizes[b]);
    blocks_[b].C = Mat::Zero(blocks_[b].n, blocks_[b].n);
  }
  cols_.assign(nl, Column<T>{});
  for (std::size_t k = 0; k < nl; ++k) cols_[k].is_free = static_cast<int>(k) >= nn_;

  T cmax = 0.0;
  for (const auto& g : form_.objective.psd) {
    const T v = obj_sign_ * (g.i == g.j ? g.coef : 0.5 * g.coef);
    blocks_[g.block].C(g.i, g.j) += v;
    if (g.i != g.j) blocks_[g.block].C(g.j, g.i) += v;
  }
  for (const auto& [k, c] : form_.objective.linear) cols_[k].c += obj_sign_ * c;
  for (const auto& blk : blocks_) {
    if (blk.n > 0) cmax = std::max(cmax, blk.C.cwiseAbs().maxCoeff());
  }
  for (const auto& col : cols_) cmax = std::max(cmax, std::abs(col.c));
  cscale_ = std::max(T(1), cmax);
  for (auto& blk : blocks_) blk.C /= cscale_;
  for (auto& col : cols_) col.c /= cscale_;

  for (int w = 0; w < m_; ++w) {
    const auto& r = form_.rows[orig_row_[w]];
    const T s = row_scale_[w];
    for (const auto& g : r.psd) {
      Block<T>& blk = blocks_[g.block];
      if (blk.rows.empty() || blk.rows.back().row != w) blk.rows.push_back({w, {}});
      auto& e = blk.rows.back().e;
      const int i = static_cast<int>(g.i);
      const int j = static_cast<int>(g.j);
      if (i == j) {
        e.push_back({i, i, g.coef / s});
      } else {
        e.push_back({i, j, 0.5 * g.coef / s});
        e.push_back({j, i, 0.5 * g.coef / s});
      }
    }
    for (const auto& [k, c] : r.linear) cols_[k].e.emplace_back(w, c / s);
  }

  for (auto& col : cols_) {
    if (col.is_free && col.e.empty()) {
      if (col.c != 0.0) {
        res.status = SolveStatus::Unbounded;
        res.message = "free variable with nonzero cost appears in no constraint";
        return false;
      }
      col.ignored = true;
    }
  }

  // Group rows into components coupled by PSD blocks and narrow columns.
  DisjointSets ds(static_cast<std::size_t>(m_));
  for (const auto& blk : blocks_) {
    for (std::size_t t = 1; t < blk.rows.size(); ++t) ds.unite(blk.rows[0].row, blk.rows[t].row);
  }
  std::vector<bool> narrow(nl, false);
  for (std::size_t k = 0; k < static_cast<std::size_t>(nn_); ++k) {
    const auto& col = cols_[k];
    if (col.e.empty()) continue;
    std::vector<std::size_t> roots;
    for (const auto& [w, v] : col.e) roots.push_back(ds.find(w));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    std::size_t total = 0;
    for (auto r : roots) total += ds.size(r);
    if (roots.size() <= 1 || total <= kMergeLimit) {
      for (auto r : roots) ds.unite(roots[0], r);
      narrow[k] = true;
    }
  }

  std::vector<bool> active_root(m_, false);
  for (const auto& blk : blocks_) {
    if (!blk.rows.empty()) active_root[ds.find(blk.rows[0].row)] = true;
  }
  for (std::size_t k = 0; k < nl; ++k) {
    if (narrow[k]) active_root[ds.find(cols_[k].e[0].first)] = true;
  }
  row_comp_.assign(m_, -1);
  row_local_.assign(m_, -1);
  orphan_index_.assign(m_, -1);
  std::vector<int> root_comp(m_, -1);
  for (int w = 0; w < m_; ++w) {
    const std::size_t r = ds.find(w);
    if (!active_root[r]) {
      orphan_index_[w] = static_cast<int>(orphan_rows_.size());
      orphan_rows_.push_back(w);
      continue;
    }
    if (root_comp[r] < 0) {
      root_comp[r] = static_cast<int>(comps_.size());
      comps_.emplace_back();
    }
    const int c = root_comp[r];
    row_comp_[w] = c;
    row_local_[w] = static_cast<int>(comps_[c].rows.size());
    comps_[c].rows.push_back(w);
  }
  for (const auto& comp : comps_) {
    if (comp.rows.size() > opt_.max_component_rows) {
      res.message = "coupled constraint group of " + std::to_string(comp.rows.size()) +
                    " rows exceeds the embedded solver scope; use export-only mode";
      return false;
    }
  }
  for (auto& blk : blocks_) {
    if (!blk.rows.empty()) blk.comp = row_comp_[blk.rows[0].row];
  }
  for (std::size_t k = 0; k < nl; ++k) {
    auto& col = cols_[k];
    if (col.ignored) continue;
    if (narrow[k]) {
      col.comp = row_comp_[col.e[0].first];
    } else {
      col.wide = static_cast<int>(wide_cols_.size());
      wide_cols_.push_back(static_cast<int>(k));
    }
  }
  const std::size_t nred = wide_cols_.size() + orphan_rows_.size();
  if (nred > opt_.max_component_rows) {
    res.message = "reduced system of size " + std::to_string(nred) +
                  " exceeds the embedded solver scope; use export-only mode";
    return false;
  }

  for (int wi = 0; wi < static_cast<int>(wide_cols_.size()); ++wi) {
    for (const auto& [w, v] : cols_[wide_cols_[wi]].e) {
      const int c = row_comp_[w];
      if (c < 0) continue;
      auto& list = comps_[c].wide;
      if (list.empty() || list.back() != wi) list.push_back(wi);
    }
  }
  for (auto& comp : comps_) {
    comp.B = Mat::Zero(comp.rows.size(), comp.wide.size());
    for (std::size_t t = 0; t < comp.wide.size(); ++t) {
      for (const auto& [w, v] : cols_[wide_cols_[comp.wide[t]]].e) {
        if (row_comp_[w] >= 0 && &comps_[row_comp_[w]] == &comp) comp.B(row_local_[w], t) += v;
      }
    }
  }

  nu_ = static_cast<T>(nn_);
  for (const auto& blk : blocks_) nu_ += blk.n;
  return true;
}

template <typename T>
void Ipm<T>::initial_point() {
  const std::size_t nb = blocks_.size();
  X_.resize(nb);
  Z_.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const Block<T>& blk = blocks_[b];
    const T n = blk.n;
    T xi = std::max(T(10), std::sqrt(n));
    T zeta = std::max(T(10), std::sqrt(n));
    for (const auto& br : blk.rows) {
      T f2 = 0.0;
      for (const auto& s : br.e) f2 += s.v * s.v;
      const T fn = std::sqrt(f2);
      xi = std::max(xi, n * (1.0 + std::abs(b_(br.row))) / (1.0 + fn));
      zeta = std::max(zeta, fn);
    }
    zeta = std::max(zeta, blk.C.norm());
    X_[b] = xi * Mat::Identity(blk.n, blk.n);
    Z_[b] = zeta * Mat::Identity(blk.n, blk.n);
  }
  const std::size_t nl = cols_.size();
  x_ = Vec::Zero(nl);
  z_ = Vec::Zero(nl);
  for (std::size_t k = 0; k < static_cast<std::size_t>(nn_); ++k) {
    T xi = 10.0;
    T zeta = std::max(T(10), std::abs(cols_[k].c));
    for (const auto& [w, v] : cols_[k].e) {
      xi = std::max(xi, (1.0 + std::abs(b_(w))) / (1.0 + std::abs(v)));
      zeta = std::max(zeta, std::abs(v));
    }
    x_(k) = xi;
    z_(k) = zeta;
  }
  y_ = Vec::Zero(m_);
}

template <typename T>
typename Ipm<T>::Vec Ipm<T>::apply_A(const std::vector<Mat>& X, const Vec& x) const {
  Vec out = Vec::Zero(m_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (const auto& br : blocks_[b].rows) {
      T s = 0.0;
      for (const auto& e : br.e) s += e.v * X[b](e.p, e.q);
      out(br.row) += s;
    }
  }
  for (std::size_t k = 0; k < cols_.size(); ++k) {
    if (x(k) == 0.0) continue;
    for (const auto& [w, v] : cols_[k].e) out(w) += v * x(k);
  }
  return out;
}

template <typename T>
void Ipm<T>::apply_AT(const Vec& y, std::vector<Mat>& S, Vec& s) const {
  S.resize(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    S[b] = Mat::Zero(blocks_[b].n, blocks_[b].n);
    for (const auto& br : blocks_[b].rows) {
      const T yv = y(br.row);
      if (yv == 0.0) continue;
      for (const auto& e : br.e) S[b](e.p, e.q) += yv * e.v;
    }
  }
  s = Vec::Zero(cols_.size());
  for (std::size_t k = 0; k < cols_.size(); ++k) {
    T acc = 0.0;
    for (const auto& [w, v] : cols_[k].e) acc += v * y(w);
    s(k) = acc;
  }
}

template <typename T>
bool Ipm<T>::factor() {
  const std::size_t nb = blocks_.size();
  Zinv_.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const int n = blocks_[b].n;
    Eigen::LLT<Mat> llt(Z_[b]);
    if (llt.info() != Eigen::Success) return false;
    Mat Zi = llt.solve(Mat::Identity(n, n));
    Zinv_[b] = 0.5 * (Zi + Zi.transpose());
  }

  for (auto& comp : comps_) {
    const int r = static_cast<int>(comp.rows.size());
    comp.M = Mat::Zero(r, r);
  }
  for (std::size_t b = 0; b < nb; ++b) {
    const Block<T>& blk = blocks_[b];
    if (blk.rows.empty()) continue;
    Component<T>& comp = comps_[blk.comp];
    const Mat& X = X_[b];
    const Mat& Zi = Zinv_[b];
    const int n = blk.n;
    Mat Y(n, n);
    for (std::size_t j = 0; j < blk.rows.size(); ++j) {
      // Y = X A_j Z^{-1}
      Y.setZero();
      for (const auto& e : blk.rows[j].e) Y.noalias() += e.v * X.col(e.p) * Zi.row(e.q);
      const int lj = row_local_[blk.rows[j].row];
      for (std::size_t i = 0; i <= j; ++i) {
        T s = 0.0;
        for (const auto& e : blk.rows[i].e) s += e.v * Y(e.q, e.p);
        const int li = row_local_[blk.rows[i].row];
        comp.M(li, lj) += s;
        if (li != lj) comp.M(lj, li) += s;
      }
    }
  }
  for (std::size_t k = 0; k < static_cast<std::size_t>(nn_); ++k) {
    const Column<T>& col = cols_[k];
    if (col.comp < 0) continue;
    Component<T>& comp = comps_[col.comp];
    const T d = x_(k) / z_(k);
    for (const auto& [wi, vi] : col.e) {
      for (const auto& [wj, vj] : col.e) comp.M(row_local_[wi], row_local_[wj]) += d * vi * vj;
    }
  }

  const int nw = static_cast<int>(wide_cols_.size());
  Mat S = Mat::Zero(nw, nw);
  for (int t = 0; t < nw; ++t) {
    const int k = wide_cols_[t];
    if (!cols_[k].is_free) S(t, t) = z_(k) / x_(k);
  }
  for (auto& comp : comps_) {
    comp.M = 0.5 * (comp.M + comp.M.transpose());
    comp.llt.compute(comp.M);
    T reg = 1e-14 * std::max(T(1), comp.M.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; comp.llt.info() != Eigen::Success && attempt < 8; ++attempt) {
      Mat Mr = comp.M;
      Mr.diagonal().array() += reg;
      comp.llt.compute(Mr);
      reg *= 100.0;
    }
    if (comp.llt.info() != Eigen::Success) return false;
    if (comp.wide.empty()) continue;
    comp.Q = comp.llt.solve(comp.B);
    Mat local = comp.B.transpose() * comp.Q;
    for (std::size_t a = 0; a < comp.wide.size(); ++a) {
      for (std::size_t c = 0; c < comp.wide.size(); ++c) S(comp.wide[a], comp.wide[c]) += local(a, c);
    }
  }

  const int no = static_cast<int>(orphan_rows_.size());
  if (nw + no > 0) {
    Mat K = Mat::Zero(nw + no, nw + no);
    K.topLeftCorner(nw, nw) = S;
    for (int t = 0; t < nw; ++t) {
      for (const auto& [w, v] : cols_[wide_cols_[t]].e) {
        const int o = orphan_index_[w];
        if (o < 0) continue;
        K(nw + o, t) += v;
        K(t, nw + o) -= v;
      }
    }
    reduced_lu_.compute(K);
  }
  return true;
}

template <typename T>
void Ipm<T>::solve_schur(const Vec& h, const Vec& rw, Vec& dy, Vec& v) const {
  dy = Vec::Zero(m_);
  const int nw = static_cast<int>(wide_cols_.size());
  const int no = static_cast<int>(orphan_rows_.size());
  std::vector<Vec> u(comps_.size());
  Vec t = Vec::Zero(nw + no);
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    const auto& comp = comps_[c];
    Vec hc(comp.rows.size());
    for (std::size_t l = 0; l < comp.rows.size(); ++l) hc(l) = h(comp.rows[l]);
    u[c] = comp.llt.solve(hc);
    if (!comp.wide.empty()) {
      Vec bu = comp.B.transpose() * u[c];
      for (std::size_t a = 0; a < comp.wide.size(); ++a) t(comp.wide[a]) += bu(a);
    }
  }
  v = Vec::Zero(nw);
  if (nw + no > 0) {
    t.head(nw) -= rw;
    for (int o = 0; o < no; ++o) t(nw + o) = h(orphan_rows_[o]);
    Vec sol = reduced_lu_.solve(t);
    v = sol.head(nw);
    for (int o = 0; o < no; ++o) dy(orphan_rows_[o]) = sol(nw + o);
  }
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    const auto& comp = comps_[c];
    Vec dyc = u[c];
    if (!comp.wide.empty()) {
      Vec vc(comp.wide.size());
      for (std::size_t a = 0; a < comp.wide.size(); ++a) vc(a) = v(comp.wide[a]);
      dyc -= comp.Q * vc;
    }
    for (std::size_t l = 0; l < comp.rows.size(); ++l) dy(comp.rows[l]) = dyc(l);
  }
}

template <typename T>
void Ipm<T>::direction(T sigma_mu, const Direction* pred, Direction& d) const {
  const std::size_t nb = blocks_.size();
  const std::size_t nl = cols_.size();
  std::vector<Mat> H(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const Mat& X = X_[b];
    const Mat& Zi = Zinv_[b];
    H[b] = sigma_mu * Zi - X - X * Rd_[b] * Zi;
    if (pred) H[b] -= pred->dX[b] * pred->dZ[b] * Zi;
  }
  Vec hl = Vec::Zero(nl);
  for (std::size_t k = 0; k < static_cast<std::size_t>(nn_); ++k) {
    T num = sigma_mu;
    if (pred) num -= pred->dx(k) * pred->dz(k);
    hl(k) = num / z_(k) - x_(k) - x_(k) / z_(k) * rd_(k);
  }
  Vec h = rp_ - apply_A(H, hl);

  const int nw = static_cast<int>(wide_cols_.size());
  Vec rw = Vec::Zero(nw);
  for (int t = 0; t < nw; ++t) {
    const int k = wide_cols_[t];
    if (cols_[k].is_free) rw(t) = rd_(k);
  }
  Vec v;
  solve_schur(h, rw, d.dy, v);
  assemble(H, hl, v, d);
  // Iterative refinement: the block elimination is not backward stable when
  // the iterates are badly scaled, so re-solve for the residual of the
  // primal equations and of the free-column dual equations until it stops
  // shrinking, keeping the most accurate direction.
  const T h_norm = std::max(T(1), rp_.template lpNorm<Eigen::Infinity>());
  T best_err = std::numeric_limits<T>::infinity();
  Direction best_d;
  for (int round = 0;; ++round) {
    Vec eh = rp_ - apply_A(d.dX, d.dx);
    std::vector<Mat> ATdy;
    Vec ATdy_l;
    apply_AT(d.dy, ATdy, ATdy_l);
    Vec ew = Vec::Zero(nw);
    for (int t = 0; t < nw; ++t) {
      const int k = wide_cols_[t];
      if (cols_[k].is_free) ew(t) = rd_(k) - ATdy_l(k);
    }
    const T err = std::max(eh.template lpNorm<Eigen::Infinity>(), nw > 0 ? ew.template lpNorm<Eigen::Infinity>() : T(0));
    if (err >= kRefinementContraction * best_err) break;
    best_err = err;
    best_d = d;
    if (err <= kRefinementTarget * h_norm || round >= kMaxRefinementRounds) break;
    Vec ddy;
    Vec dv;
    solve_schur(eh, ew, ddy, dv);
    d.dy += ddy;
    v += dv;
    assemble(H, hl, v, d);
  }
  d = std::move(best_d);
}

template <typename T>
void Ipm<T>::assemble(const std::vector<Mat>& H, const Vec& hl, const Vec& v, Direction& d) const {
  const std::size_t nb = blocks_.size();
  const std::size_t nl = cols_.size();
  const int nw = static_cast<int>(wide_cols_.size());
  std::vector<Mat> ATdy;
  Vec ATdy_l;
  apply_AT(d.dy, ATdy, ATdy_l);
  d.dX.resize(nb);
  d.dZ.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    d.dZ[b] = Rd_[b] - ATdy[b];
    Mat dX = H[b] + X_[b] * ATdy[b] * Zinv_[b];
    d.dX[b] = 0.5 * (dX + dX.transpose());
  }
  d.dx = Vec::Zero(nl);
  d.dz = Vec::Zero(nl);
  for (std::size_t k = 0; k < static_cast<std::size_t>(nn_); ++k) {
    d.dz(k) = rd_(k) - ATdy_l(k);
    d.dx(k) = hl(k) + x_(k) / z_(k) * ATdy_l(k);
  }
  // The reduced system carries the primal step of free columns directly.
  for (int t = 0; t < nw; ++t) {
    const int k = wide_cols_[t];
    if (cols_[k].is_free) d.dx(k) = v(t);
  }
}

template <typename T>
T Ipm<T>::primal_step(const Direction& d) const {
  T a = std::numeric_limits<T>::infinity();
  for (std::size_t b = 0; b < blocks_.size(); ++b) a = std::min(a, max_step_psd<T>(X_[b], d.dX[b]));
  for (int k = 0; k < nn_; ++k) {
    if (d.dx(k) < 0.0) a = std::min(a, -x_(k) / d.dx(k));
  }
  return a;
}

template <typename T>
T Ipm<T>::dual_step(const Direction& d) const {
  T a = std::numeric_limits<T>::infinity();
  for (std::size_t b = 0; b < blocks_.size(); ++b) a = std::min(a, max_step_psd<T>(Z_[b], d.dZ[b]));
  for (int k = 0; k < nn_; ++k) {
    if (d.dz(k) < 0.0) a = std::min(a, -z_(k) / d.dz(k));
  }
  return a;
}

template <typename T>
SolveResult Ipm<T>::run() {
  SolveResult res;
  res.objective = std::numeric_limits<double>::quiet_NaN();
  res.dual_objective = std::numeric_limits<double>::quiet_NaN();
  if (!setup(res)) {
    res.blocks.clear();
    for (std::size_t b : form_.block_sizes) res.blocks.push_back(Eigen::MatrixXd::Zero(b, b));
    res.linear.assign(form_.num_linear(), 0.0);
    res.dual.assign(form_.rows.size(), 0.0);
    return res;
  }
  initial_point();

  const T tol = opt_.tol;
  const T bnorm = b_.norm();
  T cnorm2 = 0.0;
  for (const auto& blk : blocks_) cnorm2 += blk.C.squaredNorm();
  for (const auto& col : cols_) cnorm2 += col.c * col.c;
  const T cnorm = std::sqrt(cnorm2);
  const std::size_t nb = blocks_.size();
  const std::size_t nl = cols_.size();

  SolveStatus status = SolveStatus::NumericalFailure;
  std::string message;
  int stall = 0;
  // Best iterate by max(relp, reld, gap), kept as a fallback for breakdowns.
  struct Snapshot {
    std::vector<Mat> X, Z;
    Vec x, z, y;
    T relp = std::numeric_limits<T>::infinity(), reld = std::numeric_limits<T>::infinity(), gap = std::numeric_limits<T>::infinity();
    int iter = -1;
    T merit() const { return std::max({relp, reld, gap}); }
  } best;
  std::vector<Mat> ATy;
  Vec ATy_l;
  int iter = 0;
  T pobj = 0.0;
  T dobj = 0.0;

  auto certificate = [&](bool require_divergence) -> SolveStatus {
    // Primal infeasibility: y with b^T y > 0 and -A^T y in the dual cone.
    if (dobj > 0.0 && (!require_divergence || dobj > 1e4)) {
      bool ok = true;
      for (std::size_t b = 0; b < nb && ok; ++b) {
        if (blocks_[b].n > 0 && min_eigenvalue<T>(-ATy[b] / dobj) < -tol) ok = false;
      }
      for (std::size_t k = 0; k < nl && ok; ++k) {
        if (cols_[k].ignored) continue;
        const T v = -ATy_l(k) / dobj;
        if (cols_[k].is_free ? std::abs(v) > tol : v < -tol) ok = false;
      }
      if (ok) return SolveStatus::Infeasible;
    }
    // Dual infeasibility: x in the cone with A x ~ 0 and c^T x < 0.
    if (pobj < 0.0 && (!require_divergence || pobj < -1e4)) {
      const Vec Ax = apply_A(X_, x_);
      if (Ax.template lpNorm<Eigen::Infinity>() / -pobj <= tol) return SolveStatus::Unbounded;
    }
    return SolveStatus::NumericalFailure;
  };

  for (;; ++iter) {
    rp_ = b_ - apply_A(X_, x_);
    apply_AT(y_, ATy, ATy_l);
    Rd_.resize(nb);
    T rd2 = 0.0;
    pobj = 0.0;
    T xz = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      Rd_[b] = blocks_[b].C - ATy[b] - Z_[b];
      rd2 += Rd_[b].squaredNorm();
      pobj += (blocks_[b].C.array() * X_[b].array()).sum();
      xz += (X_[b].array() * Z_[b].array()).sum();
    }
    rd_ = Vec::Zero(nl);
    for (std::size_t k = 0; k < nl; ++k) {
      if (cols_[k].ignored) continue;
      rd_(k) = cols_[k].c - ATy_l(k) - z_(k);
      rd2 += rd_(k) * rd_(k);
      pobj += cols_[k].c * x_(k);
      if (static_cast<int>(k) < nn_) xz += x_(k) * z_(k);
    }
    dobj = b_.dot(y_);
    const T mu = nu_ > 0.0 ? xz / nu_ : 0.0;
    const T relp = rp_.norm() / (1.0 + bnorm);
    const T reld = std::sqrt(rd2) / (1.0 + cnorm);
    // Measured in the units of the unscaled objective.
    const T unit = bscale_ * cscale_;
    const T gap = unit * std::max(std::abs(pobj - dobj), std::abs(xz)) /
                  (1 + unit * (std::abs(pobj) + std::abs(dobj)));
    res.primal_infeasibility = static_cast<double>(relp);
    res.dual_infeasibility = static_cast<double>(reld);
    res.relative_gap = static_cast<double>(gap);
    if (opt_.verbose) {
      std::fprintf(stderr, "%3d pobj %+.8e dobj %+.8e relp %.2e reld %.2e gap %.2e mu %.2e\n", iter,
                   static_cast<double>(pobj), static_cast<double>(dobj), static_cast<double>(relp),
                   static_cast<double>(reld), static_cast<double>(gap), static_cast<double>(mu));
    }
    if (!std::isfinite(pobj) || !std::isfinite(dobj) || !std::isfinite(mu)) {
      message = "non-finite iterate";
      break;
    }
    if (relp <= tol && reld <= tol && gap <= tol) {
      status = SolveStatus::Optimal;
      break;
    }
    if (std::max({relp, reld, gap}) < best.merit()) {
      best.X = X_;
      best.Z = Z_;
      best.x = x_;
      best.z = z_;
      best.y = y_;
      best.relp = relp;
      best.reld = reld;
      best.gap = gap;
      best.iter = iter;
    } else if (iter - best.iter >= kNoProgressIterations) {
      message = "no progress";
      break;
    }
    if (iter > 0) {
      const SolveStatus cert = certificate(true);
      if (cert != SolveStatus::NumericalFailure) {
        status = cert;
        break;
      }
    }
    if (iter >= opt_.max_iterations) {
      message = "iteration limit reached";
      break;
    }
    if (!factor()) {
      message = "Schur complement factorization failed";
      break;
    }

    Direction pred;
    direction(0.0, nullptr, pred);
    const T ap_aff = std::min(T(1), primal_step(pred));
    const T ad_aff = std::min(T(1), dual_step(pred));
    T sigma = 0.0;
    if (mu > 0.0) {
      T xz_aff = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        xz_aff += ((X_[b] + ap_aff * pred.dX[b]).array() * (Z_[b] + ad_aff * pred.dZ[b]).array()).sum();
      }
      for (int k = 0; k < nn_; ++k) {
        xz_aff += (x_(k) + ap_aff * pred.dx(k)) * (z_(k) + ad_aff * pred.dz(k));
      }
      const T ratio = std::max(T(0), xz_aff / nu_) / mu;
      sigma = std::clamp(ratio * ratio * ratio, T(0), T(1));
    }
    Direction corr;
    direction(sigma * mu, &pred, corr);
    const T ap_max = primal_step(corr);
    const T ad_max = dual_step(corr);
    const T gamma = 0.9 + 0.09 * std::min({ap_aff, ad_aff});
    const T ap = std::min(T(1), gamma * ap_max);
    const T ad = std::min(T(1), gamma * ad_max);
    if (!std::isfinite(ap) || !std::isfinite(ad)) {
      message = "non-finite step";
      break;
    }
    if (ap < 1e-10 && ad < 1e-10) {
      if (++stall >= 3) {
        message = "step length stalled";
        break;
      }
    } else {
      stall = 0;
    }
    for (std::size_t b = 0; b < nb; ++b) {
      X_[b] += ap * corr.dX[b];
      Z_[b] += ad * corr.dZ[b];
      X_[b] = 0.5 * (X_[b] + X_[b].transpose());
      Z_[b] = 0.5 * (Z_[b] + Z_[b].transpose());
    }
    x_ += ap * corr.dx;
    z_ += ad * corr.dz;
    y_ += ad * corr.dy;
  }

  if (status == SolveStatus::NumericalFailure) {
    const SolveStatus cert = certificate(false);
    if (cert != SolveStatus::NumericalFailure) {
      status = cert;
      message.clear();
    } else if (best.merit() <= opt_.reduced_tol) {
      X_ = best.X;
      Z_ = best.Z;
      x_ = best.x;
      z_ = best.z;
      y_ = best.y;
      res.primal_infeasibility = static_cast<double>(best.relp);
      res.dual_infeasibility = static_cast<double>(best.reld);
      res.relative_gap = static_cast<double>(best.gap);
      res.reduced_accuracy = true;
      status = SolveStatus::Optimal;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s; accepted iterate %d at reduced accuracy %.2e", message.c_str(),
                    best.iter, static_cast<double>(best.merit()));
      message = buf;
    }
  }
  res.iterations = iter;
  res.message = message;
  finish(res, status);
  return res;
}

template <typename T>
void Ipm<T>::finish(SolveResult& res, SolveStatus status) const {
  res.status = status;
  const std::size_t nb = blocks_.size();
  std::vector<Mat> X(nb);
  for (std::size_t b = 0; b < nb; ++b) X[b] = X_[b] * bscale_;
  const Vec x = x_ * bscale_;
  res.blocks.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) res.blocks[b] = X[b].template cast<double>();
  res.linear.assign(cols_.size(), 0.0);
  for (std::size_t k = 0; k < cols_.size(); ++k) res.linear[k] = static_cast<double>(x(k));
  std::vector<T> dual(form_.rows.size(), T(0));
  for (int w = 0; w < m_; ++w) dual[orig_row_[w]] = y_(w) * cscale_ / row_scale_[w];
  res.dual.assign(dual.begin(), dual.end());

  // Residuals on the unscaled form.
  T maxres = 0;
  for (std::size_t k = 0; k < form_.rows.size(); ++k) {
    T v = 0;
    for (const auto& g : form_.rows[k].psd) v += g.coef * X[g.block](g.i, g.j);
    for (const auto& [idx, c] : form_.rows[k].linear) v += c * x(idx);
    maxres = std::max(maxres, std::abs(v - form_.rhs[k]));
  }
  res.max_equality_residual = static_cast<double>(maxres);
  T lmin = std::numeric_limits<T>::infinity();
  for (const auto& Xb : X) lmin = std::min(lmin, min_eigenvalue<T>(Xb));
  for (int k = 0; k < nn_; ++k) lmin = std::min(lmin, x(k));
  res.min_eigenvalue = std::isfinite(lmin) ? static_cast<double>(lmin) : 0.0;

  T pobj = form_.objective_offset;
  for (const auto& g : form_.objective.psd) pobj += g.coef * X[g.block](g.i, g.j);
  for (const auto& [idx, c] : form_.objective.linear) pobj += c * x(idx);
  T dobj = 0;
  for (std::size_t k = 0; k < form_.rows.size(); ++k) dobj += form_.rhs[k] * dual[k];
  dobj = obj_sign_ * dobj + form_.objective_offset;
  res.dual_objective = static_cast<double>(dobj);
  res.objective = status == SolveStatus::Optimal ? static_cast<double>(pobj) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

SolveResult solve(const ConicStandardForm& form, const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");
  const auto run = [&](const ConicStandardForm& f) {
    return options.extended_precision ? Ipm<long double>(f, options).run() : Ipm<double>(f, options).run();
  };
  if (!options.presolve) return run(form);
  const FreeColumnPresolve pre = presolve_free_columns(form);
  if (pre.steps.empty()) return run(form);
  return pre.postsolve(run(pre.reduced), form);
}

}  // namespace wassos
