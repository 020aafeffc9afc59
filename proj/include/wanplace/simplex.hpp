#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wanplace/milp.hpp"

namespace wanplace {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpSolution {
  LpStatus status = LpStatus::IterLimit;
  double objective = 0.0;
  std::vector<double> x;  // structural variables only
  long iterations = 0;
};

/// Two-phase primal simplex for LPs with bounded variables.
///
/// Rows become equalities with one slack column each (LE: s in [0, inf),
/// GE: s in (-inf, 0], EQ: s fixed at 0). Slacks that start outside their
/// bounds get a phase-1 artificial. The basis inverse is kept explicitly
/// and refactorized periodically. Pivot rules are index-deterministic:
/// Dantzig pricing with smallest-index ties, switching to Bland's rule
/// after a run of degenerate steps.
class BoundedSimplex {
public:
  explicit BoundedSimplex(const Milp& model) : model_(&model) {
    n_ = model.vars.size();
    m_ = model.rows.size();
    cols_.assign(n_, {});
    for (std::size_t r = 0; r < m_; ++r) {
      for (const LinTerm& t : model.rows[r].terms) {
        cols_[static_cast<std::size_t>(t.var)].push_back({r, t.coef});
      }
    }
  }

  /// Solves with per-variable structural bounds (a branch-and-bound node).
  LpSolution solve(const std::vector<double>& lb,
                   const std::vector<double>& ub) const {
    LpSolution out;
    if (lb.size() != n_ || ub.size() != n_) {
      throw std::invalid_argument("bound vectors must match variable count");
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (lb[j] > ub[j] + kFeasTol) {
        out.status = LpStatus::Infeasible;
        return out;
      }
    }

    Work w;
    init(w, lb, ub);

    if (w.art_count > 0) {
      w.phase1 = true;
      const LpStatus s1 = iterate(w);
      if (s1 != LpStatus::Optimal) {
        out.status = s1 == LpStatus::Unbounded ? LpStatus::IterLimit : s1;
        out.iterations = w.iterations;
        return out;
      }
      double infeas = 0.0;
      for (std::size_t j = art_begin(); j < w.total; ++j) {
        infeas += w.value[j];
      }
      if (infeas > kFeasTol * 10.0) {
        out.status = LpStatus::Infeasible;
        out.iterations = w.iterations;
        return out;
      }
      for (std::size_t j = art_begin(); j < w.total; ++j) {
        w.lo[j] = 0.0;
        w.hi[j] = 0.0;
      }
      w.phase1 = false;
      w.degenerate_run = 0;
    }

    const LpStatus s2 = iterate(w);
    out.status = s2;
    out.iterations = w.iterations;
    if (s2 == LpStatus::Optimal) {
      out.x.assign(w.value.begin(), w.value.begin() + static_cast<long>(n_));
      out.objective = model_->objective_value(out.x);
    }
    return out;
  }

private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr double kFeasTol = 1e-7;
  static constexpr double kDualTol = 1e-7;
  static constexpr double kPivotTol = 1e-8;
  static constexpr double kTieTol = 1e-9;
  static constexpr int kDegenerateLimit = 300;
  static constexpr long kRefactorEvery = 128;

  struct ColEntry {
    std::size_t row;
    double coef;
  };

  struct Work {
    std::size_t total = 0;  // structural + slack + artificial columns
    std::size_t art_count = 0;
    std::vector<double> lo, hi, value;
    std::vector<std::size_t> art_row;    // row per artificial offset
    std::vector<double> art_sign;        // +1/-1 per artificial offset
    std::vector<std::size_t> basis;      // basic column per row
    std::vector<int> in_basis_row;       // column -> row, or -1
    std::vector<double> binv;            // m x m row-major
    bool phase1 = false;
    long iterations = 0;
    long pivots_since_refactor = 0;
    int degenerate_run = 0;
  };

  const Milp* model_;
  std::size_t n_ = 0, m_ = 0;
  std::vector<std::vector<ColEntry>> cols_;  // structural columns, sparse

  std::size_t art_begin() const { return n_ + m_; }

  double slack_lo(std::size_t r) const {
    return model_->rows[r].rel == Rel::GE ? -kInf : 0.0;
  }
  double slack_hi(std::size_t r) const {
    return model_->rows[r].rel == Rel::LE ? kInf : 0.0;
  }

  // Objective coefficient of a column in the current phase, as maximization.
  double obj_coef(const Work& w, std::size_t j) const {
    if (w.phase1) return j >= art_begin() ? -1.0 : 0.0;
    if (j >= n_) return 0.0;
    return model_->maximize ? model_->objective[j] : -model_->objective[j];
  }

  void column_entries(const Work& w, std::size_t j,
                      std::vector<ColEntry>& out) const {
    out.clear();
    if (j < n_) {
      out = cols_[j];
    } else if (j < art_begin()) {
      out.push_back({j - n_, 1.0});
    } else {
      const std::size_t a = j - art_begin();
      out.push_back({w.art_row[a], w.art_sign[a]});
    }
  }

  void init(Work& w, const std::vector<double>& lb,
            const std::vector<double>& ub) const {
    w.lo.assign(lb.begin(), lb.end());
    w.hi.assign(ub.begin(), ub.end());
    w.value.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) w.value[j] = w.lo[j];

    std::vector<double> act(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (w.value[j] == 0.0) continue;
      for (const ColEntry& en : cols_[j]) act[en.row] += en.coef * w.value[j];
    }

    for (std::size_t r = 0; r < m_; ++r) {
      w.lo.push_back(slack_lo(r));
      w.hi.push_back(slack_hi(r));
      w.value.push_back(0.0);
    }
    w.total = art_begin();
    w.basis.assign(m_, 0);

    for (std::size_t r = 0; r < m_; ++r) {
      const double s = model_->rows[r].rhs - act[r];
      const std::size_t scol = n_ + r;
      if (s >= w.lo[scol] - kFeasTol && s <= w.hi[scol] + kFeasTol) {
        w.value[scol] = s;
        w.basis[r] = scol;
      } else {
        // Clamp the slack to its violated bound; a basic artificial absorbs
        // the residual so phase 1 can drive it to zero.
        const double clamped = s < w.lo[scol] ? w.lo[scol] : w.hi[scol];
        w.value[scol] = clamped;
        const double resid = s - clamped;
        w.art_row.push_back(r);
        w.art_sign.push_back(resid >= 0.0 ? 1.0 : -1.0);
        w.lo.push_back(0.0);
        w.hi.push_back(kInf);
        w.value.push_back(std::fabs(resid));
        w.basis[r] = w.total;
        ++w.total;
        ++w.art_count;
      }
    }

    w.in_basis_row.assign(w.total, -1);
    for (std::size_t r = 0; r < m_; ++r) {
      w.in_basis_row[w.basis[r]] = static_cast<int>(r);
    }

    // Initial basis is diagonal: slacks (+1) and artificials (their sign).
    w.binv.assign(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t bj = w.basis[r];
      const double d = bj >= art_begin() ? w.art_sign[bj - art_begin()] : 1.0;
      w.binv[r * m_ + r] = 1.0 / d;
    }
  }

  // Rebuilds B^-1 from the basis columns (Gauss-Jordan, partial pivoting)
  // and recomputes the basic values from the nonbasic point. Returns false
  // on a numerically singular basis.
  bool refactor(Work& w) const {
    if (m_ == 0) return true;
    std::vector<double> mat(m_ * m_, 0.0);
    std::vector<ColEntry> entries;
    for (std::size_t r = 0; r < m_; ++r) {
      column_entries(w, w.basis[r], entries);
      for (const ColEntry& en : entries) mat[en.row * m_ + r] = en.coef;
    }
    std::vector<double>& inv = w.binv;
    inv.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t piv = col;
      double best = std::fabs(mat[col * m_ + col]);
      for (std::size_t r = col + 1; r < m_; ++r) {
        const double a = std::fabs(mat[r * m_ + col]);
        if (a > best) {
          best = a;
          piv = r;
        }
      }
      if (best <= kPivotTol * 1e-2) return false;
      if (piv != col) {
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(mat[piv * m_ + k], mat[col * m_ + k]);
          std::swap(inv[piv * m_ + k], inv[col * m_ + k]);
        }
      }
      const double d = mat[col * m_ + col];
      for (std::size_t k = 0; k < m_; ++k) {
        mat[col * m_ + k] /= d;
        inv[col * m_ + k] /= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        const double f = mat[r * m_ + col];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          mat[r * m_ + k] -= f * mat[col * m_ + k];
          inv[r * m_ + k] -= f * inv[col * m_ + k];
        }
      }
    }
    // Basic values: x_B = B^-1 (rhs - sum of nonbasic columns at value).
    std::vector<double> t(m_);
    for (std::size_t r = 0; r < m_; ++r) t[r] = model_->rows[r].rhs;
    for (std::size_t j = 0; j < w.total; ++j) {
      if (w.in_basis_row[j] >= 0 || w.value[j] == 0.0) continue;
      column_entries(w, j, entries);
      for (const ColEntry& en : entries) t[en.row] -= en.coef * w.value[j];
    }
    for (std::size_t r = 0; r < m_; ++r) {
      double v = 0.0;
      const double* row = &inv[r * m_];
      for (std::size_t k = 0; k < m_; ++k) v += row[k] * t[k];
      w.value[w.basis[r]] = v;
    }
    w.pivots_since_refactor = 0;
    return true;
  }

  LpStatus iterate(Work& w) const {
    std::vector<double> y(m_), col(m_);
    std::vector<ColEntry> entries;
    const long iter_limit = 200 * static_cast<long>(m_ + n_) + 20000;

    for (;;) {
      if (++w.iterations > iter_limit) return LpStatus::IterLimit;
      const bool bland = w.degenerate_run > kDegenerateLimit;

      // y = c_B B^-1.
      for (std::size_t i = 0; i < m_; ++i) y[i] = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double cb = obj_coef(w, w.basis[r]);
        if (cb == 0.0) continue;
        const double* row = &w.binv[r * m_];
        for (std::size_t i = 0; i < m_; ++i) y[i] += cb * row[i];
      }

      // Pricing: eligible nonbasic with the best reduced cost.
      std::size_t enter = w.total;
      int enter_dir = 0;
      double best_score = 0.0;
      for (std::size_t j = 0; j < w.total; ++j) {
        if (w.in_basis_row[j] >= 0) continue;
        if (w.hi[j] - w.lo[j] <= kFeasTol) continue;  // fixed column
        double d = obj_coef(w, j);
        column_entries(w, j, entries);
        for (const ColEntry& en : entries) d -= y[en.row] * en.coef;
        const bool at_lower =
            std::fabs(w.value[j] - w.lo[j]) <= std::fabs(w.value[j] - w.hi[j]);
        int dir;
        double score;
        if (at_lower && d > kDualTol) {
          dir = +1;
          score = d;
        } else if (!at_lower && d < -kDualTol) {
          dir = -1;
          score = -d;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          enter_dir = dir;
          break;
        }
        if (score > best_score + 1e-12) {
          best_score = score;
          enter = j;
          enter_dir = dir;
        }
      }
      if (enter == w.total) return LpStatus::Optimal;

      // col = B^-1 A_enter.
      column_entries(w, enter, entries);
      for (std::size_t i = 0; i < m_; ++i) col[i] = 0.0;
      for (const ColEntry& en : entries) {
        const double a = en.coef;
        for (std::size_t i = 0; i < m_; ++i) {
          col[i] += w.binv[i * m_ + en.row] * a;
        }
      }

      // Ratio test, pass 1: the tightest step the basics allow. The basic
      // variable of row i moves at rate -dir*col[i] per unit of entering.
      auto row_limit = [&](std::size_t i) -> double {
        const double rate = -enter_dir * col[i];
        if (std::fabs(rate) <= kPivotTol) return kInf;
        const std::size_t bj = w.basis[i];
        double lim;
        if (rate < 0.0) {
          if (w.lo[bj] == -kInf) return kInf;
          lim = (w.lo[bj] - w.value[bj]) / rate;
        } else {
          if (w.hi[bj] == kInf) return kInf;
          lim = (w.hi[bj] - w.value[bj]) / rate;
        }
        return lim < 0.0 ? 0.0 : lim;
      };
      double row_theta = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        row_theta = std::min(row_theta, row_limit(i));
      }
      const double flip_theta = w.hi[enter] - w.lo[enter];  // may be inf

      double theta;
      int block_row = -1;
      if (row_theta < flip_theta - 1e-12) {
        theta = row_theta;
        // Pass 2: pick the blocking row. Bland: smallest basic index.
        // Otherwise: largest |pivot| for stability, then smallest index.
        double best_piv = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
          if (row_limit(i) > row_theta + kTieTol) continue;
          if (bland) {
            if (block_row < 0 ||
                w.basis[i] < w.basis[static_cast<std::size_t>(block_row)]) {
              block_row = static_cast<int>(i);
            }
          } else if (std::fabs(col[i]) > best_piv + 1e-12) {
            best_piv = std::fabs(col[i]);
            block_row = static_cast<int>(i);
          }
        }
        if (block_row < 0) return LpStatus::IterLimit;  // numerical dead end
      } else if (flip_theta < kInf) {
        theta = flip_theta;  // bound flip, no basis change
      } else {
        // A true ray: impossible for these models (finite structural bounds,
        // bounded objective), so treat it as numerical failure.
        return w.phase1 ? LpStatus::IterLimit : LpStatus::Unbounded;
      }

      if (theta <= kFeasTol) {
        ++w.degenerate_run;
      } else {
        w.degenerate_run = 0;
      }

      const double step = enter_dir * theta;
      w.value[enter] += step;
      for (std::size_t i = 0; i < m_; ++i) {
        if (col[i] != 0.0) w.value[w.basis[i]] -= step * col[i];
      }
      if (block_row < 0) continue;  // flip applied

      const auto br = static_cast<std::size_t>(block_row);
      const std::size_t leave = w.basis[br];
      const double pv = col[br];
      if (std::fabs(pv) <= kPivotTol) return LpStatus::IterLimit;
      // Snap the leaving variable onto the bound that blocked.
      const double rate = -enter_dir * pv;
      w.value[leave] = rate < 0.0 ? w.lo[leave] : w.hi[leave];

      double* prow = &w.binv[br * m_];
      for (std::size_t k = 0; k < m_; ++k) prow[k] /= pv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == br) continue;
        const double f = col[i];
        if (f == 0.0) continue;
        double* irow = &w.binv[i * m_];
        for (std::size_t k = 0; k < m_; ++k) irow[k] -= f * prow[k];
      }
      w.in_basis_row[leave] = -1;
      w.in_basis_row[enter] = static_cast<int>(br);
      w.basis[br] = enter;

      if (++w.pivots_since_refactor >= kRefactorEvery) {
        if (!refactor(w)) return LpStatus::IterLimit;
      }
    }
  }
};

}  // namespace wanplace
