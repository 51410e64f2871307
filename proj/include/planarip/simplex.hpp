#pragma once

// Dense-tableau bounded-variable primal simplex for small LPs of the form
//
//   maximize c.x  subject to  rows (<=, =, >=),  0 <= x_j <= u_j.
//
// Two phases with artificial variables. Pricing is Dantzig's rule; after a
// run of degenerate pivots it switches to Bland's rule for the rest of the
// solve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "planarip/program.hpp"

namespace planarip::lp {

struct Row {
  std::vector<std::pair<int, double>> coefs;  // (column, value)
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

struct Problem {
  std::vector<double> cost;
  std::vector<double> upper;
  std::vector<Row> rows;

  int columns() const { return static_cast<int>(cost.size()); }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  int degenerate_switch = 50;
  int max_iterations = 100000;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Tableau {
 public:
  Tableau(const Problem& p, const Options& opt) : opt_(opt) {
    const int n = p.columns();
    const int m = static_cast<int>(p.rows.size());
    m_ = m;
    n_struct_ = n;
    // Columns: structurals, one logical per row, then artificials.
    std::vector<int> art_rows;
    std::vector<double> sign(m, 1.0);
    std::vector<bool> use_logical(m, false);
    lower_.assign(n, 0.0);
    upper_ = p.upper;
    for (int i = 0; i < m; ++i) {
      const Row& r = p.rows[i];
      // Normalize >= to <= by negation.
      const double flip = r.relation == Relation::GreaterEqual ? -1.0 : 1.0;
      const double b = flip * r.rhs;
      const bool eq = r.relation == Relation::Equal;
      lower_.push_back(0.0);
      upper_.push_back(eq ? 0.0 : kInf);
      if ((!eq && b >= 0.0) || (eq && b == 0.0)) {
        sign[i] = flip;
        use_logical[i] = true;
      } else {
        sign[i] = b < 0 ? -flip : flip;
        art_rows.push_back(i);
      }
    }
    n_art_ = static_cast<int>(art_rows.size());
    const int total = n + m + n_art_;
    for (int k = 0; k < n_art_; ++k) {
      lower_.push_back(0.0);
      upper_.push_back(kInf);
    }
    cols_ = total;
    t_.assign(static_cast<size_t>(m) * total, 0.0);
    xb_.assign(m, 0.0);
    basis_.assign(m, -1);
    at_upper_.assign(total, false);
    is_basic_.assign(total, false);
    for (int i = 0; i < m; ++i) {
      const Row& r = p.rows[i];
      for (auto [j, v] : r.coefs) at(i, j) += sign[i] * v;
      const double flip = r.relation == Relation::GreaterEqual ? -1.0 : 1.0;
      at(i, n + i) = sign[i] * flip;  // logical enters with the row's normalized sign
      xb_[i] = sign[i] * r.rhs;
    }
    for (int k = 0; k < n_art_; ++k) {
      const int i = art_rows[k];
      at(i, n + m + k) = 1.0;
      basis_[i] = n + m + k;
    }
    for (int i = 0; i < m; ++i)
      if (use_logical[i]) basis_[i] = n + i;
    for (int b : basis_) is_basic_[b] = true;
    cost_.assign(total, 0.0);
    for (int j = 0; j < n; ++j) cost_[j] = p.cost[j];
  }

  Result solve() {
    Result res;
    if (n_art_ > 0) {
      std::vector<double> phase1(cols_, 0.0);
      for (int k = 0; k < n_art_; ++k) phase1[n_struct_ + m_ + k] = -1.0;
      const Status s = iterate(phase1, res.iterations);
      if (s == Status::IterationLimit) {
        res.status = s;
        return res;
      }
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i)
        if (basis_[i] >= n_struct_ + m_) infeas += xb_[i];
      if (infeas > 1e-7) {
        res.status = Status::Infeasible;
        return res;
      }
      for (int k = 0; k < n_art_; ++k) upper_[n_struct_ + m_ + k] = 0.0;
    }
    res.status = iterate(cost_, res.iterations);
    if (res.status != Status::Optimal) return res;
    res.x.assign(n_struct_, 0.0);
    for (int j = 0; j < n_struct_; ++j)
      if (!is_basic_[j]) res.x[j] = at_upper_[j] ? upper_[j] : lower_[j];
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_struct_) res.x[basis_[i]] = xb_[i];
    for (int j = 0; j < n_struct_; ++j) {
      res.x[j] = std::clamp(res.x[j], 0.0, upper_[j]);
      res.objective += cost_[j] * res.x[j];
    }
    return res;
  }

 private:
  double& at(int i, int j) { return t_[static_cast<size_t>(i) * cols_ + j]; }
  double at(int i, int j) const { return t_[static_cast<size_t>(i) * cols_ + j]; }
  double value_nonbasic(int j) const { return at_upper_[j] ? upper_[j] : lower_[j]; }

  Status iterate(const std::vector<double>& c, int& iterations) {
    // Reduced costs d_j = c_j - c_B B^-1 a_j.
    std::vector<double> d(c);
    for (int i = 0; i < m_; ++i) {
      const double cb = c[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < cols_; ++j) d[j] -= cb * at(i, j);
    }
    bool bland = false;
    int degenerate_run = 0;
    while (true) {
      if (iterations >= opt_.max_iterations) return Status::IterationLimit;
      // Pricing.
      int q = -1;
      double best = 0.0;
      for (int j = 0; j < cols_; ++j) {
        if (is_basic_[j] || upper_[j] - lower_[j] < opt_.feasibility_tol) continue;
        double gain = 0.0;
        if (!at_upper_[j] && d[j] > opt_.optimality_tol) gain = d[j];
        else if (at_upper_[j] && d[j] < -opt_.optimality_tol) gain = -d[j];
        if (gain <= 0.0) continue;
        if (bland) {
          q = j;
          break;
        }
        if (gain > best) {
          best = gain;
          q = j;
        }
      }
      if (q < 0) return Status::Optimal;
      const double dir = at_upper_[q] ? -1.0 : 1.0;

      // Ratio test. Basic i moves by -dir * alpha_i per unit step.
      double theta = upper_[q] - lower_[q];
      int leave = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m_; ++i) {
        const double alpha = at(i, q);
        if (std::abs(alpha) < opt_.pivot_tol) continue;
        const double rate = -dir * alpha;
        const int b = basis_[i];
        double limit;
        bool to_upper;
        if (rate < 0) {
          limit = (xb_[i] - lower_[b]) / -rate;
          to_upper = false;
        } else {
          if (upper_[b] == kInf) continue;
          limit = (upper_[b] - xb_[i]) / rate;
          to_upper = true;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (limit < theta - 1e-12) take = true;
        else if (leave >= 0 && limit <= theta + 1e-12)
          take = bland ? b < basis_[leave] : std::abs(alpha) > std::abs(at(leave, q));
        if (take) {
          theta = std::min(theta, limit);
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (leave < 0 && theta == kInf) return Status::Unbounded;
      ++iterations;

      if (theta < 1e-12) {
        if (++degenerate_run >= opt_.degenerate_switch) bland = true;
      } else {
        degenerate_run = 0;
      }

      // Move basics along the column.
      if (theta > 0)
        for (int i = 0; i < m_; ++i) xb_[i] -= dir * theta * at(i, q);

      if (leave < 0) {
        // Bound flip of the entering variable.
        at_upper_[q] = !at_upper_[q];
        continue;
      }

      const int out = basis_[leave];
      const double entering_value = value_nonbasic(q) + dir * theta;
      pivot(leave, q, d);
      is_basic_[out] = false;
      at_upper_[out] = leave_to_upper;
      is_basic_[q] = true;
      at_upper_[q] = false;
      basis_[leave] = q;
      xb_[leave] = entering_value;
    }
  }

  void pivot(int r, int q, std::vector<double>& d) {
    const double piv = at(r, q);
    double* row_r = &t_[static_cast<size_t>(r) * cols_];
    for (int j = 0; j < cols_; ++j) row_r[j] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &t_[static_cast<size_t>(i) * cols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (int j = 0; j < cols_; ++j) row[j] -= f * row_r[j];
      row[q] = 0.0;
    }
    const double f = d[q];
    if (f != 0.0) {
      for (int j = 0; j < cols_; ++j) d[j] -= f * row_r[j];
      d[q] = 0.0;
    }
  }

  Options opt_;
  int m_ = 0;
  int n_struct_ = 0;
  int n_art_ = 0;
  int cols_ = 0;
  std::vector<double> t_;
  std::vector<double> xb_;
  std::vector<int> basis_;
  std::vector<double> lower_, upper_, cost_;
  std::vector<bool> at_upper_;
  std::vector<bool> is_basic_;
};

}  // namespace detail

inline Result solve(const Problem& p, const Options& opt = {}) {
  for (double u : p.upper)
    if (!(u >= 0.0)) {
      Result r;
      r.status = Status::Infeasible;
      return r;
    }
  detail::Tableau t(p, opt);
  return t.solve();
}

}  // namespace planarip::lp
