#pragma once

// Exact maximization of a BinaryProgram: exhaustive enumeration for tiny
// instances and best-first branch-and-bound over LP relaxations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "planarip/program.hpp"
#include "planarip/simplex.hpp"

namespace planarip {

enum class SolveStatus { Optimal, Infeasible, TimeLimit };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::TimeLimit: return "TimeLimit";
  }
  return "";
}

struct SolveStats {
  int64_t nodes = 0;
  int64_t lp_iterations = 0;
  int64_t lp_solves = 0;
  double wall_seconds = 0.0;
};

struct SolveResult {
  std::vector<double> assignment;  // parallel to program variables
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  double bound = 0.0;  // best known upper bound on the objective
  SolveStats stats;

  double value(const BinaryProgram& p, const VarRef& v) const { return assignment[p.index_of(v)]; }
};

struct TooLarge : std::length_error {
  using std::length_error::length_error;
};
struct MissingVariable : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kFeasTol = 1e-6;

namespace detail {

struct CompiledRow {
  std::vector<std::pair<int, double>> binaries;  // (binary position, coef)
  std::vector<std::pair<int, double>> slacks;    // (variable index, coef)
  Relation relation;
  double rhs;
};

/// Index-based view of a program. Binary variables are numbered by their
/// position among binaries (which equals their variable index).
struct Compiled {
  int n_binary = 0;
  std::vector<int> slack_vars;
  std::vector<CompiledRow> rows;
  std::vector<size_t> row_source;  // originating constraint
  std::vector<bool> is_edge;
  bool trivially_infeasible = false;
};

inline bool satisfied(double lhs, Relation rel, double rhs, double tol) {
  switch (rel) {
    case Relation::LessEqual: return lhs <= rhs + tol;
    case Relation::GreaterEqual: return lhs >= rhs - tol;
    case Relation::Equal: return std::abs(lhs - rhs) <= tol;
  }
  return false;
}

inline Compiled compile(const BinaryProgram& p) {
  Compiled c;
  const auto& vars = p.variables();
  for (size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].binary) {
      ++c.n_binary;
      c.is_edge.push_back(vars[j].ref.kind == VarKind::Edge);
    } else {
      c.slack_vars.push_back(static_cast<int>(j));
    }
  }
  for (size_t k = 0; k < p.constraints().size(); ++k) {
    const auto& con = p.constraints()[k];
    CompiledRow row{{}, {}, con.relation, con.rhs};
    for (const auto& t : con.terms) {
      const int j = p.index_of(t.var);
      if (t.coef == 0.0) continue;
      if (vars[j].binary) row.binaries.push_back({j, t.coef});
      else row.slacks.push_back({j, t.coef});
    }
    if (row.binaries.empty() && row.slacks.empty()) {
      // Empty rows are dropped; a violated one makes the program infeasible.
      if (!satisfied(0.0, con.relation, con.rhs, kFeasTol)) c.trivially_infeasible = true;
      continue;
    }
    c.rows.push_back(std::move(row));
    c.row_source.push_back(k);
  }
  return c;
}

}  // namespace detail

/// Constraints violated by more than 1e-6, grouped by family (values are
/// constraint indices).
struct FeasibilityReport {
  std::map<Family, std::vector<size_t>> violations;
  std::vector<std::string> bound_violations;

  bool ok() const { return violations.empty() && bound_violations.empty(); }
  size_t count(Family f) const {
    auto it = violations.find(f);
    return it == violations.end() ? 0 : it->second.size();
  }
  size_t total() const {
    size_t n = 0;
    for (const auto& [f, v] : violations) n += v.size();
    return n;
  }
};

inline FeasibilityReport check_feasible(const BinaryProgram& p, std::span<const double> a) {
  if (a.size() != p.variables().size())
    throw MissingVariable("assignment covers " + std::to_string(a.size()) + " of " +
                          std::to_string(p.variables().size()) + " variables");
  FeasibilityReport r;
  for (size_t j = 0; j < a.size(); ++j) {
    const auto& v = p.variables()[j];
    const bool in_bounds = a[j] >= -kFeasTol && a[j] <= v.upper + kFeasTol;
    const bool integral = !v.binary || std::abs(a[j] - std::round(a[j])) <= kFeasTol;
    if (!in_bounds || !integral) r.bound_violations.push_back(var_name(v.ref));
  }
  for (size_t k = 0; k < p.constraints().size(); ++k) {
    const auto& c = p.constraints()[k];
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * a[p.index_of(t.var)];
    if (!detail::satisfied(lhs, c.relation, c.rhs, kFeasTol)) r.violations[c.family].push_back(k);
  }
  return r;
}

inline double evaluate_objective(const BinaryProgram& p, std::span<const double> a) {
  double obj = 0.0;
  for (size_t j = 0; j < a.size(); ++j) obj += p.objective()[j] * a[j];
  return obj;
}

namespace detail {

/// Tie preference between equal-objective assignments: fewer active edges,
/// then lexicographically smaller in variable order.
inline bool preferred(const std::vector<double>& cand, const std::vector<double>& inc, const Compiled& c) {
  int ec = 0, ei = 0;
  for (int j = 0; j < c.n_binary; ++j)
    if (c.is_edge[j]) {
      ec += cand[j] > 0.5;
      ei += inc[j] > 0.5;
    }
  if (ec != ei) return ec < ei;
  for (int j = 0; j < c.n_binary; ++j) {
    const bool x = cand[j] > 0.5, y = inc[j] > 0.5;
    if (x != y) return !x;
  }
  return false;
}

}  // namespace detail

inline constexpr int kBruteForceMaxBinaries = 22;

/// Enumerates every binary assignment; slacks take the smallest value that
/// satisfies their row.
inline SolveResult brute_force(const BinaryProgram& p) {
  const auto start = std::chrono::steady_clock::now();
  const auto c = detail::compile(p);
  if (c.n_binary > kBruteForceMaxBinaries) throw TooLarge("brute force is limited to 22 binary variables");
  for (int s : c.slack_vars)
    if (p.objective()[s] > 0) throw std::invalid_argument("brute force requires penalized slacks");
  std::vector<int> slack_uses(p.variables().size(), 0);
  for (const auto& row : c.rows) {
    if (row.slacks.size() > 1) throw std::invalid_argument("brute force requires one slack per row");
    for (auto [j, v] : row.slacks) ++slack_uses[j];
  }
  for (int s : c.slack_vars)
    if (slack_uses[s] > 1) throw std::invalid_argument("brute force requires each slack in one row");

  SolveResult best;
  best.status = SolveStatus::Infeasible;
  std::vector<double> x(p.variables().size(), 0.0);
  const uint64_t total = uint64_t{1} << c.n_binary;
  for (uint64_t mask = 0; mask < total && !c.trivially_infeasible; ++mask) {
    // Variable 0 is the most significant bit, so ascending masks enumerate
    // assignments in lexicographic order.
    for (int j = 0; j < c.n_binary; ++j) x[j] = (mask >> (c.n_binary - 1 - j)) & 1 ? 1.0 : 0.0;
    for (int s : c.slack_vars) x[s] = 0.0;
    bool feasible = true;
    for (const auto& row : c.rows) {
      double lhs = 0.0;
      for (auto [j, v] : row.binaries) lhs += v * x[j];
      if (detail::satisfied(lhs, row.relation, row.rhs, 1e-9)) continue;
      if (row.slacks.empty()) {
        feasible = false;
        break;
      }
      // Smallest slack that closes the gap; it must move in its allowed
      // direction and stay under its cap.
      const auto [s, coef] = row.slacks.front();
      const double need = (row.rhs - lhs) / coef;
      if (need < 0 || need > p.variables()[s].upper + 1e-9) {
        feasible = false;
        break;
      }
      x[s] = std::min(need, p.variables()[s].upper);
    }
    if (!feasible) continue;
    const double obj = evaluate_objective(p, x);
    const bool better = best.status == SolveStatus::Infeasible || obj > best.objective + 1e-9 ||
                        (obj >= best.objective - 1e-9 && detail::preferred(x, best.assignment, c));
    if (better) {
      best.status = SolveStatus::Optimal;
      best.objective = obj;
      best.assignment = x;
    }
    ++best.stats.nodes;
  }
  best.bound = best.objective;
  best.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

struct SolveOptions {
  double time_limit_s = 300.0;
  double tolerance = 1e-9;
};

namespace detail {

struct NodeLp {
  bool feasible = false;
  double bound = 0.0;
  std::vector<double> x;  // full assignment (binaries + slacks)
};

/// LP relaxation at a node with some binaries fixed. Rows are added lazily:
/// the LP is re-solved with every row its optimum violates until none is
/// violated, which yields the optimum of the full relaxation.
class Relaxation {
 public:
  Relaxation(const BinaryProgram& p, const Compiled& c) : p_(p), c_(c), active_(c.rows.size(), false) {}

  NodeLp solve(std::span<const int8_t> fix, SolveStats& stats) {
    NodeLp out;
    const size_t nvars = p_.variables().size();
    while (true) {
      // Columns: free binaries, then slacks that appear in active rows.
      std::vector<int> col_of(nvars, -1);
      std::vector<int> var_of;
      for (int j = 0; j < c_.n_binary; ++j)
        if (fix[j] < 0) {
          col_of[j] = static_cast<int>(var_of.size());
          var_of.push_back(j);
        }
      for (size_t r = 0; r < c_.rows.size(); ++r) {
        if (!active_[r]) continue;
        for (auto [s, v] : c_.rows[r].slacks)
          if (col_of[s] < 0) {
            col_of[s] = static_cast<int>(var_of.size());
            var_of.push_back(s);
          }
      }
      lp::Problem lp;
      for (int j : var_of) {
        lp.cost.push_back(p_.objective()[j]);
        lp.upper.push_back(p_.variables()[j].upper);
      }
      double fixed_obj = 0.0;
      for (int j = 0; j < c_.n_binary; ++j)
        if (fix[j] == 1) fixed_obj += p_.objective()[j];

      for (size_t r = 0; r < c_.rows.size(); ++r) {
        if (!active_[r]) continue;
        const auto& row = c_.rows[r];
        lp::Row lr{{}, row.relation, row.rhs};
        for (auto [j, v] : row.binaries) {
          if (fix[j] < 0) lr.coefs.push_back({col_of[j], v});
          else lr.rhs -= v * fix[j];
        }
        for (auto [s, v] : row.slacks) lr.coefs.push_back({col_of[s], v});
        if (lr.coefs.empty()) {
          if (!satisfied(0.0, lr.relation, lr.rhs, 1e-9)) return out;
          continue;
        }
        lp.rows.push_back(std::move(lr));
      }
      const lp::Result res = lp::solve(lp);
      ++stats.lp_solves;
      stats.lp_iterations += res.iterations;
      if (res.status != lp::Status::Optimal) return out;

      std::vector<double> x(nvars, 0.0);
      for (int j = 0; j < c_.n_binary; ++j)
        if (fix[j] >= 0) x[j] = fix[j];
      for (size_t k = 0; k < var_of.size(); ++k) x[var_of[k]] = res.x[k];

      bool added = false;
      for (size_t r = 0; r < c_.rows.size(); ++r) {
        if (active_[r]) continue;
        const auto& row = c_.rows[r];
        double lhs = 0.0;
        for (auto [j, v] : row.binaries) lhs += v * x[j];
        for (auto [s, v] : row.slacks) lhs += v * x[s];
        if (!satisfied(lhs, row.relation, row.rhs, 1e-9)) {
          active_[r] = true;
          added = true;
        }
      }
      if (added) continue;
      out.feasible = true;
      out.bound = res.objective + fixed_obj;
      out.x = std::move(x);
      return out;
    }
  }

 private:
  const BinaryProgram& p_;
  const Compiled& c_;
  std::vector<bool> active_;
};

inline int most_fractional(const std::vector<double>& x, const Compiled& c, std::span<const int8_t> fix) {
  int best = -1;
  double best_dist = 0.5 - 1e-6;  // distance from 0.5 must beat this
  for (int j = 0; j < c.n_binary; ++j) {
    if (fix[j] >= 0) continue;
    const double d = std::abs(x[j] - 0.5);
    if (d < best_dist - 1e-12) {
      best_dist = d;
      best = j;
    }
  }
  return best;
}

/// Clean up an integral LP point: exact 0/1 binaries, tiny slacks to zero.
inline std::vector<double> snap(std::vector<double> x, const Compiled& c) {
  for (int j = 0; j < c.n_binary; ++j) x[j] = x[j] > 0.5 ? 1.0 : 0.0;
  for (int s : c.slack_vars)
    if (std::abs(x[s]) < 1e-9) x[s] = 0.0;
  return x;
}

}  // namespace detail

/// Upper bound from the LP relaxation with the given fixings (-1 free,
/// 0 or 1 fixed) over binary positions; nullopt if infeasible.
inline std::optional<double> relaxation_bound(const BinaryProgram& p, std::span<const int8_t> fix) {
  const auto c = detail::compile(p);
  if (c.trivially_infeasible) return std::nullopt;
  detail::Relaxation relax(p, c);
  SolveStats stats;
  const auto node = relax.solve(fix, stats);
  if (!node.feasible) return std::nullopt;
  return node.bound;
}

/// Best-first branch-and-bound. Branches on the most fractional binary and
/// creates the 1-branch first; equal bounds are explored in creation order.
inline SolveResult solve(const BinaryProgram& p, const SolveOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  SolveResult result;
  const auto c = detail::compile(p);
  if (c.trivially_infeasible) {
    result.status = SolveStatus::Infeasible;
    result.stats.wall_seconds = elapsed();
    return result;
  }
  detail::Relaxation relax(p, c);

  struct Node {
    double bound;
    int64_t seq;
    std::vector<int8_t> fix;
    std::vector<double> x;
  };
  auto worse = [](const Node& l, const Node& r) {
    if (l.bound != r.bound) return l.bound < r.bound;
    return l.seq > r.seq;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  int64_t seq = 0;

  std::optional<std::vector<double>> incumbent;
  double inc_obj = -std::numeric_limits<double>::infinity();
  auto offer = [&](std::vector<double> x) {
    x = detail::snap(std::move(x), c);
    const double obj = evaluate_objective(p, x);
    if (!incumbent || obj > inc_obj + opt.tolerance ||
        (obj >= inc_obj - opt.tolerance && detail::preferred(x, *incumbent, c))) {
      incumbent = std::move(x);
      inc_obj = obj;
    }
  };
  auto integral = [&](const std::vector<double>& x, std::span<const int8_t> fix) {
    return detail::most_fractional(x, c, fix) < 0;
  };

  // Rounding heuristic: fix every binary to its rounded LP value and let the
  // LP settle the slacks.
  auto try_rounding = [&](const std::vector<double>& x) {
    std::vector<int8_t> fix(c.n_binary);
    for (int j = 0; j < c.n_binary; ++j) fix[j] = x[j] > 0.5 ? 1 : 0;
    auto node = relax.solve(fix, result.stats);
    if (node.feasible) offer(std::move(node.x));
  };

  std::vector<int8_t> root_fix(c.n_binary, -1);
  {
    std::vector<int8_t> zeros(c.n_binary, 0);
    auto z = relax.solve(zeros, result.stats);
    if (z.feasible) offer(std::move(z.x));
  }
  auto root = relax.solve(root_fix, result.stats);
  ++result.stats.nodes;
  if (!root.feasible) {
    result.status = SolveStatus::Infeasible;
    result.stats.wall_seconds = elapsed();
    return result;
  }
  if (integral(root.x, root_fix)) {
    offer(root.x);
  } else {
    try_rounding(root.x);
    open.push({root.bound, seq++, root_fix, std::move(root.x)});
  }

  bool timed_out = false;
  double open_bound = -std::numeric_limits<double>::infinity();
  while (!open.empty()) {
    if (elapsed() > opt.time_limit_s) {
      timed_out = true;
      open_bound = open.top().bound;
      break;
    }
    Node node = open.top();
    open.pop();
    if (incumbent && node.bound <= inc_obj + opt.tolerance) break;  // best-first: nothing left can improve
    const int j = detail::most_fractional(node.x, c, node.fix);
    for (int8_t v : {int8_t{1}, int8_t{0}}) {
      std::vector<int8_t> fix = node.fix;
      fix[j] = v;
      auto child = relax.solve(fix, result.stats);
      ++result.stats.nodes;
      if (!child.feasible) continue;
      if (incumbent && child.bound <= inc_obj + opt.tolerance) continue;
      if (integral(child.x, fix)) {
        offer(std::move(child.x));
        continue;
      }
      if (result.stats.nodes % 16 == 0) try_rounding(child.x);
      open.push({child.bound, seq++, std::move(fix), std::move(child.x)});
    }
  }

  result.stats.wall_seconds = elapsed();
  if (!incumbent) {
    result.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Infeasible;
    result.bound = open_bound;
    return result;
  }
  result.assignment = *incumbent;
  result.objective = evaluate_objective(p, result.assignment);
  result.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Optimal;
  result.bound = timed_out ? std::max(open_bound, result.objective) : result.objective;
  return result;
}

}  // namespace planarip
