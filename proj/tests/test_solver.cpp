#include <gtest/gtest.h>

#include <random>

#include "planarip/simdet.hpp"
#include "planarip/solver.hpp"
#include "support/generators.hpp"

using namespace planarip;
using planarip::testing::for_each_binary_assignment;
using planarip::testing::random_program;

namespace {

BinaryProgram two_var_program() {
  BinaryProgram p;
  p.add_binary(VarRef::edge(0, 1), 0.5);
  p.add_binary(VarRef::edge(0, 2), 0.3);
  p.add_constraint({{{1, VarRef::edge(0, 1)}, {1, VarRef::edge(0, 2)}}, Relation::LessEqual, 1, Family::TopologyPlanarity});
  return p;
}

// Copy of `p` with binaries fixed through hard equality rows.
BinaryProgram with_fixings(const BinaryProgram& p, const std::vector<int8_t>& fix) {
  BinaryProgram q = p;
  for (size_t j = 0; j < fix.size(); ++j)
    if (fix[j] >= 0)
      q.add_constraint({{{1.0, p.variables()[j].ref}}, Relation::Equal, double(fix[j]), Family::TopologyEndpoint});
  return q;
}

}  // namespace

TEST(BruteForce, Examples) {
  const SolveResult r = brute_force(two_var_program());
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_DOUBLE_EQ(r.objective, 0.5);
  EXPECT_EQ(r.assignment, (std::vector<double>{1, 0}));

  const SolveResult e = brute_force(BinaryProgram{});
  EXPECT_EQ(e.status, SolveStatus::Optimal);
  EXPECT_TRUE(e.assignment.empty());
  EXPECT_DOUBLE_EQ(e.objective, 0.0);

  // max x1 + x2 - 2 S_lo  s.t.  x1 + x2 + S_lo >= 3, S_lo <= 3.
  BinaryProgram s;
  s.add_binary(VarRef::edge(0, 1), 1);
  s.add_binary(VarRef::edge(0, 2), 1);
  s.add_slack(VarRef::slack_lo(0), 3, -2);
  s.add_constraint({{{1, VarRef::edge(0, 1)}, {1, VarRef::edge(0, 2)}, {1, VarRef::slack_lo(0)}},
                    Relation::GreaterEqual, 3, Family::RegionEnclose, true});
  const SolveResult rs = brute_force(s);
  ASSERT_EQ(rs.status, SolveStatus::Optimal);
  EXPECT_NEAR(rs.objective, 0.0, 1e-12);
  EXPECT_EQ(rs.assignment, (std::vector<double>{1, 1, 1}));
  EXPECT_NEAR(solve(s).objective, 0.0, 1e-9);
}

TEST(BruteForce, TooLarge) {
  BinaryProgram p;
  for (int i = 0; i < 23; ++i) p.add_binary(VarRef::corner(i), 1);
  EXPECT_THROW(brute_force(p), TooLarge);
}

TEST(BruteForce, MatchesPlainEnumeration) {
  // Hard programs only: enumerate directly with check_feasible.
  std::mt19937_64 rng(77);
  for (int i = 0; i < 100; ++i) {
    const BinaryProgram p = random_program(rng, {10, 0.0});
    std::optional<double> best;
    for_each_binary_assignment(p, [&](const std::vector<double>& x) {
      if (check_feasible(p, x).ok()) {
        const double v = evaluate_objective(p, x);
        if (!best || v > *best) best = v;
      }
    });
    const SolveResult r = brute_force(p);
    ASSERT_EQ(r.status == SolveStatus::Optimal, best.has_value());
    if (best) EXPECT_NEAR(r.objective, *best, 1e-12);
  }
}

TEST(Solve, NoConstraintsPicksPositiveCoefficients) {
  BinaryProgram p;
  p.add_binary(VarRef::corner(0), 0.2);
  p.add_binary(VarRef::corner(1), -0.4);
  p.add_binary(VarRef::corner(2), 0.0);
  p.add_binary(VarRef::region(0), 1.0);
  const SolveResult r = solve(p);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.assignment, (std::vector<double>{1, 0, 0, 1}));
  EXPECT_DOUBLE_EQ(r.objective, 1.2);
}

TEST(Solve, Examples) {
  const SolveResult r = solve(two_var_program());
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.assignment, (std::vector<double>{1, 0}));
  const SolveResult e = solve(BinaryProgram{});
  EXPECT_EQ(e.status, SolveStatus::Optimal);
  EXPECT_DOUBLE_EQ(e.objective, 0.0);
}

TEST(Solve, Infeasible) {
  BinaryProgram p;
  p.add_binary(VarRef::corner(0), 1);
  p.add_constraint({{{1, VarRef::corner(0)}}, Relation::GreaterEqual, 2, Family::TopologyDegree});
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
  EXPECT_EQ(brute_force(p).status, SolveStatus::Infeasible);
}

TEST(Solve, AgreesWithBruteForce) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 150; ++i) {
    const BinaryProgram p = random_program(rng);
    const SolveResult a = solve(p), b = brute_force(p);
    ASSERT_EQ(a.status, b.status) << i;
    if (a.status != SolveStatus::Optimal) continue;
    EXPECT_NEAR(a.objective, b.objective, 1e-9) << i;
    EXPECT_TRUE(check_feasible(p, a.assignment).ok()) << i;
    EXPECT_NEAR(evaluate_objective(p, a.assignment), a.objective, 1e-12);
  }
}

TEST(Solve, TieBreakPrefersFewerEdges) {
  BinaryProgram p;
  p.add_binary(VarRef::edge(0, 1), 0.0);
  p.add_binary(VarRef::edge(0, 2), 0.0);
  p.add_binary(VarRef::region(0), 0.0);
  EXPECT_EQ(solve(p).assignment, (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(brute_force(p).assignment, (std::vector<double>{0, 0, 0}));

  // Two optimal edge sets of different size.
  BinaryProgram q;
  q.add_binary(VarRef::edge(0, 1), 0.5);
  q.add_binary(VarRef::edge(0, 2), 0.25);
  q.add_binary(VarRef::edge(1, 2), 0.25);
  q.add_constraint({{{1, VarRef::edge(0, 1)}, {1, VarRef::edge(0, 2)}}, Relation::LessEqual, 1, Family::TopologyPlanarity});
  q.add_constraint({{{1, VarRef::edge(0, 1)}, {1, VarRef::edge(1, 2)}}, Relation::LessEqual, 1, Family::TopologyPlanarity});
  EXPECT_EQ(solve(q).assignment, (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(brute_force(q).assignment, (std::vector<double>{1, 0, 0}));
}

TEST(Solve, Deterministic) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const BinaryProgram p = random_program(rng);
    const SolveResult a = solve(p), b = solve(p);
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.objective, b.objective);
  }
}

TEST(Solve, RelaxationBoundsSubtree) {
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    const BinaryProgram p = random_program(rng, {10, 0.5});
    const int nb = static_cast<int>(p.binary_count());
    for (int k = 0; k < 5; ++k) {
      std::vector<int8_t> fix(nb, -1);
      for (int j = 0; j < nb; ++j)
        if (rng() % 3 == 0) fix[j] = static_cast<int8_t>(rng() % 2);
      const auto bound = relaxation_bound(p, fix);
      const SolveResult sub = brute_force(with_fixings(p, fix));
      if (!bound) {
        EXPECT_EQ(sub.status, SolveStatus::Infeasible);
        continue;
      }
      if (sub.status == SolveStatus::Optimal) {
        EXPECT_GE(*bound, sub.objective - 1e-9);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Solve, ZeroNoiseSquareRecovered) {
  const PlanarGraph g = planarip::testing::square(60, 60, 100);
  const DetectionSet d = simulate(g, NoiseConfig::clean());
  const BuiltProgram b = build(d, FeatureConfig::all());
  const SolveResult r = solve(b.program);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  for (const auto& v : g.vertices) EXPECT_DOUBLE_EQ(r.value(b.program, VarRef::corner(v.id)), 1.0);
  int edges = 0, regions = 0;
  for (size_t j = 0; j < b.program.variables().size(); ++j) {
    const auto& v = b.program.variables()[j];
    if (v.ref.kind == VarKind::Edge) edges += r.assignment[j] > 0.5;
    if (v.ref.kind == VarKind::Region) regions += r.assignment[j] > 0.5;
    if (v.ref.is_slack()) EXPECT_NEAR(r.assignment[j], 0.0, 1e-9) << var_name(v.ref);
  }
  EXPECT_EQ(edges, 4);
  EXPECT_EQ(regions, 1);
  for (auto [u, w] : g.edges) EXPECT_DOUBLE_EQ(r.value(b.program, VarRef::edge(u, w)), 1.0);
  EXPECT_EQ(decode_graph(b, d, r.assignment), (PlanarGraph{g.vertices, {{0, 1}, {0, 3}, {1, 2}, {2, 3}}}));
}

TEST(Solve, CapZeroSlackIsHard) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 40; ++i) {
    const BinaryProgram hard = random_program(rng, {10, 0.0});
    BinaryProgram soft;
    for (const auto& v : hard.variables()) soft.add_binary(v.ref, hard.objective_of(v.ref));
    for (const auto& c : hard.constraints()) {
      if (is_topology(c.family)) soft.add_constraint(c);
      else soften(soft, c, {1.0, 0.0});
    }
    const SolveResult a = brute_force(hard), b = brute_force(soft), s = solve(soft);
    ASSERT_EQ(a.status, b.status);
    ASSERT_EQ(a.status, s.status);
    if (a.status == SolveStatus::Optimal) {
      EXPECT_NEAR(a.objective, b.objective, 1e-12);
      EXPECT_NEAR(a.objective, s.objective, 1e-9);
    }
  }
}

TEST(Solve, SoftenedInfeasibleRowPaysPenalty) {
  // x forced to 0; softened x >= 1 must buy S_lo = 1 at cost lambda = 1.
  BinaryProgram p;
  p.add_binary(VarRef::edge(0, 1), 0.0);
  p.add_constraint({{{1, VarRef::edge(0, 1)}}, Relation::LessEqual, 0, Family::TopologyPlanarity});
  soften(p, {{{1, VarRef::edge(0, 1)}}, Relation::GreaterEqual, 1, Family::RegionEnclose}, {1.0, 1.0});
  for (const SolveResult& r : {solve(p), brute_force(p)}) {
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_NEAR(r.objective, -1.0, 1e-9);
    EXPECT_NEAR(r.value(p, VarRef::slack_lo(0)), 1.0, 1e-9);
  }
}

TEST(Solve, TimeLimitKeepsIncumbentBelowBound) {
  std::mt19937_64 rng(4);
  const PlanarGraph g = planarip::testing::random_building(rng, {4, 5});
  NoiseConfig cfg;
  cfg.seed = 1;
  cfg.spurious_corner_rate = 6;
  cfg.corner_jitter_sigma = 2;
  cfg.edge_map_noise_sigma = 0.15;
  const BuiltProgram b = build(simulate(g, cfg), FeatureConfig::all());
  const SolveResult r = solve(b.program, {0.0, 1e-9});
  ASSERT_NE(r.status, SolveStatus::Infeasible);
  if (r.status == SolveStatus::TimeLimit) {
    ASSERT_FALSE(r.assignment.empty());
    EXPECT_LE(r.objective, r.bound + 1e-9);
  }
  EXPECT_TRUE(check_feasible(b.program, r.assignment).ok());
  const SolveResult full = solve(b.program);
  EXPECT_EQ(full.status, SolveStatus::Optimal);
  EXPECT_LE(r.objective, full.objective + 1e-9);
  EXPECT_GE(r.bound, full.objective - 1e-9);
}

TEST(CheckFeasible, Reports) {
  const BinaryProgram p = two_var_program();
  EXPECT_TRUE(check_feasible(p, solve(p).assignment).ok());
  const std::vector<double> both{1, 1};
  const auto rep = check_feasible(p, both);
  EXPECT_EQ(rep.count(Family::TopologyPlanarity), 1u);
  EXPECT_EQ(rep.total(), 1u);
  const std::vector<double> half{0.5, 0};
  EXPECT_EQ(check_feasible(p, half).bound_violations.size(), 1u);
  const std::vector<double> short_assignment{1};
  EXPECT_THROW(check_feasible(p, short_assignment), MissingVariable);
}

TEST(CheckFeasible, FlippingOneEdgeOnlyTouchesItsRows) {
  std::mt19937_64 rng(6);
  const PlanarGraph g = planarip::testing::random_building(rng);
  const BuiltProgram b = build(simulate(g, NoiseConfig::clean()), FeatureConfig::all());
  const SolveResult r = solve(b.program);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  ASSERT_TRUE(check_feasible(b.program, r.assignment).ok());
  const auto& p = b.program;
  for (size_t j = 0; j < p.variables().size(); ++j) {
    if (p.variables()[j].ref.kind != VarKind::Edge) continue;
    std::vector<double> x = r.assignment;
    x[j] = 1 - x[j];
    const auto rep = check_feasible(p, x);
    std::set<size_t> reported;
    for (const auto& [f, rows] : rep.violations) reported.insert(rows.begin(), rows.end());
    // Recompute every row directly.
    std::set<size_t> expected;
    for (size_t k = 0; k < p.constraints().size(); ++k) {
      const auto& c = p.constraints()[k];
      double lhs = 0;
      bool touches = false;
      for (const auto& t : c.terms) {
        lhs += t.coef * x[p.index_of(t.var)];
        touches = touches || t.var == p.variables()[j].ref;
      }
      const bool ok = c.relation == Relation::LessEqual      ? lhs <= c.rhs + 1e-6
                      : c.relation == Relation::GreaterEqual ? lhs >= c.rhs - 1e-6
                                                             : std::abs(lhs - c.rhs) <= 1e-6;
      if (!ok) {
        EXPECT_TRUE(touches);
        expected.insert(k);
      }
    }
    EXPECT_EQ(reported, expected);
  }
}
