#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "instances.hpp"
#include "wanplace/simplex.hpp"

using namespace wanplace;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LpSolution solve_model(const Milp& m) {
  std::vector<double> lb, ub;
  for (const MilpVar& v : m.vars) {
    lb.push_back(v.lb);
    ub.push_back(v.ub);
  }
  return BoundedSimplex(m).solve(lb, ub);
}

bool feasible(const Milp& m, const std::vector<double>& x, double tol = 1e-6) {
  for (const RowCon& row : m.rows) {
    if (!m.row_satisfied(row, x, tol)) return false;
  }
  for (std::size_t j = 0; j < m.vars.size(); ++j) {
    if (x[j] < m.vars[j].lb - tol || x[j] > m.vars[j].ub + tol) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("simplex solves small maximization problems") {
  SECTION("single capacity row") {
    Milp m;
    const int x = m.add_var("x", 0.0, 10.0);
    const int y = m.add_var("y", 0.0, 10.0);
    m.objective[x] = 1.0;
    m.objective[y] = 1.0;
    m.add_row("cap", {{x, 1.0}, {y, 1.0}}, Rel::LE, 5.0);
    m.add_row("xcap", {{x, 1.0}}, Rel::LE, 3.0);

    const LpSolution s = solve_model(m);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == Catch::Approx(5.0).margin(1e-7));
    CHECK(feasible(m, s.x));
  }

  SECTION("weighted objective picks the better corner") {
    Milp m;
    const int x = m.add_var("x", 0.0, 3.0);
    const int y = m.add_var("y", 0.0, 3.0);
    m.objective[x] = 2.0;
    m.objective[y] = 3.0;
    m.add_row("cap", {{x, 1.0}, {y, 1.0}}, Rel::LE, 4.0);

    const LpSolution s = solve_model(m);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == Catch::Approx(11.0).margin(1e-7));
    CHECK(s.x[static_cast<std::size_t>(y)] == Catch::Approx(3.0).margin(1e-7));
  }

  SECTION("fractional optimum") {
    Milp m;
    const int x = m.add_var("x", 0.0, 10.0);
    m.objective[x] = 1.0;
    m.add_row("half", {{x, 2.0}}, Rel::LE, 5.0);
    const LpSolution s = solve_model(m);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == Catch::Approx(2.5).margin(1e-7));
  }

  SECTION("bounds-only problem") {
    Milp m;
    const int x = m.add_var("x", 0.0, 2.0);
    const int y = m.add_var("y", 1.0, 4.0);
    m.objective[x] = 3.0;
    m.objective[y] = -1.0;
    const LpSolution s = solve_model(m);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == Catch::Approx(5.0).margin(1e-7));
  }
}

TEST_CASE("simplex honors equality rows") {
  Milp m;
  const int x = m.add_var("x", 0.0, 3.0);
  const int y = m.add_var("y", 0.0, 10.0);
  m.objective[x] = 1.0;
  m.add_row("fix", {{x, 1.0}, {y, 1.0}}, Rel::EQ, 4.0);

  const LpSolution s = solve_model(m);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == Catch::Approx(3.0).margin(1e-7));
  CHECK(s.x[static_cast<std::size_t>(x)] + s.x[static_cast<std::size_t>(y)] ==
        Catch::Approx(4.0).margin(1e-7));
}

TEST_CASE("simplex solves minimization problems") {
  Milp m;
  m.maximize = false;
  const int x = m.add_var("x", 0.0, 10.0);
  const int y = m.add_var("y", 0.0, 10.0);
  m.objective[x] = 1.0;
  m.objective[y] = 1.0;
  m.add_row("floor", {{x, 1.0}, {y, 1.0}}, Rel::GE, 3.0);

  const LpSolution s = solve_model(m);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == Catch::Approx(3.0).margin(1e-7));
}

TEST_CASE("simplex handles negative lower bounds") {
  Milp m;
  m.maximize = false;
  const int x = m.add_var("x", -5.0, 5.0);
  m.objective[x] = 1.0;
  m.add_row("floor", {{x, 1.0}}, Rel::GE, -4.0);
  const LpSolution s = solve_model(m);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == Catch::Approx(-4.0).margin(1e-7));
}

TEST_CASE("simplex reports infeasibility") {
  SECTION("row against bound") {
    Milp m;
    const int x = m.add_var("x", 0.0, 5.0);
    m.objective[x] = 1.0;
    m.add_row("floor", {{x, 1.0}}, Rel::GE, 6.0);
    CHECK(solve_model(m).status == LpStatus::Infeasible);
  }

  SECTION("contradictory rows") {
    Milp m;
    const int x = m.add_var("x", 0.0, 10.0);
    m.objective[x] = 1.0;
    m.add_row("lo", {{x, 1.0}}, Rel::GE, 3.0);
    m.add_row("hi", {{x, 1.0}}, Rel::LE, 2.0);
    CHECK(solve_model(m).status == LpStatus::Infeasible);
  }

  SECTION("inverted box") {
    Milp m;
    m.add_var("x", 0.0, 10.0);
    CHECK(BoundedSimplex(m).solve({4.0}, {3.0}).status ==
          LpStatus::Infeasible);
  }

  SECTION("mismatched bound vectors") {
    Milp m;
    m.add_var("x", 0.0, 10.0);
    CHECK_THROWS_AS(BoundedSimplex(m).solve({0.0, 0.0}, {1.0, 1.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("simplex reports an unbounded ray") {
  Milp m;
  const int x = m.add_var("x", 0.0, kInf);
  m.objective[x] = 1.0;
  CHECK(solve_model(m).status == LpStatus::Unbounded);
}

TEST_CASE("degenerate vertices do not stall the solve") {
  Milp m;
  const int x = m.add_var("x", 0.0, 10.0);
  const int y = m.add_var("y", 0.0, 10.0);
  m.objective[x] = 1.0;
  m.objective[y] = 1.0;
  m.add_row("a", {{x, 1.0}}, Rel::LE, 2.0);
  m.add_row("b", {{y, 1.0}}, Rel::LE, 2.0);
  m.add_row("c", {{x, 1.0}, {y, 1.0}}, Rel::LE, 4.0);
  m.add_row("d", {{x, 1.0}, {y, 2.0}}, Rel::LE, 6.0);
  m.add_row("e", {{x, 2.0}, {y, 1.0}}, Rel::LE, 6.0);

  const LpSolution s = solve_model(m);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == Catch::Approx(4.0).margin(1e-7));
}

TEST_CASE("random LPs return feasible dominating optima") {
  testutil::Rng rng(4242);
  int solved = 0;
  for (int t = 0; t < 120; ++t) {
    Milp m;
    const std::size_t nv = 2 + rng.below(5);
    for (std::size_t j = 0; j < nv; ++j) {
      m.add_var("v" + std::to_string(j), 0.0,
                static_cast<double>(1 + rng.below(5)));
      m.objective[j] = static_cast<double>(rng.below(7)) - 3.0;
    }
    // A reference point inside the box; every row is anchored to it so the
    // problem is feasible by construction.
    std::vector<double> x0(nv);
    for (std::size_t j = 0; j < nv; ++j) {
      x0[j] = static_cast<double>(rng.below(
          static_cast<std::size_t>(m.vars[j].ub) + 1));
    }
    const std::size_t nr = 1 + rng.below(6);
    for (std::size_t r = 0; r < nr; ++r) {
      std::vector<LinTerm> terms;
      double at_x0 = 0.0;
      for (std::size_t j = 0; j < nv; ++j) {
        if (rng.chance(0.4)) continue;
        const double coef = static_cast<double>(rng.below(7)) - 3.0;
        if (coef == 0.0) continue;
        terms.push_back({static_cast<int>(j), coef});
        at_x0 += coef * x0[j];
      }
      if (terms.empty()) continue;
      const double margin = static_cast<double>(rng.below(4));
      switch (rng.below(3)) {
        case 0:
          m.add_row("r" + std::to_string(r), terms, Rel::LE, at_x0 + margin);
          break;
        case 1:
          m.add_row("r" + std::to_string(r), terms, Rel::GE, at_x0 - margin);
          break;
        default:
          m.add_row("r" + std::to_string(r), terms, Rel::EQ, at_x0);
          break;
      }
    }

    const LpSolution s = solve_model(m);
    INFO("instance " << t);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(feasible(m, s.x));
    CHECK(s.objective >= m.objective_value(x0) - 1e-6);

    const LpSolution again = solve_model(m);
    CHECK(again.objective == Catch::Approx(s.objective).margin(1e-9));
    ++solved;
  }
  CHECK(solved == 120);
}
