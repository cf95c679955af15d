#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "fga/bnp.hpp"
#include "fga/oracle.hpp"
#include "fga/rng.hpp"

using namespace fga;
using bnp::BranchConstraint;
using bnp::BranchDirection;
using master::ColumnPool;
using master::Pattern;

namespace {

Instance triangle_instance() {
  Instance instance;
  instance.name = "triangle";
  instance.flights = {Flight{0, 0, 30, "AA", AircraftClass::regular},
                      Flight{1, 5, 30, "BB", AircraftClass::regular},
                      Flight{2, 10, 30, "CC", AircraftClass::regular}};
  instance.gates = {Gate{0, 0, true, {"AA", "BB"}}, Gate{1, 0, true, {"BB", "CC"}},
                    Gate{2, 0, true, {"AA", "CC"}}};
  return instance;
}

GeneratorConfig small_config(std::uint64_t seed) {
  GeneratorConfig config;
  config.n_flights = 8;
  config.n_gates = 3;
  config.mean_interarrival_minutes = 7;
  config.heavy_fraction = 0.25;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("fractional assignment weights") {
  const Instance instance = triangle_instance();
  ColumnPool pool(instance);
  master::add_columns(pool, {master::make_pattern(instance, 0, {0, 1}),
                             master::make_pattern(instance, 0, {0}),
                             master::make_pattern(instance, 1, {1, 2})});
  // columns: 3 empties, then {0,1}@g0, {0}@g0, {1,2}@g1
  std::vector<double> z(pool.size(), 0.0);
  z[3] = 0.5;
  z[4] = 0.5;
  z[5] = 0.5;
  const auto y = bnp::fractional_assignments(pool, z);
  CHECK(y.at({0, 0}) == doctest::Approx(1.0));  // flight 0 in both g0 patterns
  CHECK(y.at({1, 0}) == doctest::Approx(0.5));
  CHECK(y.at({1, 1}) == doctest::Approx(0.5));
  CHECK(y.at({2, 1}) == doctest::Approx(0.5));

  SUBCASE("integral z yields integral weights") {
    std::fill(z.begin(), z.end(), 0.0);
    z[3] = 1.0;
    for (const auto& [key, value] : bnp::fractional_assignments(pool, z))
      CHECK(std::fabs(value - std::round(value)) <= 1e-9);
  }
}

TEST_CASE("branch pair selection") {
  std::map<std::pair<int, int>, double> y;
  y[{1, 0}] = 0.5;
  y[{2, 0}] = 0.9;
  auto pick = bnp::select_branch(y);
  REQUIRE(pick.has_value());
  CHECK(*pick == std::make_pair(1, 0));

  SUBCASE("integral maps yield no branch") {
    std::map<std::pair<int, int>, double> integral;
    integral[{0, 0}] = 1.0;
    integral[{1, 2}] = 1.0;
    CHECK_FALSE(bnp::select_branch(integral).has_value());
  }
  SUBCASE("ties prefer the lowest flight id") {
    std::map<std::pair<int, int>, double> tie;
    tie[{5, 0}] = 0.5;
    tie[{2, 1}] = 0.5;
    auto choice = bnp::select_branch(tie);
    REQUIRE(choice.has_value());
    CHECK(choice->first == 2);
  }
}

TEST_CASE("branching rows carry the right coefficients") {
  const Instance instance = triangle_instance();
  const Pattern on_khat_with = master::make_pattern(instance, 0, {0, 1});
  const Pattern on_khat_without = master::make_pattern(instance, 0, {1});
  const Pattern elsewhere_with = master::make_pattern(instance, 2, {0, 2});

  const BranchConstraint left{0, 0, BranchDirection::force_on};
  CHECK(master::branch_coefficient(left, on_khat_with) == 0.0);
  CHECK(master::branch_coefficient(left, on_khat_without) == 1.0);
  CHECK(master::branch_coefficient(left, elsewhere_with) == 1.0);

  const BranchConstraint right{0, 0, BranchDirection::force_off};
  CHECK(master::branch_coefficient(right, on_khat_with) == 1.0);
  CHECK(master::branch_coefficient(right, on_khat_without) == 0.0);
  CHECK(master::branch_coefficient(right, elsewhere_with) == 0.0);
}

TEST_CASE("make_children guards duplicated pairs") {
  bnp::BnPNode node;
  node.id = 0;
  auto [left, right] = bnp::make_children(node, 1, 2);
  CHECK(left.constraints.back().direction == BranchDirection::force_on);
  CHECK(right.constraints.back().direction == BranchDirection::force_off);
  CHECK(left.parent == 0);
  CHECK_THROWS_AS(bnp::make_children(left, 1, 2), std::logic_error);
}

TEST_CASE("branch duals fold into the pricing objective") {
  master::MasterSolution ms;
  ms.feasible = true;
  ms.pi = {5.0, 2.0};
  ms.mu = {1.0, -0.5};
  ms.lambda = {-2.0};

  SUBCASE("left branch") {
    const std::vector<BranchConstraint> path = {{0, 1, BranchDirection::force_on}};
    const auto on_khat = bnp::fold_branch_duals(ms, path, 1, 2);
    CHECK(on_khat.pi[0] == doctest::Approx(3.0));
    CHECK(on_khat.pi[1] == doctest::Approx(2.0));
    CHECK(on_khat.mu == doctest::Approx(-2.5));
    const auto elsewhere = bnp::fold_branch_duals(ms, path, 0, 2);
    CHECK(elsewhere.pi[0] == doctest::Approx(3.0));
    CHECK(elsewhere.mu == doctest::Approx(1.0));
  }
  SUBCASE("right branch only touches the branched gate") {
    const std::vector<BranchConstraint> path = {{0, 1, BranchDirection::force_off}};
    const auto on_khat = bnp::fold_branch_duals(ms, path, 1, 2);
    CHECK(on_khat.pi[0] == doctest::Approx(3.0));
    CHECK(on_khat.mu == doctest::Approx(-0.5));
    const auto elsewhere = bnp::fold_branch_duals(ms, path, 0, 2);
    CHECK(elsewhere.pi[0] == doctest::Approx(5.0));
    CHECK(elsewhere.mu == doctest::Approx(1.0));
  }
  SUBCASE("empty path is the identity") {
    master::MasterSolution bare = ms;
    bare.lambda.clear();
    const auto folded = bnp::fold_branch_duals(bare, {}, 0, 2);
    CHECK(folded.pi == bare.pi);
    CHECK(folded.mu == bare.mu[0]);
  }
  SUBCASE("folding composes over stacked constraints") {
    master::MasterSolution stacked = ms;
    stacked.lambda = {-2.0, -1.0};
    const std::vector<BranchConstraint> path = {
        {0, 1, BranchDirection::force_on}, {0, 0, BranchDirection::force_off}};
    const auto folded = bnp::fold_branch_duals(stacked, path, 0, 2);
    CHECK(folded.pi[0] == doctest::Approx(5.0 - 2.0 - 1.0));
    CHECK(folded.mu == doctest::Approx(1.0));
  }
}

TEST_CASE("children exclude the parent's fractional assignment") {
  const Instance instance = triangle_instance();
  ColumnPool pool(instance);
  master::add_columns(pool, {master::make_pattern(instance, 0, {0, 1}),
                             master::make_pattern(instance, 1, {1, 2}),
                             master::make_pattern(instance, 2, {0, 2})});
  lp::SimplexSolver solver;
  const auto parent = master::build_and_solve_rmp(pool, {}, solver);
  REQUIRE(parent.feasible);
  const auto y = bnp::fractional_assignments(pool, parent.z);
  const auto pick = bnp::select_branch(y);
  REQUIRE(pick.has_value());
  const double parent_weight = y.at(*pick);
  CHECK(std::fabs(parent_weight - std::round(parent_weight)) > 1e-6);

  bnp::BnPNode root;
  auto [left, right] = bnp::make_children(root, pick->first, pick->second);
  for (const auto* child : {&left, &right}) {
    lp::SimplexSolver fresh;
    const auto ms = master::build_and_solve_rmp(pool, child->constraints, fresh);
    if (!ms.feasible) continue;
    const auto child_y = bnp::fractional_assignments(pool, ms.z);
    const auto it = child_y.find(*pick);
    const double value = it == child_y.end() ? 0.0 : it->second;
    const double expected =
        child->constraints.back().direction == BranchDirection::force_on ? 1.0 : 0.0;
    CHECK(value == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("solver terminates at the root when the start is optimal") {
  Instance instance;
  instance.name = "no-conflict";
  instance.flights = {Flight{0, 0, 30, "DL", AircraftClass::regular},
                      Flight{1, 500, 30, "DL", AircraftClass::regular}};
  instance.gates = {Gate{0, 5, true, {}}};
  bnp::SolverConfig config;
  config.pricing = "dp";
  const auto result = bnp::solve(instance, config);
  CHECK(result.solution.objective == doctest::Approx(0.0));
  CHECK(result.solution.gap.is_absolute);  // lb is zero here
  CHECK(result.solution.gap.value == doctest::Approx(0.0));
  CHECK(result.solution.stats.nodes == 1);
  CHECK(result.root_lb == doctest::Approx(0.0));
  CHECK(result.root_ub == doctest::Approx(0.0));
}

TEST_CASE("solver matches the exhaustive oracle on small instances") {
  for (std::uint64_t seed : {11u, 23u, 37u, 51u}) {
    const Instance instance = generate_instance(small_config(seed));
    const auto reference = oracle::brute_force_assignment(instance);
    for (const char* strategy : {"dp", "sm+dp"}) {
      bnp::SolverConfig config;
      config.pricing = strategy;
      config.rel_gap = 1e-9;
      config.abs_gap = 1e-9;
      config.seed = seed;
      const auto result = bnp::solve(instance, config);
      CHECK(result.solution.objective ==
            doctest::Approx(static_cast<double>(reference.optimum)).epsilon(1e-9));
      CHECK(result.root_lb <= static_cast<double>(reference.optimum) + 1e-6);
      CHECK(result.root_ub >= static_cast<double>(reference.optimum) - 1e-6);
      CHECK(result.solution.lb <= result.solution.ub + 1e-9);
    }
  }
}

TEST_CASE("column generation value is nonincreasing and prices out cleanly") {
  const Instance instance = generate_instance(small_config(99));
  ColumnPool pool(instance);
  // seed with a trivial partition: everything on its first compatible gate
  {
    std::vector<std::vector<int>> sets(instance.gates.size());
    for (const Flight& f : instance.flights)
      for (const Gate& g : instance.gates)
        if (is_compatible(f, g)) {
          sets[static_cast<std::size_t>(g.id)].push_back(f.id);
          break;
        }
    std::vector<Pattern> patterns;
    for (const Gate& g : instance.gates)
      if (!sets[static_cast<std::size_t>(g.id)].empty())
        patterns.push_back(master::make_pattern(instance, g.id,
                                                sets[static_cast<std::size_t>(g.id)]));
    master::add_columns(pool, patterns);
  }

  lp::SimplexSolver solver;
  double previous = std::numeric_limits<double>::infinity();
  master::MasterSolution ms;
  for (int iteration = 0; iteration < 200; ++iteration) {
    ms = master::build_and_solve_rmp(pool, {}, solver);
    REQUIRE(ms.feasible);
    CHECK(ms.objective <= previous + 1e-6);
    previous = ms.objective;

    std::vector<Pattern> favorable;
    for (const Gate& gate : instance.gates) {
      const auto input = pricing::preprocess(instance, gate, ms.pi);
      if (input.flights.empty()) continue;
      const auto priced = pricing::dp_recursive(input);
      const double reduced =
          -priced.objective - ms.mu[static_cast<std::size_t>(gate.id)];
      if (reduced < -1e-6 && !priced.accepted.empty())
        favorable.push_back(master::make_pattern(instance, gate.id, priced.accepted));
    }
    if (master::add_columns(pool, favorable) == 0) break;
  }

  // exact pricing found nothing: every feasible pattern prices out
  Rng rng(2718);
  for (int sample = 0; sample < 1000; ++sample) {
    const int gate_id =
        static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(
                                                instance.gates.size()) - 1));
    const Gate& gate = instance.gates[static_cast<std::size_t>(gate_id)];
    std::vector<int> ids;
    for (const Flight& f : instance.flights)
      if (is_compatible(f, gate) && rng.bernoulli(0.4)) ids.push_back(f.id);
    const auto schedule = evaluate_sequence(instance, gate, ids);
    const double reduced = pricing::reduced_cost_of_pattern(
        static_cast<double>(schedule.total_delay), ids, ms.pi,
        ms.mu[static_cast<std::size_t>(gate_id)]);
    CHECK(reduced >= -1e-5);
  }
}

TEST_CASE("time limit returns the incumbent with the flag set") {
  GeneratorConfig config = small_config(7);
  config.n_flights = 40;
  config.n_gates = 4;
  config.mean_interarrival_minutes = 2;  // congested, so the run cannot finish instantly
  const Instance instance = generate_instance(config);
  bnp::SolverConfig solver_config;
  solver_config.pricing = "dp";
  solver_config.rel_gap = 1e-12;
  solver_config.abs_gap = 1e-12;
  solver_config.time_limit_seconds = 0.01;
  const auto result = bnp::solve(instance, solver_config);
  if (result.hit_time_limit) {
    CHECK(result.solution.objective < std::numeric_limits<double>::infinity());
    CHECK(result.solution.ub >= result.solution.lb - 1e-9);
  }
  master::validate_solution(instance, result.solution);
}

TEST_CASE("reproducible across thread counts") {
  const Instance instance = generate_instance(small_config(64));
  bnp::SolverConfig config;
  config.pricing = "sm+dp";
  config.rel_gap = 1e-9;
  config.abs_gap = 1e-9;
  config.seed = 5;
  config.threads = 1;
  const auto serial = bnp::solve(instance, config);
  config.threads = 4;
  const auto parallel = bnp::solve(instance, config);
  CHECK(serial.solution.objective == doctest::Approx(parallel.solution.objective));
  CHECK(serial.solution.lb == doctest::Approx(parallel.solution.lb));
}
