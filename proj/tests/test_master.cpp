#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fga/master.hpp"
#include "fga/rng.hpp"
#include "json.hpp"

using namespace fga;
using master::BranchConstraint;
using master::BranchDirection;
using master::ColumnPool;
using master::Pattern;

namespace {

// Two flights 5 minutes apart; gate 0 has the larger buffer, so serving both
// there costs 35 while gate 1 costs 27.
Instance two_gate_instance() {
  Instance instance;
  instance.name = "two-gate";
  instance.flights = {Flight{0, 0, 30, "DL", AircraftClass::regular},
                      Flight{1, 5, 30, "DL", AircraftClass::regular}};
  instance.gates = {Gate{0, 10, true, {}}, Gate{1, 2, true, {}}};
  return instance;
}

Instance triangle_instance() {
  // Three overlapping flights; each gate admits exactly one pair through its
  // airline list, so covering needs two pair patterns.
  Instance instance;
  instance.name = "triangle";
  instance.flights = {Flight{0, 0, 30, "AA", AircraftClass::regular},
                      Flight{1, 5, 30, "BB", AircraftClass::regular},
                      Flight{2, 10, 30, "CC", AircraftClass::regular}};
  instance.gates = {Gate{0, 0, true, {"AA", "BB"}}, Gate{1, 0, true, {"BB", "CC"}},
                    Gate{2, 0, true, {"AA", "CC"}}};
  return instance;
}

}  // namespace

TEST_CASE("pattern construction and pool dedup") {
  const Instance instance = two_gate_instance();
  ColumnPool pool(instance);
  CHECK(pool.size() == 2);  // one empty pattern per gate

  const Pattern both = master::make_pattern(instance, 0, {0, 1});
  CHECK(both.cost == doctest::Approx(35.0));
  CHECK(pool.add(both) == 1);
  CHECK(pool.add(both) == 0);  // duplicate silently skipped
  CHECK(master::add_columns(pool, {both, master::make_pattern(instance, 1, {0, 1})}) ==
        1);
  CHECK(pool.size() == 4);

  // re-adding an empty pattern is a no-op
  CHECK(pool.add(master::make_pattern(instance, 0, {})) == 0);

  // corrupted cost or schedule is rejected with an error
  Pattern broken = both;
  broken.cost += 1.0;
  CHECK_THROWS_AS(pool.add(broken), std::invalid_argument);
  Pattern shifted = both;
  shifted.schedule.park_times[1] += 5;
  CHECK_THROWS_AS(pool.add(shifted), std::invalid_argument);
}

TEST_CASE("restricted master picks the cheaper gate") {
  const Instance instance = two_gate_instance();
  ColumnPool pool(instance);
  const Pattern on_g0 = master::make_pattern(instance, 0, {0, 1});
  const Pattern on_g1 = master::make_pattern(instance, 1, {0, 1});
  master::add_columns(pool, {on_g0, on_g1});

  lp::SimplexSolver solver;
  const auto ms = master::build_and_solve_rmp(pool, {}, solver);
  REQUIRE(ms.feasible);
  CHECK(ms.objective == doctest::Approx(27.0));
  // the g1 column carries the weight
  double z_g1 = 0;
  for (std::size_t j = 0; j < pool.size(); ++j)
    if (pool.columns()[j].gate_id == 1 && !pool.columns()[j].accepted.empty())
      z_g1 = ms.z[j];
  CHECK(z_g1 == doctest::Approx(1.0));
  CHECK(ms.pi.size() == 2);
  CHECK(ms.mu.size() == 2);
  for (double pi : ms.pi) CHECK(pi >= -1e-7);

  SUBCASE("forbidding the cheap gate moves the cover") {
    const std::vector<BranchConstraint> rows = {
        {0, 1, BranchDirection::force_off}};
    lp::SimplexSolver fresh;
    const auto branched = master::build_and_solve_rmp(pool, rows, fresh);
    REQUIRE(branched.feasible);
    CHECK(branched.objective == doctest::Approx(35.0));
    CHECK(branched.lambda.size() == 1);
  }
}

TEST_CASE("single covering choice is forced") {
  Instance instance;
  instance.flights = {Flight{0, 0, 30, "DL", AircraftClass::regular}};
  instance.gates = {Gate{0, 5, true, {}}};
  ColumnPool pool(instance);
  master::add_columns(pool, {master::make_pattern(instance, 0, {0})});

  lp::SimplexSolver solver;
  const auto ms = master::build_and_solve_rmp(pool, {}, solver);
  REQUIRE(ms.feasible);
  CHECK(ms.objective == doctest::Approx(0.0));
  CHECK(ms.z[1] == doctest::Approx(1.0));
}

TEST_CASE("infeasible restricted master is a signal, not a crash") {
  Instance instance = two_gate_instance();
  ColumnPool pool(instance);  // empty patterns only: nothing covers the flights
  lp::SimplexSolver solver;
  const auto ms = master::build_and_solve_rmp(pool, {}, solver);
  CHECK_FALSE(ms.feasible);
}

TEST_CASE("binary restricted master") {
  SUBCASE("integral LP optimum is returned directly") {
    Instance instance;
    instance.flights = {Flight{0, 0, 30, "DL", AircraftClass::regular}};
    instance.gates = {Gate{0, 5, true, {}}};
    ColumnPool pool(instance);
    master::add_columns(pool, {master::make_pattern(instance, 0, {0})});
    const auto binary = master::solve_binary_rmp(pool, {}, 10.0);
    REQUIRE(binary.feasible);
    CHECK(binary.value == doctest::Approx(0.0));
  }

  SUBCASE("fractional LP rounds up to the enumerated optimum") {
    const Instance instance = triangle_instance();
    ColumnPool pool(instance);
    const Pattern p01 = master::make_pattern(instance, 0, {0, 1});  // cost 25
    const Pattern p12 = master::make_pattern(instance, 1, {1, 2});  // cost 25
    const Pattern p02 = master::make_pattern(instance, 2, {0, 2});  // cost 20
    master::add_columns(pool, {p01, p12, p02});

    lp::SimplexSolver solver;
    const auto relaxed = master::build_and_solve_rmp(pool, {}, solver);
    REQUIRE(relaxed.feasible);
    CHECK(relaxed.objective == doctest::Approx(35.0));  // half of each pattern

    // reference: enumerate every covering selection of at most one pattern
    // per gate
    const auto& cols = pool.columns();
    double best = 1e18;
    for (unsigned mask = 0; mask < (1u << cols.size()); ++mask) {
      std::vector<int> used_gate;
      std::vector<int> covered(instance.flights.size(), 0);
      double cost = 0;
      bool valid = true;
      for (std::size_t j = 0; j < cols.size() && valid; ++j) {
        if (!((mask >> j) & 1u)) continue;
        if (std::count(used_gate.begin(), used_gate.end(), cols[j].gate_id))
          valid = false;
        used_gate.push_back(cols[j].gate_id);
        cost += cols[j].cost;
        for (int id : cols[j].accepted) covered[static_cast<std::size_t>(id)] = 1;
      }
      if (!valid) continue;
      if (std::count(covered.begin(), covered.end(), 1) ==
          static_cast<long>(covered.size()))
        best = std::min(best, cost);
    }
    CHECK(best == doctest::Approx(45.0));

    const auto binary = master::solve_binary_rmp(pool, {}, 10.0);
    REQUIRE(binary.feasible);
    CHECK_FALSE(binary.timed_out);
    CHECK(binary.value == doctest::Approx(best));
    CHECK(binary.value > relaxed.objective + 1.0);  // genuinely fractional root
  }

  SUBCASE("cover-less pool is infeasible") {
    Instance instance = two_gate_instance();
    ColumnPool pool(instance);
    const auto binary = master::solve_binary_rmp(pool, {}, 10.0);
    CHECK_FALSE(binary.feasible);
  }
}

TEST_CASE("covering to partition recovery") {
  const Instance instance = two_gate_instance();

  SUBCASE("a partition passes through unchanged") {
    const auto result = master::recover_partition(instance, {{0}, {1}});
    CHECK(result.total_delay == 0);
    CHECK(result.gate_of_flight == std::vector<int>{0, 1});
  }

  SUBCASE("the duplicate stays where total delay is lowest") {
    // flight 0 covered on both gates; keeping it on gate 1 frees gate 0
    const auto result = master::recover_partition(instance, {{0, 1}, {0}});
    CHECK(result.gate_of_flight[0] == 1);
    CHECK(result.gate_of_flight[1] == 0);
    CHECK(result.total_delay == 0);  // covering cost was 35
  }

  SUBCASE("uncovered flights are an error") {
    CHECK_THROWS_AS(master::recover_partition(instance, {{0}, {}}),
                    std::logic_error);
  }

  SUBCASE("random covering solutions never get more expensive") {
    Rng rng(13);
    GeneratorConfig config;
    config.n_flights = 10;
    config.n_gates = 3;
    config.heavy_fraction = 0;
    config.open_gate_fraction = 1.0;
    config.mean_interarrival_minutes = 6;
    for (int trial = 0; trial < 60; ++trial) {
      config.seed = 500 + trial;
      const Instance random_instance = generate_instance(config);
      std::vector<std::vector<int>> sets(random_instance.gates.size());
      for (const Flight& f : random_instance.flights) {
        bool covered = false;
        for (const Gate& g : random_instance.gates) {
          if (!is_compatible(f, g)) continue;
          if (!covered || rng.bernoulli(0.3)) {
            sets[static_cast<std::size_t>(g.id)].push_back(f.id);
            covered = true;
          }
        }
        REQUIRE(covered);
      }
      Minutes covering_cost = 0;
      for (const Gate& g : random_instance.gates)
        covering_cost += evaluate_sequence(random_instance, g,
                                           sets[static_cast<std::size_t>(g.id)])
                             .total_delay;
      const auto result = master::recover_partition(random_instance, sets);
      CHECK(result.total_delay <= covering_cost);
    }
  }
}

TEST_CASE("gap formula") {
  const auto relative = master::compute_gap(1.11, 0.90);
  CHECK_FALSE(relative.is_absolute);
  CHECK(relative.value * 100.0 == doctest::Approx(23.3).epsilon(0.005));

  const auto absolute = master::compute_gap(0.22, 0.0);
  CHECK(absolute.is_absolute);
  CHECK(absolute.value == doctest::Approx(0.22));

  const auto closed = master::compute_gap(258.53, 258.53);
  CHECK_FALSE(closed.is_absolute);
  CHECK(closed.value == doctest::Approx(0.0));

  CHECK_THROWS_AS(master::compute_gap(1.0, 2.0), std::logic_error);
}

TEST_CASE("solution file schema and validation") {
  const Instance instance = two_gate_instance();
  master::Solution solution;
  solution.objective = 0.0;
  solution.lb = 0.0;
  solution.ub = 0.0;
  solution.gap = master::compute_gap(0.0, 0.0);
  solution.assignments = {{0, 0, 0, 30}, {1, 1, 5, 35}};
  solution.stats = {3, 7, 1, 0.25};
  master::validate_solution(instance, solution);

  const auto doc = nlohmann::json::parse(master::solution_to_json(solution));
  for (const char* key :
       {"objective", "lb", "ub", "gap", "gap_is_absolute", "assignments", "stats"})
    CHECK(doc.contains(key));
  CHECK(doc["assignments"].size() == 2);
  CHECK(doc["stats"]["columns"] == 7);

  // objective mismatch must be caught
  solution.objective = 3.0;
  CHECK_THROWS_AS(master::validate_solution(instance, solution), std::logic_error);
}
