#include <algorithm>
#include <vector>

#include "doctest.h"
#include "fga/oracle.hpp"
#include "fga/pricing.hpp"
#include "fga/rng.hpp"

using namespace fga;
using pricing::FlightStatus;
using pricing::PricingInput;

namespace {

PricingInput make_input(std::vector<std::tuple<Minutes, double, Minutes>> rows) {
  PricingInput input;
  input.gate_id = 0;
  int id = 0;
  for (const auto& [a, pi, p] : rows)
    input.flights.push_back({id++, a, pi, p, FlightStatus::free_flight});
  return input;
}

}  // namespace

TEST_CASE("pricing oracle on small sets") {
  const auto input = make_input({{0, 3.0, 10}, {5, 4.0, 10}});
  const auto report = oracle::brute_force_pricing(input);
  CHECK(report.optimum == doctest::Approx(4.0));
  CHECK(report.best_set == std::vector<int>{1});
  CHECK(report.enumerated == 4);

  const auto empty = oracle::brute_force_pricing(PricingInput{0, {}});
  CHECK(empty.optimum == 0.0);
  CHECK(empty.best_set.empty());
}

TEST_CASE("pricing oracle respects forced flights") {
  auto input = make_input({{0, 3.0, 10}, {5, 4.0, 10}});
  input.flights[0].status = FlightStatus::forced;
  const auto report = oracle::brute_force_pricing(input);
  CHECK(report.optimum == doctest::Approx(3.0));
  CHECK(report.best_set == std::vector<int>{0});
}

TEST_CASE("pricing oracle refuses oversized inputs") {
  PricingInput input;
  input.gate_id = 0;
  for (int i = 0; i < 21; ++i)
    input.flights.push_back({i, i * 10, 1.0, 5, FlightStatus::free_flight});
  CHECK_THROWS_AS(oracle::brute_force_pricing(input), oracle::CapExceeded);
}

TEST_CASE("pricing oracle is self consistent") {
  Rng rng(424242);
  for (int trial = 0; trial < 40; ++trial) {
    PricingInput input;
    input.gate_id = 0;
    Minutes arrival = 0;
    const int n = static_cast<int>(rng.uniform_int(1, 10));
    for (int i = 0; i < n; ++i) {
      arrival += rng.uniform_int(0, 20);
      input.flights.push_back({i, arrival, rng.uniform01() * 30, rng.uniform_int(5, 40),
                               FlightStatus::free_flight});
    }
    const auto report = oracle::brute_force_pricing(input);
    CHECK(pricing::eval_f(input, report.best_set) ==
          doctest::Approx(report.optimum).epsilon(1e-12));
  }
}

TEST_CASE("assignment oracle on hand-checked instances") {
  Instance instance;
  instance.flights = {Flight{0, 0, 30, "DL", AircraftClass::regular},
                      Flight{1, 5, 30, "DL", AircraftClass::regular}};

  SUBCASE("single flight, single gate: no delay") {
    Instance one;
    one.flights = {instance.flights[0]};
    one.gates = {Gate{0, 10, true, {}}};
    const auto report = oracle::brute_force_assignment(one);
    CHECK(report.optimum == 0);
    CHECK(report.gate_of_flight == std::vector<int>{0});
  }
  SUBCASE("two flights, two gates: separation wins") {
    instance.gates = {Gate{0, 10, true, {}}, Gate{1, 10, true, {}}};
    const auto report = oracle::brute_force_assignment(instance);
    CHECK(report.optimum == 0);
    CHECK(report.enumerated == 4);
  }
  SUBCASE("two flights, one gate: forced sequencing") {
    instance.gates = {Gate{0, 10, true, {}}};
    const auto report = oracle::brute_force_assignment(instance);
    CHECK(report.optimum == 35);
  }
}

TEST_CASE("assignment oracle refuses oversized products") {
  Instance instance;
  for (int i = 0; i < 30; ++i)
    instance.flights.push_back(Flight{i, i * 2, 30, "DL", AircraftClass::regular});
  for (int k = 0; k < 4; ++k) instance.gates.push_back(Gate{k, 5, true, {}});
  // 4^30 combinations blows through the cap
  CHECK_THROWS_AS(oracle::brute_force_assignment(instance), oracle::CapExceeded);
}

TEST_CASE("serving in arrival order is consistent with the pair constraints") {
  // Any permuted service order that still satisfies the pairwise spacing
  // constraints cannot beat arrival order; permutations violating them are
  // discarded.
  Rng rng(777);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 5));
    Instance instance;
    Minutes arrival = 0;
    for (int i = 0; i < n; ++i) {
      arrival += rng.uniform_int(0, 30);
      instance.flights.push_back(
          Flight{i, arrival, rng.uniform_int(10, 50), "DL", AircraftClass::regular});
    }
    const Gate gate{0, rng.uniform_int(0, 10), true, {}};
    instance.gates = {gate};

    const GateSchedule fcfs = evaluate_sequence(instance, gate, [&] {
      std::vector<int> ids(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
      return ids;
    }());

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    do {
      // park times when serving in this order
      std::vector<Minutes> park(static_cast<std::size_t>(n));
      Minutes gate_free = 0;
      for (int pos = 0; pos < n; ++pos) {
        const Flight& f = instance.flights[static_cast<std::size_t>(
            order[static_cast<std::size_t>(pos)])];
        const Minutes p = std::max(f.arrival, gate_free);
        park[static_cast<std::size_t>(f.id)] = p;
        gate_free = p + f.min_turn + gate.buffer;
      }
      bool satisfies_pairs = true;
      Minutes total = 0;
      for (int i = 0; i < n && satisfies_pairs; ++i) {
        total += park[static_cast<std::size_t>(i)] -
                 instance.flights[static_cast<std::size_t>(i)].arrival;
        for (int j = i + 1; j < n; ++j)
          if (park[static_cast<std::size_t>(j)] <
              park[static_cast<std::size_t>(i)] +
                  instance.flights[static_cast<std::size_t>(i)].min_turn +
                  gate.buffer)
            satisfies_pairs = false;
      }
      if (satisfies_pairs) CHECK(total >= fcfs.total_delay);
    } while (std::next_permutation(order.begin(), order.end()));
  }
}
