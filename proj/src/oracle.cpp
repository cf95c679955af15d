#include "fga/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <string>

namespace fga::oracle {

namespace {

// The oracle keeps its own copy of the sequential delay rule on purpose; it
// must not share code with the implementation it cross-checks.
double net_benefit_of_subset(const pricing::PricingInput& input,
                             std::uint32_t member_mask,
                             const std::vector<int>& free_positions) {
  double value = 0.0;
  Minutes gate_free = 0;
  std::size_t bit = 0;
  for (std::size_t i = 0; i < input.flights.size(); ++i) {
    const pricing::PricingFlight& f = input.flights[i];
    bool in = false;
    if (f.status == pricing::FlightStatus::forced) {
      in = true;
    } else if (f.status == pricing::FlightStatus::free_flight) {
      if (bit < free_positions.size() &&
          free_positions[bit] == static_cast<int>(i)) {
        in = (member_mask >> bit) & 1u;
        ++bit;
      }
    }
    if (!in) continue;
    const Minutes park = std::max(f.arrival, gate_free);
    value += f.benefit - static_cast<double>(park - f.arrival);
    gate_free = park + f.processing;
  }
  return value;
}

}  // namespace

PricingReport brute_force_pricing(const pricing::PricingInput& input) {
  if (input.flights.size() > 20)
    throw CapExceeded("brute_force_pricing: more than 20 flights (" +
                      std::to_string(input.flights.size()) + ")");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<int> free_positions;
  for (std::size_t i = 0; i < input.flights.size(); ++i)
    if (input.flights[i].status == pricing::FlightStatus::free_flight)
      free_positions.push_back(static_cast<int>(i));

  PricingReport report;
  const std::uint32_t subsets = 1u << free_positions.size();
  double best = -std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    const double value = net_benefit_of_subset(input, mask, free_positions);
    if (value > best) {
      best = value;
      best_mask = mask;
    }
  }
  report.enumerated = subsets;
  report.optimum = best;
  for (std::size_t i = 0, bit = 0; i < input.flights.size(); ++i) {
    const pricing::PricingFlight& f = input.flights[i];
    if (f.status == pricing::FlightStatus::forced) {
      report.best_set.push_back(f.flight_id);
    } else if (f.status == pricing::FlightStatus::free_flight) {
      if ((best_mask >> bit) & 1u) report.best_set.push_back(f.flight_id);
      ++bit;
    }
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

AssignmentReport brute_force_assignment(const Instance& instance) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(instance.flights.size());
  const int n_gates = static_cast<int>(instance.gates.size());

  std::vector<std::vector<int>> compatible(static_cast<std::size_t>(n));
  double combinations = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n_gates; ++k)
      if (is_compatible(instance.flights[static_cast<std::size_t>(i)],
                        instance.gates[static_cast<std::size_t>(k)]))
        compatible[static_cast<std::size_t>(i)].push_back(k);
    if (compatible[static_cast<std::size_t>(i)].empty())
      throw std::invalid_argument("brute_force_assignment: flight " +
                                  std::to_string(i) + " has no compatible gate");
    combinations *= static_cast<double>(compatible[static_cast<std::size_t>(i)].size());
    if (combinations > 1e7)
      throw CapExceeded("brute_force_assignment: more than 1e7 assignments");
  }

  std::vector<int> choice(static_cast<std::size_t>(n), 0);
  std::vector<Minutes> gate_free(static_cast<std::size_t>(n_gates));
  AssignmentReport report;
  Minutes best = std::numeric_limits<Minutes>::max();
  std::vector<int> best_choice;
  std::uint64_t count = 0;
  while (true) {
    ++count;
    std::fill(gate_free.begin(), gate_free.end(), 0);
    Minutes total = 0;
    for (int i = 0; i < n; ++i) {
      const Flight& f = instance.flights[static_cast<std::size_t>(i)];
      const int k =
          compatible[static_cast<std::size_t>(i)][static_cast<std::size_t>(
              choice[static_cast<std::size_t>(i)])];
      const Minutes park = std::max(f.arrival, gate_free[static_cast<std::size_t>(k)]);
      total += park - f.arrival;
      gate_free[static_cast<std::size_t>(k)] =
          park + f.min_turn + instance.gates[static_cast<std::size_t>(k)].buffer;
    }
    if (total < best) {
      best = total;
      best_choice = choice;
    }
    // odometer step, last flight fastest
    int pos = n - 1;
    while (pos >= 0) {
      if (++choice[static_cast<std::size_t>(pos)] <
          static_cast<int>(compatible[static_cast<std::size_t>(pos)].size()))
        break;
      choice[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }

  report.optimum = best;
  report.enumerated = count;
  report.gate_of_flight.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    report.gate_of_flight[static_cast<std::size_t>(i)] =
        compatible[static_cast<std::size_t>(i)][static_cast<std::size_t>(
            best_choice[static_cast<std::size_t>(i)])];
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace fga::oracle
