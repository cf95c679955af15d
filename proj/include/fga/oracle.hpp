#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fga/model.hpp"
#include "fga/pricing.hpp"

namespace fga::oracle {

// Enumeration refused rather than truncated: an oracle never returns a
// non-exact answer.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PricingReport {
  double optimum = 0.0;
  std::vector<int> best_set;  // flight ids, ascending
  std::uint64_t enumerated = 0;
  double elapsed_seconds = 0.0;
};

// Exact maximum of the net-benefit objective over all subsets that contain
// every forced flight and no forbidden one. Hard cap: 20 flights.
PricingReport brute_force_pricing(const pricing::PricingInput& input);

struct AssignmentReport {
  Minutes optimum = 0;
  std::vector<int> gate_of_flight;
  std::uint64_t enumerated = 0;
  double elapsed_seconds = 0.0;
};

// Exact minimum total arrival delay over every compatible flight-to-gate
// map, serving each gate in arrival order. Hard cap: 1e7 assignments.
AssignmentReport brute_force_assignment(const Instance& instance);

}  // namespace fga::oracle
