#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fga/model.hpp"

namespace fga::pricing {

enum class FlightStatus { free_flight, forced, forbidden };

struct PricingFlight {
  int flight_id = 0;
  Minutes arrival = 0;     // a_i
  double benefit = 0.0;    // folded dual value of the cover row
  Minutes processing = 0;  // min_turn + gate buffer
  FlightStatus status = FlightStatus::free_flight;
};

// Per-gate pricing problem after preprocessing: compatible flights only,
// sorted ascending by arrival (same order as flight ids).
struct PricingInput {
  int gate_id = -1;
  std::vector<PricingFlight> flights;
};

struct PricingResult {
  std::vector<int> accepted;        // flight ids, ascending
  std::vector<Minutes> park_times;  // sequential-rule park times from t = 0
  double objective = 0.0;           // sum of benefits minus sum of delays
  std::string strategy;
};

// Branching state relevant to one gate.
struct GateRestrictions {
  std::vector<int> forced_flights;     // must appear in every priced pattern
  std::vector<int> forbidden_flights;  // removed from the flight set
};

// Builds the per-gate flight set: compatible flights, minus forbidden ones,
// minus free flights whose folded benefit is <= 0. Forced flights are always
// retained. `benefits` is indexed by flight id.
PricingInput preprocess(const Instance& instance, const Gate& gate,
                        const std::vector<double>& benefits,
                        const GateRestrictions& restrictions = {});

// Net-benefit objective of an accepted set: sum of benefits minus the sum of
// arrival delays under the sequential rule. f(empty) = 0. `accepted_ids`
// must be an ascending subset of the input's flight ids.
double eval_f(const PricingInput& input, const std::vector<int>& accepted_ids);

// Sequential-rule park times of an accepted id set, first park no earlier
// than `start`.
std::vector<Minutes> park_times_for(const PricingInput& input,
                                    const std::vector<int>& accepted_ids,
                                    Minutes start = 0);

// Randomized double greedy over the flight set: grows X from empty, shrinks
// Y from the full set, accepting each flight with probability proportional
// to the positive marginal gains (accept when both clamp to zero). Forced
// flights are pinned into X and never removed.
PricingResult double_greedy(const PricingInput& input, std::uint64_t seed);

// Exact maximization by the acceptance-window recursion, memoized on the
// integral time grid. Forced flights have their reject branch disabled and
// no window cutoff. `start` is the earliest admissible park time.
PricingResult dp_recursive(const PricingInput& input, Minutes start = 0);

// Backward table version of the recursion over t in {0..c}; exact whenever
// arrivals and processing times are integral (benefits may be fractional).
// Requires c >= the largest arrival.
PricingResult dp_tabular(const PricingInput& input, Minutes c);

struct DpTable {
  Minutes c = 0;
  // g[i][t] = best net benefit from flights i..n-1 when the earliest park
  // time is t; g[n] is identically zero.
  std::vector<std::vector<double>> g;
};
DpTable dp_tabular_table(const PricingInput& input, Minutes c);

// Last time worth considering: ceil(a_n + max benefit); 0 for an empty set.
Minutes horizon_c(const PricingInput& input);

// Largest index distance over which one flight's acceptance window plus
// processing can still delay another flight.
int adjacency_parameter(const PricingInput& input);

// Splits the flight set into adjacency-sized blocks, solves each block
// exactly, keeps the parity class with the larger total, and cascades it.
// With `improve`, flights from the dropped parity class are greedily
// inserted when that raises the objective without pushing any accepted
// flight past its acceptance window.
PricingResult block_decomposition(const PricingInput& input, bool improve);

// Solves `horizon`-sized windows exactly, committing the first `window`
// decisions each round. Requires horizon >= window >= 1.
PricingResult rolling_horizon(const PricingInput& input, int horizon, int window);

// Reduced cost of a pattern: cost - sum of covered duals - gate dual.
double reduced_cost_of_pattern(double pattern_cost,
                               const std::vector<int>& accepted_ids,
                               const std::vector<double>& pi, double mu);

}  // namespace fga::pricing
