#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fga {

// All schedule data is kept in integer minutes. Dual values stay fractional;
// the integral time grid is what makes the tabular pricing scheme exact.
using Minutes = std::int64_t;

enum class AircraftClass { regular, heavy };

struct Flight {
  int id = 0;           // dense 0..n-1, nondecreasing in arrival
  Minutes arrival = 0;  // a_i
  Minutes min_turn = 0; // minimum gate occupation before pushback
  std::string airline;
  AircraftClass aircraft_class = AircraftClass::regular;

  bool operator==(const Flight&) const = default;
};

struct Gate {
  int id = 0;
  Minutes buffer = 0;  // idle time required between pushback and next park
  bool heavy_capable = false;
  std::set<std::string> eligible_airlines;  // empty set admits every airline

  bool operator==(const Gate&) const = default;
};

struct Instance {
  std::string name;
  std::vector<Flight> flights;  // sorted by arrival, ties in input order
  std::vector<Gate> gates;

  bool operator==(const Instance&) const = default;
};

// Raised when a file cannot be parsed into a well-formed instance. The
// message names the offending field.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an instance is structurally well-formed but unusable, e.g. a
// flight with no compatible gate.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_compatible(const Flight& flight, const Gate& gate);

struct GateSchedule {
  int gate_id = 0;
  std::vector<int> accepted;            // flight ids, ascending
  std::vector<Minutes> park_times;      // one per accepted flight
  std::vector<Minutes> pushback_times;  // park + min_turn
  Minutes total_delay = 0;              // sum of park - arrival
};

// Serves the given flights at the gate in list order: the first flight parks
// at its arrival, each later one at max(own arrival, previous pushback +
// buffer). Flight ids must be ascending and compatible with the gate.
GateSchedule evaluate_sequence(const Instance& instance, const Gate& gate,
                               const std::vector<int>& flight_ids);

struct GeneratorConfig {
  int n_flights = 1;
  int n_gates = 1;
  double mean_interarrival_minutes = 10.0;
  double heavy_fraction = 0.2;
  std::vector<std::string> airline_pool = {"DL", "AA", "UA", "WN", "B6"};
  std::uint64_t seed = 1;
  Minutes buffer = 5;            // identical buffer per gate
  Minutes turn_regular = 30;
  Minutes turn_heavy = 45;
  double heavy_gate_fraction = 0.5;
  double open_gate_fraction = 0.5;  // gates with no airline restriction
  std::string name;                 // default: f<N>g<G>s<seed>
};

// Deterministic given the seed. Inter-arrival times are uniform on
// [0, 2*mean]; gate eligibility is redrawn (bounded retries) until every
// flight has at least one compatible gate.
Instance generate_instance(const GeneratorConfig& config);

// Checks all type invariants plus per-flight assignability. Throws
// ParseError / ValidationError.
void validate_instance(const Instance& instance);

Instance load_instance(const std::string& path);
void save_instance(const Instance& instance, const std::string& path);
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

// CSV export mirroring the JSON fields, one file per record type.
void save_instance_csv(const Instance& instance, const std::string& flights_path,
                       const std::string& gates_path);

}  // namespace fga
