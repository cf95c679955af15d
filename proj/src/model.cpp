#include "fga/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fga/rng.hpp"
#include "json.hpp"

namespace fga {

bool is_compatible(const Flight& flight, const Gate& gate) {
  if (flight.aircraft_class == AircraftClass::heavy && !gate.heavy_capable)
    return false;
  if (!gate.eligible_airlines.empty() &&
      gate.eligible_airlines.count(flight.airline) == 0)
    return false;
  return true;
}

GateSchedule evaluate_sequence(const Instance& instance, const Gate& gate,
                               const std::vector<int>& flight_ids) {
  GateSchedule schedule;
  schedule.gate_id = gate.id;
  schedule.accepted = flight_ids;
  schedule.park_times.reserve(flight_ids.size());
  schedule.pushback_times.reserve(flight_ids.size());

  Minutes gate_free = 0;
  int prev_id = -1;
  for (int id : flight_ids) {
    if (id < 0 || id >= static_cast<int>(instance.flights.size()))
      throw std::invalid_argument("evaluate_sequence: unknown flight id " +
                                  std::to_string(id));
    if (id <= prev_id)
      throw std::invalid_argument(
          "evaluate_sequence: flight ids must be strictly ascending");
    prev_id = id;
    const Flight& flight = instance.flights[id];
    if (!is_compatible(flight, gate))
      throw std::invalid_argument("evaluate_sequence: flight " +
                                  std::to_string(id) +
                                  " incompatible with gate " +
                                  std::to_string(gate.id));
    const Minutes park = std::max(flight.arrival, gate_free);
    const Minutes push = park + flight.min_turn;
    schedule.park_times.push_back(park);
    schedule.pushback_times.push_back(push);
    schedule.total_delay += park - flight.arrival;
    gate_free = push + gate.buffer;
  }
  return schedule;
}

Instance generate_instance(const GeneratorConfig& config) {
  if (config.n_flights < 1) throw std::invalid_argument("n_flights must be >= 1");
  if (config.n_gates < 1) throw std::invalid_argument("n_gates must be >= 1");
  if (config.mean_interarrival_minutes <= 0)
    throw std::invalid_argument("mean_interarrival_minutes must be > 0");
  if (config.heavy_fraction < 0 || config.heavy_fraction > 1)
    throw std::invalid_argument("heavy_fraction must lie in [0,1]");
  if (config.airline_pool.empty())
    throw std::invalid_argument("airline_pool must not be empty");
  if (config.buffer < 0) throw std::invalid_argument("buffer must be >= 0");
  if (config.turn_regular <= 0 || config.turn_heavy <= 0)
    throw std::invalid_argument("turn times must be > 0");

  Rng rng(config.seed);
  Instance instance;
  instance.name = config.name.empty()
                      ? "f" + std::to_string(config.n_flights) + "g" +
                            std::to_string(config.n_gates) + "s" +
                            std::to_string(config.seed)
                      : config.name;

  const Minutes gap_hi =
      std::max<Minutes>(1, std::llround(2.0 * config.mean_interarrival_minutes));
  Minutes arrival = 0;
  for (int i = 0; i < config.n_flights; ++i) {
    if (i > 0) arrival += rng.uniform_int(0, gap_hi);
    Flight flight;
    flight.id = i;
    flight.arrival = arrival;
    flight.aircraft_class = rng.bernoulli(config.heavy_fraction)
                                ? AircraftClass::heavy
                                : AircraftClass::regular;
    flight.min_turn = flight.aircraft_class == AircraftClass::heavy
                          ? config.turn_heavy
                          : config.turn_regular;
    flight.airline = config.airline_pool[static_cast<std::size_t>(rng.uniform_int(
        0, static_cast<std::int64_t>(config.airline_pool.size()) - 1))];
    instance.flights.push_back(std::move(flight));
  }

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    instance.gates.clear();
    for (int k = 0; k < config.n_gates; ++k) {
      Gate gate;
      gate.id = k;
      gate.buffer = config.buffer;
      gate.heavy_capable = rng.bernoulli(config.heavy_gate_fraction);
      if (!rng.bernoulli(config.open_gate_fraction)) {
        for (const std::string& airline : config.airline_pool)
          if (rng.bernoulli(0.5)) gate.eligible_airlines.insert(airline);
        if (gate.eligible_airlines.empty())
          gate.eligible_airlines.insert(
              config.airline_pool[static_cast<std::size_t>(rng.uniform_int(
                  0, static_cast<std::int64_t>(config.airline_pool.size()) - 1))]);
      }
      instance.gates.push_back(std::move(gate));
    }
    const bool all_assignable = std::all_of(
        instance.flights.begin(), instance.flights.end(), [&](const Flight& f) {
          return std::any_of(instance.gates.begin(), instance.gates.end(),
                             [&](const Gate& g) { return is_compatible(f, g); });
        });
    if (all_assignable) return instance;
  }
  throw GenerationError(
      "generate_instance: no compatible gate set found after " +
      std::to_string(kMaxAttempts) + " attempts");
}

void validate_instance(const Instance& instance) {
  Minutes prev_arrival = 0;
  for (std::size_t i = 0; i < instance.flights.size(); ++i) {
    const Flight& f = instance.flights[i];
    if (f.id != static_cast<int>(i))
      throw ParseError("flights[" + std::to_string(i) +
                       "].id: ids must be dense and ascending (expected " +
                       std::to_string(i) + ", got " + std::to_string(f.id) + ")");
    if (f.arrival < 0)
      throw ParseError("flights[" + std::to_string(i) + "].arrival: must be >= 0");
    if (f.min_turn <= 0)
      throw ParseError("flights[" + std::to_string(i) + "].min_turn: must be > 0");
    if (i > 0 && f.arrival < prev_arrival)
      throw ParseError("flights[" + std::to_string(i) +
                       "].arrival: arrivals must be nondecreasing");
    prev_arrival = f.arrival;
  }
  for (std::size_t k = 0; k < instance.gates.size(); ++k) {
    const Gate& g = instance.gates[k];
    if (g.id != static_cast<int>(k))
      throw ParseError("gates[" + std::to_string(k) +
                       "].id: ids must be dense and ascending");
    if (g.buffer < 0)
      throw ParseError("gates[" + std::to_string(k) + "].buffer: must be >= 0");
  }
  for (const Flight& f : instance.flights) {
    const bool ok =
        std::any_of(instance.gates.begin(), instance.gates.end(),
                    [&](const Gate& g) { return is_compatible(f, g); });
    if (!ok)
      throw ValidationError("flight " + std::to_string(f.id) +
                            " has no compatible gate");
  }
}

namespace {

using json = nlohmann::ordered_json;

std::string class_name(AircraftClass c) {
  return c == AircraftClass::heavy ? "heavy" : "regular";
}

AircraftClass class_from_name(const std::string& s, const std::string& where) {
  if (s == "heavy") return AircraftClass::heavy;
  if (s == "regular") return AircraftClass::regular;
  throw ParseError(where + ": unknown aircraft class '" + s + "'");
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + "." + key + ": missing field");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + "." + key + ": wrong type");
  }
}

}  // namespace

std::string instance_to_json(const Instance& instance) {
  json doc;
  doc["name"] = instance.name;
  doc["flights"] = json::array();
  for (const Flight& f : instance.flights) {
    json jf;
    jf["id"] = f.id;
    jf["arrival"] = f.arrival;
    jf["min_turn"] = f.min_turn;
    jf["airline"] = f.airline;
    jf["class"] = class_name(f.aircraft_class);
    doc["flights"].push_back(std::move(jf));
  }
  doc["gates"] = json::array();
  for (const Gate& g : instance.gates) {
    json jg;
    jg["id"] = g.id;
    jg["buffer"] = g.buffer;
    jg["heavy_capable"] = g.heavy_capable;
    jg["eligible_airlines"] = g.eligible_airlines;
    doc["gates"].push_back(std::move(jg));
  }
  return doc.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("instance: invalid JSON: ") + e.what());
  }
  Instance instance;
  instance.name = require<std::string>(doc, "name", "instance");
  if (!doc.contains("flights") || !doc["flights"].is_array())
    throw ParseError("instance.flights: missing or not an array");
  if (!doc.contains("gates") || !doc["gates"].is_array())
    throw ParseError("instance.gates: missing or not an array");
  std::size_t i = 0;
  for (const json& jf : doc["flights"]) {
    const std::string where = "flights[" + std::to_string(i++) + "]";
    Flight f;
    f.id = require<int>(jf, "id", where);
    f.arrival = require<Minutes>(jf, "arrival", where);
    f.min_turn = require<Minutes>(jf, "min_turn", where);
    f.airline = require<std::string>(jf, "airline", where);
    f.aircraft_class = class_from_name(require<std::string>(jf, "class", where),
                                       where + ".class");
    instance.flights.push_back(std::move(f));
  }
  std::size_t k = 0;
  for (const json& jg : doc["gates"]) {
    const std::string where = "gates[" + std::to_string(k++) + "]";
    Gate g;
    g.id = require<int>(jg, "id", where);
    g.buffer = require<Minutes>(jg, "buffer", where);
    g.heavy_capable = require<bool>(jg, "heavy_capable", where);
    g.eligible_airlines =
        require<std::set<std::string>>(jg, "eligible_airlines", where);
    instance.gates.push_back(std::move(g));
  }
  validate_instance(instance);
  return instance;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void save_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << instance_to_json(instance);
}

void save_instance_csv(const Instance& instance, const std::string& flights_path,
                       const std::string& gates_path) {
  std::ofstream ff(flights_path);
  if (!ff) throw std::runtime_error("cannot write " + flights_path);
  ff << "id,arrival,min_turn,airline,class\n";
  for (const Flight& f : instance.flights)
    ff << f.id << ',' << f.arrival << ',' << f.min_turn << ',' << f.airline << ','
       << class_name(f.aircraft_class) << '\n';

  std::ofstream gf(gates_path);
  if (!gf) throw std::runtime_error("cannot write " + gates_path);
  gf << "id,buffer,heavy_capable,eligible_airlines\n";
  for (const Gate& g : instance.gates) {
    gf << g.id << ',' << g.buffer << ',' << (g.heavy_capable ? 1 : 0) << ',';
    bool first = true;
    for (const std::string& a : g.eligible_airlines) {
      if (!first) gf << ';';
      gf << a;
      first = false;
    }
    gf << '\n';
  }
}

}  // namespace fga
