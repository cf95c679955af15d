#include "fga/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "fga/rng.hpp"

namespace fga::pricing {

namespace {

void require_no_forbidden(const PricingInput& input, const char* op) {
  for (const PricingFlight& f : input.flights)
    if (f.status == FlightStatus::forbidden)
      throw std::invalid_argument(std::string(op) +
                                  ": forbidden flights must be removed first");
}

// Positions of `ids` within the input; throws unless ids form an ascending
// subset of the input's flight ids.
std::vector<int> positions_of(const PricingInput& input,
                              const std::vector<int>& ids, const char* op) {
  std::vector<int> pos;
  pos.reserve(ids.size());
  std::size_t cursor = 0;
  int prev = -1;
  for (int id : ids) {
    if (id <= prev)
      throw std::invalid_argument(std::string(op) +
                                  ": accepted ids must be strictly ascending");
    prev = id;
    while (cursor < input.flights.size() && input.flights[cursor].flight_id != id)
      ++cursor;
    if (cursor == input.flights.size())
      throw std::invalid_argument(std::string(op) + ": flight " +
                                  std::to_string(id) +
                                  " is not part of this pricing input");
    pos.push_back(static_cast<int>(cursor++));
  }
  return pos;
}

// Net benefit of a set of positions under the sequential rule.
double eval_positions(const PricingInput& input, const std::vector<int>& pos,
                      Minutes start, Minutes* gate_free_out = nullptr,
                      std::vector<Minutes>* parks_out = nullptr) {
  double value = 0.0;
  Minutes gate_free = start;
  if (parks_out) parks_out->clear();
  for (int p : pos) {
    const PricingFlight& f = input.flights[static_cast<std::size_t>(p)];
    const Minutes park = std::max(f.arrival, gate_free);
    value += f.benefit - static_cast<double>(park - f.arrival);
    gate_free = park + f.processing;
    if (parks_out) parks_out->push_back(park);
  }
  if (gate_free_out) *gate_free_out = gate_free;
  return value;
}

std::vector<int> ids_from_positions(const PricingInput& input,
                                    const std::vector<int>& pos) {
  std::vector<int> ids;
  ids.reserve(pos.size());
  for (int p : pos) ids.push_back(input.flights[static_cast<std::size_t>(p)].flight_id);
  return ids;
}

PricingResult make_result(const PricingInput& input, std::vector<int> positions,
                          Minutes start, std::string strategy) {
  PricingResult result;
  result.accepted = ids_from_positions(input, positions);
  result.objective =
      eval_positions(input, positions, start, nullptr, &result.park_times);
  result.strategy = std::move(strategy);
  return result;
}

// Memoized evaluation of the acceptance-window recursion. States are keyed
// on the clamped start time, which stays on the integral grid generated by
// {start, arrivals, +processing}.
class RecursiveDp {
 public:
  explicit RecursiveDp(const PricingInput& input)
      : input_(input),
        n_(static_cast<int>(input.flights.size())),
        memo_(static_cast<std::size_t>(n_)) {}

  double value(int i, Minutes t) {
    if (i >= n_) return 0.0;
    const PricingFlight& f = input_.flights[static_cast<std::size_t>(i)];
    if (f.status == FlightStatus::forced) {
      const Minutes park = std::max(t, f.arrival);
      auto& level = memo_[static_cast<std::size_t>(i)];
      if (auto it = level.find(park); it != level.end()) return it->second;
      const double v = f.benefit - static_cast<double>(park - f.arrival) +
                       value(i + 1, park + f.processing);
      level.emplace(park, v);
      return v;
    }
    const Minutes tc = std::max(t, f.arrival);
    if (static_cast<double>(tc) > static_cast<double>(f.arrival) + f.benefit)
      return value(i + 1, tc);
    auto& level = memo_[static_cast<std::size_t>(i)];
    if (auto it = level.find(tc); it != level.end()) return it->second;
    const double accept =
        static_cast<double>(f.arrival) + f.benefit - static_cast<double>(tc) +
        value(i + 1, tc + f.processing);
    const double reject = value(i + 1, tc);
    const double v = std::max(accept, reject);
    level.emplace(tc, v);
    return v;
  }

  // Walks the decisions forward, reproducing the comparisons made by
  // value(); ties go to the accept branch.
  std::vector<int> trace(Minutes start) {
    std::vector<int> accepted;
    Minutes t = start;
    for (int i = 0; i < n_; ++i) {
      const PricingFlight& f = input_.flights[static_cast<std::size_t>(i)];
      if (f.status == FlightStatus::forced) {
        const Minutes park = std::max(t, f.arrival);
        accepted.push_back(i);
        t = park + f.processing;
        continue;
      }
      const Minutes tc = std::max(t, f.arrival);
      if (static_cast<double>(tc) > static_cast<double>(f.arrival) + f.benefit) {
        t = tc;
        continue;
      }
      const double accept =
          static_cast<double>(f.arrival) + f.benefit - static_cast<double>(tc) +
          value(i + 1, tc + f.processing);
      const double reject = value(i + 1, tc);
      if (accept >= reject) {
        accepted.push_back(i);
        t = tc + f.processing;
      } else {
        t = tc;
      }
    }
    return accepted;
  }

 private:
  const PricingInput& input_;
  int n_;
  std::vector<std::unordered_map<Minutes, double>> memo_;
};

}  // namespace

PricingInput preprocess(const Instance& instance, const Gate& gate,
                        const std::vector<double>& benefits,
                        const GateRestrictions& restrictions) {
  if (benefits.size() != instance.flights.size())
    throw std::invalid_argument("preprocess: one benefit per flight required");
  const auto contains = [](const std::vector<int>& v, int id) {
    return std::find(v.begin(), v.end(), id) != v.end();
  };
  PricingInput input;
  input.gate_id = gate.id;
  for (const Flight& flight : instance.flights) {
    if (!is_compatible(flight, gate)) continue;
    if (contains(restrictions.forbidden_flights, flight.id)) continue;
    const bool forced = contains(restrictions.forced_flights, flight.id);
    const double pi = benefits[static_cast<std::size_t>(flight.id)];
    if (!forced && pi <= 0.0) continue;
    PricingFlight pf;
    pf.flight_id = flight.id;
    pf.arrival = flight.arrival;
    pf.benefit = pi;
    pf.processing = flight.min_turn + gate.buffer;
    pf.status = forced ? FlightStatus::forced : FlightStatus::free_flight;
    input.flights.push_back(pf);
  }
  return input;
}

double eval_f(const PricingInput& input, const std::vector<int>& accepted_ids) {
  return eval_positions(input, positions_of(input, accepted_ids, "eval_f"), 0);
}

std::vector<Minutes> park_times_for(const PricingInput& input,
                                    const std::vector<int>& accepted_ids,
                                    Minutes start) {
  std::vector<Minutes> parks;
  eval_positions(input, positions_of(input, accepted_ids, "park_times_for"),
                 start, nullptr, &parks);
  return parks;
}

PricingResult double_greedy(const PricingInput& input, std::uint64_t seed) {
  require_no_forbidden(input, "double_greedy");
  const int n = static_cast<int>(input.flights.size());
  Rng rng(seed);

  std::vector<int> x_set, y_set(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    y_set[static_cast<std::size_t>(i)] = i;
    if (input.flights[static_cast<std::size_t>(i)].status == FlightStatus::forced)
      x_set.push_back(i);
  }
  double fx = eval_positions(input, x_set, 0);
  double fy = eval_positions(input, y_set, 0);

  std::vector<int> scratch;
  for (int i = 0; i < n; ++i) {
    if (input.flights[static_cast<std::size_t>(i)].status == FlightStatus::forced)
      continue;  // pinned in X, never removed from Y

    scratch = x_set;
    scratch.insert(std::lower_bound(scratch.begin(), scratch.end(), i), i);
    const double gain_add = eval_positions(input, scratch, 0) - fx;

    scratch = y_set;
    scratch.erase(std::find(scratch.begin(), scratch.end(), i));
    const double gain_remove = eval_positions(input, scratch, 0) - fy;

    const double a = std::max(gain_add, 0.0);
    const double b = std::max(gain_remove, 0.0);
    const double p_accept = (a + b <= 0.0) ? 1.0 : a / (a + b);
    if (rng.uniform01() < p_accept) {
      x_set.insert(std::lower_bound(x_set.begin(), x_set.end(), i), i);
      fx += gain_add;
    } else {
      y_set.erase(std::find(y_set.begin(), y_set.end(), i));
      fy += gain_remove;
    }
  }
  return make_result(input, x_set, 0, "sm");
}

PricingResult dp_recursive(const PricingInput& input, Minutes start) {
  require_no_forbidden(input, "dp_recursive");
  RecursiveDp dp(input);
  dp.value(0, start);
  PricingResult result = make_result(input, dp.trace(start), start, "dp");
  return result;
}

namespace {

// Linear tails beyond the table horizon: for t > c every free flight's
// window has closed, so only forced flights contribute and their total is
// affine in t. tail_k[i] - tail_m[i] * t equals the row-i value.
struct ForcedTail {
  std::vector<double> k;
  std::vector<double> m;
};

ForcedTail forced_tail(const PricingInput& input) {
  const int n = static_cast<int>(input.flights.size());
  ForcedTail tail;
  tail.k.assign(static_cast<std::size_t>(n) + 1, 0.0);
  tail.m.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    const PricingFlight& f = input.flights[static_cast<std::size_t>(i)];
    if (f.status == FlightStatus::forced) {
      tail.k[i] = f.benefit + static_cast<double>(f.arrival) + tail.k[i + 1] -
                  tail.m[i + 1] * static_cast<double>(f.processing);
      tail.m[i] = tail.m[i + 1] + 1.0;
    } else {
      tail.k[i] = tail.k[i + 1];
      tail.m[i] = tail.m[i + 1];
    }
  }
  return tail;
}

}  // namespace

DpTable dp_tabular_table(const PricingInput& input, Minutes c) {
  require_no_forbidden(input, "dp_tabular");
  const int n = static_cast<int>(input.flights.size());
  Minutes max_arrival = 0;
  for (const PricingFlight& f : input.flights)
    max_arrival = std::max(max_arrival, f.arrival);
  if (c < max_arrival)
    throw std::invalid_argument("dp_tabular: c must be at least the largest arrival");

  DpTable table;
  table.c = c;
  table.g.assign(static_cast<std::size_t>(n) + 1,
                 std::vector<double>(static_cast<std::size_t>(c) + 1, 0.0));
  const ForcedTail tail = forced_tail(input);
  const auto lookup = [&](int i, Minutes t) {
    if (t <= c) return table.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
    return tail.k[static_cast<std::size_t>(i)] -
           tail.m[static_cast<std::size_t>(i)] * static_cast<double>(t);
  };

  for (int i = n - 1; i >= 0; --i) {
    const PricingFlight& f = input.flights[static_cast<std::size_t>(i)];
    auto& row = table.g[static_cast<std::size_t>(i)];
    const auto& next = table.g[static_cast<std::size_t>(i) + 1];
    for (Minutes t = c; t >= 0; --t) {
      double v;
      if (f.status == FlightStatus::forced) {
        const Minutes park = std::max(t, f.arrival);
        v = f.benefit - static_cast<double>(park - f.arrival) +
            lookup(i + 1, park + f.processing);
      } else if (t < f.arrival) {
        v = row[static_cast<std::size_t>(f.arrival)];
      } else if (static_cast<double>(t) > static_cast<double>(f.arrival) + f.benefit) {
        v = next[static_cast<std::size_t>(t)];
      } else {
        const double accept = static_cast<double>(f.arrival) + f.benefit -
                              static_cast<double>(t) +
                              lookup(i + 1, t + f.processing);
        v = std::max(accept, next[static_cast<std::size_t>(t)]);
      }
      row[static_cast<std::size_t>(t)] = v;
    }
  }
  return table;
}

PricingResult dp_tabular(const PricingInput& input, Minutes c) {
  const DpTable table = dp_tabular_table(input, c);
  const int n = static_cast<int>(input.flights.size());
  const ForcedTail tail = forced_tail(input);
  const auto lookup = [&](int i, Minutes t) {
    if (t <= c) return table.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
    return tail.k[static_cast<std::size_t>(i)] -
           tail.m[static_cast<std::size_t>(i)] * static_cast<double>(t);
  };

  std::vector<int> accepted;
  Minutes t = 0;
  for (int i = 0; i < n; ++i) {
    const PricingFlight& f = input.flights[static_cast<std::size_t>(i)];
    if (f.status == FlightStatus::forced) {
      const Minutes park = std::max(t, f.arrival);
      accepted.push_back(i);
      t = park + f.processing;
      continue;
    }
    const Minutes tc = std::max(t, f.arrival);
    if (static_cast<double>(tc) > static_cast<double>(f.arrival) + f.benefit)
      continue;
    const double accept = static_cast<double>(f.arrival) + f.benefit -
                          static_cast<double>(tc) +
                          lookup(i + 1, tc + f.processing);
    const double reject = lookup(i + 1, tc);
    if (accept >= reject) {
      accepted.push_back(i);
      t = tc + f.processing;
    }
  }
  PricingResult result = make_result(input, accepted, 0, "adp");
  return result;
}

Minutes horizon_c(const PricingInput& input) {
  if (input.flights.empty()) return 0;
  Minutes max_arrival = 0;
  double max_benefit = 0.0;
  for (const PricingFlight& f : input.flights) {
    max_arrival = std::max(max_arrival, f.arrival);
    max_benefit = std::max(max_benefit, f.benefit);
  }
  const Minutes c = static_cast<Minutes>(
      std::ceil(static_cast<double>(max_arrival) + max_benefit - 1e-12));
  return std::max(c, max_arrival);
}

int adjacency_parameter(const PricingInput& input) {
  const int n = static_cast<int>(input.flights.size());
  if (n <= 1) return 0;
  int sigma_bar = 0;
  for (int i = 0; i < n; ++i) {
    const PricingFlight& f = input.flights[static_cast<std::size_t>(i)];
    const double reach = static_cast<double>(f.arrival) + f.benefit +
                         static_cast<double>(f.processing);
    int sigma = n - 1 - i;  // no later flight escapes the window
    for (int j = i + 1; j < n; ++j) {
      if (static_cast<double>(input.flights[static_cast<std::size_t>(j)].arrival) >
          reach) {
        sigma = std::min(j - i, n - 1 - i);
        break;
      }
    }
    sigma_bar = std::max(sigma_bar, sigma);
  }
  return sigma_bar;
}

namespace {

PricingInput slice_input(const PricingInput& input, int begin, int end) {
  PricingInput sub;
  sub.gate_id = input.gate_id;
  sub.flights.assign(input.flights.begin() + begin, input.flights.begin() + end);
  return sub;
}

bool windows_respected(const PricingInput& input, const std::vector<int>& pos) {
  Minutes gate_free = 0;
  for (int p : pos) {
    const PricingFlight& f = input.flights[static_cast<std::size_t>(p)];
    const Minutes park = std::max(f.arrival, gate_free);
    if (f.status != FlightStatus::forced &&
        static_cast<double>(park) >
            static_cast<double>(f.arrival) + f.benefit + 1e-9)
      return false;
    gate_free = park + f.processing;
  }
  return true;
}

}  // namespace

PricingResult block_decomposition(const PricingInput& input, bool improve) {
  require_no_forbidden(input, "block_decomposition");
  const int n = static_cast<int>(input.flights.size());
  if (n == 0) return make_result(input, {}, 0, "bd");

  const int sigma = std::max(1, adjacency_parameter(input));
  std::vector<std::pair<int, int>> blocks;  // [begin, end)
  for (int begin = 0; begin < n; begin += sigma)
    blocks.emplace_back(begin, std::min(begin + sigma, n));

  double parity_sum[2] = {0.0, 0.0};
  std::vector<std::vector<int>> block_positions(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const PricingInput sub = slice_input(input, blocks[b].first, blocks[b].second);
    const PricingResult sol = dp_recursive(sub, 0);
    std::vector<int> pos = positions_of(sub, sol.accepted, "block_decomposition");
    for (int& p : pos) p += blocks[b].first;
    block_positions[b] = std::move(pos);
    parity_sum[b % 2] += sol.objective;
  }
  const int keep_parity = parity_sum[0] >= parity_sum[1] ? 0 : 1;

  std::vector<int> chosen;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (static_cast<int>(b % 2) == keep_parity)
      chosen.insert(chosen.end(), block_positions[b].begin(),
                    block_positions[b].end());

  if (improve) {
    double current = eval_positions(input, chosen, 0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (static_cast<int>(b % 2) == keep_parity) continue;
      for (int p = blocks[b].first; p < blocks[b].second; ++p) {
        if (input.flights[static_cast<std::size_t>(p)].status ==
            FlightStatus::forced)
          continue;
        std::vector<int> candidate = chosen;
        candidate.insert(
            std::lower_bound(candidate.begin(), candidate.end(), p), p);
        const double value = eval_positions(input, candidate, 0);
        if (value > current + 1e-12 && windows_respected(input, candidate)) {
          chosen = std::move(candidate);
          current = value;
        }
      }
    }
  }
  return make_result(input, chosen, 0, improve ? "bd+" : "bd");
}

PricingResult rolling_horizon(const PricingInput& input, int horizon, int window) {
  require_no_forbidden(input, "rolling_horizon");
  if (window < 1 || horizon < window)
    throw std::invalid_argument("rolling_horizon: requires horizon >= window >= 1");
  const int n = static_cast<int>(input.flights.size());

  std::vector<int> fixed;  // accepted positions committed so far
  Minutes t = 0;
  int s = 0;
  const auto commit = [&](const PricingInput& sub, const PricingResult& sol,
                          int offset, int take) {
    std::vector<int> pos = positions_of(sub, sol.accepted, "rolling_horizon");
    for (int p : pos)
      if (p < take) fixed.push_back(p + offset);
  };

  while (s + horizon <= n) {
    const PricingInput sub = slice_input(input, s, s + horizon);
    const PricingResult sol = dp_recursive(sub, t);
    commit(sub, sol, s, window);
    Minutes gate_free = 0;
    eval_positions(input, fixed, 0, &gate_free);
    t = gate_free;
    s += window;
  }
  const PricingInput sub = slice_input(input, s, n);
  const PricingResult sol = dp_recursive(sub, t);
  commit(sub, sol, s, n - s);

  return make_result(input, fixed, 0, "rh");
}

double reduced_cost_of_pattern(double pattern_cost,
                               const std::vector<int>& accepted_ids,
                               const std::vector<double>& pi, double mu) {
  double covered = 0.0;
  for (int id : accepted_ids) {
    if (id < 0 || id >= static_cast<int>(pi.size()))
      throw std::invalid_argument("reduced_cost_of_pattern: flight id out of range");
    covered += pi[static_cast<std::size_t>(id)];
  }
  return pattern_cost - covered - mu;
}

}  // namespace fga::pricing
