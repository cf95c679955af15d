#include "fga/bnp.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <thread>

#include "fga/rng.hpp"

namespace fga::bnp {

namespace {
constexpr double kFavorableTol = 1e-6;
}

std::map<std::pair<int, int>, double> fractional_assignments(
    const master::ColumnPool& pool, const std::vector<double>& z) {
  if (z.size() != pool.size())
    throw std::invalid_argument("fractional_assignments: z size mismatch");
  std::map<std::pair<int, int>, double> y;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] <= 1e-12) continue;
    const master::Pattern& p = pool.columns()[j];
    for (int id : p.accepted) y[{id, p.gate_id}] += z[j];
  }
  return y;
}

std::optional<std::pair<int, int>> select_branch(
    const std::map<std::pair<int, int>, double>& y) {
  std::optional<std::pair<int, int>> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& [key, value] : y) {
    if (std::fabs(value - std::round(value)) <= 1e-6) continue;
    const double score = std::fabs(value - 0.5);
    if (score < best_score) {  // map order breaks ties by flight then gate
      best_score = score;
      best = key;
    }
  }
  return best;
}

std::pair<BnPNode, BnPNode> make_children(const BnPNode& node, int flight,
                                          int gate) {
  for (const BranchConstraint& c : node.constraints)
    if (c.flight == flight && c.gate == gate)
      throw std::logic_error("make_children: pair already constrained on this path");
  BnPNode left, right;
  left.parent = node.id;
  right.parent = node.id;
  left.lb = node.lb;
  right.lb = node.lb;
  left.constraints = node.constraints;
  right.constraints = node.constraints;
  left.constraints.push_back({flight, gate, BranchDirection::force_on});
  right.constraints.push_back({flight, gate, BranchDirection::force_off});
  return {std::move(left), std::move(right)};
}

FoldedDuals fold_branch_duals(const master::MasterSolution& duals,
                              const std::vector<BranchConstraint>& path,
                              int gate, int n_flights) {
  if (static_cast<int>(duals.pi.size()) != n_flights)
    throw std::invalid_argument("fold_branch_duals: pi size mismatch");
  if (duals.lambda.size() != path.size())
    throw std::invalid_argument("fold_branch_duals: one lambda per constraint");
  FoldedDuals out;
  out.pi = duals.pi;
  out.mu = duals.mu.at(static_cast<std::size_t>(gate));
  for (std::size_t b = 0; b < path.size(); ++b) {
    const BranchConstraint& c = path[b];
    const double lambda = duals.lambda[b];
    if (c.direction == BranchDirection::force_on) {
      out.pi[static_cast<std::size_t>(c.flight)] += lambda;
      if (c.gate == gate) out.mu += lambda;
    } else if (c.gate == gate) {
      out.pi[static_cast<std::size_t>(c.flight)] += lambda;
    }
  }
  return out;
}

pricing::GateRestrictions restrictions_for(
    const std::vector<BranchConstraint>& path, int gate) {
  pricing::GateRestrictions restrictions;
  for (const BranchConstraint& c : path) {
    if (c.gate != gate) continue;
    if (c.direction == BranchDirection::force_on)
      restrictions.forced_flights.push_back(c.flight);
    else
      restrictions.forbidden_flights.push_back(c.flight);
  }
  return restrictions;
}

namespace {

using Clock = std::chrono::steady_clock;

struct PricedGate {
  std::vector<master::Pattern> favorable;
};

// Runs a function over all gate indices on the configured worker count.
void for_each_gate(int n_gates, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n_gates <= 1) {
    for (int g = 0; g < n_gates; ++g) fn(g);
    return;
  }
  std::atomic<int> next{0};
  const int workers = std::min(threads, n_gates);
  std::vector<std::thread> crew;
  crew.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    crew.emplace_back([&] {
      for (int g = next.fetch_add(1); g < n_gates; g = next.fetch_add(1)) fn(g);
    });
  for (std::thread& t : crew) t.join();
}

struct ChainContext {
  const Instance& instance;
  const SolverConfig& config;
  int node_id = 0;
  int iteration = 0;
};

// Heuristic phase of the strategy chain for one gate. Returns candidate
// accepted sets (deduplicated); favorability is judged by the caller.
std::vector<pricing::PricingResult> run_heuristics(const ChainContext& ctx,
                                                   const pricing::PricingInput& input,
                                                   int gate) {
  std::vector<pricing::PricingResult> out;
  if (input.flights.empty()) return out;
  const std::string& strategy = ctx.config.pricing;

  const auto greedy_trials = [&] {
    std::set<std::vector<int>> seen;
    for (int trial = 0; trial < ctx.config.sm_seeds; ++trial) {
      const std::uint64_t seed =
          mix_seed(mix_seed(ctx.config.seed, static_cast<std::uint64_t>(ctx.node_id)),
                   mix_seed(static_cast<std::uint64_t>(ctx.iteration),
                            (static_cast<std::uint64_t>(gate) << 20) |
                                static_cast<std::uint64_t>(trial)));
      pricing::PricingResult r = pricing::double_greedy(input, seed);
      if (!r.accepted.empty() && seen.insert(r.accepted).second)
        out.push_back(std::move(r));
    }
  };
  const auto rolling = [&](int horizon) {
    pricing::PricingResult r =
        pricing::rolling_horizon(input, std::max(1, horizon), ctx.config.rh_window);
    if (!r.accepted.empty()) out.push_back(std::move(r));
  };

  if (strategy == "sm+dp") {
    greedy_trials();
  } else if (strategy == "adp+dp") {
    if (ctx.iteration <= ctx.config.adp_rounds) {
      pricing::PricingResult r =
          pricing::dp_tabular(input, pricing::horizon_c(input));
      if (!r.accepted.empty()) out.push_back(std::move(r));
    }
  } else if (strategy == "rhf") {
    rolling(ctx.config.rh_horizon);
  } else if (strategy == "rhm") {
    rolling(std::min(ctx.config.rh_horizon, pricing::adjacency_parameter(input)));
  } else if (strategy == "sm+rhm") {
    const int sigma = pricing::adjacency_parameter(input);
    if (sigma > ctx.config.sm_sigma_threshold &&
        ctx.iteration <= ctx.config.sm_iteration_cap)
      greedy_trials();
    else
      rolling(std::min(ctx.config.rh_horizon, sigma));
  } else if (strategy != "dp") {
    throw std::invalid_argument("unknown pricing strategy: " + strategy);
  }
  return out;
}

class Driver {
 public:
  Driver(const Instance& instance, const SolverConfig& config)
      : instance_(instance), config_(config), pool_(instance) {}

  Result run();

 private:
  struct RoundOutcome {
    int added = 0;
    bool exact_ran = false;
    std::string tag;
  };

  bool time_exceeded() const {
    return config_.time_limit_seconds > 0 &&
           std::chrono::duration<double>(Clock::now() - start_).count() >
               config_.time_limit_seconds;
  }

  double remaining_seconds() const {
    if (config_.time_limit_seconds <= 0) return 1e9;
    return config_.time_limit_seconds -
           std::chrono::duration<double>(Clock::now() - start_).count();
  }

  pricing::PricingInput gate_input(const master::MasterSolution& ms,
                                   const BnPNode& node, int gate) const {
    const FoldedDuals folded =
        fold_branch_duals(ms, node.constraints, gate,
                          static_cast<int>(instance_.flights.size()));
    return pricing::preprocess(instance_,
                               instance_.gates[static_cast<std::size_t>(gate)],
                               folded.pi, restrictions_for(node.constraints, gate));
  }

  // One pricing round: heuristics across all gates, exact pricing only when
  // they produce nothing new anywhere.
  RoundOutcome price_round(const master::MasterSolution& ms, const BnPNode& node,
                           int iteration) {
    const int n_gates = static_cast<int>(instance_.gates.size());
    ChainContext ctx{instance_, config_, node.id, iteration};

    std::vector<PricedGate> heuristic(static_cast<std::size_t>(n_gates));
    if (config_.pricing != "dp") {
      for_each_gate(n_gates, config_.threads, [&](int g) {
        const FoldedDuals folded = fold_branch_duals(
            ms, node.constraints, g, static_cast<int>(instance_.flights.size()));
        const pricing::PricingInput input = gate_input(ms, node, g);
        for (pricing::PricingResult& r : run_heuristics(ctx, input, g)) {
          const double rc = -r.objective - folded.mu;
          if (rc < -kFavorableTol)
            heuristic[static_cast<std::size_t>(g)].favorable.push_back(
                master::make_pattern(instance_, g, std::move(r.accepted)));
        }
      });
      int added = 0;
      for (const PricedGate& pg : heuristic) added += master::add_columns(pool_, pg.favorable);
      if (added > 0) return {added, false, config_.pricing};
    }

    std::vector<PricedGate> exact(static_cast<std::size_t>(n_gates));
    for_each_gate(n_gates, config_.threads, [&](int g) {
      const FoldedDuals folded = fold_branch_duals(
          ms, node.constraints, g, static_cast<int>(instance_.flights.size()));
      const pricing::PricingInput input = gate_input(ms, node, g);
      if (input.flights.empty()) return;
      pricing::PricingResult r = pricing::dp_recursive(input);
      const double rc = -r.objective - folded.mu;
      if (rc < -kFavorableTol && !r.accepted.empty())
        exact[static_cast<std::size_t>(g)].favorable.push_back(
            master::make_pattern(instance_, g, std::move(r.accepted)));
    });
    int added = 0;
    for (const PricedGate& pg : exact) added += master::add_columns(pool_, pg.favorable);
    return {added, true, "dp"};
  }

  // Adds the patterns of a partition that respects every constraint on the
  // node's path; returns false when no such partition exists.
  bool seed_node_columns(const std::vector<BranchConstraint>& constraints) {
    const int n_flights = static_cast<int>(instance_.flights.size());
    std::vector<int> forced_gate(static_cast<std::size_t>(n_flights), -1);
    std::set<std::pair<int, int>> forbidden;
    for (const BranchConstraint& c : constraints) {
      if (c.direction == BranchDirection::force_on) {
        if (forced_gate[static_cast<std::size_t>(c.flight)] >= 0 &&
            forced_gate[static_cast<std::size_t>(c.flight)] != c.gate)
          return false;
        forced_gate[static_cast<std::size_t>(c.flight)] = c.gate;
      } else {
        forbidden.insert({c.flight, c.gate});
      }
    }
    std::vector<std::vector<int>> sets(instance_.gates.size());
    for (const Flight& flight : instance_.flights) {
      int chosen = forced_gate[static_cast<std::size_t>(flight.id)];
      if (chosen >= 0) {
        if (!is_compatible(flight, instance_.gates[static_cast<std::size_t>(chosen)]) ||
            forbidden.count({flight.id, chosen}))
          return false;
      } else {
        for (const Gate& gate : instance_.gates) {
          if (!is_compatible(flight, gate)) continue;
          if (forbidden.count({flight.id, gate.id})) continue;
          chosen = gate.id;
          break;
        }
        if (chosen < 0) return false;
      }
      sets[static_cast<std::size_t>(chosen)].push_back(flight.id);
    }
    std::vector<master::Pattern> patterns;
    for (std::size_t g = 0; g < sets.size(); ++g)
      if (!sets[g].empty())
        patterns.push_back(
            master::make_pattern(instance_, static_cast<int>(g), sets[g]));
    master::add_columns(pool_, patterns);
    return true;
  }

  void adopt_partition(const master::PartitionResult& partition) {
    if (incumbent_set_ &&
        static_cast<double>(partition.total_delay) >= ub_ - 1e-9)
      return;
    incumbent_ = partition;
    incumbent_set_ = true;
    ub_ = static_cast<double>(partition.total_delay);
  }

  const Instance& instance_;
  const SolverConfig& config_;
  master::ColumnPool pool_;
  Clock::time_point start_;
  bool incumbent_set_ = false;
  master::PartitionResult incumbent_;
  double ub_ = std::numeric_limits<double>::infinity();
};

Result Driver::run() {
  start_ = Clock::now();
  validate_instance(instance_);
  const int n_gates = static_cast<int>(instance_.gates.size());

  // Initial columns: one random feasible partition split per gate.
  {
    Rng rng(mix_seed(config_.seed, 0x5eedc01u));
    std::vector<std::vector<int>> sets(static_cast<std::size_t>(n_gates));
    for (const Flight& flight : instance_.flights) {
      std::vector<int> candidates;
      for (const Gate& gate : instance_.gates)
        if (is_compatible(flight, gate)) candidates.push_back(gate.id);
      const int pick = candidates[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
      sets[static_cast<std::size_t>(pick)].push_back(flight.id);
    }
    std::vector<master::Pattern> patterns;
    for (int g = 0; g < n_gates; ++g)
      if (!sets[static_cast<std::size_t>(g)].empty())
        patterns.push_back(
            master::make_pattern(instance_, g, sets[static_cast<std::size_t>(g)]));
    master::add_columns(pool_, patterns);
    adopt_partition(master::recover_partition(instance_, std::move(sets)));
  }

  std::vector<BnPNode> nodes;
  nodes.push_back(BnPNode{0, -1, {}, -std::numeric_limits<double>::infinity(),
                          NodeStatus::open});
  using HeapEntry = std::pair<double, int>;  // (bound, node id), best bound first
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> open;
  open.push({nodes[0].lb, 0});

  Result result;
  master::SolveStats stats;
  double reported_lb = 0.0;  // total delay is nonnegative
  bool timed_out = false;
  bool gap_met = false;
  bool root_recorded = false;

  while (!open.empty()) {
    if (time_exceeded()) {
      timed_out = true;
      break;
    }
    const int node_id = open.top().second;
    open.pop();
    BnPNode& node = nodes[static_cast<std::size_t>(node_id)];
    if (incumbent_set_ && node.lb >= ub_ - 1e-6) {
      node.status = NodeStatus::fathomed;
      continue;
    }

    // Column generation at this node.
    lp::SimplexSolver solver;
    master::MasterSolution ms;
    bool node_infeasible = false;
    int iteration = 0;
    while (true) {
      if (time_exceeded()) {
        timed_out = true;
        break;
      }
      ms = master::build_and_solve_rmp(pool_, node.constraints, solver);
      if (!ms.feasible) {
        node_infeasible = true;
        break;
      }
      ++iteration;
      ++stats.iterations;
      if (iteration > 100000)
        throw std::runtime_error("column generation failed to converge");
      const RoundOutcome round = price_round(ms, node, iteration);
      if (config_.log) {
        *config_.log << "[node " << node.id << "] iter " << iteration << " rmp "
                     << ms.objective << " cols+ " << round.added << " ("
                     << round.tag << ") wall "
                     << std::chrono::duration<double>(Clock::now() - start_).count()
                     << "s\n";
      }
      if (round.added == 0 && round.exact_ran) break;
    }
    if (timed_out) break;
    ++stats.nodes;
    if (node_infeasible) {
      node.status = NodeStatus::infeasible;
      continue;
    }
    node.lb = ms.objective;

    if (incumbent_set_ && node.lb >= ub_ - 1e-6) {
      node.status = NodeStatus::fathomed;
    } else {
      const auto y = fractional_assignments(pool_, ms.z);
      const auto pick = select_branch(y);
      if (!pick) {
        // Integral covering at the LP optimum of this node; the binary
        // restricted master could not do better over this pool.
        std::vector<double> rounded = ms.z;
        for (double& v : rounded) v = std::round(v);
        adopt_partition(master::recover_partition(pool_, rounded));
        node.status = NodeStatus::fathomed;
      } else {
        // Upper bound: binary restricted master, then duplicate removal.
        const double limit = std::max(
            0.1, std::min(config_.binary_rmp_time_limit, remaining_seconds()));
        const master::BinarySolveResult binary =
            master::solve_binary_rmp(pool_, node.constraints, limit, ub_);
        if (binary.feasible)
          adopt_partition(master::recover_partition(pool_, binary.z));
        auto [left, right] = make_children(node, pick->first, pick->second);
        node.status = NodeStatus::branched;
        for (BnPNode* child : {&left, &right}) {
          if (!seed_node_columns(child->constraints)) {
            child->status = NodeStatus::infeasible;
            continue;
          }
          child->id = static_cast<int>(nodes.size());
          nodes.push_back(*child);
          open.push({child->lb, child->id});
        }
      }
    }

    if (!root_recorded) {
      root_recorded = true;
      result.root_lb = node.lb;
      result.root_ub = ub_;
    }

    // Global bound bookkeeping and the termination test. Children carry
    // their parent's bound into the heap, so the heap minimum covers every
    // unresolved subtree.
    const double frontier = open.empty() ? ub_ : open.top().first;
    reported_lb = std::max(reported_lb, std::min(frontier, ub_));
    const master::GapReport gap = master::compute_gap(ub_, std::min(reported_lb, ub_));
    const bool met = gap.is_absolute ? gap.value <= config_.abs_gap
                                     : gap.value <= config_.rel_gap;
    if (met) {
      gap_met = true;
      break;
    }
  }

  if (!timed_out && !gap_met && open.empty())
    reported_lb = ub_;  // tree exhausted, bound closed
  reported_lb = std::min(reported_lb, ub_);

  master::Solution solution;
  solution.objective = ub_;
  solution.lb = reported_lb;
  solution.ub = ub_;
  solution.gap = master::compute_gap(ub_, reported_lb);
  for (const GateSchedule& schedule : incumbent_.schedules)
    for (std::size_t j = 0; j < schedule.accepted.size(); ++j)
      solution.assignments.push_back({schedule.accepted[j], schedule.gate_id,
                                      schedule.park_times[j],
                                      schedule.pushback_times[j]});
  std::sort(solution.assignments.begin(), solution.assignments.end(),
            [](const master::Assignment& a, const master::Assignment& b) {
              return a.flight < b.flight;
            });
  stats.columns = static_cast<long>(pool_.size());
  stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
  solution.stats = stats;

  result.solution = std::move(solution);
  result.hit_time_limit = timed_out;
  return result;
}

}  // namespace

Result solve(const Instance& instance, const SolverConfig& config) {
  Driver driver(instance, config);
  return driver.run();
}

}  // namespace fga::bnp
