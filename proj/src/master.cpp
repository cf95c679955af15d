#include "fga/master.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace fga::master {

bool Pattern::contains(int flight_id) const {
  return std::binary_search(accepted.begin(), accepted.end(), flight_id);
}

Pattern make_pattern(const Instance& instance, int gate_id,
                     std::vector<int> accepted) {
  if (gate_id < 0 || gate_id >= static_cast<int>(instance.gates.size()))
    throw std::invalid_argument("make_pattern: unknown gate id");
  Pattern pattern;
  pattern.gate_id = gate_id;
  pattern.accepted = std::move(accepted);
  pattern.schedule = evaluate_sequence(
      instance, instance.gates[static_cast<std::size_t>(gate_id)], pattern.accepted);
  pattern.cost = static_cast<double>(pattern.schedule.total_delay);
  return pattern;
}

double branch_coefficient(const BranchConstraint& constraint,
                          const Pattern& pattern) {
  const double delta = pattern.contains(constraint.flight) ? 1.0 : 0.0;
  if (constraint.direction == BranchDirection::force_on)
    return pattern.gate_id == constraint.gate ? 1.0 - delta : delta;
  return pattern.gate_id == constraint.gate ? delta : 0.0;
}

ColumnPool::ColumnPool(const Instance& instance) : instance_(&instance) {
  for (const Gate& gate : instance.gates) add(make_pattern(instance, gate.id, {}));
}

int ColumnPool::add(const Pattern& pattern) {
  if (pattern.gate_id < 0 ||
      pattern.gate_id >= static_cast<int>(instance_->gates.size()))
    throw std::invalid_argument("pattern: unknown gate id");
  const GateSchedule reference = evaluate_sequence(
      *instance_, instance_->gates[static_cast<std::size_t>(pattern.gate_id)],
      pattern.accepted);
  if (pattern.schedule.park_times != reference.park_times ||
      pattern.schedule.pushback_times != reference.pushback_times ||
      pattern.schedule.accepted != pattern.accepted)
    throw std::invalid_argument("pattern: schedule violates the sequential rule");
  if (std::fabs(pattern.cost - static_cast<double>(reference.total_delay)) > 1e-9)
    throw std::invalid_argument("pattern: cost does not match its total delay");

  auto key = std::make_pair(pattern.gate_id, pattern.accepted);
  if (index_.count(key)) return 0;
  index_.emplace(std::move(key), static_cast<int>(columns_.size()));
  columns_.push_back(pattern);
  return 1;
}

int add_columns(ColumnPool& pool, const std::vector<Pattern>& patterns) {
  int added = 0;
  for (const Pattern& pattern : patterns) added += pool.add(pattern);
  return added;
}

namespace {

lp::LinearProgram build_rmp_lp(const ColumnPool& pool,
                               const std::vector<BranchConstraint>& branch_rows) {
  const Instance& instance = pool.instance();
  const int n_flights = static_cast<int>(instance.flights.size());
  const int n_gates = static_cast<int>(instance.gates.size());
  const int n_cols = static_cast<int>(pool.size());

  lp::LinearProgram program;
  program.objective.reserve(static_cast<std::size_t>(n_cols));
  for (const Pattern& p : pool.columns()) program.objective.push_back(p.cost);

  program.rows.resize(static_cast<std::size_t>(n_flights + n_gates) +
                      branch_rows.size());
  for (auto& row : program.rows)
    row.coeffs.assign(static_cast<std::size_t>(n_cols), 0.0);
  for (int i = 0; i < n_flights; ++i) {
    program.rows[static_cast<std::size_t>(i)].rel = lp::Relation::ge;
    program.rows[static_cast<std::size_t>(i)].rhs = 1.0;
  }
  for (int k = 0; k < n_gates; ++k) {
    program.rows[static_cast<std::size_t>(n_flights + k)].rel = lp::Relation::eq;
    program.rows[static_cast<std::size_t>(n_flights + k)].rhs = 1.0;
  }
  // Branching rows are "<= 0" by construction; stored negated as ">= 0".
  for (std::size_t b = 0; b < branch_rows.size(); ++b) {
    auto& row = program.rows[static_cast<std::size_t>(n_flights + n_gates) + b];
    row.rel = lp::Relation::ge;
    row.rhs = 0.0;
  }

  for (int j = 0; j < n_cols; ++j) {
    const Pattern& p = pool.columns()[static_cast<std::size_t>(j)];
    for (int id : p.accepted)
      program.rows[static_cast<std::size_t>(id)].coeffs[static_cast<std::size_t>(j)] =
          1.0;
    program.rows[static_cast<std::size_t>(n_flights + p.gate_id)]
        .coeffs[static_cast<std::size_t>(j)] = 1.0;
    for (std::size_t b = 0; b < branch_rows.size(); ++b) {
      const double coeff = branch_coefficient(branch_rows[b], p);
      if (coeff != 0.0)
        program.rows[static_cast<std::size_t>(n_flights + n_gates) + b]
            .coeffs[static_cast<std::size_t>(j)] = -coeff;
    }
  }
  return program;
}

}  // namespace

MasterSolution build_and_solve_rmp(const ColumnPool& pool,
                                   const std::vector<BranchConstraint>& branch_rows,
                                   lp::SimplexSolver& solver) {
  const Instance& instance = pool.instance();
  const int n_flights = static_cast<int>(instance.flights.size());
  const int n_gates = static_cast<int>(instance.gates.size());

  const lp::LinearProgram program = build_rmp_lp(pool, branch_rows);
  const lp::Solution lp_solution = solver.solve(program);

  MasterSolution result;
  if (lp_solution.status == lp::SolveStatus::infeasible) {
    result.feasible = false;
    return result;
  }
  if (lp_solution.status == lp::SolveStatus::unbounded)
    throw std::logic_error("restricted master cannot be unbounded");

  result.feasible = true;
  result.z = lp_solution.primal;
  result.objective = lp_solution.objective;
  result.pi.assign(lp_solution.duals.begin(), lp_solution.duals.begin() + n_flights);
  result.mu.assign(lp_solution.duals.begin() + n_flights,
                   lp_solution.duals.begin() + n_flights + n_gates);
  result.lambda.resize(branch_rows.size());
  for (std::size_t b = 0; b < branch_rows.size(); ++b)
    result.lambda[b] =
        -lp_solution.duals[static_cast<std::size_t>(n_flights + n_gates) + b];
  return result;
}

namespace {

// Branch-and-bound node for the binary restricted master. Choosing a column
// settles its gate, so the subproblem is rebuilt over the surviving columns
// only and keeps shrinking along a dive.
struct BinaryNode {
  std::vector<int> chosen;  // pool columns fixed to one
  std::vector<char> banned; // pool columns fixed to zero
};

}  // namespace

BinarySolveResult solve_binary_rmp(const ColumnPool& pool,
                                   const std::vector<BranchConstraint>& branch_rows,
                                   double time_limit_seconds,
                                   double initial_bound) {
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(
              time_limit_seconds > 0 ? time_limit_seconds : 1e9));

  const Instance& instance = pool.instance();
  const int n_flights = static_cast<int>(instance.flights.size());
  const int n_gates = static_cast<int>(instance.gates.size());
  const int n_cols = static_cast<int>(pool.size());
  const auto& columns = pool.columns();

  BinarySolveResult best;
  best.value = std::numeric_limits<double>::infinity();
  const auto bound = [&] { return std::min(best.value, initial_bound); };

  std::vector<BinaryNode> stack;
  stack.push_back({{}, std::vector<char>(static_cast<std::size_t>(n_cols), 0)});

  while (!stack.empty()) {
    if (std::chrono::steady_clock::now() > deadline) {
      best.timed_out = true;
      break;
    }
    BinaryNode node = std::move(stack.back());
    stack.pop_back();

    // Project the chosen columns out of the subproblem.
    std::vector<int> cover_count(static_cast<std::size_t>(n_flights), 0);
    std::vector<char> gate_fixed(static_cast<std::size_t>(n_gates), 0);
    std::vector<double> branch_used(branch_rows.size(), 0.0);
    double fixed_cost = 0.0;
    bool conflict = false;
    for (int j : node.chosen) {
      const Pattern& p = columns[static_cast<std::size_t>(j)];
      fixed_cost += p.cost;
      gate_fixed[static_cast<std::size_t>(p.gate_id)] = 1;
      for (int id : p.accepted) ++cover_count[static_cast<std::size_t>(id)];
      for (std::size_t b = 0; b < branch_rows.size(); ++b) {
        branch_used[b] += branch_coefficient(branch_rows[b], p);
        if (branch_used[b] > 0.5) conflict = true;  // "<= 0" row violated
      }
    }
    if (conflict || fixed_cost >= bound() - 1e-9) continue;

    std::vector<int> active;  // surviving pool columns, in pool order
    for (int j = 0; j < n_cols; ++j) {
      if (node.banned[static_cast<std::size_t>(j)]) continue;
      if (gate_fixed[static_cast<std::size_t>(columns[static_cast<std::size_t>(j)]
                                                  .gate_id)])
        continue;
      active.push_back(j);
    }

    // A flight no surviving column can cover makes the subtree infeasible.
    {
      std::vector<char> coverable(static_cast<std::size_t>(n_flights), 0);
      for (int j : active)
        for (int id : columns[static_cast<std::size_t>(j)].accepted)
          coverable[static_cast<std::size_t>(id)] = 1;
      bool dead = false;
      for (int i = 0; i < n_flights && !dead; ++i)
        if (cover_count[static_cast<std::size_t>(i)] == 0 &&
            !coverable[static_cast<std::size_t>(i)])
          dead = true;
      if (dead) continue;
    }

    // Reduced LP: unsatisfied cover rows, open convexity rows, branch rows.
    lp::LinearProgram program;
    program.objective.reserve(active.size());
    for (int j : active) program.objective.push_back(columns[static_cast<std::size_t>(j)].cost);
    std::vector<int> row_of_flight(static_cast<std::size_t>(n_flights), -1);
    std::vector<int> row_of_gate(static_cast<std::size_t>(n_gates), -1);
    std::vector<int> row_of_branch(branch_rows.size(), -1);
    for (int i = 0; i < n_flights; ++i) {
      if (cover_count[static_cast<std::size_t>(i)] > 0) continue;
      row_of_flight[static_cast<std::size_t>(i)] = static_cast<int>(program.rows.size());
      program.rows.push_back(
          {std::vector<double>(active.size(), 0.0), lp::Relation::ge, 1.0});
    }
    for (int k = 0; k < n_gates; ++k) {
      if (gate_fixed[static_cast<std::size_t>(k)]) continue;
      row_of_gate[static_cast<std::size_t>(k)] = static_cast<int>(program.rows.size());
      program.rows.push_back(
          {std::vector<double>(active.size(), 0.0), lp::Relation::eq, 1.0});
    }
    for (std::size_t b = 0; b < branch_rows.size(); ++b) {
      row_of_branch[b] = static_cast<int>(program.rows.size());
      program.rows.push_back(
          {std::vector<double>(active.size(), 0.0), lp::Relation::ge, 0.0});
    }
    for (std::size_t col = 0; col < active.size(); ++col) {
      const Pattern& p = columns[static_cast<std::size_t>(active[col])];
      for (int id : p.accepted) {
        const int row = row_of_flight[static_cast<std::size_t>(id)];
        if (row >= 0) program.rows[static_cast<std::size_t>(row)].coeffs[col] = 1.0;
      }
      const int gate_row = row_of_gate[static_cast<std::size_t>(p.gate_id)];
      if (gate_row >= 0)
        program.rows[static_cast<std::size_t>(gate_row)].coeffs[col] = 1.0;
      for (std::size_t b = 0; b < branch_rows.size(); ++b) {
        const double coeff = branch_coefficient(branch_rows[b], p);
        if (coeff != 0.0)
          program.rows[static_cast<std::size_t>(row_of_branch[b])].coeffs[col] =
              -coeff;
      }
    }

    lp::SimplexSolver solver;
    const lp::Solution relaxed = solver.solve(program);
    if (relaxed.status != lp::SolveStatus::optimal) continue;
    if (fixed_cost + relaxed.objective >= bound() - 1e-9) continue;

    // Dive on the largest fractional z: fixing it settles a whole gate, so
    // the first dive reaches an integral selection within a few levels.
    int branch_col = -1;  // index into `active`
    double branch_score = -1.0;
    for (std::size_t col = 0; col < active.size(); ++col) {
      const double v = relaxed.primal[col];
      if (std::fabs(v - std::round(v)) <= 1e-6) continue;
      if (v > branch_score) {
        branch_score = v;
        branch_col = static_cast<int>(col);
      }
    }
    if (branch_col < 0) {
      best.feasible = true;
      best.value = fixed_cost + relaxed.objective;
      best.z.assign(static_cast<std::size_t>(n_cols), 0.0);
      for (int j : node.chosen) best.z[static_cast<std::size_t>(j)] = 1.0;
      for (std::size_t col = 0; col < active.size(); ++col)
        best.z[static_cast<std::size_t>(active[col])] = std::round(relaxed.primal[col]);
      continue;
    }
    const int pool_col = active[static_cast<std::size_t>(branch_col)];
    BinaryNode zero = node, one = std::move(node);
    zero.banned[static_cast<std::size_t>(pool_col)] = 1;
    one.chosen.push_back(pool_col);
    stack.push_back(std::move(zero));
    stack.push_back(std::move(one));  // explore the rounding-up child first
  }
  if (!best.feasible) best.value = 0.0;
  return best;
}

PartitionResult recover_partition(const ColumnPool& pool,
                                  const std::vector<double>& z) {
  if (z.size() != pool.size())
    throw std::invalid_argument("recover_partition: z size mismatch");
  const Instance& instance = pool.instance();
  std::vector<std::vector<int>> accepted_per_gate(instance.gates.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] < 0.5) continue;
    const Pattern& p = pool.columns()[j];
    auto& set = accepted_per_gate[static_cast<std::size_t>(p.gate_id)];
    for (int id : p.accepted)
      if (!std::binary_search(set.begin(), set.end(), id))
        set.insert(std::lower_bound(set.begin(), set.end(), id), id);
  }
  return recover_partition(instance, std::move(accepted_per_gate));
}

PartitionResult recover_partition(const Instance& instance,
                                  std::vector<std::vector<int>> accepted_per_gate) {
  const int n_flights = static_cast<int>(instance.flights.size());
  const int n_gates = static_cast<int>(instance.gates.size());
  if (static_cast<int>(accepted_per_gate.size()) != n_gates)
    throw std::invalid_argument("recover_partition: one set per gate required");

  std::vector<std::vector<int>> gates_of(static_cast<std::size_t>(n_flights));
  for (int k = 0; k < n_gates; ++k)
    for (int id : accepted_per_gate[static_cast<std::size_t>(k)])
      gates_of[static_cast<std::size_t>(id)].push_back(k);
  for (int i = 0; i < n_flights; ++i)
    if (gates_of[static_cast<std::size_t>(i)].empty())
      throw std::logic_error("recover_partition: flight " + std::to_string(i) +
                             " is uncovered");

  const auto delay_of = [&](int gate, const std::vector<int>& set) {
    return evaluate_sequence(instance, instance.gates[static_cast<std::size_t>(gate)],
                             set)
        .total_delay;
  };
  const auto without = [](const std::vector<int>& set, int id) {
    std::vector<int> out;
    out.reserve(set.size());
    for (int v : set)
      if (v != id) out.push_back(v);
    return out;
  };

  for (int i = 0; i < n_flights; ++i) {
    auto& covering = gates_of[static_cast<std::size_t>(i)];
    if (covering.size() < 2) continue;
    int best_gate = -1;
    Minutes best_total = std::numeric_limits<Minutes>::max();
    for (int keep : covering) {
      Minutes total = 0;
      for (int k : covering) {
        const auto& set = accepted_per_gate[static_cast<std::size_t>(k)];
        total += k == keep ? delay_of(k, set) : delay_of(k, without(set, i));
      }
      if (total < best_total) {  // ties keep the earlier (lowest) gate id
        best_total = total;
        best_gate = keep;
      }
    }
    for (int k : covering)
      if (k != best_gate)
        accepted_per_gate[static_cast<std::size_t>(k)] =
            without(accepted_per_gate[static_cast<std::size_t>(k)], i);
    covering = {best_gate};
  }

  PartitionResult result;
  result.gate_of_flight.assign(static_cast<std::size_t>(n_flights), -1);
  for (int i = 0; i < n_flights; ++i)
    result.gate_of_flight[static_cast<std::size_t>(i)] =
        gates_of[static_cast<std::size_t>(i)].front();
  result.schedules.reserve(static_cast<std::size_t>(n_gates));
  for (int k = 0; k < n_gates; ++k) {
    result.schedules.push_back(
        evaluate_sequence(instance, instance.gates[static_cast<std::size_t>(k)],
                          accepted_per_gate[static_cast<std::size_t>(k)]));
    result.total_delay += result.schedules.back().total_delay;
  }
  return result;
}

GapReport compute_gap(double ub, double lb) {
  if (ub < lb - 1e-6 * (1.0 + std::fabs(lb)))
    throw std::logic_error("compute_gap: upper bound below lower bound");
  GapReport report;
  constexpr double kZeroTol = 1e-9;
  if (lb > kZeroTol) {
    report.value = std::max(0.0, (ub - lb) / lb);
    report.is_absolute = false;
  } else {
    report.value = std::max(0.0, ub - lb);
    report.is_absolute = true;
  }
  return report;
}

namespace {
using json = nlohmann::ordered_json;
}

std::string solution_to_json(const Solution& solution) {
  json doc;
  doc["objective"] = solution.objective;
  doc["lb"] = solution.lb;
  doc["ub"] = solution.ub;
  doc["gap"] = solution.gap.value;
  doc["gap_is_absolute"] = solution.gap.is_absolute;
  doc["assignments"] = json::array();
  for (const Assignment& a : solution.assignments) {
    json ja;
    ja["flight"] = a.flight;
    ja["gate"] = a.gate;
    ja["park"] = a.park;
    ja["pushback"] = a.pushback;
    doc["assignments"].push_back(std::move(ja));
  }
  doc["stats"]["iterations"] = solution.stats.iterations;
  doc["stats"]["columns"] = solution.stats.columns;
  doc["stats"]["nodes"] = solution.stats.nodes;
  doc["stats"]["wall_seconds"] = solution.stats.wall_seconds;
  return doc.dump(2) + "\n";
}

void save_solution(const Solution& solution, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write solution file: " + path);
  out << solution_to_json(solution);
}

void validate_solution(const Instance& instance, const Solution& solution) {
  const int n_flights = static_cast<int>(instance.flights.size());
  std::vector<int> seen(static_cast<std::size_t>(n_flights), 0);
  std::vector<std::vector<int>> per_gate(instance.gates.size());
  std::map<int, std::pair<Minutes, Minutes>> times;
  for (const Assignment& a : solution.assignments) {
    if (a.flight < 0 || a.flight >= n_flights)
      throw std::logic_error("solution: unknown flight id");
    if (a.gate < 0 || a.gate >= static_cast<int>(instance.gates.size()))
      throw std::logic_error("solution: unknown gate id");
    if (++seen[static_cast<std::size_t>(a.flight)] > 1)
      throw std::logic_error("solution: flight assigned twice");
    per_gate[static_cast<std::size_t>(a.gate)].push_back(a.flight);
    times[a.flight] = {a.park, a.pushback};
  }
  for (int i = 0; i < n_flights; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw std::logic_error("solution: flight " + std::to_string(i) +
                             " unassigned");
  Minutes total = 0;
  for (std::size_t k = 0; k < per_gate.size(); ++k) {
    std::sort(per_gate[k].begin(), per_gate[k].end());
    const GateSchedule schedule =
        evaluate_sequence(instance, instance.gates[k], per_gate[k]);
    total += schedule.total_delay;
    for (std::size_t j = 0; j < per_gate[k].size(); ++j) {
      const auto& [park, push] = times[per_gate[k][j]];
      if (park != schedule.park_times[j] || push != schedule.pushback_times[j])
        throw std::logic_error("solution: park/pushback times inconsistent with "
                               "the sequential rule");
    }
  }
  if (std::fabs(static_cast<double>(total) - solution.objective) > 1e-6)
    throw std::logic_error("solution: objective does not match total delay");
}

}  // namespace fga::master
