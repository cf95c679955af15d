#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "fga/lp.hpp"
#include "fga/model.hpp"

namespace fga::master {

// One priced column: an ordered flight set for a gate with its implied
// schedule. The cost is the schedule's total arrival delay.
struct Pattern {
  int gate_id = -1;
  std::vector<int> accepted;  // flight ids, ascending
  GateSchedule schedule;
  double cost = 0.0;

  bool contains(int flight_id) const;
};

// Evaluates the schedule for the accepted set and fills in the cost.
Pattern make_pattern(const Instance& instance, int gate_id,
                     std::vector<int> accepted);

// A branching decision on one (flight, gate) assignment.
enum class BranchDirection { force_on, force_off };

struct BranchConstraint {
  int flight = -1;
  int gate = -1;
  BranchDirection direction = BranchDirection::force_on;
};

// Coefficient of a pattern column in the branching row, in its natural
// "<= 0" orientation.
double branch_coefficient(const BranchConstraint& constraint, const Pattern& pattern);

// Grow-only pattern store, deduplicated on (gate, accepted set). Holds the
// per-gate empty patterns from construction so the gate-availability rows
// are always satisfiable.
class ColumnPool {
 public:
  explicit ColumnPool(const Instance& instance);

  // Returns 1 if added, 0 if an identical column is already pooled. Throws
  // std::invalid_argument if the pattern's schedule or cost is inconsistent
  // with the instance.
  int add(const Pattern& pattern);

  const std::vector<Pattern>& columns() const { return columns_; }
  const Instance& instance() const { return *instance_; }
  std::size_t size() const { return columns_.size(); }

 private:
  const Instance* instance_;
  std::vector<Pattern> columns_;
  std::map<std::pair<int, std::vector<int>>, int> index_;
};

// Adds every structurally valid new pattern; duplicates are skipped
// silently. Returns the number actually added.
int add_columns(ColumnPool& pool, const std::vector<Pattern>& patterns);

struct MasterSolution {
  bool feasible = false;  // false signals a node-infeasible restricted master
  std::vector<double> z;  // per pooled column
  std::vector<double> pi;      // cover-row duals, one per flight
  std::vector<double> mu;      // availability-row duals, one per gate
  std::vector<double> lambda;  // branching-row duals (<=0 orientation)
  double objective = 0.0;
};

// LP relaxation of the restricted master over the pooled columns plus the
// given branching rows. The supplied solver carries the warm-start basis
// across repeated solves with a fixed row set.
MasterSolution build_and_solve_rmp(const ColumnPool& pool,
                                   const std::vector<BranchConstraint>& branch_rows,
                                   lp::SimplexSolver& solver);

struct BinarySolveResult {
  bool feasible = false;
  bool timed_out = false;
  double value = 0.0;
  std::vector<double> z;  // integral selection per pooled column
};

// Exact optimum over the pooled columns with binary selection variables,
// via depth-first branch and bound on the most fractional z. Choosing a
// column fixes its gate, so sibling columns drop out and the subproblem
// shrinks. On time limit the best incumbent found so far is returned with
// the flag set. `initial_bound` prunes subtrees that cannot beat a known
// solution; candidates at or above it are not reported.
BinarySolveResult solve_binary_rmp(
    const ColumnPool& pool, const std::vector<BranchConstraint>& branch_rows,
    double time_limit_seconds,
    double initial_bound = std::numeric_limits<double>::infinity());

struct PartitionResult {
  std::vector<int> gate_of_flight;
  std::vector<GateSchedule> schedules;  // one per gate
  Minutes total_delay = 0;
};

// Turns a covering selection into a partition: every multiply-covered
// flight is kept on the gate that minimizes the resulting total delay (ties
// to the lowest gate id) and dropped elsewhere. Never increases the cost.
PartitionResult recover_partition(const Instance& instance,
                                  std::vector<std::vector<int>> accepted_per_gate);
PartitionResult recover_partition(const ColumnPool& pool,
                                  const std::vector<double>& z);

struct GapReport {
  double value = 0.0;
  bool is_absolute = false;
};

// Relative gap (ub - lb) / lb, or the absolute gap when lb is numerically
// zero. Throws std::logic_error when ub < lb beyond tolerance.
GapReport compute_gap(double ub, double lb);

struct SolveStats {
  long iterations = 0;  // column generation iterations over all nodes
  long columns = 0;     // pooled columns at the end of the run
  long nodes = 0;       // branch-and-bound nodes processed
  double wall_seconds = 0.0;
};

struct Assignment {
  int flight = -1;
  int gate = -1;
  Minutes park = 0;
  Minutes pushback = 0;
};

struct Solution {
  double objective = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  GapReport gap;
  std::vector<Assignment> assignments;
  SolveStats stats;
};

std::string solution_to_json(const Solution& solution);
void save_solution(const Solution& solution, const std::string& path);

// Recomputes every gate schedule from the assignment list and checks the
// objective; throws std::logic_error on any mismatch.
void validate_solution(const Instance& instance, const Solution& solution);

}  // namespace fga::master
