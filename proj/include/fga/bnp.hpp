#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fga/master.hpp"
#include "fga/model.hpp"
#include "fga/pricing.hpp"

namespace fga::bnp {

using master::BranchConstraint;
using master::BranchDirection;

struct SolverConfig {
  // dp | sm+dp | adp+dp | rhf | rhm | sm+rhm
  std::string pricing = "sm+dp";
  double rel_gap = 0.02;
  double abs_gap = 0.5;
  double time_limit_seconds = 0.0;  // 0 disables the limit
  int threads = 1;
  std::uint64_t seed = 1;

  int sm_seeds = 70;            // double-greedy trials per gate and iteration
  int adp_rounds = 25;          // iterations the tabular heuristic stays active
  int rh_horizon = 20;
  int rh_window = 1;
  int sm_sigma_threshold = 60;  // sm+rhm: greedy while the adjacency is large
  int sm_iteration_cap = 25;    // sm+rhm: greedy only this many iterations
  double binary_rmp_time_limit = 30.0;

  std::ostream* log = nullptr;
};

enum class NodeStatus { open, fathomed, branched, infeasible };

struct BnPNode {
  int id = 0;
  int parent = -1;
  std::vector<BranchConstraint> constraints;  // accumulated along the path
  double lb = 0.0;
  NodeStatus status = NodeStatus::open;
};

// Assignment weights y(flight, gate) implied by a fractional master
// solution: the per-gate sum of z over patterns containing the flight.
std::map<std::pair<int, int>, double> fractional_assignments(
    const master::ColumnPool& pool, const std::vector<double>& z);

// The pair closest to one half, ties to the lowest flight then gate id;
// nullopt when every weight is integral.
std::optional<std::pair<int, int>> select_branch(
    const std::map<std::pair<int, int>, double>& y);

// Left child forces the flight onto the gate, right child forbids it. Throws
// std::logic_error if the pair is already constrained on the node's path.
std::pair<BnPNode, BnPNode> make_children(const BnPNode& node, int flight,
                                          int gate);

struct FoldedDuals {
  std::vector<double> pi;
  double mu = 0.0;
};

// Folds the branching-row duals into the cover and availability duals seen
// by one gate's pricing problem. Composes additively over the path.
FoldedDuals fold_branch_duals(const master::MasterSolution& duals,
                              const std::vector<BranchConstraint>& path,
                              int gate, int n_flights);

// Forced/forbidden flight lists the node's path implies for one gate.
pricing::GateRestrictions restrictions_for(
    const std::vector<BranchConstraint>& path, int gate);

struct Result {
  master::Solution solution;
  bool hit_time_limit = false;
  double root_lb = 0.0;
  double root_ub = 0.0;
};

// Branch and price: per node, column generation with the configured
// heuristic chain (exact pricing proves convergence), bounds from the binary
// restricted master plus partition recovery, best-bound node selection.
Result solve(const Instance& instance, const SolverConfig& config);

}  // namespace fga::bnp
