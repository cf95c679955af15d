#pragma once

#include <cstdint>
#include <vector>

namespace fga::lp {

enum class Relation { ge, eq };

struct Row {
  std::vector<double> coeffs;
  Relation rel = Relation::ge;
  double rhs = 0.0;
};

// min c.x subject to the rows, x >= 0, no upper bounds.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Row> rows;
};

enum class SolveStatus { optimal, infeasible, unbounded };

struct Solution {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> primal;  // structural variables only
  std::vector<double> duals;   // one per row; >= 0 for ge rows, free for eq
  double objective = 0.0;
  long iterations = 0;  // simplex pivots spent on this solve
};

// Primal revised simplex, dense, two phases. Dantzig pricing with an
// automatic switch to Bland's rule after 3*(rows+cols) pivots without
// objective improvement. A solver instance caches its last basis and warm
// starts the next solve when the row set is unchanged and columns were only
// appended; it is stateful and must not be shared across threads.
class SimplexSolver {
 public:
  Solution solve(const LinearProgram& lp);
  void reset();

 private:
  bool basis_valid_ = false;
  std::vector<int> basis_;
  std::vector<Relation> cached_relations_;
  std::vector<double> cached_rhs_;
  int cached_cols_ = -1;
};

}  // namespace fga::lp
