#include "fga/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fga::lp {

namespace {

constexpr double kEnterTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;
constexpr int kRefactorInterval = 64;

// Dense two-phase simplex working state. Column index space:
//   [0, n)          structural variables
//   [n, n + n_ge)   surplus variables of the ge rows, in row order
//   [N, N + m)      artificial variables (phase 1 only)
struct Tableau {
  const LinearProgram& lp;
  int m = 0;
  int n = 0;
  int n_ge = 0;
  int N = 0;
  std::vector<int> surplus_row;   // surplus ordinal -> row index
  std::vector<int> row_surplus;   // row -> surplus ordinal or -1
  std::vector<double> rhs;
  std::vector<double> art_sign;   // per row, +1 or -1
  std::vector<double> binv;       // m*m, row major
  std::vector<double> xb;         // basic values
  std::vector<int> basis;         // column index per row
  std::vector<double> cost;       // phase-dependent, length N + m
  bool bland = false;
  int stall = 0;
  long pivots = 0;
  int pivots_since_refactor = 0;

  explicit Tableau(const LinearProgram& program) : lp(program) {
    m = static_cast<int>(lp.rows.size());
    n = static_cast<int>(lp.objective.size());
    row_surplus.assign(m, -1);
    rhs.resize(m);
    art_sign.resize(m);
    for (int i = 0; i < m; ++i) {
      if (static_cast<int>(lp.rows[i].coeffs.size()) != n)
        throw std::invalid_argument("lp: row " + std::to_string(i) +
                                    " has wrong coefficient count");
      if (!std::isfinite(lp.rows[i].rhs))
        throw std::invalid_argument("lp: non-finite rhs");
      rhs[i] = lp.rows[i].rhs;
      art_sign[i] = rhs[i] >= 0 ? 1.0 : -1.0;
      if (lp.rows[i].rel == Relation::ge) {
        row_surplus[i] = static_cast<int>(surplus_row.size());
        surplus_row.push_back(i);
      }
    }
    n_ge = static_cast<int>(surplus_row.size());
    N = n + n_ge;
    binv.assign(static_cast<std::size_t>(m) * m, 0.0);
    xb.assign(m, 0.0);
    basis.assign(m, -1);
    cost.assign(static_cast<std::size_t>(N) + m, 0.0);
  }

  // Dense original column j into out (length m).
  void column(int j, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (j < n) {
      for (int i = 0; i < m; ++i) out[i] = lp.rows[i].coeffs[j];
    } else if (j < N) {
      out[surplus_row[j - n]] = -1.0;
    } else {
      out[j - N] = art_sign[j - N];
    }
  }

  double column_entry(int j, int i) const {
    if (j < n) return lp.rows[i].coeffs[j];
    if (j < N) return surplus_row[j - n] == i ? -1.0 : 0.0;
    return (j - N) == i ? art_sign[j - N] : 0.0;
  }

  void set_phase1_costs() {
    std::fill(cost.begin(), cost.end(), 0.0);
    for (int i = 0; i < m; ++i) cost[N + i] = 1.0;
  }

  void set_phase2_costs() {
    std::fill(cost.begin(), cost.end(), 0.0);
    for (int j = 0; j < n; ++j) cost[j] = lp.objective[j];
  }

  void dual_prices(std::vector<double>& y) const {
    y.assign(m, 0.0);
    for (int r = 0; r < m; ++r) {
      const double cb = cost[basis[r]];
      if (cb == 0.0) continue;
      const double* row = binv.data() + static_cast<std::size_t>(r) * m;
      for (int i = 0; i < m; ++i) y[i] += cb * row[i];
    }
  }

  double basic_objective() const {
    double v = 0.0;
    for (int r = 0; r < m; ++r) v += cost[basis[r]] * xb[r];
    return v;
  }

  // u = binv * column(e)
  void ftran(int e, std::vector<double>& scratch, std::vector<double>& u) const {
    column(e, scratch);
    for (int r = 0; r < m; ++r) {
      const double* row = binv.data() + static_cast<std::size_t>(r) * m;
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += row[i] * scratch[i];
      u[r] = acc;
    }
  }

  void pivot(int entering, int leave_row, const std::vector<double>& u) {
    const double piv = u[leave_row];
    double* prow = binv.data() + static_cast<std::size_t>(leave_row) * m;
    const double inv = 1.0 / piv;
    for (int i = 0; i < m; ++i) prow[i] *= inv;
    const double t = xb[leave_row] * inv;
    xb[leave_row] = t;
    for (int r = 0; r < m; ++r) {
      if (r == leave_row) continue;
      const double factor = u[r];
      if (factor == 0.0) continue;
      double* row = binv.data() + static_cast<std::size_t>(r) * m;
      for (int i = 0; i < m; ++i) row[i] -= factor * prow[i];
      xb[r] -= factor * t;
      if (xb[r] < 0 && xb[r] > -1e-11) xb[r] = 0.0;
    }
    basis[leave_row] = entering;
    ++pivots;
    ++pivots_since_refactor;
  }

  // Rebuild binv from the basis columns by Gauss-Jordan with partial
  // pivoting. Returns false if the basis matrix is numerically singular.
  bool refactorize() {
    std::vector<double> work(static_cast<std::size_t>(m) * 2 * m, 0.0);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c)
        work[static_cast<std::size_t>(r) * 2 * m + c] = column_entry(basis[c], r);
      work[static_cast<std::size_t>(r) * 2 * m + m + r] = 1.0;
    }
    for (int c = 0; c < m; ++c) {
      int best = -1;
      double best_abs = 1e-11;
      for (int r = c; r < m; ++r) {
        const double v = std::fabs(work[static_cast<std::size_t>(r) * 2 * m + c]);
        if (v > best_abs) {
          best_abs = v;
          best = r;
        }
      }
      if (best < 0) return false;
      if (best != c)
        for (int i = 0; i < 2 * m; ++i)
          std::swap(work[static_cast<std::size_t>(best) * 2 * m + i],
                    work[static_cast<std::size_t>(c) * 2 * m + i]);
      double* prow = work.data() + static_cast<std::size_t>(c) * 2 * m;
      const double inv = 1.0 / prow[c];
      for (int i = 0; i < 2 * m; ++i) prow[i] *= inv;
      for (int r = 0; r < m; ++r) {
        if (r == c) continue;
        double* row = work.data() + static_cast<std::size_t>(r) * 2 * m;
        const double factor = row[c];
        if (factor == 0.0) continue;
        for (int i = 0; i < 2 * m; ++i) row[i] -= factor * prow[i];
      }
    }
    for (int r = 0; r < m; ++r)
      for (int i = 0; i < m; ++i)
        binv[static_cast<std::size_t>(r) * m + i] =
            work[static_cast<std::size_t>(r) * 2 * m + m + i];
    recompute_xb();
    pivots_since_refactor = 0;
    return true;
  }

  void recompute_xb() {
    for (int r = 0; r < m; ++r) {
      const double* row = binv.data() + static_cast<std::size_t>(r) * m;
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += row[i] * rhs[i];
      xb[r] = acc < 0 && acc > -1e-9 ? 0.0 : acc;
    }
  }
};

enum class LoopResult { optimal, unbounded, stalled };

// Runs the pivot loop for the current cost vector until no column prices
// out. `allow_artificials` admits artificial columns as entering candidates
// (phase 1 never needs it; they start basic).
LoopResult run_simplex(Tableau& t, bool phase_one) {
  const int m = t.m;
  std::vector<double> y, d(static_cast<std::size_t>(t.N)), scratch(m), u(m);
  std::vector<char> in_basis(static_cast<std::size_t>(t.N) + m, 0);
  const long max_pivots = 200000L + 200L * (m + t.N);
  double prev_obj = std::numeric_limits<double>::infinity();
  const int stall_limit = 3 * (m + t.N);

  while (true) {
    if (t.pivots_since_refactor >= kRefactorInterval) {
      if (!t.refactorize())
        throw std::runtime_error("lp: singular basis during refactorization");
    }
    std::fill(in_basis.begin(), in_basis.end(), 0);
    for (int r = 0; r < m; ++r) in_basis[t.basis[r]] = 1;

    t.dual_prices(y);
    for (int j = 0; j < t.N; ++j) d[j] = t.cost[j];
    for (int i = 0; i < m; ++i) {
      const double yi = y[i];
      if (yi == 0.0) continue;
      const auto& coeffs = t.lp.rows[i].coeffs;
      for (int j = 0; j < t.n; ++j) d[j] -= yi * coeffs[j];
    }
    for (int s = 0; s < t.n_ge; ++s) d[t.n + s] += y[t.surplus_row[s]];

    int entering = -1;
    if (t.bland) {
      for (int j = 0; j < t.N; ++j)
        if (!in_basis[j] && d[j] < -kEnterTol) {
          entering = j;
          break;
        }
    } else {
      double best = -kEnterTol;
      for (int j = 0; j < t.N; ++j)
        if (!in_basis[j] && d[j] < best) {
          best = d[j];
          entering = j;
        }
    }
    if (entering < 0) return LoopResult::optimal;

    t.ftran(entering, scratch, u);

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      if (u[r] <= kPivotTol) continue;
      const double num = std::max(t.xb[r], 0.0);
      const double ratio = num / u[r];
      if (ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        leave = r;
      } else if (ratio <= best_ratio + 1e-12 && leave >= 0) {
        if (t.bland) {
          if (t.basis[r] < t.basis[leave]) leave = r;
        } else {
          // prefer the numerically safer pivot, then the lowest basis index
          if (std::fabs(u[r]) > std::fabs(u[leave]) + 1e-12)
            leave = r;
          else if (std::fabs(u[r]) >= std::fabs(u[leave]) - 1e-12 &&
                   t.basis[r] < t.basis[leave])
            leave = r;
        }
      }
    }
    if (leave < 0) {
      if (phase_one)
        throw std::runtime_error("lp: phase 1 direction unbounded");
      return LoopResult::unbounded;
    }

    t.pivot(entering, leave, u);

    const double obj = t.basic_objective();
    if (obj < prev_obj - 1e-10 * (1.0 + std::fabs(prev_obj))) {
      t.stall = 0;
    } else if (++t.stall > stall_limit) {
      t.bland = true;
    }
    prev_obj = obj;

    if (t.pivots > max_pivots)
      throw std::runtime_error("lp: iteration limit exceeded");
  }
}

// After phase 1, pivot zero-level artificials out of the basis where a real
// column is available. Surplus columns are preferred so degenerate duals
// land on the slack vertex.
void drive_out_artificials(Tableau& t) {
  std::vector<double> scratch(t.m), u(t.m);
  std::vector<char> in_basis(static_cast<std::size_t>(t.N) + t.m, 0);
  for (int r = 0; r < t.m; ++r) in_basis[t.basis[r]] = 1;
  for (int r = 0; r < t.m; ++r) {
    if (t.basis[r] < t.N) continue;
    int replacement = -1;
    for (int s = 0; s < t.n_ge && replacement < 0; ++s) {
      const int j = t.n + s;
      if (in_basis[j]) continue;
      t.ftran(j, scratch, u);
      if (std::fabs(u[r]) > 1e-7) replacement = j;
    }
    for (int j = 0; j < t.n && replacement < 0; ++j) {
      if (in_basis[j]) continue;
      t.ftran(j, scratch, u);
      if (std::fabs(u[r]) > 1e-7) replacement = j;
    }
    if (replacement < 0) continue;  // dependent row, artificial stays at zero
    t.ftran(replacement, scratch, u);
    in_basis[t.basis[r]] = 0;
    in_basis[replacement] = 1;
    t.pivot(replacement, r, u);
  }
}

int encode_basis_column(const Tableau& t, int j) {
  return j < t.n ? j : -(j - t.n) - 1;  // surplus ordinals go negative
}

int decode_basis_column(int code, int n) { return code >= 0 ? code : n - code - 1; }

}  // namespace

void SimplexSolver::reset() {
  basis_valid_ = false;
  basis_.clear();
  cached_relations_.clear();
  cached_rhs_.clear();
  cached_cols_ = -1;
}

Solution SimplexSolver::solve(const LinearProgram& lp) {
  Solution solution;
  const int m = static_cast<int>(lp.rows.size());
  const int n = static_cast<int>(lp.objective.size());

  if (m == 0) {
    // Trivial: x = 0 unless some cost is negative (then unbounded below).
    const bool unbounded =
        std::any_of(lp.objective.begin(), lp.objective.end(),
                    [](double c) { return c < -kEnterTol; });
    solution.status = unbounded ? SolveStatus::unbounded : SolveStatus::optimal;
    solution.primal.assign(n, 0.0);
    solution.objective = 0.0;
    return solution;
  }

  Tableau t(lp);

  bool warm = false;
  if (basis_valid_ && static_cast<int>(cached_relations_.size()) == m &&
      n >= cached_cols_) {
    warm = true;
    for (int i = 0; i < m; ++i)
      if (cached_relations_[i] != lp.rows[i].rel || cached_rhs_[i] != lp.rows[i].rhs)
        warm = false;
    if (warm) {
      for (int r = 0; r < m; ++r) {
        const int j = decode_basis_column(basis_[r], n);
        if (j < 0 || j >= t.N) warm = false;
        t.basis[r] = j;
      }
    }
    if (warm && !t.refactorize()) warm = false;
    if (warm)
      for (int r = 0; r < m; ++r)
        if (t.xb[r] < -kFeasTol) warm = false;
  }

  if (!warm) {
    for (int r = 0; r < m; ++r) {
      t.basis[r] = t.N + r;
      t.binv[static_cast<std::size_t>(r) * m + r] = t.art_sign[r];
      t.xb[r] = std::fabs(t.rhs[r]);
    }
    t.set_phase1_costs();
    t.bland = false;
    t.stall = 0;
    run_simplex(t, /*phase_one=*/true);
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale += std::fabs(t.rhs[i]);
    if (t.basic_objective() > kFeasTol * scale) {
      solution.status = SolveStatus::infeasible;
      solution.iterations = t.pivots;
      return solution;
    }
    drive_out_artificials(t);
  }

  t.set_phase2_costs();
  t.bland = false;
  t.stall = 0;
  const LoopResult result = run_simplex(t, /*phase_one=*/false);
  solution.iterations = t.pivots;
  if (result == LoopResult::unbounded) {
    solution.status = SolveStatus::unbounded;
    reset();
    return solution;
  }

  solution.status = SolveStatus::optimal;
  solution.primal.assign(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (t.basis[r] < n) solution.primal[t.basis[r]] = t.xb[r];
  std::vector<double> y;
  t.dual_prices(y);
  solution.duals = std::move(y);
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += lp.objective[j] * solution.primal[j];
  solution.objective = obj;

  // Cache the basis for the next solve unless an artificial is still basic.
  bool clean = true;
  for (int r = 0; r < m; ++r)
    if (t.basis[r] >= t.N) clean = false;
  if (clean) {
    basis_valid_ = true;
    basis_.resize(m);
    for (int r = 0; r < m; ++r) basis_[r] = encode_basis_column(t, t.basis[r]);
    cached_relations_.resize(m);
    cached_rhs_.resize(m);
    for (int i = 0; i < m; ++i) {
      cached_relations_[i] = lp.rows[i].rel;
      cached_rhs_[i] = lp.rows[i].rhs;
    }
    cached_cols_ = n;
  } else {
    basis_valid_ = false;
  }
  return solution;
}

}  // namespace fga::lp
