#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fga/bnp.hpp"
#include "fga/master.hpp"
#include "fga/model.hpp"
#include "fga/oracle.hpp"
#include "fga/pricing.hpp"
#include "fga/rng.hpp"
#include "json.hpp"

namespace {

// Exit codes are a stable contract: 0 ok, 2 usage, 3 time limit,
// 4 infeasible instance, 5 oracle cap exceeded.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitOracleCap = 5;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path == "-" || out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write output file: " + out_path);
  out << text;
}

std::string format_gap(const fga::master::GapReport& gap) {
  std::ostringstream os;
  if (gap.is_absolute)
    os << gap.value << "(a)";
  else
    os << gap.value * 100.0 << "%";
  return os.str();
}

void print_gantt(const fga::Instance& instance,
                 const fga::master::Solution& solution, std::ostream& os) {
  std::vector<std::vector<const fga::master::Assignment*>> per_gate(
      instance.gates.size());
  for (const auto& a : solution.assignments)
    per_gate[static_cast<std::size_t>(a.gate)].push_back(&a);
  for (std::size_t k = 0; k < per_gate.size(); ++k) {
    os << "gate " << k << ":";
    std::sort(per_gate[k].begin(), per_gate[k].end(),
              [](const auto* a, const auto* b) { return a->park < b->park; });
    for (const auto* a : per_gate[k])
      os << " [" << a->park << "," << a->pushback << "]";
    os << "\n";
  }
}

struct GenerateArgs {
  int flights = 0;
  int gates = 0;
  double mean_interarrival = 10.0;
  double heavy_fraction = 0.2;
  std::uint64_t seed = 1;
  std::int64_t buffer = 5;
  std::vector<std::string> airlines = {"DL", "AA", "UA", "WN", "B6"};
  std::string out;
  std::string csv_prefix;
};

int run_generate(const GenerateArgs& args) {
  fga::GeneratorConfig config;
  config.n_flights = args.flights;
  config.n_gates = args.gates;
  config.mean_interarrival_minutes = args.mean_interarrival;
  config.heavy_fraction = args.heavy_fraction;
  config.seed = args.seed;
  config.buffer = args.buffer;
  config.airline_pool = args.airlines;
  const fga::Instance instance = fga::generate_instance(config);
  emit(fga::instance_to_json(instance), args.out);
  if (!args.csv_prefix.empty())
    fga::save_instance_csv(instance, args.csv_prefix + ".flights.csv",
                           args.csv_prefix + ".gates.csv");

  const double ratio =
      static_cast<double>(args.flights) / static_cast<double>(args.gates);
  double mean_gap = 0.0;
  if (instance.flights.size() > 1)
    mean_gap = static_cast<double>(instance.flights.back().arrival -
                                   instance.flights.front().arrival) /
               static_cast<double>(instance.flights.size() - 1);
  char line[160];
  std::snprintf(line, sizeof(line),
                "flights/gate ratio %.2f, mean inter-arrival %.2f min "
                "(%.2f min per gate)\n",
                ratio, mean_gap, mean_gap * args.gates);
  std::cerr << line;
  return kExitOk;
}

struct SolveArgs {
  std::string instance_path;
  std::string pricing = "sm+dp";
  double rel_gap = 0.02;
  double abs_gap = 0.5;
  double time_limit = 0.0;
  int threads = 1;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;
};

int run_solve(const SolveArgs& args) {
  const fga::Instance instance = fga::load_instance(args.instance_path);
  fga::bnp::SolverConfig config;
  config.pricing = args.pricing;
  config.rel_gap = args.rel_gap;
  config.abs_gap = args.abs_gap;
  config.time_limit_seconds = args.time_limit;
  config.threads = args.threads;
  config.seed = args.seed;
  if (!args.quiet) config.log = &std::cerr;

  const fga::bnp::Result result = fga::bnp::solve(instance, config);
  fga::master::validate_solution(instance, result.solution);
  if (!args.out.empty()) emit(fga::master::solution_to_json(result.solution), args.out);

  std::cerr << "objective " << result.solution.objective << " lb "
            << result.solution.lb << " ub " << result.solution.ub << " gap "
            << format_gap(result.solution.gap) << " nodes "
            << result.solution.stats.nodes << " iters "
            << result.solution.stats.iterations << " columns "
            << result.solution.stats.columns << " wall "
            << result.solution.stats.wall_seconds << "s\n";
  print_gantt(instance, result.solution, std::cerr);
  return result.hit_time_limit ? kExitTimeout : kExitOk;
}

struct PriceArgs {
  std::string instance_path;
  int gate = 0;
  std::string strategy = "dp";
  std::string duals_path;
  double random_pi = 30.0;
  std::uint64_t seed = 1;
  int horizon = 20;
  int window = 1;
};

int run_price(const PriceArgs& args) {
  const fga::Instance instance = fga::load_instance(args.instance_path);
  if (args.gate < 0 || args.gate >= static_cast<int>(instance.gates.size()))
    throw CLI::ValidationError("--gate", "gate id out of range");

  std::vector<double> pi(instance.flights.size(), 0.0);
  double mu = 0.0;
  if (!args.duals_path.empty()) {
    std::ifstream in(args.duals_path);
    if (!in) throw std::runtime_error("cannot open duals file: " + args.duals_path);
    nlohmann::json doc = nlohmann::json::parse(in);
    const auto values = doc.at("pi").get<std::vector<double>>();
    if (values.size() != pi.size())
      throw std::runtime_error("duals file: pi must list one value per flight");
    pi = values;
    if (doc.contains("mu")) mu = doc["mu"].get<double>();
  } else {
    fga::Rng rng(args.seed);
    for (double& v : pi) v = rng.uniform01() * args.random_pi;
  }

  const fga::Gate& gate = instance.gates[static_cast<std::size_t>(args.gate)];
  const fga::pricing::PricingInput input =
      fga::pricing::preprocess(instance, gate, pi);

  fga::pricing::PricingResult result;
  if (args.strategy == "dp") {
    result = fga::pricing::dp_recursive(input);
  } else if (args.strategy == "adp") {
    result = fga::pricing::dp_tabular(input, fga::pricing::horizon_c(input));
  } else if (args.strategy == "dg") {
    result = fga::pricing::double_greedy(input, args.seed);
  } else if (args.strategy == "bd") {
    result = fga::pricing::block_decomposition(input, true);
  } else if (args.strategy == "rh") {
    result = fga::pricing::rolling_horizon(input, args.horizon, args.window);
  } else if (args.strategy == "oracle") {
    const auto report = fga::oracle::brute_force_pricing(input);
    result.accepted = report.best_set;
    result.objective = report.optimum;
    result.park_times = fga::pricing::park_times_for(input, report.best_set);
    result.strategy = "oracle";
  } else {
    throw CLI::ValidationError("--strategy", "unknown strategy " + args.strategy);
  }

  nlohmann::ordered_json doc;
  doc["gate"] = args.gate;
  doc["strategy"] = result.strategy;
  doc["flights_considered"] = input.flights.size();
  doc["sigma_bar"] = fga::pricing::adjacency_parameter(input);
  doc["objective"] = result.objective;
  doc["reduced_cost"] = -result.objective - mu;
  doc["accepted"] = result.accepted;
  doc["park_times"] = result.park_times;
  std::cout << doc.dump(2) << "\n";
  return kExitOk;
}

struct CheckArgs {
  std::string instance_path;
  std::string mode = "pricing";
  int trials = 5;
  std::uint64_t seed = 1;
};

bool report(const char* name, bool ok) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
  return ok;
}

int run_check_pricing(const fga::Instance& instance, const CheckArgs& args) {
  bool all_ok = true;
  bool dp_ok = true, adp_ok = true, submodular_ok = true, monotone_ok = true;
  bool greedy_ok = true, block_ok = true, feasibility_ok = true;

  for (int trial = 0; trial < args.trials; ++trial) {
    for (const fga::Gate& gate : instance.gates) {
      fga::Rng rng(fga::mix_seed(args.seed, fga::mix_seed(trial, gate.id)));
      std::vector<double> pi(instance.flights.size());
      for (double& v : pi) v = 0.5 + rng.uniform01() * 29.5;
      const auto input = fga::pricing::preprocess(instance, gate, pi);
      if (input.flights.empty()) continue;

      const auto exact = fga::pricing::dp_recursive(input);
      const auto oracle_report = fga::oracle::brute_force_pricing(input);
      dp_ok = dp_ok && std::fabs(exact.objective - oracle_report.optimum) <= 1e-9;

      const auto tabular =
          fga::pricing::dp_tabular(input, fga::pricing::horizon_c(input));
      adp_ok = adp_ok && std::fabs(tabular.objective - exact.objective) <= 1e-9;

      // sampled diminishing-returns and nested-delay checks
      const int n = static_cast<int>(input.flights.size());
      for (int probe = 0; probe < 40; ++probe) {
        std::vector<int> a_ids, b_ids;
        int u = -1;
        for (int i = 0; i < n; ++i) {
          const int id = input.flights[static_cast<std::size_t>(i)].flight_id;
          const int roll = static_cast<int>(rng.uniform_int(0, 3));
          if (roll == 0) {
            a_ids.push_back(id);
            b_ids.push_back(id);
          } else if (roll == 1) {
            b_ids.push_back(id);
          } else if (roll == 2 && u < 0) {
            u = id;
          }
        }
        if (u < 0) continue;
        auto with = [&](std::vector<int> ids) {
          ids.insert(std::lower_bound(ids.begin(), ids.end(), u), u);
          return fga::pricing::eval_f(input, ids);
        };
        const double lhs = with(a_ids) - fga::pricing::eval_f(input, a_ids);
        const double rhs = with(b_ids) - fga::pricing::eval_f(input, b_ids);
        submodular_ok = submodular_ok && lhs >= rhs - 1e-9;

        auto delay_sum = [&](const std::vector<int>& ids) {
          double benefit = 0;
          for (int id : ids)
            for (const auto& f : input.flights)
              if (f.flight_id == id) benefit += f.benefit;
          return benefit - fga::pricing::eval_f(input, ids);
        };
        monotone_ok = monotone_ok && delay_sum(b_ids) >= delay_sum(a_ids) - 1e-9;
      }

      // mean double-greedy value against the guarantee
      const double full = fga::pricing::eval_f(input, [&] {
        std::vector<int> ids;
        for (const auto& f : input.flights) ids.push_back(f.flight_id);
        return ids;
      }());
      if (full >= 0 && oracle_report.optimum > 1e-9) {
        double mean = 0;
        const int runs = 300;
        for (int s = 0; s < runs; ++s)
          mean += fga::pricing::double_greedy(
                      input, fga::mix_seed(args.seed, fga::mix_seed(s, gate.id)))
                      .objective;
        mean /= runs;
        greedy_ok = greedy_ok && mean >= 0.45 * oracle_report.optimum;
      }

      const auto block = fga::pricing::block_decomposition(input, false);
      const auto improved = fga::pricing::block_decomposition(input, true);
      block_ok = block_ok && block.objective >= 0.5 * exact.objective - 1e-9 &&
                 improved.objective >= block.objective - 1e-9;

      const auto rolled = fga::pricing::rolling_horizon(
          input, std::max(1, std::min(20, fga::pricing::adjacency_parameter(input))),
          1);
      const auto parks = fga::pricing::park_times_for(input, rolled.accepted);
      feasibility_ok = feasibility_ok && parks == rolled.park_times;
    }
  }
  all_ok &= report("pricing: recursive dp equals subset enumeration", dp_ok);
  all_ok &= report("pricing: tabular dp equals recursive dp", adp_ok);
  all_ok &= report("pricing: objective has diminishing returns", submodular_ok);
  all_ok &= report("pricing: delays monotone under set growth", monotone_ok);
  all_ok &= report("pricing: double greedy mean above half optimum", greedy_ok);
  all_ok &= report("pricing: block decomposition within factor two", block_ok);
  all_ok &= report("pricing: heuristic patterns schedule-feasible", feasibility_ok);
  return all_ok ? kExitOk : 1;
}

int run_check_full(const fga::Instance& instance, const CheckArgs& args) {
  const auto oracle_report = fga::oracle::brute_force_assignment(instance);
  fga::bnp::SolverConfig config;
  config.pricing = "dp";
  config.rel_gap = 1e-9;
  config.abs_gap = 1e-9;
  config.seed = args.seed;
  const auto result = fga::bnp::solve(instance, config);
  const bool ok =
      std::fabs(result.solution.objective -
                static_cast<double>(oracle_report.optimum)) <= 1e-6;
  std::cout << "oracle optimum " << oracle_report.optimum << ", solver "
            << result.solution.objective << "\n";
  return report("full: branch-and-price matches exhaustive assignment", ok)
             ? kExitOk
             : 1;
}

int run_check(const CheckArgs& args) {
  const fga::Instance instance = fga::load_instance(args.instance_path);
  if (args.mode == "pricing") return run_check_pricing(instance, args);
  if (args.mode == "full") return run_check_full(instance, args);
  throw CLI::ValidationError("--mode", "unknown mode " + args.mode);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flight-to-gate assignment solver (column generation)"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cmd_generate = app.add_subcommand("generate", "generate a synthetic instance");
  cmd_generate->add_option("--flights", gen.flights, "number of flights")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd_generate->add_option("--gates", gen.gates, "number of gates")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd_generate->add_option("--mean-interarrival", gen.mean_interarrival,
                           "mean minutes between consecutive arrivals")
      ->check(CLI::PositiveNumber);
  cmd_generate->add_option("--heavy-fraction", gen.heavy_fraction,
                           "fraction of heavy aircraft");
  cmd_generate->add_option("--seed", gen.seed, "random seed");
  cmd_generate->add_option("--buffer", gen.buffer, "gate buffer minutes");
  cmd_generate->add_option("--airlines", gen.airlines, "airline codes");
  cmd_generate->add_option("--out", gen.out, "output path ('-' for stdout)")
      ->required();
  cmd_generate->add_option("--csv-prefix", gen.csv_prefix,
                           "also write <prefix>.flights.csv / <prefix>.gates.csv");

  SolveArgs sol;
  CLI::App* cmd_solve = app.add_subcommand("solve", "run branch and price");
  cmd_solve->add_option("--instance", sol.instance_path, "instance file")->required();
  cmd_solve->add_option("--pricing", sol.pricing, "pricing strategy chain")
      ->check(CLI::IsMember({"dp", "sm+dp", "adp+dp", "rhf", "rhm", "sm+rhm"}));
  cmd_solve->add_option("--rel-gap", sol.rel_gap, "relative gap target");
  cmd_solve->add_option("--abs-gap", sol.abs_gap, "absolute gap target");
  cmd_solve->add_option("--time-limit", sol.time_limit, "seconds, 0 = none");
  cmd_solve->add_option("--threads", sol.threads, "pricing worker count")
      ->check(CLI::PositiveNumber);
  cmd_solve->add_option("--seed", sol.seed, "random seed");
  cmd_solve->add_option("--out", sol.out, "solution file ('-' for stdout)");
  cmd_solve->add_flag("--quiet", sol.quiet, "suppress per-iteration log");

  PriceArgs price;
  CLI::App* cmd_price =
      app.add_subcommand("price", "run one gate's pricing problem (debugging)");
  cmd_price->add_option("--instance", price.instance_path, "instance file")->required();
  cmd_price->add_option("--gate", price.gate, "gate id")->required();
  cmd_price->add_option("--strategy", price.strategy, "dg|dp|adp|bd|rh|oracle")
      ->check(CLI::IsMember({"dg", "dp", "adp", "bd", "rh", "oracle"}));
  cmd_price->add_option("--duals", price.duals_path,
                        "JSON file {\"pi\": [...], \"mu\": x}");
  cmd_price->add_option("--random-pi", price.random_pi,
                        "draw benefits uniformly from (0, MAX]");
  cmd_price->add_option("--seed", price.seed, "random seed");
  cmd_price->add_option("--horizon", price.horizon, "rolling horizon size");
  cmd_price->add_option("--window", price.window, "rolling window size");

  CheckArgs check;
  CLI::App* cmd_check =
      app.add_subcommand("check", "cross-check against the brute-force oracles");
  cmd_check->add_option("--instance", check.instance_path, "instance file")->required();
  cmd_check->add_option("--mode", check.mode, "pricing|full")
      ->check(CLI::IsMember({"pricing", "full"}));
  cmd_check->add_option("--trials", check.trials, "dual draws per gate")
      ->check(CLI::PositiveNumber);
  cmd_check->add_option("--seed", check.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_generate) return run_generate(gen);
    if (*cmd_solve) return run_solve(sol);
    if (*cmd_price) return run_price(price);
    if (*cmd_check) return run_check(check);
  } catch (const fga::oracle::CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOracleCap;
  } catch (const fga::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const fga::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const fga::GenerationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
