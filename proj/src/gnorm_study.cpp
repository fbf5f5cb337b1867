#include "cbnn/gnorm_study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "cbnn/errors.hpp"
#include "cbnn/hw_inference.hpp"
#include "cbnn/parallel.hpp"

namespace cbnn {

double estimate_gnorm(const ConductanceMap& g, const TargetStateMap& targets) {
  double sum_on = 0.0, sum_off = 0.0;
  int n_on = 0, n_off = 0;
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kCols; ++j) {
      if (targets.at(i, j)) {
        sum_on += g(i, j);
        ++n_on;
      } else {
        sum_off += g(i, j);
        ++n_off;
      }
    }
  if (n_on == 0 || n_off == 0) throw std::invalid_argument("estimate_gnorm: needs both on and off target cells");
  return sum_on / n_on - sum_off / n_off;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(lo > 0.0) || !(step > 0.0) || hi < lo) throw ConfigError("g_norm grid needs 0 < lo <= hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) grid[k] = std::round((lo + static_cast<double>(k) * step) * 1e9) / 1e9;
  return grid;
}

ProgrammedArray program_and_read(const TernarySolution& net, const ArraySetup& setup, std::uint64_t seed) {
  Crossbar xbar(setup.params, setup.geometry, derive_seed(seed, "array", net.seed));
  ProgrammedArray out;
  out.targets = map_weights(net, setup.zero);
  out.report = xbar.program(out.targets, setup.verify);
  out.g = xbar.read_all(setup.v_read);
  return out;
}

namespace {

SolutionSweep sweep_one(const TernarySolution& net, const Dataset& train, const ArraySetup& setup,
                        const std::vector<double>& grid, std::uint64_t seed, ConductanceMap& g) {
  SolutionSweep s;
  s.seed = net.seed;
  try {
    const ProgrammedArray arr = program_and_read(net, setup, seed);
    s.clear_accuracy = arr.report.clear_accuracy;
    s.write_accuracy = arr.report.write_accuracy;
    g = arr.g;
    const int on = arr.targets.count_on();
    s.estimate = on > 0 && on < kCells ? estimate_gnorm(g, arr.targets) : std::numeric_limits<double>::quiet_NaN();
    const HardwareEvaluator eval(g, net, train);
    s.accuracy.reserve(grid.size());
    s.rms.reserve(grid.size());
    for (double gn : grid) {
      s.accuracy.push_back(eval.accuracy(gn));
      s.rms.push_back(eval.rms(gn));
    }
  } catch (const SolverError& e) {
    s.failed = true;
    s.error = e.what();
  }
  return s;
}

}  // namespace

SweepResult run_sweep(const std::vector<TernarySolution>& solutions, const Dataset& train,
                      const ArraySetup& setup, const std::vector<double>& grid, std::uint64_t seed, int jobs) {
  if (grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!(grid[k] > 0.0) || (k > 0 && !(grid[k] > grid[k - 1])))
      throw std::invalid_argument("run_sweep: grid must be positive and strictly ascending");

  SweepResult r;
  r.grid = grid;
  r.solutions.resize(solutions.size());
  std::vector<ConductanceMap> maps(solutions.size());
  parallel_for(solutions.size(), jobs, [&](std::size_t k) {
    r.solutions[k] = sweep_one(solutions[k], train, setup, grid, seed, maps[k]);
  });

  std::vector<std::size_t> ok;
  for (std::size_t k = 0; k < solutions.size(); ++k) {
    if (r.solutions[k].failed)
      ++r.failed_solutions;
    else
      ok.push_back(k);
  }
  if (ok.empty()) throw SolverError("run_sweep: every solution failed");

  std::vector<double> column(ok.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (std::size_t k = 0; k < ok.size(); ++k) column[k] = r.solutions[ok[k]].accuracy[gi];
    r.accuracy.push_back(quartile_stats(column));
    for (std::size_t k = 0; k < ok.size(); ++k) column[k] = r.solutions[ok[k]].rms[gi];
    r.rms.push_back(quartile_stats(column));
  }
  for (std::size_t gi = 1; gi < grid.size(); ++gi) {
    if (r.accuracy[gi].median > r.accuracy[r.acc_opt_index].median) r.acc_opt_index = gi;
    if (r.rms[gi].median < r.rms[r.rms_opt_index].median) r.rms_opt_index = gi;
  }
  r.g_norm_acc_opt = grid[r.acc_opt_index];
  r.g_norm_rms_opt = grid[r.rms_opt_index];
  r.ratio = r.g_norm_rms_opt / r.g_norm_acc_opt;
  r.median_accuracy_at_opt = r.accuracy[r.acc_opt_index].median;
  r.min_median_rms = r.rms[r.rms_opt_index].median;

  std::vector<double> estimates, clear, write;
  for (std::size_t k : ok) {
    if (!std::isnan(r.solutions[k].estimate)) estimates.push_back(r.solutions[k].estimate);
    clear.push_back(r.solutions[k].clear_accuracy);
    write.push_back(r.solutions[k].write_accuracy);
  }
  r.clear_accuracy = quartile_stats(clear);
  r.write_accuracy = quartile_stats(write);
  r.g_norm_estimate = estimates.empty() ? std::numeric_limits<double>::quiet_NaN() : median(estimates);
  if (r.g_norm_estimate > 0.0) {
    std::vector<double> at_estimate(ok.size());
    for (std::size_t k = 0; k < ok.size(); ++k)
      at_estimate[k] = HardwareEvaluator(maps[ok[k]], solutions[ok[k]], train).accuracy(r.g_norm_estimate);
    r.median_accuracy_at_estimate = median(at_estimate);
  }
  return r;
}

void to_json(nlohmann::json& j, const SweepResult& r) {
  nlohmann::json per_solution = nlohmann::json::array();
  for (const auto& s : r.solutions) {
    nlohmann::json e = {{"seed", s.seed}, {"failed", s.failed}};
    if (s.failed) {
      e["error"] = s.error;
    } else {
      e["clear_accuracy"] = s.clear_accuracy;
      e["write_accuracy"] = s.write_accuracy;
      e["estimate"] = std::isnan(s.estimate) ? nlohmann::json() : nlohmann::json(s.estimate);
    }
    per_solution.push_back(std::move(e));
  }
  j = {{"g_norm_acc_opt", r.g_norm_acc_opt},
       {"g_norm_rms_opt", r.g_norm_rms_opt},
       {"ratio", r.ratio},
       {"g_norm_estimate", r.g_norm_estimate},
       {"median_accuracy_at_opt", r.median_accuracy_at_opt},
       {"median_accuracy_at_estimate", r.median_accuracy_at_estimate},
       {"min_median_rms", r.min_median_rms},
       {"clear_accuracy", r.clear_accuracy},
       {"write_accuracy", r.write_accuracy},
       {"failed_solutions", r.failed_solutions},
       {"grid", r.grid},
       {"accuracy", r.accuracy},
       {"rms", r.rms},
       {"solutions", per_solution}};
}

void write_quartile_csv(std::ostream& os, const std::vector<double>& grid, const std::vector<Quartiles>& q) {
  os << "g_norm,min,q25,median,q75,max\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    os << grid[k] << ',' << q[k].min << ',' << q[k].q25 << ',' << q[k].median << ',' << q[k].q75 << ','
       << q[k].max << '\n';
}

std::vector<SizeStudy> variation_study(const std::vector<TernarySolution>& solutions, const Dataset& train,
                                       const std::vector<SizeSetup>& sizes, int n_realizations,
                                       const std::vector<double>& grid, std::uint64_t seed, int jobs) {
  if (sizes.empty()) throw std::invalid_argument("variation_study: no size configurations");
  if (n_realizations <= 0) throw std::invalid_argument("variation_study: n_realizations must be > 0");
  std::vector<SizeStudy> out;
  for (const auto& size : sizes) {
    SizeStudy st;
    st.name = size.name;
    for (int r = 0; r < n_realizations; ++r) {
      const SweepResult sw =
          run_sweep(solutions, train, size.setup, grid, derive_seed(seed, "realization", static_cast<std::uint64_t>(r)), jobs);
      st.ratio_with_variation.push_back(sw.ratio);
      st.median_accuracy_at_opt.push_back(sw.median_accuracy_at_opt);
      st.min_median_rms.push_back(sw.min_median_rms);
      st.median_accuracy_at_estimate.push_back(sw.median_accuracy_at_estimate);
      st.g_norm_estimate.push_back(sw.g_norm_estimate);
      st.clear_accuracy.push_back(sw.clear_accuracy.median);
      st.write_accuracy.push_back(sw.write_accuracy.median);
      st.min_write_accuracy = std::min(st.min_write_accuracy, sw.write_accuracy.min);
    }
    st.ratio_stats = quartile_stats(st.ratio_with_variation);

    ArraySetup ideal = size.setup;
    ideal.params = ideal.params.without_variation();
    ideal.geometry = ideal.geometry.ideal();
    st.no_variation = run_sweep(solutions, train, ideal, grid, derive_seed(seed, "no-variation"), jobs);
    st.no_variation.solutions.clear();
    st.ratio_no_variation = st.no_variation.ratio;
    out.push_back(std::move(st));
  }
  return out;
}

void to_json(nlohmann::json& j, const SizeStudy& s) {
  j = {{"size", s.name},
       {"ratio_with_variation", s.ratio_with_variation},
       {"ratio_stats", s.ratio_stats},
       {"ratio_no_variation", s.ratio_no_variation},
       {"median_accuracy_at_opt", s.median_accuracy_at_opt},
       {"min_median_rms", s.min_median_rms},
       {"median_accuracy_at_estimate", s.median_accuracy_at_estimate},
       {"g_norm_estimate", s.g_norm_estimate},
       {"clear_accuracy", s.clear_accuracy},
       {"write_accuracy", s.write_accuracy},
       {"min_write_accuracy", s.min_write_accuracy},
       {"no_variation",
        {{"g_norm_acc_opt", s.no_variation.g_norm_acc_opt},
         {"g_norm_rms_opt", s.no_variation.g_norm_rms_opt},
         {"median_accuracy_at_opt", s.no_variation.median_accuracy_at_opt},
         {"min_median_rms", s.no_variation.min_median_rms}}}};
}

}  // namespace cbnn
