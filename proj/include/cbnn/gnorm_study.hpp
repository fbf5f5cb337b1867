#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbnn/crossbar.hpp"
#include "cbnn/stats.hpp"
#include "cbnn/ternary_net.hpp"
#include "cbnn/weight_mapper.hpp"
#include "cbnn/wine_data.hpp"

namespace cbnn {

/// Mean measured conductance over target-on cells minus the mean over
/// target-off cells. Throws std::invalid_argument when either set is empty.
double estimate_gnorm(const ConductanceMap& g, const TargetStateMap& targets);

/// lo, lo + step, ... up to hi inclusive (computed by index, no drift).
std::vector<double> make_grid(double lo, double hi, double step);

/// Everything needed to program and evaluate one array.
struct ArraySetup {
  DeviceParams params;
  LineGeometry geometry;
  VerifyConfig verify;
  ZeroEncoding zero = ZeroEncoding::BothOff;
  double v_read = 0.2;
};

struct ProgrammedArray {
  TargetStateMap targets;
  WriteReport report;
  ConductanceMap g;
};

/// Programs `net` into a fresh array seeded from (seed, net.seed) and reads
/// every cell once. run_sweep uses exactly this per solution.
ProgrammedArray program_and_read(const TernarySolution& net, const ArraySetup& setup, std::uint64_t seed);

struct SolutionSweep {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double clear_accuracy = 0.0;
  double write_accuracy = 0.0;
  double estimate = 0.0;  // NaN when the targets have no on- or no off-cell
  std::vector<double> accuracy;  // per grid point
  std::vector<double> rms;       // per grid point
};

struct SweepResult {
  std::vector<double> grid;
  std::vector<Quartiles> accuracy;  // per grid point, over solutions
  std::vector<Quartiles> rms;
  std::size_t acc_opt_index = 0;
  std::size_t rms_opt_index = 0;
  double g_norm_acc_opt = 0.0;
  double g_norm_rms_opt = 0.0;
  double ratio = 0.0;
  double g_norm_estimate = 0.0;          // median of per-solution estimates
  double median_accuracy_at_opt = 0.0;
  double median_accuracy_at_estimate = 0.0;
  double min_median_rms = 0.0;
  Quartiles clear_accuracy;
  Quartiles write_accuracy;
  int failed_solutions = 0;
  std::vector<SolutionSweep> solutions;
};

/// Programs every solution into a fresh array seeded from (seed, solution
/// seed), reads it once and evaluates train accuracy and RMS deviation over
/// the whole grid. Optima are located on the median curves; ties in median
/// accuracy go to the smaller g_norm. A solver failure excludes that solution
/// and is recorded; if every solution fails, SolverError is thrown.
SweepResult run_sweep(const std::vector<TernarySolution>& solutions, const Dataset& train,
                      const ArraySetup& setup, const std::vector<double>& grid, std::uint64_t seed,
                      int jobs = 1);

void to_json(nlohmann::json& j, const SweepResult& r);
/// Header `g_norm,min,q25,median,q75,max`.
void write_quartile_csv(std::ostream& os, const std::vector<double>& grid, const std::vector<Quartiles>& q);

struct SizeSetup {
  std::string name;
  ArraySetup setup;
};

struct SizeStudy {
  std::string name;
  std::vector<double> ratio_with_variation;   // one per realization
  Quartiles ratio_stats;
  double ratio_no_variation = 0.0;
  std::vector<double> median_accuracy_at_opt;  // per realization
  std::vector<double> min_median_rms;          // per realization
  std::vector<double> median_accuracy_at_estimate;
  std::vector<double> g_norm_estimate;
  std::vector<double> clear_accuracy;  // per realization: median over solutions
  std::vector<double> write_accuracy;  // per realization: median over solutions
  double min_write_accuracy = 1.0;     // over every programmed array
  SweepResult no_variation;
};

/// For each size: n_realizations sweeps with variation (realization r uses the
/// same derived seed for every size) and one sweep with all spreads and line
/// resistances set to zero.
std::vector<SizeStudy> variation_study(const std::vector<TernarySolution>& solutions, const Dataset& train,
                                       const std::vector<SizeSetup>& sizes, int n_realizations,
                                       const std::vector<double>& grid, std::uint64_t seed, int jobs = 1);

void to_json(nlohmann::json& j, const SizeStudy& s);

}  // namespace cbnn
