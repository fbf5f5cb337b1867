// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when a criterion fails that is not listed in --known-red.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <CLI11.hpp>

#include "cbnn/config.hpp"
#include "cbnn/experiment.hpp"
#include "cbnn/gnorm_study.hpp"
#include "cbnn/hw_inference.hpp"
#include "cbnn/weight_mapper.hpp"
#include "oracle.hpp"
#include "random_network.hpp"

using namespace cbnn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Report {
 public:
  explicit Report(std::set<int> known_red) : known_red_(std::move(known_red)) {}

  void add(int id, const std::string& name, const Outcome& o) {
    const bool known = known_red_.count(id) > 0;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << name;
    if (!o.pass && known) std::cout << " [known red]";
    if (o.pass && known) std::cout << " [listed as known red but passed]";
    std::cout << "\n      " << o.detail << std::endl;
    if (!o.pass && !known) unexpected_ = true;
    passed_ += o.pass;
    ++total_;
  }

  int finish() const {
    std::cout << passed_ << "/" << total_ << " criteria passed\n";
    return unexpected_ ? 1 : 0;
  }

 private:
  std::set<int> known_red_;
  bool unexpected_ = false;
  int passed_ = 0;
  int total_ = 0;
};

Dataset all_samples(const TrainTestSplit& s) {
  Dataset d = s.train;
  d.features.conservativeResize(s.train.size() + s.test.size(), Eigen::NoChange);
  d.features.bottomRows(s.test.size()) = s.test.features;
  d.labels.insert(d.labels.end(), s.test.labels.begin(), s.test.labels.end());
  d.sample_ids.insert(d.sample_ids.end(), s.test.sample_ids.begin(), s.test.sample_ids.end());
  return d;
}

Outcome solver_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  double worst = 0.0, worst_kcl = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const testing::Instance in = testing::random_instance(rng, trial % 2 == 1);
    const NetworkSolve s = solve_network(in.devices, in.geo, in.drive);
    std::array<double, kCells> g{};
    for (int c = 0; c < kCells; ++c) g[c] = conductance(in.devices[c], 0.0);
    const oracle::Result ref = oracle::solve(g, in.geo, in.drive);
    double scale = 0.0, abs_sum = 0.0, sum = 0.0;
    for (int p = 0; p < kPorts; ++p) {
      scale = std::max(scale, std::abs(ref.port_i[p]));
      abs_sum += std::abs(s.port_currents[p]);
      sum += s.port_currents[p];
    }
    for (int p = 0; p < kPorts; ++p) worst = std::max(worst, std::abs(s.port_currents[p] - ref.port_i[p]) / scale);
    worst_kcl = std::max(worst_kcl, std::abs(sum) / abs_sum);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-9 && worst_kcl <= 1e-12 && t < 10.0,
          "50 instances: max relative port-current error " + num(worst, 3) + ", max KCL residual " +
              num(worst_kcl, 3) + ", " + num(t, 3) + " s"};
}

Outcome ideal_reduction(const std::vector<TernarySolution>& sols, const Dataset& all, const SizeBlock& block,
                        const VerifyConfig& verify) {
  const auto t0 = Clock::now();
  const DeviceParams p = block.device.without_variation();
  const LineGeometry geo = block.lines.ideal();
  const double g_norm = p.g_off_mean * p.tmr_mean;
  long mismatches = 0;
  int bad_programs = 0;
  for (std::size_t k = 0; k < sols.size(); ++k) {
    Crossbar xbar(p, geo, k);
    const TargetStateMap targets = map_weights(sols[k]);
    xbar.program(targets, verify);
    if (!(xbar.states() == targets)) ++bad_programs;
    const ConductanceMap g = xbar.read_all();
    for (int s = 0; s < all.size(); ++s) {
      const FeatureVector x = all.sample(s);
      mismatches += hw_forward(g, g_norm, sols[k].b1, sols[k].b2, x).predicted != predict(sols[k], x);
    }
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && bad_programs == 0 && t < 120.0,
          std::to_string(sols.size()) + " solutions x " + std::to_string(all.size()) + " samples: " +
              std::to_string(mismatches) + " mismatches, " + std::to_string(bad_programs) +
              " imperfect programs, " + num(t, 3) + " s"};
}

Outcome training_floor(const std::vector<TernarySolution>& sols, double seconds) {
  double min_train = 1.0;
  int test_ok = 0;
  for (const auto& s : sols) {
    min_train = std::min(min_train, s.train_accuracy);
    test_ok += s.test_accuracy >= 0.95;
  }
  const double frac = static_cast<double>(test_ok) / static_cast<double>(sols.size());
  return {sols.size() == 300 && min_train >= 0.96 && frac >= 0.90 && seconds < 600.0,
          std::to_string(sols.size()) + " solutions: min train accuracy " + num(min_train) + ", test >= 0.95 for " +
              num(100.0 * frac) + " %, training " + num(seconds, 4) + " s"};
}

Outcome zero_variation_ratio(const std::vector<SizeStudy>& study) {
  bool ok = true;
  std::string d;
  for (const auto& s : study) {
    ok = ok && s.ratio_no_variation == 1.0;
    d += s.name + " " + num(s.ratio_no_variation) + " (acc opt " + num(s.no_variation.g_norm_acc_opt) + ", rms opt " +
         num(s.no_variation.g_norm_rms_opt) + ")  ";
  }
  return {ok, "no-variation ratio per size: " + d};
}

Outcome variation_ratio(const std::vector<SizeStudy>& study, double seconds) {
  bool monotone = true;
  std::string d;
  for (std::size_t k = 0; k < study.size(); ++k) {
    if (k > 0 && study[k].ratio_stats.median < study[k - 1].ratio_stats.median) monotone = false;
    d += study[k].name + " " + num(study[k].ratio_stats.median) + "  ";
  }
  const double first = study.front().ratio_stats.median;
  return {first > 1.2 && monotone && seconds < 1800.0,
          "median ratio over " + std::to_string(study.front().ratio_with_variation.size()) +
              " realizations: " + d + "study " + num(seconds, 4) + " s"};
}

Outcome tuning_payoff(const SizeStudy& s) {
  const double at_opt = median(s.median_accuracy_at_opt);
  const double at_est = median(s.median_accuracy_at_estimate);
  return {at_opt - at_est >= 0.10 && at_opt >= 0.90,
          s.name + ": median accuracy at optimum " + num(at_opt) + ", at estimate (median g_norm " +
              num(median(s.g_norm_estimate)) + ") " + num(at_est) + ", gap " + num(100.0 * (at_opt - at_est), 3) +
              " points"};
}

Outcome write_fidelity(const std::vector<TernarySolution>& sols, const StudyConfig& cfg) {
  std::vector<double> clear_med, write_med;
  std::string d;
  bool all_30nm = true;
  double med_60 = 0.0;
  for (const auto& block : cfg.sizes) {
    const ArraySetup setup = cfg.array_setup(block);
    std::vector<double> clear, write;
    for (int k = 0; k < 30; ++k) {
      const ProgrammedArray arr =
          program_and_read(sols[static_cast<std::size_t>(k)], setup, derive_seed(cfg.seed, "write-fidelity"));
      clear.push_back(arr.report.clear_accuracy);
      write.push_back(arr.report.write_accuracy);
    }
    if (block.name == "30nm") all_30nm = *std::min_element(write.begin(), write.end()) == 1.0;
    if (block.name == "60nm") med_60 = median(write);
    clear_med.push_back(median(clear));
    write_med.push_back(median(write));
    d += block.name + " clear " + num(clear_med.back()) + " write " + num(write_med.back()) + " (min " +
         num(*std::min_element(write.begin(), write.end())) + ")  ";
  }
  bool monotone = true;
  for (std::size_t k = 1; k < write_med.size(); ++k)
    monotone = monotone && write_med[k] <= write_med[k - 1] && clear_med[k] <= clear_med[k - 1];
  return {all_30nm && med_60 >= 0.78 && med_60 <= 0.92 && monotone, "30 arrays per size, medians: " + d};
}

Outcome superposition(const StudyConfig& cfg) {
  const auto t0 = Clock::now();
  const SizeBlock& block = cfg.size("30nm");
  const std::uint64_t seed = derive_seed(cfg.seed, "superposition");
  Rng rng(derive_seed(seed, "targets"));
  const TargetStateMap targets = random_solution_targets(rng);

  Crossbar real(block.device, block.lines, seed);
  real.program(targets, cfg.verify);
  const SuperpositionResult r = superposition_check(real, cfg.superposition, seed);

  DeviceParams quiet = block.device;
  quiet.read_noise_std = 0.0;
  Crossbar ideal(quiet, block.lines, seed);
  ideal.program(targets, cfg.verify);
  const SuperpositionResult z = superposition_check(ideal, cfg.superposition, seed);

  bool ok = block.lines.r_segment == 20.0 && block.device.read_noise_std == 10.0;
  std::string d;
  double ideal_max = 0.0;
  for (std::size_t k = 0; k < r.voltages.size(); ++k) {
    const double m = r.stats[k].median;
    ok = ok && m <= 0.03 && r.voltages[k] <= 0.5 + 1e-12;
    if (std::abs(r.voltages[k] - 0.2) < 1e-12) ok = ok && m <= 0.015;
    d += num(r.voltages[k], 2) + " V " + num(100.0 * m, 3) + " %  ";
    ideal_max = std::max(ideal_max, z.stats[k].max);
  }
  ok = ok && ideal_max <= 1e-12;
  const double t = seconds_since(t0);
  return {ok && t < 300.0, "median relative deviation: " + d + "noiseless max " + num(ideal_max, 3) + ", " +
                               num(t, 3) + " s"};
}

Outcome rms_formula() {
  TernarySolution net;
  net.w1(3, 2) = 1;
  net.w2(4, 1) = -1;
  TargetStateMap targets = map_weights(net);
  ConductanceMap g;
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kCols; ++j) g(i, j) = targets.at(i, j) ? 15.0 : 8.0;
  g(0, 0) += 7.0;    // w1(0, 0) reads as +1 instead of 0
  g(5, 14) += 7.0;   // w2(2, 2) reads as -1 instead of 0
  const double direct = rms_deviation(net, extract_weights(g, 7.0));
  Dataset one;
  one.features = FeatureMatrix::Zero(1, kNumFeatures);
  one.labels = {0};
  one.sample_ids = {0};
  const double pipeline = HardwareEvaluator(g, net, one).rms(7.0);
  return {direct == 2.0 && pipeline == 2.0,
          "one unit error per layer: " + num(direct, 17) + " (evaluator " + num(pipeline, 17) + ", pooled form would be " +
              num(std::sqrt(2.0), 6) + ")"};
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::map<std::string, std::uint64_t> hash_tree(const fs::path& root) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    out[fs::relative(e.path(), root).string()] = fnv1a(bytes);
  }
  return out;
}

int run(const std::string& args) {
  const std::string cmd = std::string(CBNN_CLI) + " " + args + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const fs::path& config_path, const fs::path& work) {
  nlohmann::json j = nlohmann::json::parse(std::ifstream(config_path), nullptr, true, true);
  j["dataset"] = fs::absolute(config_path.parent_path() / j["dataset"].get<std::string>()).string();
  j["n_solutions"] = 6;
  j["n_realizations"] = 2;
  j["gnorm_grid"]["step"] = 0.5;
  j["superposition"]["n_vectors"] = 20;
  const fs::path cfg = work / "determinism.json";
  std::ofstream(cfg) << j.dump(2);

  const std::vector<std::string> commands{"train", "characterize --size 60nm", "sweep --size 40nm",
                                          "variation-study", "superposition --size 50nm"};
  std::map<std::string, std::uint64_t> first, second;
  for (const char* tag : {"a", "b"}) {
    const fs::path out = work / "determinism" / tag;
    fs::remove_all(out);
    for (const auto& c : commands)
      if (run(c + " --config " + cfg.string() + " --out " + out.string()) != 0)
        return {false, "command failed: " + c};
    (std::string(tag) == "a" ? first : second) = hash_tree(out);
  }
  int differing = 0;
  for (const auto& [name, h] : first) differing += !second.count(name) || second.at(name) != h;
  return {!first.empty() && first.size() == second.size() && differing == 0,
          std::to_string(first.size()) + " output files from " + std::to_string(commands.size()) +
              " commands, run twice: " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string config = (fs::path(CBNN_CONFIG_DIR) / "default.json").string();
  std::string work = (fs::temp_directory_path() / "cbnn_acceptance").string();
  std::vector<int> known_red;
  int jobs = 1;
  app.add_option("--config", config, "study config")->check(CLI::ExistingFile);
  app.add_option("--work", work, "scratch directory");
  app.add_option("--known-red", known_red, "criteria expected to fail");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    fs::remove_all(work);
    fs::create_directories(work);
    Report report({known_red.begin(), known_red.end()});

    report.add(1, "nodal solver matches the dense oracle", solver_oracle());

    RunOptions opts;
    opts.out = fs::path(work) / "study";
    opts.jobs = jobs;
    const StudyConfig cfg = resolve_config(config, opts);
    const TrainTestSplit data = load_wine_split(cfg.dataset, cfg.split_seed);

    std::ostringstream log;
    auto t0 = Clock::now();
    cmd_train(cfg, log);
    const double train_s = seconds_since(t0);
    const std::vector<TernarySolution> sols = load_solutions(cfg);
    report.add(2, "ideal array reproduces software predictions",
               ideal_reduction(sols, all_samples(data), cfg.size("30nm"), cfg.verify));
    report.add(3, "training floor", training_floor(sols, train_s));

    std::vector<SizeSetup> sizes;
    for (const auto& b : cfg.sizes) sizes.push_back({b.name, cfg.array_setup(b)});
    t0 = Clock::now();
    const std::vector<SizeStudy> study = variation_study(sols, data.train, sizes, cfg.n_realizations,
                                                         cfg.grid.values(), derive_seed(cfg.seed, "variation"), jobs);
    const double study_s = seconds_since(t0);
    report.add(4, "zero variation gives unit ratio", zero_variation_ratio(study));
    report.add(5, "variation raises the ratio, growing with size", variation_ratio(study, study_s));
    report.add(6, "g_norm tuning payoff at 30 nm", tuning_payoff(study.front()));
    report.add(7, "write fidelity and size trend", write_fidelity(sols, cfg));
    report.add(8, "parallel read superposition", superposition(cfg));
    report.add(9, "RMS deviation is the sum of per-layer roots", rms_formula());
    report.add(10, "byte-identical reruns", determinism(config, work));
    return report.finish();
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << "\n";
    return 1;
  }
}
