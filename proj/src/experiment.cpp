#include "cbnn/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cbnn/errors.hpp"
#include "cbnn/parallel.hpp"

namespace fs = std::filesystem;

namespace cbnn {
namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename Fn>
void write_csv_file(const fs::path& path, Fn&& body) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(10);
  body(os);
  write_text(path, os.str());
}

nlohmann::json envelope(const StudyConfig& cfg) { return {{"seed", cfg.seed}, {"config", to_json(cfg)}}; }

std::string solution_file(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "solution_%03d.json", k + 1);
  return buf;
}

struct Histogram {
  double lo = 0.0;
  double width = 1.0;
  std::vector<std::vector<int>> counts;  // [series][bin]
};

Histogram histogram(const std::vector<std::vector<double>>& series, double width) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series)
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  Histogram h;
  h.width = width;
  h.lo = std::floor(lo / width) * width;
  const auto n = static_cast<std::size_t>(std::floor((hi - h.lo) / width)) + 1;
  for (const auto& s : series) {
    std::vector<int> c(n, 0);
    for (double v : s) ++c[std::min(n - 1, static_cast<std::size_t>(std::floor((v - h.lo) / width)))];
    h.counts.push_back(std::move(c));
  }
  return h;
}

void write_histogram(std::ostream& os, const Histogram& h, const std::vector<std::string>& names) {
  os << "bin_low,bin_high";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (std::size_t b = 0; b < h.counts.front().size(); ++b) {
    os << h.lo + b * h.width << ',' << h.lo + (b + 1) * h.width;
    for (const auto& c : h.counts) os << ',' << c[b];
    os << '\n';
  }
}

nlohmann::json mean_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  return {{"mean", m}, {"std", std::sqrt(var / static_cast<double>(v.size()))}};
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

StudyConfig resolve_config(const fs::path& config_path, const RunOptions& opts) {
  StudyConfig cfg = load_config(config_path);
  if (const char* env = std::getenv("CBNN_OUT_DIR"); env && *env) cfg.output_dir = env;
  if (const char* env = std::getenv("CBNN_JOBS"); env && *env) {
    try {
      cfg.jobs = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("CBNN_JOBS is not an integer: ") + env);
    }
  }
  if (opts.out) cfg.output_dir = *opts.out;
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.jobs) cfg.jobs = *opts.jobs;
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  return cfg;
}

fs::path solutions_dir(const StudyConfig& cfg) { return cfg.output_dir / "solutions"; }

std::vector<TernarySolution> load_solutions(const StudyConfig& cfg) {
  const fs::path dir = solutions_dir(cfg);
  std::vector<TernarySolution> out;
  for (int k = 0; k < cfg.n_solutions; ++k) {
    const fs::path file = dir / solution_file(k);
    std::ifstream in(file);
    if (!in)
      throw ConfigError("missing " + file.string() + "; run `crossbar-bnn train` with the same config first");
    try {
      out.push_back(nlohmann::json::parse(in).at("solution").get<TernarySolution>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(file.string() + ": " + e.what());
    }
  }
  return out;
}

void cmd_train(const StudyConfig& cfg, std::ostream& log) {
  const TrainTestSplit data = load_wine_split(cfg.dataset, cfg.split_seed);
  const std::uint64_t base = derive_seed(cfg.seed, "solutions");
  log << "training " << cfg.n_solutions << " solutions (" << cfg.jobs << " jobs)\n";
  std::vector<TernarySolution> sols =
      generate_solutions(cfg.n_solutions, base, data.train, &data.test, cfg.training, cfg.jobs);

  // Duplicated weight matrices are replaced by training further seeds.
  std::uint64_t next = base + static_cast<std::uint64_t>(cfg.n_solutions);
  int replaced = 0;
  for (std::vector<int> dup = duplicate_of(sols);; dup = duplicate_of(sols)) {
    bool any = false;
    for (std::size_t k = 0; k < sols.size(); ++k) {
      if (dup[k] < 0) continue;
      sols[k] = train_one(next++, data.train, cfg.training, &data.test);
      ++replaced;
      any = true;
      break;
    }
    if (!any) break;
  }

  const fs::path dir = solutions_dir(cfg);
  nlohmann::json manifest = envelope(cfg);
  nlohmann::json entries = nlohmann::json::array();
  double min_train = 1.0;
  int test_ok = 0;
  for (std::size_t k = 0; k < sols.size(); ++k) {
    nlohmann::json j = envelope(cfg);
    j["solution"] = sols[k];
    write_json(dir / solution_file(static_cast<int>(k)), j);
    entries.push_back({{"file", solution_file(static_cast<int>(k))},
                       {"seed", sols[k].seed},
                       {"train_accuracy", sols[k].train_accuracy},
                       {"test_accuracy", sols[k].test_accuracy}});
    min_train = std::min(min_train, sols[k].train_accuracy);
    test_ok += sols[k].test_accuracy >= 0.95;
  }
  manifest["solutions"] = entries;
  manifest["min_train_accuracy"] = min_train;
  manifest["fraction_test_at_least_0_95"] = static_cast<double>(test_ok) / static_cast<double>(sols.size());
  manifest["replaced_duplicates"] = replaced;
  write_json(dir / "manifest.json", manifest);
  log << "wrote " << sols.size() << " solutions to " << dir.string() << "\n"
      << "min train accuracy " << fmt(min_train) << ", test >= 0.95 for " << test_ok << "/" << sols.size() << "\n";
}

void cmd_characterize(const StudyConfig& cfg, const std::string& size, std::ostream& log) {
  const SizeBlock& block = cfg.size(size);
  Crossbar xbar(block.device, block.lines, derive_seed(cfg.seed, "characterize"));

  std::vector<double> to_on, to_off;
  for (const auto& d : xbar.devices()) {
    to_on.push_back(d.v_switch_to_on);
    to_off.push_back(d.v_switch_to_off);
  }
  const WriteReport clear = xbar.clear_array(cfg.verify);

  ConductanceMap v_on, v_off, g_on, g_off;
  std::vector<double> eff_on, eff_off, on_reads, off_reads;
  int failures = 0;
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kCols; ++j) {
      const WriteOutcome on = xbar.write_verify(i, j, true, cfg.verify);
      const WriteOutcome off = xbar.write_verify(i, j, false, cfg.verify);
      failures += (on.status != WriteStatus::Success) + (off.status != WriteStatus::Success);
      v_on(i, j) = on.voltage;
      v_off(i, j) = off.voltage;
      g_on(i, j) = on.g_on_read;
      g_off(i, j) = off.g_off_read;
      eff_on.push_back(on.voltage);
      eff_off.push_back(off.voltage);
      on_reads.push_back(on.g_on_read);
      off_reads.push_back(off.g_off_read);
    }

  const fs::path dir = cfg.output_dir / ("characterize_" + size);
  write_csv_file(dir / "switching_voltage_hist.csv", [&](std::ostream& os) {
    write_histogram(os, histogram({to_on, to_off}, 0.05), {"to_on", "to_off"});
  });
  write_csv_file(dir / "effective_switching_hist.csv", [&](std::ostream& os) {
    write_histogram(os, histogram({eff_on, eff_off}, cfg.verify.v_step), {"to_on", "to_off"});
  });
  write_csv_file(dir / "conductance_hist.csv", [&](std::ostream& os) {
    write_histogram(os, histogram({on_reads, off_reads}, 0.25), {"on", "off"});
  });
  write_csv_file(dir / "effective_switching_map.csv", [&](std::ostream& os) { write_csv(os, v_on); });
  write_csv_file(dir / "effective_switching_off_map.csv", [&](std::ostream& os) { write_csv(os, v_off); });
  write_csv_file(dir / "g_on_map.csv", [&](std::ostream& os) { write_csv(os, g_on); });
  write_csv_file(dir / "g_off_map.csv", [&](std::ostream& os) { write_csv(os, g_off); });

  nlohmann::json summary = envelope(cfg);
  summary["size"] = size;
  summary["intrinsic_switching_voltage"] = {{"to_on", mean_std(to_on)}, {"to_off", mean_std(to_off)}};
  summary["effective_switching_voltage"] = {{"to_on", mean_std(eff_on)}, {"to_off", mean_std(eff_off)}};
  summary["g_on_read"] = mean_std(on_reads);
  summary["g_off_read"] = mean_std(off_reads);
  summary["v_max"] = xbar.v_max();
  summary["clear_accuracy"] = clear.clear_accuracy;
  summary["verify_failures"] = failures;
  summary["center_minus_corner_effective_voltage"] = v_on(7, 7) - v_on(kRows - 1, 0);
  write_json(dir / "summary.json", summary);

  log << "size " << size << ": intrinsic switching voltage mean " << fmt(summary["intrinsic_switching_voltage"]["to_on"]["mean"].get<double>())
      << " V, effective (to on) mean " << fmt(summary["effective_switching_voltage"]["to_on"]["mean"].get<double>())
      << " V, g_on " << fmt(summary["g_on_read"]["mean"].get<double>()) << " uS, g_off "
      << fmt(summary["g_off_read"]["mean"].get<double>()) << " uS\n"
      << "wrote " << dir.string() << "\n";
}

void cmd_sweep(const StudyConfig& cfg, const std::string& size, std::ostream& log) {
  const SizeBlock& block = cfg.size(size);
  const std::vector<TernarySolution> sols = load_solutions(cfg);
  const TrainTestSplit data = load_wine_split(cfg.dataset, cfg.split_seed);
  const ArraySetup setup = cfg.array_setup(block);
  const std::uint64_t seed = derive_seed(cfg.seed, "sweep");
  const SweepResult r = run_sweep(sols, data.train, setup, cfg.grid.values(), seed, cfg.jobs);

  const fs::path dir = cfg.output_dir / ("sweep_" + size);
  nlohmann::json j = envelope(cfg);
  j["size"] = size;
  j["result"] = r;
  write_json(dir / "sweep.json", j);
  write_csv_file(dir / "accuracy.csv", [&](std::ostream& os) { write_quartile_csv(os, r.grid, r.accuracy); });
  write_csv_file(dir / "rms.csv", [&](std::ostream& os) { write_quartile_csv(os, r.grid, r.rms); });

  // Output traces of the first solution at the accuracy optimum.
  const ProgrammedArray first = program_and_read(sols.front(), setup, seed);
  const HwEvalResult ev = evaluate_solution(first.g, r.g_norm_acc_opt, sols.front(), data.train, data.test, true);
  nlohmann::json jt = envelope(cfg);
  jt["size"] = size;
  jt["evaluation"] = ev;
  write_json(dir / "trace.json", jt);
  write_csv_file(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, ev); });
  write_csv_file(dir / "targets_first_solution.csv", [&](std::ostream& os) { write_csv(os, first.targets); });
  write_csv_file(dir / "conductance_first_solution.csv", [&](std::ostream& os) { write_csv(os, first.g); });

  std::ostringstream s;
  s << "size " << size << ", " << sols.size() - r.failed_solutions << " solutions\n"
    << "g_norm at max median accuracy: " << fmt(r.g_norm_acc_opt, 1) << " uS (median accuracy "
    << fmt(r.median_accuracy_at_opt) << ")\n"
    << "g_norm at min median RMS deviation: " << fmt(r.g_norm_rms_opt, 1) << " uS (median RMS "
    << fmt(r.min_median_rms) << ")\n"
    << "ratio rms/accuracy optimum: " << fmt(r.ratio) << "\n"
    << "estimate g_on - g_off: " << fmt(r.g_norm_estimate, 2) << " uS (median accuracy "
    << fmt(r.median_accuracy_at_estimate) << ")\n"
    << "median clear accuracy " << fmt(r.clear_accuracy.median) << ", median write accuracy "
    << fmt(r.write_accuracy.median) << "\n";
  write_text(dir / "summary.txt", s.str());
  log << s.str() << "wrote " << dir.string() << "\n";
}

void cmd_variation_study(const StudyConfig& cfg, std::ostream& log) {
  const std::vector<TernarySolution> sols = load_solutions(cfg);
  const TrainTestSplit data = load_wine_split(cfg.dataset, cfg.split_seed);
  std::vector<SizeSetup> sizes;
  for (const auto& b : cfg.sizes) sizes.push_back({b.name, cfg.array_setup(b)});
  log << "variation study: " << sizes.size() << " sizes x " << cfg.n_realizations << " realizations x "
      << sols.size() << " solutions\n";
  const std::vector<SizeStudy> study = variation_study(sols, data.train, sizes, cfg.n_realizations,
                                                       cfg.grid.values(), derive_seed(cfg.seed, "variation"), cfg.jobs);
  const fs::path dir = cfg.output_dir / "variation";
  for (const auto& st : study) {
    nlohmann::json j = envelope(cfg);
    j["result"] = st;
    write_json(dir / (st.name + ".json"), j);
  }
  write_csv_file(dir / "summary.csv", [&](std::ostream& os) {
    os << "size,ratio_min,ratio_q25,ratio_median,ratio_q75,ratio_max,ratio_no_variation,"
          "median_accuracy_at_opt,min_median_rms,median_accuracy_at_estimate,clear_accuracy,write_accuracy\n";
    for (const auto& st : study)
      os << st.name << ',' << st.ratio_stats.min << ',' << st.ratio_stats.q25 << ',' << st.ratio_stats.median << ','
         << st.ratio_stats.q75 << ',' << st.ratio_stats.max << ',' << st.ratio_no_variation << ','
         << median(st.median_accuracy_at_opt) << ',' << median(st.min_median_rms) << ','
         << median(st.median_accuracy_at_estimate) << ',' << median(st.clear_accuracy) << ','
         << median(st.write_accuracy) << '\n';
  });
  for (const auto& st : study)
    log << st.name << ": median ratio " << fmt(st.ratio_stats.median) << " (no variation "
        << fmt(st.ratio_no_variation) << "), median optimized accuracy " << fmt(median(st.median_accuracy_at_opt))
        << ", median write accuracy " << fmt(median(st.write_accuracy)) << "\n";
  log << "wrote " << dir.string() << "\n";
}

void cmd_superposition(const StudyConfig& cfg, const std::string& size, std::ostream& log) {
  const SizeBlock& block = cfg.size(size);
  const std::uint64_t seed = derive_seed(cfg.seed, "superposition");
  Crossbar xbar(block.device, block.lines, seed);
  Rng rng(derive_seed(seed, "targets"));
  const TargetStateMap targets = random_solution_targets(rng);
  xbar.program(targets, cfg.verify);
  const SuperpositionResult r = superposition_check(xbar, cfg.superposition, seed);

  const fs::path dir = cfg.output_dir / ("superposition_" + size);
  nlohmann::json j = envelope(cfg);
  j["size"] = size;
  j["result"] = r;
  write_json(dir / "superposition.json", j);
  write_csv_file(dir / "superposition.csv", [&](std::ostream& os) {
    os << "voltage,min,q25,median,q75,max\n";
    for (std::size_t k = 0; k < r.voltages.size(); ++k) {
      const Quartiles& q = r.stats[k];
      os << r.voltages[k] << ',' << q.min << ',' << q.q25 << ',' << q.median << ',' << q.q75 << ',' << q.max << '\n';
    }
  });
  for (std::size_t k = 0; k < r.voltages.size(); ++k)
    log << "V = " << fmt(r.voltages[k], 2) << " V: median relative deviation " << fmt(100.0 * r.stats[k].median, 2)
        << " %\n";
  log << "wrote " << dir.string() << "\n";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e)) return 2;
  if (dynamic_cast<const TrainingFailure*>(&e)) return 3;
  if (dynamic_cast<const SolverError*>(&e)) return 4;
  return 1;
}

}  // namespace cbnn
