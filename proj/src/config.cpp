#include "cbnn/config.hpp"

#include <fstream>
#include <set>

#include "cbnn/errors.hpp"

namespace cbnn {
namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

StudyConfig parse_unchecked(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"seed", "dataset", "split_seed", "training", "n_solutions", "verify", "zero_encoding", "v_read",
                  "gnorm_grid", "n_realizations", "superposition", "output_dir", "jobs", "sizes"},
                 "config");
  StudyConfig c;
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  if (!j.contains("dataset")) throw ConfigError("config needs \"dataset\"");
  c.dataset = base_dir / j.at("dataset").get<std::string>();
  c.split_seed = get_or<std::uint64_t>(j, "split_seed", c.split_seed);
  if (j.contains("training")) {
    reject_unknown(j.at("training"),
                   {"epochs", "learning_rate", "quantization_threshold", "batch_size", "latent_clip",
                    "target_train_accuracy", "min_test_accuracy", "max_restarts"},
                   "training");
    c.training = j.at("training").get<TrainConfig>();
  }
  c.n_solutions = get_or<int>(j, "n_solutions", c.n_solutions);
  if (j.contains("verify")) {
    reject_unknown(j.at("verify"), {"v_start", "v_step", "ratio_threshold", "v_read"}, "verify");
    c.verify = j.at("verify").get<VerifyConfig>();
  }
  if (j.contains("zero_encoding")) c.zero = parse_zero_encoding(j.at("zero_encoding").get<std::string>());
  c.v_read = get_or<double>(j, "v_read", c.v_read);
  if (j.contains("gnorm_grid")) {
    const auto& g = j.at("gnorm_grid");
    reject_unknown(g, {"start", "stop", "step"}, "gnorm_grid");
    c.grid.start = get_or<double>(g, "start", c.grid.start);
    c.grid.stop = get_or<double>(g, "stop", c.grid.stop);
    c.grid.step = get_or<double>(g, "step", c.grid.step);
  }
  c.n_realizations = get_or<int>(j, "n_realizations", c.n_realizations);
  if (j.contains("superposition")) {
    const auto& s = j.at("superposition");
    reject_unknown(s, {"n_vectors", "voltages"}, "superposition");
    c.superposition.n_vectors = get_or<int>(s, "n_vectors", c.superposition.n_vectors);
    c.superposition.voltages = get_or<std::vector<double>>(s, "voltages", c.superposition.voltages);
  }
  c.superposition.v_read = c.v_read;
  c.output_dir = base_dir / get_or<std::string>(j, "output_dir", c.output_dir.string());
  c.jobs = get_or<int>(j, "jobs", c.jobs);
  if (!j.contains("sizes") || !j.at("sizes").is_array()) throw ConfigError("config needs a \"sizes\" array");
  for (const auto& s : j.at("sizes")) {
    reject_unknown(s, {"name", "device", "lines"}, "size block");
    SizeBlock b;
    b.name = s.at("name").get<std::string>();
    if (s.contains("device")) {
      reject_unknown(s.at("device"),
                     {"g_off_mean", "g_off_std", "tmr_mean", "tmr_std", "vsw_mean", "vsw_std", "read_noise_std",
                      "nonlinearity"},
                     "device of size " + b.name);
      b.device = s.at("device").get<DeviceParams>();
    }
    if (s.contains("lines")) {
      reject_unknown(s.at("lines"), {"r_segment", "r_contact", "lead_peak", "row_lead", "col_lead", "row_ports_left", "col_ports_bottom"},
                     "lines of size " + b.name);
      b.lines = s.at("lines").get<LineGeometry>();
    }
    c.sizes.push_back(std::move(b));
  }
  return c;
}

void validate(const StudyConfig& c) {
  if (!std::filesystem::is_regular_file(c.dataset))
    throw ConfigError("dataset not found: " + c.dataset.string());
  c.training.validate();
  c.verify.validate();
  if (c.n_solutions < 1) throw ConfigError("n_solutions must be >= 1");
  if (c.n_realizations < 1) throw ConfigError("n_realizations must be >= 1");
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(c.v_read > 0.0)) throw ConfigError("v_read must be > 0");
  c.grid.values();
  if (c.superposition.n_vectors < 1) throw ConfigError("superposition.n_vectors must be >= 1");
  if (c.superposition.voltages.empty()) throw ConfigError("superposition.voltages must not be empty");
  for (double v : c.superposition.voltages)
    if (!(v > 0.0)) throw ConfigError("superposition voltages must be > 0");
  if (c.sizes.empty()) throw ConfigError("at least one size block is required");
  std::set<std::string> names;
  for (const auto& s : c.sizes) {
    if (s.name.empty()) throw ConfigError("size blocks need a non-empty name");
    if (!names.insert(s.name).second) throw ConfigError("duplicate size name \"" + s.name + "\"");
    s.device.validate();
    s.lines.validate();
  }
}

}  // namespace

const SizeBlock& StudyConfig::size(const std::string& name) const {
  for (const auto& s : sizes)
    if (s.name == name) return s;
  std::string known;
  for (const auto& s : sizes) known += (known.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown size \"" + name + "\" (known: " + known + ")");
}

ArraySetup StudyConfig::array_setup(const SizeBlock& block) const {
  return {block.device, block.lines, verify, zero, v_read};
}

StudyConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  StudyConfig c;
  try {
    c = parse_unchecked(j, base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  validate(c);
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

nlohmann::json to_json(const StudyConfig& c) {
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& s : c.sizes) sizes.push_back({{"name", s.name}, {"device", s.device}, {"lines", s.lines}});
  return {{"seed", c.seed},
          {"dataset", c.dataset.filename().string()},
          {"split_seed", c.split_seed},
          {"training", c.training},
          {"n_solutions", c.n_solutions},
          {"verify", c.verify},
          {"zero_encoding", to_string(c.zero)},
          {"v_read", c.v_read},
          {"gnorm_grid", {{"start", c.grid.start}, {"stop", c.grid.stop}, {"step", c.grid.step}}},
          {"n_realizations", c.n_realizations},
          {"superposition", {{"n_vectors", c.superposition.n_vectors}, {"voltages", c.superposition.voltages}}},
          {"sizes", sizes}};
}

}  // namespace cbnn
