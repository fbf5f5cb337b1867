#include "cbnn/hw_inference.hpp"

#include <cmath>
#include <stdexcept>

namespace cbnn {
namespace {

void check_gnorm(double g_norm) {
  if (!(g_norm > 0.0)) throw std::invalid_argument("g_norm must be > 0");
}

int argmax_row(const Eigen::MatrixXd& m, Eigen::Index r) {
  int best = 0;
  for (int c = 1; c < m.cols(); ++c)
    if (m(r, c) > m(r, best)) best = c;
  return best;
}

}  // namespace

HwOutput hw_forward(const ConductanceMap& g, double g_norm, const HiddenVector& b1,
                    const OutputVector& b2, const FeatureVector& x, double v_read) {
  check_gnorm(g_norm);
  const double scale = v_read * g_norm;

  std::array<double, 2 * kHidden> i1{};
  for (int j = 0; j < 2 * kHidden; ++j)
    for (int i = 0; i < kNumFeatures; ++i) i1[j] += x[i] * v_read * g(i, j);
  HiddenVector a;
  for (int n = 0; n < kHidden; ++n) a[n] = std::tanh((i1[2 * n] - i1[2 * n + 1]) / scale + b1[n]);

  HwOutput out;
  for (int c = 0; c < kNumClasses; ++c) {
    double current = 0.0;
    for (int n = 0; n < kHidden; ++n) {
      current += a[n] * v_read * g(2 * n, 12 + c);
      current -= a[n] * v_read * g(2 * n + 1, 12 + c);
    }
    out.outputs[c] = current / scale + b2[c];
  }
  out.predicted = argmax(out.outputs);
  return out;
}

double solution_accuracy(const ConductanceMap& g, double g_norm, const TernarySolution& net,
                         const Dataset& ds, double v_read) {
  check_gnorm(g_norm);
  if (ds.size() == 0) throw std::invalid_argument("solution_accuracy: empty dataset");
  int correct = 0;
  for (int k = 0; k < ds.size(); ++k)
    correct += hw_forward(g, g_norm, net.b1, net.b2, ds.sample(k), v_read).predicted == ds.labels[k];
  return static_cast<double>(correct) / ds.size();
}

double rms_deviation(const TernarySolution& net, const HardwareWeights& hw) {
  const double e1 = (net.w1.cast<double>() - hw.w1).squaredNorm();
  const double e2 = (net.w2.cast<double>() - hw.w2).squaredNorm();
  return std::sqrt(e1) + std::sqrt(e2);
}

HardwareEvaluator::HardwareEvaluator(const ConductanceMap& g, const TernarySolution& net, const Dataset& ds)
    : net_(net), labels_(ds.labels) {
  if (ds.size() == 0) throw std::invalid_argument("HardwareEvaluator: empty dataset");
  const HardwareWeights d = extract_weights(g, 1.0);
  d1_ = d.w1;
  d2_ = d.w2;
  xd1_ = ds.features * d1_;
}

Eigen::MatrixXd HardwareEvaluator::outputs(double g_norm) const {
  check_gnorm(g_norm);
  Eigen::MatrixXd a = ((xd1_ / g_norm).rowwise() + net_.b1.transpose()).array().tanh().matrix();
  Eigen::MatrixXd out = a * (d2_ / g_norm);
  out.rowwise() += net_.b2.transpose();
  return out;
}

double HardwareEvaluator::accuracy(double g_norm) const {
  const Eigen::MatrixXd out = outputs(g_norm);
  int correct = 0;
  for (Eigen::Index k = 0; k < out.rows(); ++k) correct += argmax_row(out, k) == labels_[k];
  return static_cast<double>(correct) / static_cast<double>(out.rows());
}

double HardwareEvaluator::rms(double g_norm) const {
  check_gnorm(g_norm);
  return rms_deviation(net_, HardwareWeights{d1_ / g_norm, d2_ / g_norm});
}

HwEvalResult evaluate_solution(const ConductanceMap& g, double g_norm, const TernarySolution& net,
                               const Dataset& train, const Dataset& test, bool keep_traces) {
  HwEvalResult r;
  r.seed = net.seed;
  r.g_norm = g_norm;
  const HardwareEvaluator on_train(g, net, train);
  const HardwareEvaluator on_test(g, net, test);
  r.train_accuracy = on_train.accuracy(g_norm);
  r.test_accuracy = on_test.accuracy(g_norm);
  r.rms_deviation = on_train.rms(g_norm);
  if (keep_traces) {
    const Eigen::MatrixXd a = on_train.outputs(g_norm);
    const Eigen::MatrixXd b = on_test.outputs(g_norm);
    r.traces.resize(a.rows() + b.rows(), kNumClasses);
    r.traces << a, b;
    r.trace_labels = train.labels;
    r.trace_labels.insert(r.trace_labels.end(), test.labels.begin(), test.labels.end());
  }
  return r;
}

void to_json(nlohmann::json& j, const HwEvalResult& r) {
  j = {{"seed", r.seed},
       {"g_norm", r.g_norm},
       {"train_accuracy", r.train_accuracy},
       {"test_accuracy", r.test_accuracy},
       {"rms_deviation", r.rms_deviation}};
}

void write_trace_csv(std::ostream& os, const HwEvalResult& r) {
  os << "sample,I_out1,I_out2,I_out3,label\n";
  for (Eigen::Index k = 0; k < r.traces.rows(); ++k) {
    os << k + 1;
    for (int c = 0; c < kNumClasses; ++c) os << ',' << r.traces(k, c);
    os << ',' << r.trace_labels[k] + 1 << '\n';
  }
}

SuperpositionResult superposition_check(Crossbar& xbar, const SuperpositionConfig& cfg, std::uint64_t seed) {
  if (cfg.n_vectors <= 0) throw std::invalid_argument("superposition_check: n_vectors must be > 0");
  Rng rng(derive_seed(seed, "superposition-inputs"));
  std::bernoulli_distribution bit(0.5);
  std::vector<std::array<double, kRows>> inputs(static_cast<std::size_t>(cfg.n_vectors));
  for (auto& x : inputs) {
    do {
      for (auto& xi : x) xi = bit(rng) ? 1.0 : 0.0;
    } while (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }));
  }

  const ConductanceMap g = xbar.read_all(cfg.v_read);
  SuperpositionResult out;
  out.voltages = cfg.voltages;
  for (double v : cfg.voltages) {
    std::vector<double> dev;
    dev.reserve(inputs.size());
    for (const auto& x : inputs) {
      std::array<double, kRows> drive{};
      for (int i = 0; i < kRows; ++i) drive[i] = x[i] * v;
      const std::array<double, kCols> parallel = xbar.column_currents(drive);
      double num = 0.0, den = 0.0;
      for (int j = 0; j < kCols; ++j) {
        double serial = 0.0;
        for (int i = 0; i < kRows; ++i) serial += drive[i] * g(i, j);
        num += (parallel[j] - serial) * (parallel[j] - serial);
        den += serial * serial;
      }
      dev.push_back(std::sqrt(num / den));
    }
    out.stats.push_back(quartile_stats(dev));
    out.deviation.push_back(std::move(dev));
  }
  return out;
}

void to_json(nlohmann::json& j, const SuperpositionResult& r) {
  j = nlohmann::json::array();
  for (std::size_t k = 0; k < r.voltages.size(); ++k)
    j.push_back({{"voltage", r.voltages[k]}, {"relative_rms_deviation", r.stats[k]}});
}

}  // namespace cbnn
