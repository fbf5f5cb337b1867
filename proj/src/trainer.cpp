#include "cbnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cbnn/errors.hpp"
#include "cbnn/parallel.hpp"
#include "cbnn/random.hpp"

namespace cbnn {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("training.epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("training.learning_rate must be > 0");
  if (!(quantization_threshold > 0.0 && quantization_threshold < 1.0))
    throw ConfigError("training.quantization_threshold must lie in (0, 1)");
  if (batch_size < 0) throw ConfigError("training.batch_size must be >= 0");
  if (!(latent_clip > quantization_threshold))
    throw ConfigError("training.latent_clip must exceed the quantization threshold");
  if (!(target_train_accuracy > 0.0 && target_train_accuracy <= 1.0))
    throw ConfigError("training.target_train_accuracy must lie in (0, 1]");
  if (!(min_test_accuracy >= 0.0 && min_test_accuracy <= 1.0))
    throw ConfigError("training.min_test_accuracy must lie in [0, 1]");
  if (max_restarts < 0) throw ConfigError("training.max_restarts must be >= 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},
       {"learning_rate", c.learning_rate},
       {"quantization_threshold", c.quantization_threshold},
       {"batch_size", c.batch_size},
       {"latent_clip", c.latent_clip},
       {"target_train_accuracy", c.target_train_accuracy},
       {"min_test_accuracy", c.min_test_accuracy},
       {"max_restarts", c.max_restarts}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.quantization_threshold = j.value("quantization_threshold", c.quantization_threshold);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.latent_clip = j.value("latent_clip", c.latent_clip);
  c.target_train_accuracy = j.value("target_train_accuracy", c.target_train_accuracy);
  c.min_test_accuracy = j.value("min_test_accuracy", c.min_test_accuracy);
  c.max_restarts = j.value("max_restarts", c.max_restarts);
}

int quantize(double latent, double threshold) {
  if (latent > threshold) return 1;
  if (latent < -threshold) return -1;
  return 0;
}

namespace {

using Mat = Eigen::MatrixXd;

Mat quantized(const Mat& latent, double threshold) {
  return latent.unaryExpr([threshold](double v) { return static_cast<double>(quantize(v, threshold)); });
}

// Row-wise softmax cross-entropy; writes probabilities into `probs`.
double cross_entropy(const Mat& logits, const std::vector<int>& labels,
                     const std::vector<int>& rows, Mat& probs) {
  probs.resize(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(r).array() - m).exp();
    const double s = e.sum();
    probs.row(r) = e / s;
    loss -= logits(r, labels[rows[r]]) - m - std::log(s);
  }
  return loss / static_cast<double>(logits.rows());
}

double latent_loss(const Mat& x, const std::vector<int>& labels, const Mat& l1,
                   const Eigen::RowVectorXd& b1, const Mat& l2, const Eigen::RowVectorXd& b2) {
  Mat a = ((x * l1).rowwise() + b1).array().tanh();
  Mat logits = (a * l2).rowwise() + b2;
  std::vector<int> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  Mat probs;
  return cross_entropy(logits, labels, rows, probs);
}

}  // namespace

TernarySolution train_attempt(std::uint64_t init_seed, const Dataset& train,
                              const TrainConfig& cfg, TrainHistory* history) {
  cfg.validate();
  if (train.size() == 0) throw std::invalid_argument("train_attempt: empty training set");

  Rng rng(derive_seed(init_seed, "latent-init"));
  std::uniform_real_distribution<double> init(-1.0, 1.0);
  Mat l1(kNumFeatures, kHidden), l2(kHidden, kNumClasses);
  for (Eigen::Index i = 0; i < l1.size(); ++i) l1.data()[i] = init(rng);
  for (Eigen::Index i = 0; i < l2.size(); ++i) l2.data()[i] = init(rng);
  Eigen::RowVectorXd b1 = Eigen::RowVectorXd::Zero(kHidden);
  Eigen::RowVectorXd b2 = Eigen::RowVectorXd::Zero(kNumClasses);

  const Mat x_all = train.features;
  const int n = train.size();
  const int batch = (cfg.batch_size == 0 || cfg.batch_size >= n) ? n : cfg.batch_size;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng batch_rng(derive_seed(init_seed, "batch-order"));

  Mat x, probs;
  std::vector<int> rows;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), batch_rng);
    for (int start = 0; start < n; start += batch) {
      const int count = std::min(batch, n - start);
      rows.assign(order.begin() + start, order.begin() + start + count);
      if (count == n && batch == n) {
        x = x_all;
      } else {
        x.resize(count, kNumFeatures);
        for (int r = 0; r < count; ++r) x.row(r) = x_all.row(rows[r]);
      }
      const Mat w1 = quantized(l1, cfg.quantization_threshold);
      const Mat w2 = quantized(l2, cfg.quantization_threshold);
      const Mat a = ((x * w1).rowwise() + b1).array().tanh();
      const Mat logits = (a * w2).rowwise() + b2;
      cross_entropy(logits, train.labels, rows, probs);

      Mat d_logits = probs;
      for (int r = 0; r < count; ++r) d_logits(r, train.labels[rows[r]]) -= 1.0;
      d_logits /= static_cast<double>(count);
      const Mat g_w2 = a.transpose() * d_logits;
      const Eigen::RowVectorXd g_b2 = d_logits.colwise().sum();
      const Mat d_z = ((d_logits * w2.transpose()).array() * (1.0 - a.array().square())).matrix();
      const Mat g_w1 = x.transpose() * d_z;
      const Eigen::RowVectorXd g_b1 = d_z.colwise().sum();

      // Straight-through: the quantizer's gradient is taken as identity.
      l1 = (l1 - cfg.learning_rate * g_w1).cwiseMax(-cfg.latent_clip).cwiseMin(cfg.latent_clip);
      l2 = (l2 - cfg.learning_rate * g_w2).cwiseMax(-cfg.latent_clip).cwiseMin(cfg.latent_clip);
      b1 -= cfg.learning_rate * g_b1;
      b2 -= cfg.learning_rate * g_b2;
    }
    if (history) history->latent_loss.push_back(latent_loss(x_all, train.labels, l1, b1, l2, b2));
  }

  TernarySolution sol;
  for (int i = 0; i < kNumFeatures; ++i)
    for (int h = 0; h < kHidden; ++h) sol.w1(i, h) = quantize(l1(i, h), cfg.quantization_threshold);
  for (int h = 0; h < kHidden; ++h)
    for (int c = 0; c < kNumClasses; ++c) sol.w2(h, c) = quantize(l2(h, c), cfg.quantization_threshold);
  sol.b1 = b1.transpose();
  sol.b2 = b2.transpose();
  sol.seed = init_seed;
  sol.train_accuracy = accuracy(sol, train);
  return sol;
}

TernarySolution train_one(std::uint64_t seed, const Dataset& train, const TrainConfig& cfg,
                          const Dataset* test) {
  double best = 0.0;
  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    const std::uint64_t init_seed = attempt == 0 ? seed : derive_seed(seed, "restart", attempt);
    TernarySolution sol = train_attempt(init_seed, train, cfg);
    sol.seed = seed;
    if (test && test->size() > 0) sol.test_accuracy = accuracy(sol, *test);
    best = std::max(best, sol.train_accuracy);
    const bool train_ok = sol.train_accuracy >= cfg.target_train_accuracy;
    const bool test_ok = cfg.min_test_accuracy <= 0.0 ||
                         (test && test->size() > 0 && sol.test_accuracy >= cfg.min_test_accuracy);
    if (train_ok && test_ok) return sol;
  }
  throw TrainingFailure(seed, best);
}

std::vector<TernarySolution> generate_solutions(int n, std::uint64_t base_seed,
                                                const Dataset& train, const Dataset* test,
                                                const TrainConfig& cfg, int jobs) {
  if (n < 1) throw std::invalid_argument("generate_solutions: n must be >= 1");
  std::vector<TernarySolution> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), jobs, [&](std::size_t k) {
    out[k] = train_one(base_seed + k, train, cfg, test);
  });
  return out;
}

std::vector<int> duplicate_of(const std::vector<TernarySolution>& solutions) {
  std::vector<int> dup(solutions.size(), -1);
  for (std::size_t a = 0; a < solutions.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (solutions[a].w1 == solutions[b].w1 && solutions[a].w2 == solutions[b].w2) {
        dup[a] = static_cast<int>(b);
        break;
      }
    }
  }
  return dup;
}

}  // namespace cbnn
