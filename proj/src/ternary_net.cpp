#include "cbnn/ternary_net.hpp"

#include <cmath>
#include <stdexcept>

#include "cbnn/errors.hpp"

namespace cbnn {

bool TernarySolution::is_ternary() const {
  auto ok = [](int w) { return w == -1 || w == 0 || w == 1; };
  for (int i = 0; i < w1.size(); ++i)
    if (!ok(w1.data()[i])) return false;
  for (int i = 0; i < w2.size(); ++i)
    if (!ok(w2.data()[i])) return false;
  return true;
}

OutputVector softmax(const OutputVector& logits) {
  OutputVector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

int argmax(const OutputVector& v) {
  int best = 0;
  for (int c = 1; c < v.size(); ++c)
    if (v[c] > v[best]) best = c;
  return best;
}

ForwardPass forward(const TernarySolution& net, const FeatureVector& x) {
  ForwardPass f;
  f.z = net.w1.cast<double>().transpose() * x + net.b1;
  f.a = f.z.array().tanh();
  f.logits = net.w2.cast<double>().transpose() * f.a + net.b2;
  f.probs = softmax(f.logits);
  return f;
}

int predict(const TernarySolution& net, const FeatureVector& x) {
  return argmax(forward(net, x).logits);
}

double accuracy(const TernarySolution& net, const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("accuracy: empty dataset");
  int correct = 0;
  for (int k = 0; k < ds.size(); ++k)
    if (predict(net, ds.sample(k)) == ds.labels[k]) ++correct;
  return static_cast<double>(correct) / ds.size();
}

void to_json(nlohmann::json& j, const TernarySolution& s) {
  auto int_rows = [](const auto& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  j = nlohmann::json{{"seed", s.seed},
                     {"w1", int_rows(s.w1)},
                     {"b1", std::vector<double>(s.b1.data(), s.b1.data() + s.b1.size())},
                     {"w2", int_rows(s.w2)},
                     {"b2", std::vector<double>(s.b2.data(), s.b2.data() + s.b2.size())},
                     {"train_accuracy", s.train_accuracy},
                     {"test_accuracy", s.test_accuracy}};
}

namespace {

template <typename Matrix>
void read_matrix(const nlohmann::json& j, const char* key, Matrix& m) {
  const auto& rows = j.at(key);
  if (!rows.is_array() || static_cast<int>(rows.size()) != m.rows())
    throw ParseError(std::string("solution field '") + key + "' has wrong row count");
  for (int r = 0; r < m.rows(); ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || static_cast<int>(row.size()) != m.cols())
      throw ParseError(std::string("solution field '") + key + "' has wrong column count");
    for (int c = 0; c < m.cols(); ++c) m(r, c) = row[c].template get<typename Matrix::Scalar>();
  }
}

template <typename Vector>
void read_vector(const nlohmann::json& j, const char* key, Vector& v) {
  const auto& arr = j.at(key);
  if (!arr.is_array() || static_cast<int>(arr.size()) != v.size())
    throw ParseError(std::string("solution field '") + key + "' has wrong length");
  for (int k = 0; k < v.size(); ++k) v[k] = arr[k].template get<double>();
}

}  // namespace

void from_json(const nlohmann::json& j, TernarySolution& s) {
  try {
    read_matrix(j, "w1", s.w1);
    read_matrix(j, "w2", s.w2);
    read_vector(j, "b1", s.b1);
    read_vector(j, "b2", s.b2);
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train_accuracy = j.value("train_accuracy", -1.0);
    s.test_accuracy = j.value("test_accuracy", -1.0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed solution: ") + e.what());
  }
  if (!s.is_ternary()) throw ParseError("solution weights must be -1, 0 or +1");
}

}  // namespace cbnn
