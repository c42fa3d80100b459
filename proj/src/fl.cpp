#include "bflsim/fl.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bflsim {

LocalDataset make_synthetic(int samples, const FlOptions& opt, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("dataset needs >= 1 sample");
  if (opt.feature_dim < 1) throw std::invalid_argument("feature_dim >= 1");
  LocalDataset d;
  d.features = Matrix(samples, opt.feature_dim);
  d.labels = Vector(samples);
  const double shift = opt.cluster_shift / std::sqrt(opt.feature_dim);
  for (int i = 0; i < samples; ++i) {
    const double y = (i % 2 == 0) ? 1.0 : -1.0;
    d.labels[i] = y;
    for (int j = 0; j < opt.feature_dim; ++j)
      d.features(i, j) = y * shift + rng.normal();
  }
  return d;
}

LocalDataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": bad number '" + cell + "'");
      }
    }
    if (row.size() < 2)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": need at least one feature and a label");
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": inconsistent column count");
    const double y = row.back();
    if (y != 1.0 && y != -1.0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": label must be +1 or -1");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  const int n = static_cast<int>(rows.size());
  const int dim = static_cast<int>(rows.front().size()) - 1;
  LocalDataset d;
  d.features = Matrix(n, dim);
  d.labels = Vector(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) d.features(i, j) = rows[i][j];
    d.labels[i] = rows[i].back();
  }
  return d;
}

ModelParams zero_model(int dim) {
  ModelParams m;
  m.weights = Vector::Zero(dim);
  return m;
}

namespace {

void check_shapes(const ModelParams& m, const LocalDataset& data) {
  if (data.features.rows() != data.labels.size())
    throw std::invalid_argument("dataset rows != label count");
  if (data.features.cols() != m.weights.size())
    throw std::invalid_argument("model dim != feature dim");
  if (data.features.rows() < 1)
    throw std::invalid_argument("dataset is empty");
}

}  // namespace

double training_loss(const ModelParams& m, const LocalDataset& data,
                     double l2_reg) {
  check_shapes(m, data);
  const Vector score = data.features * m.weights +
                       Vector::Constant(data.labels.size(), m.bias);
  const Eigen::ArrayXd slack =
      (1.0 - data.labels.array() * score.array()).max(0.0);
  return (slack * slack).mean() + 0.5 * l2_reg * m.weights.squaredNorm();
}

void loss_gradient(const ModelParams& m, const LocalDataset& data,
                   double l2_reg, Vector& grad_w, double& grad_b) {
  check_shapes(m, data);
  const Vector score = data.features * m.weights + Vector::Constant(data.labels.size(), m.bias);
  const Eigen::ArrayXd slack =
      (1.0 - data.labels.array() * score.array()).max(0.0);
  // d/dw mean slack^2 = mean of -2 slack y x
  const Vector coeff = (-2.0 * slack * data.labels.array()).matrix();
  const double inv_n = 1.0 / static_cast<double>(data.labels.size());
  grad_w = inv_n * (data.features.transpose() * coeff) + l2_reg * m.weights;
  grad_b = inv_n * coeff.sum();
}

ModelParams local_train(const ModelParams& start, const LocalDataset& data,
                        int steps, double step_size, double l2_reg) {
  if (steps < 1) throw std::invalid_argument("need >= 1 gradient step");
  if (step_size < 0.0) throw std::invalid_argument("step size must be >= 0");
  ModelParams m = start;
  Vector gw;
  double gb = 0.0;
  for (int k = 0; k < steps; ++k) {
    loss_gradient(m, data, l2_reg, gw, gb);
    m.weights -= step_size * gw;
    m.bias -= step_size * gb;
  }
  return m;
}

ModelParams aggregate(const std::vector<ModelParams>& models,
                      const BoolArray& schedule, const Array& dataset_sizes) {
  const auto n = static_cast<Eigen::Index>(models.size());
  if (schedule.size() != n || dataset_sizes.size() != n)
    throw std::invalid_argument("aggregate: size mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (schedule[i]) total += dataset_sizes[i];
  if (total <= 0.0)
    throw std::invalid_argument("aggregate: nothing scheduled");
  ModelParams out = zero_model(static_cast<int>(models.front().weights.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!schedule[i]) continue;
    const double w = dataset_sizes[i] / total;
    out.weights += w * models[i].weights;
    out.bias += w * models[i].bias;
  }
  return out;
}

EvalResult evaluate(const ModelParams& m, const LocalDataset& test) {
  check_shapes(m, test);
  const Vector score = test.features * m.weights + Vector::Constant(test.labels.size(), m.bias);
  const Eigen::ArrayXd slack =
      (1.0 - test.labels.array() * score.array()).max(0.0);
  EvalResult r;
  r.loss = (slack * slack).mean();
  const Eigen::ArrayXd pred =
      (score.array() >= 0.0).cast<double>() * 2.0 - 1.0;
  r.accuracy = (pred == test.labels.array()).cast<double>().mean();
  return r;
}

}  // namespace bflsim
