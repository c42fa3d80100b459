#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bflsim/rng.hpp"
#include "bflsim/types.hpp"

namespace bflsim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LocalDataset {
  Matrix features;  // samples x dim
  Vector labels;    // +1 / -1 per sample
};

// linear model with unregularized bias
struct ModelParams {
  Vector weights;
  double bias = 0.0;
};

struct FlOptions {
  int feature_dim = 14;
  double cluster_shift = 1.2;  // class means sit at +-shift/sqrt(dim) * 1
  double l2_reg = 1e-4;
  int test_samples = 4000;
};

struct EvalResult {
  double loss = 0.0;  // mean squared hinge, no regularizer
  double accuracy = 0.0;
};

// balanced two-gaussian task: labels alternate +1/-1, features are the
// label's mean plus unit-variance noise. identical distribution everywhere.
LocalDataset make_synthetic(int samples, const FlOptions& opt, Rng& rng);

// optional tabular ingestion: comma-separated feature columns, label last
LocalDataset load_csv_dataset(const std::string& path);

ModelParams zero_model(int dim);

// mean squared hinge max(0, 1 - y (w x + b))^2 plus 0.5 l2 |w|^2
double training_loss(const ModelParams& m, const LocalDataset& data,
                     double l2_reg);
void loss_gradient(const ModelParams& m, const LocalDataset& data,
                   double l2_reg, Vector& grad_w, double& grad_b);

// k full-batch gradient steps at the given step size
ModelParams local_train(const ModelParams& start, const LocalDataset& data,
                        int steps, double step_size, double l2_reg);

// data-size weighted mean over scheduled clients; throws if none scheduled
// (callers carry the previous global model over such rounds)
ModelParams aggregate(const std::vector<ModelParams>& models,
                      const BoolArray& schedule, const Array& dataset_sizes);

// prediction uses sign(w x + b) with sign(0) = +1
EvalResult evaluate(const ModelParams& m, const LocalDataset& test);

}  // namespace bflsim
