#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "bflsim/fl.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bflsim;
using doctest::Approx;

namespace {

LocalDataset three_points() {
  LocalDataset d;
  d.features = Matrix(3, 1);
  d.features << 2.0, -1.0, 0.5;
  d.labels = Vector(3);
  d.labels << 1.0, -1.0, 1.0;
  return d;
}

std::string temp_csv(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / (stem + ".csv")).string();
}

}  // namespace

TEST_CASE("training loss matches the hand-computed squared hinge") {
  ModelParams m = zero_model(1);
  m.weights[0] = 1.0;
  LocalDataset d = three_points();
  // slacks 0, 0, 0.5 -> mean 0.25/3, plus 0.5 * 0.2 * 1
  CHECK(training_loss(m, d, 0.2) ==
        Approx(0.18333333333333335).epsilon(1e-15));
  CHECK(training_loss(m, d, 0.0) ==
        Approx(0.25 / 3.0).epsilon(1e-15));

  // the evaluation loss is the same mean without the regularizer
  EvalResult ev = evaluate(m, d);
  CHECK(ev.loss == training_loss(m, d, 0.0));
  CHECK(ev.accuracy == 1.0);
}

TEST_CASE("analytic gradient agrees with central differences") {
  FlOptions opt;
  opt.feature_dim = 5;
  opt.cluster_shift = 1.2;
  Rng rng(404);
  LocalDataset d = make_synthetic(30, opt, rng);
  const double l2 = 1e-3;

  for (int trial = 0; trial < 3; ++trial) {
    ModelParams m = zero_model(5);
    if (trial > 0) {
      for (int j = 0; j < 5; ++j) m.weights[j] = rng.normal();
      m.bias = rng.normal();
    }
    Vector gw;
    double gb = 0.0;
    loss_gradient(m, d, l2, gw, gb);

    const double h = 1e-6;
    for (int j = 0; j < 5; ++j) {
      ModelParams hi = m;
      ModelParams lo = m;
      hi.weights[j] += h;
      lo.weights[j] -= h;
      const double fd =
          (training_loss(hi, d, l2) - training_loss(lo, d, l2)) / (2.0 * h);
      CHECK(std::abs(fd - gw[j]) <= 1e-5 * std::max(1.0, std::abs(gw[j])));
    }
    ModelParams hi = m;
    ModelParams lo = m;
    hi.bias += h;
    lo.bias -= h;
    const double fd =
        (training_loss(hi, d, l2) - training_loss(lo, d, l2)) / (2.0 * h);
    CHECK(std::abs(fd - gb) <= 1e-5 * std::max(1.0, std::abs(gb)));
  }
}

TEST_CASE("synthetic data is balanced, reproducible and seed-sensitive") {
  FlOptions opt;
  opt.feature_dim = 3;
  Rng a(7);
  LocalDataset d1 = make_synthetic(8, opt, a);
  CHECK(d1.features.rows() == 8);
  CHECK(d1.features.cols() == 3);
  CHECK(d1.labels[0] == 1.0);
  CHECK(d1.labels[1] == -1.0);
  CHECK(d1.labels[2] == 1.0);
  CHECK(d1.labels[3] == -1.0);
  CHECK(d1.labels.sum() == 0.0);

  Rng b(7);
  LocalDataset d2 = make_synthetic(8, opt, b);
  CHECK((d1.features.array() == d2.features.array()).all());

  Rng c(8);
  LocalDataset d3 = make_synthetic(8, opt, c);
  CHECK((d1.features.array() != d3.features.array()).any());

  Rng e(9);
  CHECK_THROWS_AS(make_synthetic(0, opt, e), std::invalid_argument);
  FlOptions flat = opt;
  flat.feature_dim = 0;
  CHECK_THROWS_AS(make_synthetic(4, flat, e), std::invalid_argument);
}

TEST_CASE("an untrained model on balanced data scores exactly half") {
  FlOptions opt;
  opt.feature_dim = 6;
  Rng rng(11);
  LocalDataset test = make_synthetic(400, opt, rng);
  ModelParams m = zero_model(6);
  EvalResult ev = evaluate(m, test);
  // score is zero everywhere and zero predicts +1, hitting only one class
  CHECK(ev.accuracy == 0.5);
  CHECK(ev.loss == 1.0);
}

TEST_CASE("gradient descent reduces the loss and respects its knobs") {
  FlOptions opt;
  opt.feature_dim = 4;
  Rng rng(21);
  LocalDataset d = make_synthetic(60, opt, rng);
  const double l2 = 1e-4;

  ModelParams m = zero_model(4);
  double prev = training_loss(m, d, l2);
  for (int k = 0; k < 20; ++k) {
    m = local_train(m, d, 1, 1e-2, l2);
    const double now = training_loss(m, d, l2);
    CHECK(now <= prev);
    prev = now;
  }

  // one step is exactly one gradient update
  ModelParams from = zero_model(4);
  from.bias = 0.3;
  Vector gw;
  double gb = 0.0;
  loss_gradient(from, d, l2, gw, gb);
  ModelParams stepped = local_train(from, d, 1, 1e-2, l2);
  CHECK((stepped.weights.array() ==
         (from.weights - 1e-2 * gw).array()).all());
  CHECK(stepped.bias == from.bias - 1e-2 * gb);

  // a zero step size walks in place
  ModelParams parked = local_train(from, d, 5, 0.0, l2);
  CHECK((parked.weights.array() == from.weights.array()).all());
  CHECK(parked.bias == from.bias);

  CHECK_THROWS_AS(local_train(from, d, 0, 1e-2, l2), std::invalid_argument);
  CHECK_THROWS_AS(local_train(from, d, 1, -1e-2, l2), std::invalid_argument);
}

TEST_CASE("well-separated clusters train to perfect accuracy") {
  FlOptions opt;
  opt.feature_dim = 4;
  opt.cluster_shift = 50.0;
  Rng rng(31);
  LocalDataset train = make_synthetic(200, opt, rng);
  LocalDataset test = make_synthetic(400, opt, rng);
  ModelParams m = local_train(zero_model(4), train, 50, 1e-2, 1e-4);
  EvalResult ev = evaluate(m, test);
  CHECK(ev.accuracy == 1.0);
  CHECK(ev.loss < 1e-3);
}

TEST_CASE("aggregation weighs models by their data share") {
  std::vector<ModelParams> models(2, zero_model(1));
  models[0].weights[0] = 1.0;
  models[0].bias = 10.0;
  models[1].weights[0] = 3.0;
  models[1].bias = 20.0;
  Array sizes(2);
  sizes << 1.0, 4.0;

  ModelParams both = aggregate(models, BoolArray::Constant(2, 1), sizes);
  CHECK(both.weights[0] == Approx(2.6).epsilon(1e-15));
  CHECK(both.bias == Approx(18.0).epsilon(1e-15));

  BoolArray first_only(2);
  first_only << 1, 0;
  ModelParams solo = aggregate(models, first_only, sizes);
  CHECK(solo.weights[0] == 1.0);
  CHECK(solo.bias == 10.0);

  CHECK_THROWS_AS(aggregate(models, BoolArray::Zero(2), sizes),
                  std::invalid_argument);
  CHECK_THROWS_AS(aggregate(models, BoolArray::Zero(3), sizes),
                  std::invalid_argument);
  Array short_sizes(1);
  short_sizes << 1.0;
  CHECK_THROWS_AS(aggregate(models, BoolArray::Constant(2, 1), short_sizes),
                  std::invalid_argument);
}

TEST_CASE("csv datasets round-trip exactly and reject malformed rows") {
  const std::string path = temp_csv("bflsim_fl_roundtrip");
  {
    std::ofstream out(path);
    out << "# comment line\n\n";
    char buf[128];
    const double rows[3][3] = {{1.0 / 3.0, 1e-300, 1.0},
                               {0.1, -2.5, -1.0},
                               {7.0, 0.0, 1.0}};
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%g\n", r[0], r[1], r[2]);
      out << buf;
    }
  }
  LocalDataset d = load_csv_dataset(path);
  CHECK(d.features.rows() == 3);
  CHECK(d.features.cols() == 2);
  CHECK(d.features(0, 0) == 1.0 / 3.0);
  CHECK(d.features(0, 1) == 1e-300);
  CHECK(d.features(1, 0) == 0.1);
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == -1.0);
  std::filesystem::remove(path);

  auto write_and_load = [](const std::string& stem, const std::string& body) {
    const std::string p = temp_csv(stem);
    {
      std::ofstream out(p);
      out << body;
    }
    try {
      load_csv_dataset(p);
    } catch (...) {
      std::filesystem::remove(p);
      throw;
    }
    std::filesystem::remove(p);
  };
  CHECK_THROWS_WITH(write_and_load("bflsim_fl_badnum", "1.0,oops,1\n"),
                    doctest::Contains("bad number"));
  CHECK_THROWS_WITH(write_and_load("bflsim_fl_badlabel", "1.0,2.0,0.5\n"),
                    doctest::Contains("label must be +1 or -1"));
  CHECK_THROWS_WITH(
      write_and_load("bflsim_fl_ragged", "1.0,2.0,1\n0.5,-1\n"),
      doctest::Contains("inconsistent column count"));
  CHECK_THROWS_WITH(write_and_load("bflsim_fl_thin", "1.0\n"),
                    doctest::Contains("need at least one feature"));
  CHECK_THROWS_WITH(write_and_load("bflsim_fl_empty", "# nothing\n"),
                    doctest::Contains("no data rows"));
  CHECK_THROWS_WITH(load_csv_dataset("/nonexistent/nowhere.csv"),
                    doctest::Contains("cannot open"));
}

TEST_CASE("shape mismatches are rejected before any arithmetic") {
  LocalDataset d = three_points();
  ModelParams wide = zero_model(2);
  CHECK_THROWS_AS(training_loss(wide, d, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(wide, d), std::invalid_argument);

  LocalDataset empty;
  empty.features = Matrix(0, 1);
  empty.labels = Vector(0);
  ModelParams m = zero_model(1);
  CHECK_THROWS_AS(training_loss(m, empty, 0.0), std::invalid_argument);

  LocalDataset skewed = three_points();
  skewed.labels = Vector(2);
  skewed.labels << 1.0, -1.0;
  CHECK_THROWS_AS(training_loss(m, skewed, 0.0), std::invalid_argument);
}
