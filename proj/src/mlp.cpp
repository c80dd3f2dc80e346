#include "saga/mlp.hpp"

#include <cmath>
#include <limits>

#include "saga/errors.hpp"

namespace saga {
namespace {

struct Shapes {
  int input = 0;
  int hidden = 0;
  std::size_t w1_end = 0, b1_end = 0, w2_end = 0, total = 0;
};

Shapes shapes(int input_dim, int hidden_units) {
  Shapes s;
  s.input = input_dim;
  s.hidden = hidden_units;
  s.w1_end = static_cast<std::size_t>(hidden_units) * input_dim;
  s.b1_end = s.w1_end + hidden_units;
  s.w2_end = s.b1_end + hidden_units;
  s.total = s.w2_end + 1;
  return s;
}

void unpack(const Shapes& s, const std::vector<double>& w, Eigen::MatrixXd& W1,
            Eigen::VectorXd& b1, Eigen::VectorXd& w2, double& b2) {
  W1.resize(s.hidden, s.input);
  for (int i = 0; i < s.hidden; ++i)
    for (int j = 0; j < s.input; ++j)
      W1(i, j) = w[static_cast<std::size_t>(i) * s.input + j];
  b1 = Eigen::Map<const Eigen::VectorXd>(w.data() + s.w1_end, s.hidden);
  w2 = Eigen::Map<const Eigen::VectorXd>(w.data() + s.b1_end, s.hidden);
  b2 = w[s.w2_end];
}

double standard_deviation(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  return std::sqrt((y.array() - mean).square().mean());
}

}  // namespace

std::size_t mlp_weight_count(int input_dim, int hidden_units) {
  return shapes(input_dim, hidden_units).total;
}

std::vector<double> mlp_flatten(const MlpModel& model) {
  const Shapes s =
      shapes(static_cast<int>(model.W1.cols()), static_cast<int>(model.W1.rows()));
  std::vector<double> w(s.total);
  for (int i = 0; i < s.hidden; ++i)
    for (int j = 0; j < s.input; ++j)
      w[static_cast<std::size_t>(i) * s.input + j] = model.W1(i, j);
  for (int i = 0; i < s.hidden; ++i) w[s.w1_end + i] = model.b1(i);
  for (int i = 0; i < s.hidden; ++i) w[s.b1_end + i] = model.w2(i);
  w[s.w2_end] = model.b2;
  return w;
}

MlpLoss mlp_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 int hidden_units, const std::vector<double>& w) {
  const Shapes s = shapes(static_cast<int>(X.cols()), hidden_units);
  if (w.size() != s.total)
    throw std::invalid_argument("weight vector has the wrong length");
  Eigen::MatrixXd W1;
  Eigen::VectorXd b1, w2;
  double b2;
  unpack(s, w, W1, b1, w2, b2);

  const Eigen::Index n = X.rows();
  const double inv_n = 1.0 / static_cast<double>(n);

  // Forward: Z = W1 X^T + b1, H = relu(Z), yhat = w2^T H + b2.
  Eigen::MatrixXd Z = (W1 * X.transpose()).colwise() + b1;  // hidden x n
  Eigen::MatrixXd H = Z.cwiseMax(0.0);
  Eigen::VectorXd yhat =
      (H.transpose() * w2).array() + b2;  // n
  Eigen::VectorXd r = yhat - y;

  MlpLoss out;
  out.value = r.squaredNorm() * inv_n;

  // Backward, with d(loss)/d(yhat_i) = 2 r_i / n.
  Eigen::VectorXd dy = 2.0 * inv_n * r;
  Eigen::MatrixXd dH = w2 * dy.transpose();                  // hidden x n
  Eigen::MatrixXd dZ = (Z.array() > 0.0).select(dH, 0.0);    // relu gate
  Eigen::MatrixXd dW1 = dZ * X;                              // hidden x input
  Eigen::VectorXd db1 = dZ.rowwise().sum();
  Eigen::VectorXd dw2 = H * dy;
  const double db2 = dy.sum();

  out.grad.resize(s.total);
  for (int i = 0; i < s.hidden; ++i)
    for (int j = 0; j < s.input; ++j)
      out.grad[static_cast<std::size_t>(i) * s.input + j] = dW1(i, j);
  for (int i = 0; i < s.hidden; ++i) out.grad[s.w1_end + i] = db1(i);
  for (int i = 0; i < s.hidden; ++i) out.grad[s.b1_end + i] = dw2(i);
  out.grad[s.w2_end] = db2;
  return out;
}

MlpModel mlp_fit(const Archive& archive, const MlpFitOptions& opts, Rng& rng) {
  const std::size_t n = archive.size();
  if (n < 2) throw ModelError("fit needs at least two archive records");
  const std::size_t dim = archive[0].genotype.size();
  const Shapes s = shapes(static_cast<int>(dim), opts.hidden_units);

  Eigen::MatrixXd X(n, dim);
  Eigen::VectorXd y_raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (archive[i].genotype.size() != dim)
      throw ModelError("archive genotypes have mixed lengths");
    for (std::size_t j = 0; j < dim; ++j) X(i, j) = archive[i].genotype[j];
    y_raw(i) = archive[i].mean_fitness;
  }
  const double mean = y_raw.mean();
  const double sd_raw = standard_deviation(y_raw);
  const double sd = sd_raw > 1e-12 ? sd_raw : 1.0;
  const Eigen::VectorXd y = (y_raw.array() - mean) / sd;

  if (sd_raw <= 1e-12) {
    // Degenerate targets: the zero network is the exact MSE optimum and
    // predicts the constant everywhere, which trained weights only match at
    // the training points.
    MlpModel flat;
    flat.W1 = Eigen::MatrixXd::Zero(opts.hidden_units, dim);
    flat.b1 = Eigen::VectorXd::Zero(opts.hidden_units);
    flat.w2 = Eigen::VectorXd::Zero(opts.hidden_units);
    flat.b2 = 0.0;
    flat.target_mean = mean;
    flat.target_std = sd;
    flat.train_mse = 0.0;
    return flat;
  }

  const auto objective = [&](const std::vector<double>& w,
                             std::vector<double>& grad) {
    MlpLoss loss = mlp_loss(X, y, opts.hidden_units, w);
    grad = std::move(loss.grad);
    return loss.value;
  };

  std::vector<std::vector<double>> starts;
  if (opts.warm_start) {
    if (opts.warm_start->size() != s.total)
      throw ModelError("warm start weights do not match the layer sizes");
    starts.push_back(*opts.warm_start);
  }
  const double h1 = opts.init_half_width / std::sqrt(static_cast<double>(dim));
  const double h2 =
      opts.init_half_width / std::sqrt(static_cast<double>(opts.hidden_units));
  for (int r = 0; r < opts.restarts; ++r) {
    std::vector<double> w(s.total);
    for (std::size_t i = 0; i < s.b1_end; ++i) w[i] = rng.uniform(-h1, h1);
    for (std::size_t i = s.b1_end; i < s.total; ++i) w[i] = rng.uniform(-h2, h2);
    starts.push_back(std::move(w));
  }
  if (starts.empty())
    throw ModelError("no restarts requested and no warm start given");

  bool have_best = false;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best_w;
  for (const auto& start : starts) {
    try {
      const LbfgsResult res = lbfgs_minimize(objective, start, opts.optimizer);
      if (res.f < best_loss) {
        best_loss = res.f;
        best_w = res.x;
        have_best = true;
      }
    } catch (const NumericError&) {
    }
  }
  if (!have_best) throw ModelError("every training restart failed");

  MlpModel m;
  unpack(s, best_w, m.W1, m.b1, m.w2, m.b2);
  m.target_mean = mean;
  m.target_std = sd;
  m.train_mse = best_loss;
  return m;
}

double mlp_predict(const MlpModel& model, const Genotype& x) {
  if (static_cast<Eigen::Index>(x.size()) != model.W1.cols())
    throw std::invalid_argument("query dimension does not match the model");
  Eigen::Map<const Eigen::VectorXd> q(x.data(), x.size());
  const Eigen::VectorXd h = ((model.W1 * q) + model.b1).cwiseMax(0.0);
  const double yhat = model.w2.dot(h) + model.b2;
  return model.target_mean + model.target_std * yhat;
}

}  // namespace saga
