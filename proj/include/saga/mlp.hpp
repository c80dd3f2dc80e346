#ifndef SAGA_MLP_HPP
#define SAGA_MLP_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "saga/archive.hpp"
#include "saga/lbfgs.hpp"
#include "saga/rng.hpp"

namespace saga {

/// One-hidden-layer ReLU regressor with a linear output, trained by
/// full-batch quasi-Newton minimization of the mean squared error on
/// standardized targets.
struct MlpModel {
  Eigen::MatrixXd W1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;
  double target_mean = 0.0;
  double target_std = 1.0;
  double train_mse = 0.0;  // standardized scale, at the returned weights
};

struct MlpFitOptions {
  int hidden_units = 10;
  /// Random restarts; zero is allowed when warm-start weights are given.
  int restarts = 5;
  /// Flat weight vector (see mlp_flatten) tried in addition to the restarts.
  std::optional<std::vector<double>> warm_start;
  LbfgsOptions optimizer{.max_iterations = 200};
  /// Uniform init half-width before the 1/sqrt(fan_in) scaling.
  double init_half_width = 0.7;
};

struct MlpLoss {
  double value = 0.0;
  std::vector<double> grad;
};

/// Number of weights for the given layer sizes.
std::size_t mlp_weight_count(int input_dim, int hidden_units);

/// Pack weights as [W1 row-major, b1, w2, b2].
std::vector<double> mlp_flatten(const MlpModel& model);

/// Mean squared error over (X, y) and its gradient at the flat weight
/// vector w. Exposed for gradient verification.
MlpLoss mlp_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 int hidden_units, const std::vector<double>& w);

/// Train on the archive's genotypes and mean fitnesses. Throws ModelError
/// when the archive has fewer than two records or every restart fails.
MlpModel mlp_fit(const Archive& archive, const MlpFitOptions& opts, Rng& rng);

/// Point prediction at x on the original target scale.
double mlp_predict(const MlpModel& model, const Genotype& x);

}  // namespace saga

#endif
