#ifndef SAGA_GP_HPP
#define SAGA_GP_HPP

#include <Eigen/Dense>
#include <array>
#include <optional>

#include "saga/archive.hpp"
#include "saga/lbfgs.hpp"
#include "saga/rng.hpp"

namespace saga {

struct GpHyperparams {
  double lengthscale = 1.0;
  double signal_std = 1.0;
  double noise_std = 0.1;
};

/// Gaussian process regressor with an isotropic squared-exponential kernel.
/// Targets are standardized internally; predictions are returned on the
/// original scale.
struct GpModel {
  Eigen::MatrixXd X;       // n x dim training inputs
  Eigen::VectorXd y;       // standardized targets
  double target_mean = 0.0;
  double target_std = 1.0;
  GpHyperparams hp;
  Eigen::MatrixXd chol;    // lower Cholesky factor of K + jitter I
  Eigen::VectorXd alpha;   // (K + jitter I)^{-1} y
  double jitter = 0.0;     // diagonal shift needed for the factorization
  double log_marginal = 0.0;  // of the standardized targets at hp
};

/// k(a,b) = signal_std^2 exp(-|a-b|^2 / (2 lengthscale^2)).
double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const GpHyperparams& hp);

struct GpLogMarginal {
  double value = 0.0;
  /// Partials with respect to log(lengthscale), log(signal_std),
  /// log(noise_std), in that order.
  std::array<double, 3> grad{};
};

/// Log marginal likelihood of y under the kernel plus noise_std^2 I, with its
/// analytic gradient in log hyperparameter space.
/// Throws ModelError when the covariance cannot be factorized.
GpLogMarginal gp_log_marginal_likelihood(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& y,
                                         const GpHyperparams& hp);

struct GpFitOptions {
  /// Random restarts for the hyperparameter search. Zero is allowed when a
  /// warm start is given.
  int restarts = 5;
  /// Starting point tried in addition to the random restarts.
  std::optional<GpHyperparams> warm_start;
  LbfgsOptions optimizer{.max_iterations = 100};
  /// Log-uniform sampling ranges for the restarts.
  double lengthscale_min = 0.05, lengthscale_max = 5.0;
  double signal_std_min = 0.1, signal_std_max = 10.0;
  double noise_std_min = 1e-4, noise_std_max = 1.0;
};

/// Factorize the covariance at fixed hyperparameters over raw targets
/// (standardization happens here). Used directly by tests and as the final
/// step of gp_fit. Throws ModelError for fewer than one record.
GpModel gp_build(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_raw,
                 const GpHyperparams& hp);

/// Maximum-likelihood fit on the archive's genotypes and mean fitnesses.
/// Throws ModelError when the archive has fewer than two records or every
/// restart fails.
GpModel gp_fit(const Archive& archive, const GpFitOptions& opts, Rng& rng);

struct Prediction {
  double mean = 0.0;
  double std = 0.0;
};

/// Posterior of the latent function at x, on the original target scale.
/// Variance is clamped at zero before the square root.
Prediction gp_predict(const GpModel& model, const Genotype& x);

}  // namespace saga

#endif
