#include "saga/gp.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "saga/errors.hpp"

namespace saga {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (X.row(i) - X.row(j)).squaredNorm();
      d2(i, j) = d;
      d2(j, i) = d;
    }
  }
  return d2;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& d2,
                              const GpHyperparams& hp) {
  const double sf2 = hp.signal_std * hp.signal_std;
  const double inv2l2 = 1.0 / (2.0 * hp.lengthscale * hp.lengthscale);
  Eigen::MatrixXd K = sf2 * (-d2 * inv2l2).array().exp().matrix();
  // The diagonal is exactly sf2; writing it directly keeps a degenerate
  // lengthscale (inv2l2 = inf, 0 * inf = NaN) from poisoning it.
  K.diagonal().setConstant(sf2);
  return K;
}

struct Factorization {
  Eigen::MatrixXd L;
  Eigen::VectorXd alpha;
  double jitter = 0.0;
};

/// Cholesky of K, escalating a diagonal shift when K is numerically
/// indefinite. The shift is relative to the mean diagonal, escalating from
/// 1e-10 to 1e-6 of it. Throws ModelError once the largest shift fails too.
Factorization factorize(const Eigen::MatrixXd& K, const Eigen::VectorXd& y) {
  const Eigen::Index n = K.rows();
  const double scale = K.diagonal().mean();
  double eps = 0.0;
  for (;;) {
    Eigen::MatrixXd Kj = K;
    if (eps > 0.0) Kj.diagonal().array() += eps * scale;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      Factorization f;
      f.L = llt.matrixL();
      f.alpha = llt.solve(y);
      f.jitter = eps * scale;
      return f;
    }
    if (eps == 0.0)
      eps = 1e-10;
    else if (eps < 1e-6)
      eps *= 10.0;
    else
      throw ModelError("covariance factorization failed for " +
                       std::to_string(n) + " points");
  }
}

double standard_deviation(const Eigen::VectorXd& y) {
  const double mean = y.mean();
  return std::sqrt((y.array() - mean).square().mean());
}

std::array<double, 3> to_log(const GpHyperparams& hp) {
  return {std::log(hp.lengthscale), std::log(hp.signal_std),
          std::log(hp.noise_std)};
}

GpHyperparams from_log(const std::vector<double>& t) {
  return {std::exp(t[0]), std::exp(t[1]), std::exp(t[2])};
}

}  // namespace

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const GpHyperparams& hp) {
  if (a.size() != b.size())
    throw std::invalid_argument("kernel inputs must have equal lengths");
  if (!(hp.lengthscale > 0.0) || !(hp.signal_std > 0.0))
    throw std::invalid_argument("kernel hyperparameters must be positive");
  const double d2 = (a - b).squaredNorm();
  return hp.signal_std * hp.signal_std *
         std::exp(-d2 / (2.0 * hp.lengthscale * hp.lengthscale));
}

GpLogMarginal gp_log_marginal_likelihood(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& y,
                                         const GpHyperparams& hp) {
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd d2 = squared_distances(X);
  const Eigen::MatrixXd Kf = kernel_matrix(d2, hp);
  Eigen::MatrixXd K = Kf;
  K.diagonal().array() += hp.noise_std * hp.noise_std;

  const Factorization fact = factorize(K, y);

  GpLogMarginal out;
  out.value = -0.5 * y.dot(fact.alpha) -
              fact.L.diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * kLog2Pi;

  // d(lml)/dtheta = tr((alpha alpha^T - K^{-1}) dK/dtheta) / 2
  Eigen::MatrixXd Kinv = Eigen::MatrixXd::Identity(n, n);
  fact.L.triangularView<Eigen::Lower>().solveInPlace(Kinv);
  fact.L.transpose().triangularView<Eigen::Upper>().solveInPlace(Kinv);
  const Eigen::MatrixXd W = fact.alpha * fact.alpha.transpose() - Kinv;

  const double inv_l2 = 1.0 / (hp.lengthscale * hp.lengthscale);
  // dK/dlog(l) = Kf .* d2 / l^2
  out.grad[0] = 0.5 * (W.array() * Kf.array() * d2.array()).sum() * inv_l2;
  // dK/dlog(sf) = 2 Kf
  out.grad[1] = (W.array() * Kf.array()).sum();
  // dK/dlog(sn) = 2 sn^2 I
  out.grad[2] = hp.noise_std * hp.noise_std * W.trace();
  return out;
}

GpModel gp_build(const Eigen::MatrixXd& X, const Eigen::VectorXd& y_raw,
                 const GpHyperparams& hp) {
  if (X.rows() < 1) throw ModelError("cannot build a model from zero points");
  if (X.rows() != y_raw.size())
    throw ModelError("input/target count mismatch");

  GpModel m;
  m.X = X;
  m.hp = hp;
  m.target_mean = y_raw.mean();
  const double sd = standard_deviation(y_raw);
  m.target_std = sd > 1e-12 ? sd : 1.0;  // constant targets: identity scale
  m.y = (y_raw.array() - m.target_mean) / m.target_std;

  Eigen::MatrixXd K = kernel_matrix(squared_distances(X), hp);
  K.diagonal().array() += hp.noise_std * hp.noise_std;
  Factorization fact = factorize(K, m.y);
  m.chol = std::move(fact.L);
  m.alpha = std::move(fact.alpha);
  m.jitter = fact.jitter;
  m.log_marginal = -0.5 * m.y.dot(m.alpha) -
                   m.chol.diagonal().array().log().sum() -
                   0.5 * static_cast<double>(X.rows()) * kLog2Pi;
  return m;
}

GpModel gp_fit(const Archive& archive, const GpFitOptions& opts, Rng& rng) {
  const std::size_t n = archive.size();
  if (n < 2) throw ModelError("fit needs at least two archive records");
  const std::size_t dim = archive[0].genotype.size();

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
  const Eigen::VectorXd y_std = (y_raw.array() - mean) / sd;

  // Minimize the negative log marginal likelihood in log hyperparameter
  // space. A quadratic penalty outside a generous box keeps line search
  // probes away from the overflow region without ever making the objective
  // non-smooth or non-finite.
  constexpr double kBoxLo = -13.8;  // log(1e-6)
  constexpr double kBoxHi = 6.9;    // log(1e3)
  constexpr double kBoxWeight = 100.0;
  const auto objective = [&](const std::vector<double>& t,
                             std::vector<double>& grad) {
    // Far outside the box the penalty dwarfs the likelihood term, so the
    // likelihood is skipped entirely; this keeps wild line search probes
    // finite instead of overflowing exp().
    const bool extreme = std::abs(t[0]) > 40.0 || std::abs(t[1]) > 40.0 ||
                         std::abs(t[2]) > 40.0;
    double value = 0.0;
    if (extreme) {
      grad.assign(3, 0.0);
    } else {
      const GpLogMarginal lml =
          gp_log_marginal_likelihood(X, y_std, from_log(t));
      grad.assign(lml.grad.begin(), lml.grad.end());
      value = -lml.value;
    }
    for (std::size_t i = 0; i < 3; ++i) {
      grad[i] = -grad[i];
      const double over = std::max(0.0, t[i] - kBoxHi);
      const double under = std::max(0.0, kBoxLo - t[i]);
      value += kBoxWeight * (over * over + under * under);
      grad[i] += 2.0 * kBoxWeight * (over - under);
    }
    return value;
  };

  std::vector<std::array<double, 3>> starts;
  if (opts.warm_start) starts.push_back(to_log(*opts.warm_start));
  for (int r = 0; r < opts.restarts; ++r) {
    const auto log_uniform = [&](double lo, double hi) {
      return std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo));
    };
    starts.push_back({log_uniform(opts.lengthscale_min, opts.lengthscale_max),
                      log_uniform(opts.signal_std_min, opts.signal_std_max),
                      log_uniform(opts.noise_std_min, opts.noise_std_max)});
  }
  if (starts.empty())
    throw ModelError("no restarts requested and no warm start given");

  bool have_best = false;
  double best_nll = std::numeric_limits<double>::infinity();
  std::array<double, 3> best_t{};
  std::string last_failure;
  for (const auto& start : starts) {
    try {
      const LbfgsResult res = lbfgs_minimize(
          objective, {start[0], start[1], start[2]}, opts.optimizer);
      if (res.f < best_nll) {
        best_nll = res.f;
        best_t = {res.x[0], res.x[1], res.x[2]};
        have_best = true;
      }
    } catch (const NumericError& e) {
      last_failure = e.what();
    } catch (const ModelError& e) {
      last_failure = e.what();
    }
  }
  if (!have_best)
    throw ModelError("every hyperparameter restart failed to optimize (" +
                     last_failure + ")");

  return gp_build(X, y_raw, from_log({best_t[0], best_t[1], best_t[2]}));
}

Prediction gp_predict(const GpModel& model, const Genotype& x) {
  const Eigen::Index n = model.X.rows();
  if (static_cast<Eigen::Index>(x.size()) != model.X.cols())
    throw std::invalid_argument("query dimension does not match the model");
  Eigen::Map<const Eigen::VectorXd> q(x.data(), x.size());

  const double sf2 = model.hp.signal_std * model.hp.signal_std;
  const double inv2l2 =
      1.0 / (2.0 * model.hp.lengthscale * model.hp.lengthscale);
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d2 = (model.X.row(i).transpose() - q).squaredNorm();
    ks(i) = sf2 * std::exp(-d2 * inv2l2);
  }

  const double mean_std = ks.dot(model.alpha);
  const Eigen::VectorXd v =
      model.chol.triangularView<Eigen::Lower>().solve(ks);
  const double var = std::max(0.0, sf2 - v.squaredNorm());

  Prediction p;
  p.mean = model.target_mean + model.target_std * mean_std;
  p.std = model.target_std * std::sqrt(var);
  return p;
}

}  // namespace saga
