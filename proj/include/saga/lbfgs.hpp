#ifndef SAGA_LBFGS_HPP
#define SAGA_LBFGS_HPP

#include <functional>
#include <vector>

namespace saga {

struct LbfgsOptions {
  /// Number of curvature pairs kept for the two-loop recursion.
  int memory = 10;
  int max_iterations = 500;
  /// Convergence test: infinity norm of the gradient.
  double gradient_tolerance = 1e-6;
  /// Strong Wolfe sufficient-decrease coefficient, in (0,1).
  double wolfe_c1 = 1e-4;
  /// Strong Wolfe curvature coefficient, in (c1,1).
  double wolfe_c2 = 0.9;
  int max_line_search_steps = 40;
};

enum class LbfgsStatus { converged, iteration_limit };

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  LbfgsStatus status = LbfgsStatus::iteration_limit;
  int iterations = 0;
  int function_evaluations = 0;
};

/// Objective callback: fills `grad` (resized by the caller) and returns the
/// value at `x`.
using ObjectiveWithGrad =
    std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

/// Called after every accepted step with (iteration, f, grad infinity norm).
using LbfgsCallback = std::function<void(int, double, double)>;

/// Limited-memory BFGS with a strong Wolfe cubic-interpolation line search.
/// Accepted steps never increase the objective. On a line search breakdown
/// the history is dropped and one steepest-descent step is attempted; a
/// second consecutive breakdown terminates with iteration_limit.
/// Throws NumericError if the objective produces a non-finite value or
/// gradient anywhere it is evaluated.
LbfgsResult lbfgs_minimize(const ObjectiveWithGrad& objective,
                           std::vector<double> x0, const LbfgsOptions& opts,
                           const LbfgsCallback& on_step = {});

/// Central finite differences, component i = (f(x+h e_i) - f(x-h e_i)) / 2h.
/// Throws NumericError on non-finite f.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h);

}  // namespace saga

#endif
