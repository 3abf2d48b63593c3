#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "solvers.hpp"
#include "sparseret/error.hpp"

namespace sparseret::detail {

namespace {

Eigen::MatrixXd restrict(const Eigen::MatrixXd& gram, const std::vector<Eigen::Index>& active) {
  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = gram(active[a], active[b]);
  }
  return sub;
}

Eigen::VectorXd solve_active(const Eigen::MatrixXd& gram, const std::vector<Eigen::Index>& active,
                             const Eigen::VectorXd& rhs) {
  const Eigen::LLT<Eigen::MatrixXd> llt(restrict(gram, active));
  if (llt.info() != Eigen::Success) {
    throw NumericError("homotopy active set of size " + std::to_string(active.size()) +
                       " is rank-deficient");
  }
  return llt.solve(rhs);
}

}  // namespace

// LARS with the lasso modification. Follows the piecewise-linear solution path
// from lambda_max = ||D^T x||_inf down to the target lambda. Along each segment
// the active coefficients move so that every active correlation stays at
// +-lambda; a segment ends when an inactive correlation reaches the boundary
// (atom enters) or an active coefficient crosses zero (atom leaves).
SparseCode run_homotopy(const Eigen::MatrixXd& gram, const Eigen::VectorXd& correlations,
                        const CoderConfig& config) {
  const Eigen::Index k = gram.cols();
  const double target = config.lambda;

  SparseCode code;
  code.coeffs = Eigen::VectorXd::Zero(k);
  Eigen::Index first = 0;
  double level = correlations.cwiseAbs().maxCoeff(&first);
  if (target >= level) {
    code.converged = true;
    return code;
  }

  Eigen::VectorXd& alpha = code.coeffs;
  std::vector<Eigen::Index> active{first};
  std::vector<double> signs{correlations(first) > 0 ? 1.0 : -1.0};
  std::vector<bool> is_active(static_cast<std::size_t>(k), false);
  is_active[static_cast<std::size_t>(first)] = true;
  std::optional<std::pair<Eigen::Index, double>> just_dropped;  // atom, former sign
  const double min_step = 1e-14 * level;

  Eigen::VectorXd gradient = correlations;
  while (true) {
    if (code.iterations >= config.max_iter) return code;
    ++code.iterations;

    const auto n_active = static_cast<Eigen::Index>(active.size());
    const Eigen::VectorXd sign_vec = Eigen::Map<const Eigen::VectorXd>(signs.data(), n_active);
    const Eigen::VectorXd direction = solve_active(gram, active, sign_vec);
    // Rate at which each correlation decreases per unit decrease of lambda.
    Eigen::VectorXd rate = Eigen::VectorXd::Zero(k);
    for (Eigen::Index a = 0; a < n_active; ++a) rate += gram.col(active[a]) * direction(a);

    double step = level - target;
    enum class Event { kNone, kEnter, kLeave } event = Event::kNone;
    Eigen::Index event_index = -1;

    for (Eigen::Index j = 0; j < k; ++j) {
      if (is_active[static_cast<std::size_t>(j)]) continue;
      // Solve |g_j - t * rate_j| = level - t for the smallest t > 0.
      const double candidates[2] = {
          (1.0 - rate(j)) > 0.0 ? (level - gradient(j)) / (1.0 - rate(j))
                                : std::numeric_limits<double>::infinity(),
          (1.0 + rate(j)) > 0.0 ? (level + gradient(j)) / (1.0 + rate(j))
                                : std::numeric_limits<double>::infinity()};
      for (int side = 0; side < 2; ++side) {
        // A just-dropped atom sits on the boundary it left; only the opposite
        // one can be reached within this segment.
        if (just_dropped && just_dropped->first == j && (side == 0) == (just_dropped->second > 0)) continue;
        const double t = candidates[side];
        if (t > min_step && t < step) {
          step = t;
          event = Event::kEnter;
          event_index = j;
        }
      }
    }
    for (Eigen::Index a = 0; a < n_active; ++a) {
      if (direction(a) == 0.0) continue;
      const double t = -alpha(active[a]) / direction(a);
      if (t > min_step && t < step) {
        step = t;
        event = Event::kLeave;
        event_index = a;
      }
    }

    for (Eigen::Index a = 0; a < n_active; ++a) alpha(active[a]) += step * direction(a);
    level -= step;
    just_dropped.reset();

    if (event == Event::kLeave) {
      const Eigen::Index atom = active[event_index];
      const double former_sign = signs[event_index];
      alpha(atom) = 0.0;
      is_active[static_cast<std::size_t>(atom)] = false;
      active.erase(active.begin() + event_index);
      signs.erase(signs.begin() + event_index);
      just_dropped = std::make_pair(atom, former_sign);
    }
    gradient = correlations - gram * alpha;
    if (event == Event::kEnter) {
      active.push_back(event_index);
      signs.push_back(gradient(event_index) > 0 ? 1.0 : -1.0);
      is_active[static_cast<std::size_t>(event_index)] = true;
    }
    if (!alpha.allFinite()) throw NumericError("homotopy path became non-finite");
    if (event == Event::kNone) break;
    if (active.empty()) {
      // Every coefficient left the path; restart from the largest correlation.
      Eigen::Index j = 0;
      gradient.cwiseAbs().maxCoeff(&j);
      active.push_back(j);
      signs.push_back(gradient(j) > 0 ? 1.0 : -1.0);
      is_active[static_cast<std::size_t>(j)] = true;
    }
  }

  // Re-solve the final segment endpoint directly to shed accumulated drift.
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(active.size()));
  for (std::size_t a = 0; a < active.size(); ++a) {
    rhs(static_cast<Eigen::Index>(a)) = correlations(active[a]) - target * signs[a];
  }
  const Eigen::VectorXd exact = solve_active(gram, active, rhs);
  bool consistent = true;
  for (std::size_t a = 0; a < active.size(); ++a) {
    if (exact(static_cast<Eigen::Index>(a)) * signs[a] < 0.0) consistent = false;
  }
  if (consistent) {
    for (std::size_t a = 0; a < active.size(); ++a) alpha(active[a]) = exact(static_cast<Eigen::Index>(a));
  }
  code.converged = true;
  return code;
}

}  // namespace sparseret::detail
