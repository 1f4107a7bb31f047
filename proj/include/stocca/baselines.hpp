#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "stocca/als.hpp"

namespace stocca {

/// Per-view step sizes ξ of the displayed update ũ ← ũ − 2ξ·∇f(ũ).
struct AppGradStep {
  double xi_x = 0.0;
  double xi_y = 0.0;
};

/// ξ = 1/(2σmax(Σ)) per view, i.e. a gradient step of 1/σmax on f.
AppGradStep auto_appgrad_step(const CcaDataset& ds);

/// ũ ← ũ − 2ξ(X(Xᵀũ − Yᵀv)/N + γx ũ), ṽ likewise with u, then exact
/// Σ-normalisation. One pass. ũ, ṽ enter with the sign used by
/// als_outer_step, so this is ALS with a single GD step.
AlsState appgrad_step(const AlsState& state, const CcaDataset& ds, const AppGradStep& xi);

struct MinibatchConfig {
  Index batch_size = 100;
  /// 0 selects ξ = 1/(2σmax) per view.
  double step_size = 0.0;
  int steps = 0;
  std::uint64_t seed = 0;
};

/// Without-replacement minibatches over a permutation that is reshuffled
/// whenever fewer than `batch` unused samples remain.
class MinibatchSampler {
 public:
  MinibatchSampler(Index n, Index batch, std::uint64_t seed);
  const std::vector<Index>& next();

 private:
  std::vector<Index> perm_;
  std::vector<Index> batch_;
  Index pos_ = 0;
  std::mt19937_64 rng_;
};

/// Minibatch gradient on both views and normalisation by the minibatch
/// quadratic forms ũᵀ(X_B X_Bᵀ/b + γx I)ũ. With b = N this is appgrad_step.
AlsState s_appgrad_step(const AlsState& state, const CcaDataset& ds, const AppGradStep& xi,
                        MinibatchSampler& sampler, Index batch_size);

struct AppGradConfig {
  /// 0 selects the automatic step.
  double step_size = 0.0;
  int steps = -1;
  double passes_max = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::optional<VectorXd> u0, v0;
};

struct BaselineRun {
  AlsState state;
  RunTrace trace;
};

BaselineRun run_appgrad(const CcaDataset& ds, const AppGradConfig& config, const ReferenceSolution* reference = nullptr,
                        const std::string& label = "appgrad");
/// `mb.steps` < 1 runs until `passes_max`.
BaselineRun run_s_appgrad(const CcaDataset& ds, const MinibatchConfig& mb, double passes_max,
                          const ReferenceSolution* reference = nullptr, const std::string& label = "s-appgrad",
                          std::optional<VectorXd> u0 = std::nullopt, std::optional<VectorXd> v0 = std::nullopt);

}  // namespace stocca
