#ifndef FACTM_INFERENCE_HPP
#define FACTM_INFERENCE_HPP

#include "factm/types.hpp"

#include <cstdint>
#include <vector>

namespace factm {

/// Surrogate ELBO of the full model: FA-block terms plus, for every
/// structured view, the link term and the CTM terms with the zeta bound.
[[nodiscard]] double compute_elbo(const VariationalState& state, const Dataset& data,
                                  const Hyperparams& hp);

/// Deterministic starting point for coordinate ascent.
///
/// Factor means come from the leading principal directions of the
/// concatenated standardized simple views (standard normal draws fill any
/// factor the views cannot supply), perturbed by small seeded noise.
/// Topic Dirichlets get alpha0 plus positive uniform noise scaled by
/// `topic_noise` times the average count mass per (topic, word); the noise
/// breaks the symmetry between topics.
[[nodiscard]] VariationalState initialize(const Dataset& data, const Hyperparams& hp,
                                          std::uint64_t seed, double topic_noise = 1.0);

/// Runs one phase of the sweep over every view it applies to. Returns the
/// number of samples whose inner eta optimization did not converge.
int run_phase(VariationalState& state, const Dataset& data, const Hyperparams& hp,
              const FitConfig& cfg, Phase phase);

struct FitResult {
  VariationalState state;
  FitReport report;
};

/// Coordinate-ascent fit with restarts. The returned state has its factors
/// ordered by decreasing total variance explained and sign-normalized so
/// that the largest-magnitude loading of every factor is positive.
///
/// With `start` the fit resumes from that state in a single run instead of
/// initializing; a state of the wrong shape is a ValidationError.
[[nodiscard]] FitResult fit(const Dataset& data, const Hyperparams& hp, const FitConfig& cfg,
                            const VariationalState* start = nullptr);

/// Fraction of each view explained by each factor alone:
/// 1 - |Y - E[z_k] E[w_k]'|^2 / |Y|^2, clamped to [0, 1]. Rows are the simple
/// views followed by the structured views; structured views use the link
/// means in place of Y (all zero when the link is disabled).
[[nodiscard]] Matrix variance_explained(const VariationalState& state, const Dataset& data,
                                        const Hyperparams& hp);

/// Factor indices sorted by decreasing column sum of `ve`, ties by index.
[[nodiscard]] std::vector<int> order_by_variance(const Matrix& ve);

/// New factor j is old factor order[j] in every K-indexed block.
void reorder_factors(VariationalState& state, const std::vector<int>& order);

/// Flips factors so the largest-magnitude mean loading is positive.
void normalize_signs(VariationalState& state, const Hyperparams& hp);

}  // namespace factm

#endif  // FACTM_INFERENCE_HPP
