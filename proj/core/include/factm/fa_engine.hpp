#ifndef FACTM_FA_ENGINE_HPP
#define FACTM_FA_ENGINE_HPP

#include "factm/types.hpp"

namespace factm::fa {

// Coordinate-ascent updates for the factor-analysis half of the model.
// Each update is the exact maximizer of the ELBO over the block it touches,
// holding everything else fixed. The *_factor variants update a single
// factor column; the plain variants sweep k = 0..K-1 in order.

/// q(z_{n,k}) for every sample. Structured views contribute through the
/// link means, weighted by the link precision t.
void update_z(VariationalState& state, const Dataset& data, const Hyperparams& hp);
void update_z_factor(VariationalState& state, const Dataset& data, const Hyperparams& hp, int k);

/// Spike-and-slab q(w~, s) of simple view `view`.
void update_w(VariationalState& state, const Dataset& data, const Hyperparams& hp, int view);
void update_w_factor(VariationalState& state, const Dataset& data, const Hyperparams& hp,
                     int view, int k);

/// q(alpha), q(theta), q(tau) of every simple view and q(alphabar) of every
/// structured view.
void update_conjugates(VariationalState& state, const Dataset& data, const Hyperparams& hp);
void update_alpha(VariationalState& state, const Hyperparams& hp, int view);
void update_theta(VariationalState& state, const Hyperparams& hp, int view);
void update_tau(VariationalState& state, const Dataset& data, const Hyperparams& hp, int view);
void update_alphabar(VariationalState& state, const Hyperparams& hp, int view);

/// q(wbar) of structured view `view` (ARD prior only, no spike-and-slab).
void update_wbar(VariationalState& state, const Hyperparams& hp, int view);
void update_wbar_factor(VariationalState& state, const Hyperparams& hp, int view, int k);

/// sum_n E[(y_{n,d} - sum_k z_{n,k} w_{d,k})^2] for every feature d.
[[nodiscard]] Vector expected_sq_residual(const VariationalState& state, const Dataset& data,
                                          int view);

/// sum_{n,l} E[(mu_{n,l} - sum_k z_{n,k} wbar_{l,k})^2] including the link
/// covariance.
[[nodiscard]] double expected_link_sq_residual(const VariationalState& state, int view);

/// FA-block ELBO contributions: z, every simple view (likelihood, loadings,
/// conjugates) and the loading priors of the structured views.
[[nodiscard]] double fa_elbo_terms(const VariationalState& state, const Dataset& data,
                                   const Hyperparams& hp);

/// The part of fa_elbo_terms owned by structured view `view`: the ARD
/// prior and entropy of wbar and alphabar. Zero when the link is disabled.
[[nodiscard]] double wbar_elbo_terms(const VariationalState& state, const Hyperparams& hp,
                                     int view);

}  // namespace factm::fa

#endif  // FACTM_FA_ENGINE_HPP
