#include "factm/ctm_engine.hpp"
#include "factm/fa_engine.hpp"
#include "factm/inference.hpp"

namespace factm {

double compute_elbo(const VariationalState& state, const Dataset& data, const Hyperparams& hp) {
  double total = fa::fa_elbo_terms(state, data, hp);
  for (std::size_t s = 0; s < state.structured.size(); ++s) {
    total += ctm::structured_elbo_terms(state, data, hp, static_cast<int>(s));
  }
  return total;
}

}  // namespace factm
