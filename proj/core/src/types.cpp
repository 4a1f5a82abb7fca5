#include "factm/types.hpp"

#include <array>

namespace factm {

std::size_t StructuredView::sentence_count() const {
  std::size_t total = 0;
  for (const auto& doc : documents) total += doc.size();
  return total;
}

Matrix SimpleViewState::loading_mean() const { return incl_prob.cwiseProduct(slab_mean); }

Matrix SimpleViewState::loading_second_moment() const {
  return incl_prob.cwiseProduct(slab_mean.cwiseAbs2() + slab_var);
}

Vector SimpleViewState::tau_mean() const { return tau_shape.cwiseQuotient(tau_rate); }

Vector SimpleViewState::alpha_mean() const { return alpha_shape.cwiseQuotient(alpha_rate); }

Matrix StructuredViewState::wbar_second_moment() const {
  return wbar_mean.cwiseAbs2() + wbar_var;
}

Vector StructuredViewState::alphabar_mean() const {
  return alphabar_shape.cwiseQuotient(alphabar_rate);
}

Matrix VariationalState::z_second_moment() const { return z_mean.cwiseAbs2() + z_var; }

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 9> kPhaseNames{{
    {Phase::xi, "xi"},
    {Phase::eta, "eta"},
    {Phase::mu_link, "mu_link"},
    {Phase::beta, "beta"},
    {Phase::population, "population"},
    {Phase::w, "w"},
    {Phase::conjugates, "conjugates"},
    {Phase::z, "z"},
    {Phase::wbar, "wbar"},
}};

}  // namespace

std::string_view phase_name(Phase phase) {
  for (const auto& [p, name] : kPhaseNames) {
    if (p == phase) return name;
  }
  return "unknown";
}

Phase parse_phase(std::string_view name) {
  for (const auto& [p, n] : kPhaseNames) {
    if (n == name) return p;
  }
  throw std::invalid_argument("unknown update phase '" + std::string(name) + "'");
}

std::vector<Phase> default_schedule() {
  return {Phase::xi, Phase::eta, Phase::mu_link, Phase::beta, Phase::population,
          Phase::w,  Phase::conjugates, Phase::z, Phase::wbar};
}

}  // namespace factm
