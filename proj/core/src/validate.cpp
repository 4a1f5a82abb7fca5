#include "factm/validate.hpp"

#include <cmath>
#include <sstream>

namespace factm {

namespace {

std::string view_label(const char* kind, std::size_t v, const std::string& name) {
  std::ostringstream os;
  os << kind << '[' << v << ']';
  if (!name.empty()) os << " '" << name << "'";
  return os.str();
}

void check_positive(std::vector<Violation>& out, const char* field, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    out.push_back({std::string("hyperparams.") + field, "must be a finite positive number"});
  }
}

}  // namespace

std::vector<Violation> validate(const Dataset& dataset, const Hyperparams& hp) {
  std::vector<Violation> out;
  const int n = dataset.n_samples;

  if (n < 1) out.push_back({"dataset", "sample count must be at least 1"});
  if (!dataset.sample_ids.empty() && static_cast<int>(dataset.sample_ids.size()) != n) {
    out.push_back({"dataset.sample_ids", "sample count mismatch"});
  }

  for (std::size_t v = 0; v < dataset.simple_views.size(); ++v) {
    const auto& view = dataset.simple_views[v];
    const std::string where = view_label("simple_views", v, view.name);
    if (view.data.rows() != n) {
      out.push_back({where, "sample count mismatch"});
      continue;
    }
    if (view.data.cols() < 1) out.push_back({where, "view has no features"});
    if (!view.feature_names.empty() &&
        static_cast<Eigen::Index>(view.feature_names.size()) != view.data.cols()) {
      out.push_back({where, "feature name count does not match column count"});
    }
    for (Eigen::Index i = 0; i < view.data.rows(); ++i) {
      for (Eigen::Index d = 0; d < view.data.cols(); ++d) {
        if (!std::isfinite(view.data(i, d))) {
          std::ostringstream os;
          os << where << ".sample[" << i << "].feature[" << d << ']';
          out.push_back({os.str(), "missing or non-finite value"});
        }
      }
    }
  }

  for (std::size_t s = 0; s < dataset.structured_views.size(); ++s) {
    const auto& view = dataset.structured_views[s];
    const std::string where = view_label("structured_views", s, view.name);
    if (view.vocab_size < 1) out.push_back({where, "vocabulary size must be at least 1"});
    if (static_cast<int>(view.documents.size()) != n) {
      out.push_back({where, "sample count mismatch"});
      continue;
    }
    for (std::size_t i = 0; i < view.documents.size(); ++i) {
      const auto& doc = view.documents[i];
      if (doc.empty()) {
        std::ostringstream os;
        os << where << ".sample[" << i << ']';
        out.push_back({os.str(), "sample has no sentences"});
      }
      for (std::size_t j = 0; j < doc.size(); ++j) {
        std::ostringstream os;
        os << where << ".sample[" << i << "].sentence[" << j << ']';
        double total = 0.0;
        int previous = -1;
        for (const Token& tok : doc[j]) {
          if (tok.index < 0 || tok.index >= view.vocab_size) {
            out.push_back({os.str(), "token index " + std::to_string(tok.index) +
                                         " outside vocabulary"});
          }
          if (tok.index <= previous) {
            out.push_back({os.str(), "token indices not strictly increasing"});
          }
          previous = tok.index;
          if (!(tok.count >= 0.0) || !std::isfinite(tok.count)) {
            out.push_back({os.str(), "negative or non-finite count"});
          } else {
            total += tok.count;
          }
        }
        if (!(total > 0.0)) out.push_back({os.str(), "sentence has total count 0"});
      }
    }
  }

  if (hp.n_factors < 1) out.push_back({"hyperparams.n_factors", "must be at least 1"});
  if (hp.n_topics.size() != dataset.structured_views.size()) {
    out.push_back({"hyperparams.n_topics", "need exactly one topic count per structured view"});
  }
  for (std::size_t s = 0; s < hp.n_topics.size(); ++s) {
    if (hp.n_topics[s] < 1) {
      out.push_back({"hyperparams.n_topics[" + std::to_string(s) + "]", "must be at least 1"});
    }
  }
  check_positive(out, "link_precision", hp.link_precision);
  check_positive(out, "a0_alpha", hp.a0_alpha);
  check_positive(out, "b0_alpha", hp.b0_alpha);
  check_positive(out, "a0_theta", hp.a0_theta);
  check_positive(out, "b0_theta", hp.b0_theta);
  check_positive(out, "a0_tau", hp.a0_tau);
  check_positive(out, "b0_tau", hp.b0_tau);
  check_positive(out, "a0_alphabar", hp.a0_alphabar);
  check_positive(out, "b0_alphabar", hp.b0_alphabar);
  check_positive(out, "alpha0_beta", hp.alpha0_beta);
  return out;
}

std::vector<Violation> validate(const FitConfig& cfg) {
  std::vector<Violation> out;
  if (cfg.max_sweeps < 0) out.push_back({"fit.max_sweeps", "must be non-negative"});
  if (!(cfg.elbo_rel_tol > 0.0)) out.push_back({"fit.elbo_rel_tol", "must be positive"});
  if (cfg.inner_opt_max_iters < 0) {
    out.push_back({"fit.inner_opt_max_iters", "must be non-negative"});
  }
  if (!(cfg.inner_opt_grad_tol > 0.0)) {
    out.push_back({"fit.inner_opt_grad_tol", "must be positive"});
  }
  if (cfg.n_restarts < 1) out.push_back({"fit.n_restarts", "must be at least 1"});
  if (cfg.update_schedule.empty()) out.push_back({"fit.update_schedule", "must not be empty"});
  if (!(cfg.init_topic_noise >= 0.0)) {
    out.push_back({"fit.init_topic_noise", "must be non-negative"});
  }
  if (cfg.threads < 0) out.push_back({"fit.threads", "must be non-negative"});
  return out;
}

void require_valid(const Dataset& dataset, const Hyperparams& hp) {
  const auto violations = validate(dataset, hp);
  if (!violations.empty()) throw ValidationError(describe(violations));
}

std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << '\n';
    os << violations[i].where << ": " << violations[i].message;
  }
  return os.str();
}

}  // namespace factm
