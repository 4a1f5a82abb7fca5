#ifndef FACTM_VALIDATE_HPP
#define FACTM_VALIDATE_HPP

#include "factm/types.hpp"

#include <string>
#include <vector>

namespace factm {

struct Violation {
  std::string where;    // e.g. "structured_views[0].sample[3].sentence[7]"
  std::string message;  // e.g. "sentence has total count 0"

  bool operator==(const Violation&) const = default;
};

/// Every invariant breach of the dataset and hyperparameters. An empty
/// result means the pair is valid.
[[nodiscard]] std::vector<Violation> validate(const Dataset& dataset, const Hyperparams& hp);

[[nodiscard]] std::vector<Violation> validate(const FitConfig& cfg);

/// Throws ValidationError listing all violations when the list is non-empty.
void require_valid(const Dataset& dataset, const Hyperparams& hp);

/// Joins violations into a multi-line human-readable message.
[[nodiscard]] std::string describe(const std::vector<Violation>& violations);

}  // namespace factm

#endif  // FACTM_VALIDATE_HPP
