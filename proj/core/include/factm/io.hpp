#ifndef FACTM_IO_HPP
#define FACTM_IO_HPP

#include "factm/evaluation.hpp"
#include "factm/rotation.hpp"
#include "factm/simulation.hpp"
#include "factm/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace factm::io {

namespace fs = std::filesystem;

/// Malformed file contents; messages carry the file and line number.
/// Derives from ValidationError so the CLI maps it to the same exit code.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct LabeledMatrix {
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  Matrix values;
};

/// CSV with a header row; the first column holds row names. Values are
/// written with 17 significant digits so that reading them back is exact.
void write_matrix_csv(const fs::path& path, const LabeledMatrix& m);
[[nodiscard]] LabeledMatrix read_matrix_csv(const fs::path& path);

/// Manifest: {"simple_views":[{"name","path"}], "structured_views":[{"name",
/// "path","vocab_size"}]}. Paths are relative to the manifest. Simple views
/// are CSV (first column sample id), structured views TSV rows of
/// sample_id, sentence_index, token_index, count. Throws ParseError or
/// ValidationError.
[[nodiscard]] Dataset load_dataset(const fs::path& manifest);

/// Writes manifest.json plus one file per view into `dir`.
void save_dataset(const Dataset& data, const fs::path& dir);

struct RunConfig {
  Hyperparams hp;
  FitConfig fit;
};

/// Reads a JSON config. Missing keys keep their defaults; `n_topics` may be
/// a single integer applied to every structured view. Unknown keys are
/// rejected.
[[nodiscard]] RunConfig load_config(const fs::path& path, int n_structured_views);
[[nodiscard]] RunConfig parse_config(const std::string& json_text, int n_structured_views);

void write_state(const fs::path& path, const VariationalState& state);
[[nodiscard]] VariationalState read_state(const fs::path& path);

[[nodiscard]] std::string report_json(const FitReport& report, const Dataset& data,
                                      const Hyperparams& hp, const FitConfig& cfg);

/// Writes every fit output (factor, loading, topic, eta, link, population
/// and assignment files, report.json, state.bin) into `dir`.
void save_fit(const fs::path& dir, const VariationalState& state, const FitReport& report,
              const Dataset& data, const Hyperparams& hp, const FitConfig& cfg);

/// Per-sentence topic labels: rows of sample_id, sentence_index, topic.
void write_assignments(const fs::path& path, const std::vector<std::string>& sample_ids,
                       const std::vector<std::vector<int>>& labels);
[[nodiscard]] std::vector<std::vector<int>> read_assignments(
    const fs::path& path, const std::vector<std::string>& sample_ids);

/// Ground truth files written next to a simulated dataset.
void save_truth(const fs::path& dir, const sim::GroundTruth& truth, const Dataset& data);

struct LoadedTruth {
  std::vector<std::string> sample_ids;
  Matrix z;
  std::vector<std::string> structured_names;
  std::vector<std::vector<std::vector<int>>> xi;  // per structured view
  std::vector<Matrix> sigma0;
  std::vector<Matrix> mu_link;
};
[[nodiscard]] LoadedTruth load_truth(const fs::path& dir);

/// Feature CSV for supervised rotation: header "id,<names...>", a second
/// row "kind,<numeric|binary...>", then one row per sample.
[[nodiscard]] rotation::FeatureSet read_features(const fs::path& path,
                                                 const std::vector<std::string>& sample_ids);

[[nodiscard]] std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

/// Round-trip decimal formatting of a double.
[[nodiscard]] std::string format_double(double v);

}  // namespace factm::io

#endif  // FACTM_IO_HPP
