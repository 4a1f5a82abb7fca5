#include "cli.hpp"

#include "factm/evaluation.hpp"
#include "factm/inference.hpp"
#include "factm/io.hpp"
#include "factm/rotation.hpp"
#include "factm/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace factm::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct SimulateArgs {
  int scenario = 0;
  int level = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::optional<int> n_samples;
  std::optional<int> sentences;
};

struct FitArgs {
  std::string data;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> restarts;
  std::string init_state;
};

struct RotateArgs {
  std::string state;
  std::string data;
  std::string features;
  std::string out;
};

struct EvaluateArgs {
  std::string truth;
  std::string fit;
  std::string out;
};

int threads_from_env() {
  if (const char* env = std::getenv("FACTM_THREADS")) {
    try {
      return std::max(0, std::stoi(env));
    } catch (const std::exception&) {
      return 0;
    }
  }
  return 0;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  sim::ScenarioSpec spec = sim::scenario(a.scenario, a.level);
  if (a.n_samples) spec.n_samples = *a.n_samples;
  if (a.sentences) spec.sentences_per_doc = *a.sentences;
  const sim::Simulated s = sim::generate(spec, a.seed);
  io::save_dataset(s.data, a.out);
  io::save_truth(a.out, s.truth, s.data);
  out << "wrote dataset and ground truth to " << a.out << '\n';
  return kOk;
}

int cmd_fit(const FitArgs& a, int threads, std::ostream& out, std::ostream& err) {
  const Dataset data = io::load_dataset(a.data);
  io::RunConfig rc = a.config.empty()
                         ? io::parse_config("{}", static_cast<int>(data.structured_views.size()))
                         : io::load_config(a.config, static_cast<int>(data.structured_views.size()));
  if (a.seed) rc.fit.seed = *a.seed;
  if (a.restarts) rc.fit.n_restarts = *a.restarts;
  if (threads > 0) rc.fit.threads = threads;

  std::optional<VariationalState> start;
  if (!a.init_state.empty()) start = io::read_state(a.init_state);
  const FitResult result = fit(data, rc.hp, rc.fit, start ? &*start : nullptr);
  io::save_fit(a.out, result.state, result.report, data, rc.hp, rc.fit);
  if (result.report.eta_nonconverged > 0) {
    err << "warning: " << result.report.eta_nonconverged
        << " inner eta optimizations stopped at the iteration limit\n";
  }
  const double elbo =
      result.report.elbo_trace.empty() ? 0.0 : result.report.elbo_trace.back().elbo;
  out << "sweeps: " << result.report.sweeps_used
      << (result.report.converged ? " (converged)" : "") << ", final ELBO: " << elbo << '\n';
  return kOk;
}

int cmd_rotate(const RotateArgs& a, std::ostream& out, std::ostream& err) {
  rotation::PointSummary summary;
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> row_names;
  const fs::path state_path(a.state);
  if (fs::is_directory(state_path)) {
    io::LabeledMatrix z = io::read_matrix_csv(state_path / "factors.csv");
    ids = z.row_names;
    summary.factors = z.values;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(state_path)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("loadings_", 0) == 0 && entry.path().extension() == ".csv") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      io::LabeledMatrix w = io::read_matrix_csv(f);
      summary.view_names.push_back(f.stem().string().substr(9));
      summary.loadings.push_back(w.values);
      row_names.push_back(w.row_names);
    }
  } else {
    if (a.data.empty()) throw ValidationError("rotate: --data is required with a state file");
    const Dataset data = io::load_dataset(a.data);
    const VariationalState state = io::read_state(state_path);
    if (state.n_samples() != data.n_samples) {
      throw ValidationError("rotate: state and data disagree on the sample count");
    }
    ids = data.sample_ids;
    summary = rotation::summarize(state, data);
    for (const auto& v : data.simple_views) row_names.push_back(v.feature_names);
    for (std::size_t s = 0; s < data.structured_views.size(); ++s) {
      std::vector<std::string> topics;
      for (int l = 0; l < state.structured[s].n_topics(); ++l) topics.push_back("topic" + std::to_string(l));
      row_names.push_back(topics);
    }
  }

  const rotation::FeatureSet features = io::read_features(a.features, ids);
  if (const auto problems = rotation::check_features(features, static_cast<int>(ids.size()));
      !problems.empty()) {
    throw ValidationError("rotate: " + problems.front());
  }
  const rotation::CrossCorrelation h = rotation::cross_correlation(summary.factors, features);
  for (int k : h.zero_variance) err << "warning: factor " << k << " has zero variance\n";
  const Matrix r = rotation::kabsch_rotation(h.h);
  const rotation::PointSummary rotated = rotation::apply_rotation(summary, r);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::vector<std::string> factor_names;
  for (Eigen::Index k = 0; k < r.cols(); ++k) factor_names.push_back("factor" + std::to_string(k));
  std::vector<std::string> feature_names = factor_names;
  for (std::size_t p = 0; p < features.size(); ++p) feature_names[p] = features[p].name;
  io::write_matrix_csv(dir / "cross_correlation.csv", {factor_names, feature_names, h.h});
  io::write_matrix_csv(dir / "rotation.csv", {factor_names, factor_names, r});
  io::write_matrix_csv(dir / "factors.csv", {ids, factor_names, rotated.factors});
  for (std::size_t v = 0; v < rotated.loadings.size(); ++v) {
    io::write_matrix_csv(dir / ("loadings_" + rotated.view_names[v] + ".csv"),
                         {row_names[v], factor_names, rotated.loadings[v]});
  }
  out << "wrote rotated factors and loadings to " << a.out << '\n';
  return kOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const io::LoadedTruth truth = io::load_truth(a.truth);
  const fs::path fit_dir(a.fit);
  const io::LabeledMatrix z = io::read_matrix_csv(fit_dir / "factors.csv");
  if (z.row_names != truth.sample_ids) {
    throw ValidationError("evaluate: fitted and true sample ids differ");
  }
  const eval::FactorMatch fm = eval::match_factors(truth.z, z.values);
  for (const auto& w : fm.warnings) err << "warning: " << w << '\n';

  json metrics;
  metrics["mean_matched_spearman"] = fm.mean_abs_rho;
  metrics["factor_abs_spearman"] = fm.abs_rho;
  metrics["factor_matching"] = fm.true_to_est;
  metrics["topic_accuracy"] = nullptr;
  metrics["sigma0_frobenius_relative"] = nullptr;
  metrics["sigma0_frobenius_relative_scaled"] = nullptr;
  json views = json::object();
  for (std::size_t s = 0; s < truth.structured_names.size(); ++s) {
    const std::string& name = truth.structured_names[s];
    const auto est = io::read_assignments(fit_dir / ("assignments_" + name + ".tsv"), truth.sample_ids);
    const Matrix sigma0 = io::read_matrix_csv(fit_dir / ("sigma0_" + name + ".csv")).values;
    const int l_true = static_cast<int>(truth.sigma0[s].rows());
    const int l_est = static_cast<int>(sigma0.rows());
    const eval::TopicMatch tm =
        eval::match_topics(eval::flatten(truth.xi[s]), eval::flatten(est), l_true, l_est);
    json v;
    v["topic_accuracy"] = tm.accuracy;
    v["topic_matching"] = tm.true_to_est;
    if (l_true == l_est) {
      const Matrix aligned = eval::permute_symmetric(sigma0, tm.true_to_est);
      v["sigma0_frobenius_relative"] = eval::frobenius_relative(truth.sigma0[s], aligned, false);
      v["sigma0_frobenius_relative_scaled"] = eval::frobenius_relative(truth.sigma0[s], aligned, true);
    } else {
      err << "warning: view '" << name << "' has " << l_est << " fitted topics and " << l_true
          << " true topics; covariance errors skipped\n";
      v["sigma0_frobenius_relative"] = nullptr;
      v["sigma0_frobenius_relative_scaled"] = nullptr;
    }
    if (s == 0) {
      for (const char* key : {"topic_accuracy", "sigma0_frobenius_relative",
                              "sigma0_frobenius_relative_scaled"}) {
        metrics[key] = v[key];
      }
    }
    views[name] = v;
  }
  metrics["structured_views"] = views;
  const fs::path out_path(a.out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  io::write_text(out_path, metrics.dump(2) + "\n");
  out << "mean matched |rho|: " << fm.mean_abs_rho << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint factor analysis and correlated topic modelling"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores; env FACTM_THREADS)")
      ->check(CLI::NonNegativeNumber);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic dataset with ground truth");
  simulate->add_option("--scenario", sa.scenario, "Scenario id, 0 = baseline")->check(CLI::Range(0, 6));
  simulate->add_option("--level", sa.level, "Level within the scenario");
  simulate->add_option("--seed", sa.seed, "Random seed");
  simulate->add_option("--out", sa.out, "Output directory")->required();
  simulate->add_option("--samples", sa.n_samples, "Override the sample count")->check(CLI::PositiveNumber);
  simulate->add_option("--sentences", sa.sentences, "Override sentences per sample")
      ->check(CLI::PositiveNumber);

  FitArgs fa;
  auto* fitcmd = app.add_subcommand("fit", "Fit the model to a dataset");
  fitcmd->add_option("--data", fa.data, "Dataset manifest (JSON)")->required();
  fitcmd->add_option("--config", fa.config, "Model and fit configuration (JSON)");
  fitcmd->add_option("--out", fa.out, "Output directory")->required();
  fitcmd->add_option("--seed", fa.seed, "Seed of the first restart");
  fitcmd->add_option("--restarts", fa.restarts, "Number of restarts")->check(CLI::PositiveNumber);
  fitcmd->add_option("--init-state", fa.init_state, "Resume from a saved state.bin");

  RotateArgs ra;
  auto* rotate = app.add_subcommand("rotate", "Rotate fitted factors towards known features");
  rotate->add_option("--state", ra.state, "Fit output directory or state.bin")->required();
  rotate->add_option("--data", ra.data, "Dataset manifest (needed with state.bin)");
  rotate->add_option("--features", ra.features, "Feature CSV with a kind row")->required();
  rotate->add_option("--out", ra.out, "Output directory")->required();

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Compare a fit with simulation ground truth");
  evaluate->add_option("--truth", ea.truth, "Simulation output directory")->required();
  evaluate->add_option("--fit", ea.fit, "Fit output directory")->required();
  evaluate->add_option("--out", ea.out, "Metrics JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  if (threads == 0) threads = threads_from_env();

  try {
    if (*simulate) return cmd_simulate(sa, out);
    if (*fitcmd) return cmd_fit(fa, threads, out, err);
    if (*rotate) return cmd_rotate(ra, out, err);
    if (*evaluate) return cmd_evaluate(ea, out, err);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace factm::cli
