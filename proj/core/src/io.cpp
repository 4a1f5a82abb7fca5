#include "factm/io.hpp"

#include "factm/state_codec.hpp"
#include "factm/validate.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace factm::io {

using json = nlohmann::json;

namespace {

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  if (first < last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(where(path, line) + "cannot parse number '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s, const fs::path& path, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(where(path, line) + "cannot parse integer '" + s + "'");
  }
  return v;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<std::vector<int>> argmax_per_sample(const std::vector<Matrix>& phi) {
  std::vector<std::vector<int>> out;
  for (const Matrix& p : phi) {
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      Eigen::Index best = 0;
      p.row(i).maxCoeff(&best);
      labels.push_back(static_cast<int>(best));
    }
    out.push_back(std::move(labels));
  }
  return out;
}

SimpleView read_simple_view(const fs::path& path, const std::string& name,
                            std::vector<std::string>& ids) {
  LabeledMatrix m = read_matrix_csv(path);
  SimpleView view;
  view.name = name;
  view.feature_names = std::move(m.col_names);
  view.data = std::move(m.values);
  ids = std::move(m.row_names);
  return view;
}

StructuredView read_structured_view(const fs::path& path, const std::string& name, int vocab,
                                    std::vector<std::string>& ids, bool ids_fixed) {
  const auto lines = read_lines(path);
  std::unordered_map<std::string, int> sample_of;
  for (std::size_t i = 0; i < ids.size(); ++i) sample_of[ids[i]] = static_cast<int>(i);

  // sample -> sentence -> token -> count
  std::vector<std::map<long long, std::map<int, double>>> docs(ids.size());
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (ln == 0 && !fields.empty() && fields[0] == "sample_id") continue;
    if (fields.size() != 4) {
      throw ParseError(where(path, ln + 1) + "expected 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    auto it = sample_of.find(fields[0]);
    if (it == sample_of.end()) {
      if (ids_fixed) throw ParseError(where(path, ln + 1) + "unknown sample id '" + fields[0] + "'");
      it = sample_of.emplace(fields[0], static_cast<int>(ids.size())).first;
      ids.push_back(fields[0]);
      docs.emplace_back();
    }
    const long long sentence = parse_int(fields[1], path, ln + 1);
    const long long token = parse_int(fields[2], path, ln + 1);
    const double count = parse_double(fields[3], path, ln + 1);
    if (sentence < 0) throw ParseError(where(path, ln + 1) + "negative sentence index");
    if (token < 0 || token >= vocab) {
      throw ParseError(where(path, ln + 1) + "token index " + fields[2] +
                       " outside vocabulary of size " + std::to_string(vocab));
    }
    if (!(count >= 0.0) || !std::isfinite(count)) {
      throw ParseError(where(path, ln + 1) + "count must be a non-negative number");
    }
    auto& tokens = docs[it->second][sentence];
    if (!tokens.emplace(static_cast<int>(token), count).second) {
      throw ParseError(where(path, ln + 1) + "duplicate token in sentence");
    }
  }

  StructuredView view;
  view.name = name;
  view.vocab_size = vocab;
  view.documents.resize(ids.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].empty()) continue;
    const auto n_sentences = static_cast<std::size_t>(docs[i].rbegin()->first + 1);
    view.documents[i].resize(n_sentences);
    for (const auto& [sentence, tokens] : docs[i]) {
      Sentence& out = view.documents[i][static_cast<std::size_t>(sentence)];
      for (const auto& [index, count] : tokens) out.push_back({index, count});
    }
  }
  return view;
}

void write_structured_view(const fs::path& path, const StructuredView& view,
                           const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "sample_id\tsentence_index\ttoken_index\tcount\n";
  for (std::size_t i = 0; i < view.documents.size(); ++i) {
    for (std::size_t j = 0; j < view.documents[i].size(); ++j) {
      for (const Token& tok : view.documents[i][j]) {
        out << ids[i] << '\t' << j << '\t' << tok.index << '\t' << format_double(tok.count) << '\n';
      }
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& target, std::set<std::string>& seen) {
  if (!j.contains(key)) return;
  seen.insert(key);
  target = j.at(key).get<T>();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_matrix_csv(const fs::path& path, const LabeledMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto cols = m.col_names.empty() ? numbered("v", m.values.cols()) : m.col_names;
  const auto rows = m.row_names.empty() ? numbered("r", m.values.rows()) : m.row_names;
  out << "id," << join(cols, ',') << '\n';
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    out << rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) out << ',' << format_double(m.values(i, j));
    out << '\n';
  }
}

LabeledMatrix read_matrix_csv(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ParseError(path.string() + ": empty file");
  LabeledMatrix m;
  auto header = split(lines[0], ',');
  if (header.empty()) throw ParseError(where(path, 1) + "missing header");
  m.col_names.assign(header.begin() + 1, header.end());
  const auto cols = static_cast<Eigen::Index>(m.col_names.size());

  std::vector<std::vector<double>> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto fields = split(lines[ln], ',');
    if (static_cast<Eigen::Index>(fields.size()) != cols + 1) {
      throw ParseError(where(path, ln + 1) + "expected " + std::to_string(cols + 1) +
                       " fields, got " + std::to_string(fields.size()));
    }
    m.row_names.push_back(fields[0]);
    std::vector<double> row;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::string& f = fields[static_cast<std::size_t>(j + 1)];
      row.push_back(f.empty() || f == "NA" ? std::numeric_limits<double>::quiet_NaN()
                                           : parse_double(f, path, ln + 1));
    }
    rows.push_back(std::move(row));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m.values(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  return m;
}

Dataset load_dataset(const fs::path& manifest) {
  json j;
  try {
    j = json::parse(read_text(manifest));
  } catch (const json::parse_error& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
  const fs::path base = manifest.parent_path();
  Dataset data;
  std::vector<std::string> ids;
  bool have_ids = false;
  try {
    for (const auto& entry : j.value("simple_views", json::array())) {
      const auto name = entry.at("name").get<std::string>();
      std::vector<std::string> view_ids;
      data.simple_views.push_back(
          read_simple_view(base / entry.at("path").get<std::string>(), name, view_ids));
      if (!have_ids) {
        ids = std::move(view_ids);
        have_ids = true;
      } else if (view_ids != ids) {
        throw ValidationError("sample ids of simple view '" + name +
                              "' do not match those of the first view");
      }
    }
    for (const auto& entry : j.value("structured_views", json::array())) {
      const auto name = entry.at("name").get<std::string>();
      const int vocab = entry.at("vocab_size").get<int>();
      if (vocab < 1) throw ValidationError("structured view '" + name + "': vocab_size < 1");
      data.structured_views.push_back(read_structured_view(
          base / entry.at("path").get<std::string>(), name, vocab, ids, have_ids));
      have_ids = true;
    }
  } catch (const json::exception& e) {
    throw ParseError(manifest.string() + ": " + e.what());
  }
  // Structured views read before all ids were known are padded here.
  for (auto& view : data.structured_views) view.documents.resize(ids.size());
  data.n_samples = static_cast<int>(ids.size());
  data.sample_ids = std::move(ids);

  Hyperparams hp;
  hp.n_topics.assign(data.structured_views.size(), 1);
  require_valid(data, hp);
  return data;
}

void save_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  const auto ids = data.sample_ids.empty() ? numbered("s", data.n_samples) : data.sample_ids;
  json manifest;
  manifest["simple_views"] = json::array();
  manifest["structured_views"] = json::array();
  for (const auto& view : data.simple_views) {
    const std::string file = view.name + ".csv";
    write_matrix_csv(dir / file, {ids, view.feature_names, view.data});
    manifest["simple_views"].push_back({{"name", view.name}, {"path", file}});
  }
  for (const auto& view : data.structured_views) {
    const std::string file = view.name + ".tsv";
    write_structured_view(dir / file, view, ids);
    manifest["structured_views"].push_back(
        {{"name", view.name}, {"path", file}, {"vocab_size", view.vocab_size}});
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

RunConfig parse_config(const std::string& text, int n_structured_views) {
  RunConfig rc;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  std::set<std::string> seen;
  try {
    Hyperparams& hp = rc.hp;
    FitConfig& fc = rc.fit;
    read_field(j, "n_factors", hp.n_factors, seen);
    read_field(j, "link_precision", hp.link_precision, seen);
    read_field(j, "a0_alpha", hp.a0_alpha, seen);
    read_field(j, "b0_alpha", hp.b0_alpha, seen);
    read_field(j, "a0_theta", hp.a0_theta, seen);
    read_field(j, "b0_theta", hp.b0_theta, seen);
    read_field(j, "a0_tau", hp.a0_tau, seen);
    read_field(j, "b0_tau", hp.b0_tau, seen);
    read_field(j, "a0_alphabar", hp.a0_alphabar, seen);
    read_field(j, "b0_alphabar", hp.b0_alphabar, seen);
    read_field(j, "alpha0_beta", hp.alpha0_beta, seen);
    read_field(j, "link_enabled", hp.link_enabled, seen);
    read_field(j, "max_sweeps", fc.max_sweeps, seen);
    read_field(j, "elbo_rel_tol", fc.elbo_rel_tol, seen);
    read_field(j, "inner_opt_max_iters", fc.inner_opt_max_iters, seen);
    read_field(j, "inner_opt_grad_tol", fc.inner_opt_grad_tol, seen);
    read_field(j, "seed", fc.seed, seen);
    read_field(j, "n_restarts", fc.n_restarts, seen);
    read_field(j, "init_topic_noise", fc.init_topic_noise, seen);
    read_field(j, "record_phase_elbo", fc.record_phase_elbo, seen);
    read_field(j, "threads", fc.threads, seen);
    if (j.contains("n_topics")) {
      seen.insert("n_topics");
      const auto& t = j.at("n_topics");
      if (t.is_array()) {
        hp.n_topics = t.get<std::vector<int>>();
        if (hp.n_topics.size() != static_cast<std::size_t>(n_structured_views)) {
          throw ValidationError("config: n_topics lists " + std::to_string(hp.n_topics.size()) +
                                " values for " + std::to_string(n_structured_views) +
                                " structured views");
        }
      } else {
        hp.n_topics.assign(static_cast<std::size_t>(n_structured_views), t.get<int>());
      }
    } else {
      hp.n_topics.assign(static_cast<std::size_t>(n_structured_views), 10);
    }
    if (j.contains("update_schedule")) {
      seen.insert("update_schedule");
      fc.update_schedule.clear();
      for (const auto& name : j.at("update_schedule")) {
        try {
          fc.update_schedule.push_back(parse_phase(name.get<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw ValidationError(std::string("config: ") + e.what());
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  for (const auto& [key, value] : j.items()) {
    if (!seen.count(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  return rc;
}

RunConfig load_config(const fs::path& path, int n_structured_views) {
  try {
    return parse_config(read_text(path), n_structured_views);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_state(const fs::path& path, const VariationalState& state) {
  write_text(path, encode_state(state));
}

VariationalState read_state(const fs::path& path) {
  try {
    return decode_state(read_text(path));
  } catch (const ParseError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string report_json(const FitReport& report, const Dataset& data, const Hyperparams& hp,
                        const FitConfig& cfg) {
  json j;
  j["converged"] = report.converged;
  j["sweeps_used"] = report.sweeps_used;
  j["best_restart"] = report.best_restart;
  j["restart_elbos"] = report.restart_elbos;
  j["eta_nonconverged"] = report.eta_nonconverged;
  j["factor_order"] = report.factor_order;
  j["wall_time_per_sweep"] = report.wall_time_per_sweep;
  json trace = json::array();
  for (const auto& p : report.elbo_trace) trace.push_back({{"sweep", p.sweep}, {"elbo", p.elbo}});
  j["elbo_trace"] = trace;
  if (!report.phase_trace.empty()) {
    json phases = json::array();
    for (const auto& p : report.phase_trace) {
      phases.push_back(
          {{"sweep", p.sweep}, {"phase", std::string(phase_name(p.phase))}, {"elbo", p.elbo}});
    }
    j["phase_trace"] = phases;
  }
  json ve = json::object();
  Eigen::Index row = 0;
  const auto add_row = [&](const std::string& name) {
    if (row < report.variance_explained.rows()) {
      std::vector<double> v(report.variance_explained.cols());
      for (Eigen::Index k = 0; k < report.variance_explained.cols(); ++k)
        v[static_cast<std::size_t>(k)] = report.variance_explained(row, k);
      ve[name] = v;
    }
    ++row;
  };
  for (const auto& v : data.simple_views) add_row(v.name);
  for (const auto& v : data.structured_views) add_row(v.name);
  j["variance_explained"] = ve;

  j["hyperparams"] = {{"n_factors", hp.n_factors},
                      {"n_topics", hp.n_topics},
                      {"link_precision", hp.link_precision},
                      {"a0_alpha", hp.a0_alpha},
                      {"b0_alpha", hp.b0_alpha},
                      {"a0_theta", hp.a0_theta},
                      {"b0_theta", hp.b0_theta},
                      {"a0_tau", hp.a0_tau},
                      {"b0_tau", hp.b0_tau},
                      {"a0_alphabar", hp.a0_alphabar},
                      {"b0_alphabar", hp.b0_alphabar},
                      {"alpha0_beta", hp.alpha0_beta},
                      {"link_enabled", hp.link_enabled}};
  std::vector<std::string> schedule;
  for (Phase p : cfg.update_schedule) schedule.emplace_back(phase_name(p));
  j["config"] = {{"max_sweeps", cfg.max_sweeps},
                 {"elbo_rel_tol", cfg.elbo_rel_tol},
                 {"inner_opt_max_iters", cfg.inner_opt_max_iters},
                 {"inner_opt_grad_tol", cfg.inner_opt_grad_tol},
                 {"seed", cfg.seed},
                 {"n_restarts", cfg.n_restarts},
                 {"update_schedule", schedule},
                 {"init_topic_noise", cfg.init_topic_noise}};
  return j.dump(2) + "\n";
}

void write_assignments(const fs::path& path, const std::vector<std::string>& sample_ids,
                       const std::vector<std::vector<int>>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "sample_id\tsentence_index\ttopic\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels[i].size(); ++j) {
      out << sample_ids[i] << '\t' << j << '\t' << labels[i][j] << '\n';
    }
  }
}

std::vector<std::vector<int>> read_assignments(const fs::path& path,
                                               const std::vector<std::string>& sample_ids) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < sample_ids.size(); ++i) index[sample_ids[i]] = i;
  std::vector<std::map<long long, int>> rows(sample_ids.size());
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = split(lines[ln], '\t');
    if (ln == 0 && !f.empty() && f[0] == "sample_id") continue;
    if (f.size() != 3) throw ParseError(where(path, ln + 1) + "expected 3 fields");
    const auto it = index.find(f[0]);
    if (it == index.end()) throw ParseError(where(path, ln + 1) + "unknown sample id '" + f[0] + "'");
    rows[it->second][parse_int(f[1], path, ln + 1)] = static_cast<int>(parse_int(f[2], path, ln + 1));
  }
  std::vector<std::vector<int>> out(sample_ids.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    long long expected = 0;
    for (const auto& [sentence, topic] : rows[i]) {
      if (sentence != expected++) {
        throw ParseError(path.string() + ": sentences of sample '" + sample_ids[i] +
                         "' are not numbered 0..n-1");
      }
      out[i].push_back(topic);
    }
  }
  return out;
}

void save_fit(const fs::path& dir, const VariationalState& state, const FitReport& report,
              const Dataset& data, const Hyperparams& hp, const FitConfig& cfg) {
  fs::create_directories(dir);
  const auto ids = data.sample_ids.empty() ? numbered("s", data.n_samples) : data.sample_ids;
  const auto factors = numbered("factor", state.n_factors());
  write_matrix_csv(dir / "factors.csv", {ids, factors, state.z_mean});
  for (std::size_t m = 0; m < state.simple.size(); ++m) {
    const auto& view = data.simple_views[m];
    const auto names = view.feature_names.empty() ? numbered("f", view.data.cols()) : view.feature_names;
    write_matrix_csv(dir / ("loadings_" + view.name + ".csv"),
                     {names, factors, state.simple[m].loading_mean()});
  }
  for (std::size_t s = 0; s < state.structured.size(); ++s) {
    const auto& view = data.structured_views[s];
    const auto& st = state.structured[s];
    const auto topics = numbered("topic", st.n_topics());
    write_matrix_csv(dir / ("loadings_" + view.name + ".csv"), {topics, factors, st.wbar_mean});
    const Matrix beta_mean =
        st.topic_dirichlet.array().colwise() / st.topic_dirichlet.rowwise().sum().array();
    write_matrix_csv(dir / ("topics_" + view.name + ".csv"),
                     {topics, numbered("w", view.vocab_size), beta_mean});
    write_matrix_csv(dir / ("eta_" + view.name + ".csv"), {ids, topics, st.eta_mean});
    write_matrix_csv(dir / ("mu_link_" + view.name + ".csv"), {ids, topics, st.link_mean});
    write_matrix_csv(dir / ("sigma0_" + view.name + ".csv"), {topics, topics, st.sigma0});
    write_matrix_csv(dir / ("mu0_" + view.name + ".csv"), {topics, {"mu0"}, Matrix(st.mu0)});
    write_assignments(dir / ("assignments_" + view.name + ".tsv"), ids, argmax_per_sample(st.phi));
  }
  write_text(dir / "report.json", report_json(report, data, hp, cfg));
  write_state(dir / "state.bin", state);
}

void save_truth(const fs::path& dir, const sim::GroundTruth& truth, const Dataset& data) {
  fs::create_directories(dir);
  const auto ids = data.sample_ids.empty() ? numbered("s", data.n_samples) : data.sample_ids;
  const auto factors = numbered("factor", truth.z.cols());
  write_matrix_csv(dir / "truth_factors.csv", {ids, factors, truth.z});
  json index;
  index["simple_views"] = json::array();
  index["structured_views"] = json::array();
  for (std::size_t m = 0; m < truth.w.size(); ++m) {
    const auto& view = data.simple_views[m];
    write_matrix_csv(dir / ("truth_loadings_" + view.name + ".csv"),
                     {view.feature_names, factors, truth.w[m]});
    index["simple_views"].push_back(view.name);
  }
  for (std::size_t s = 0; s < truth.structured.size(); ++s) {
    const auto& name = data.structured_views[s].name;
    const auto& st = truth.structured[s];
    const auto topics = numbered("topic", st.beta.rows());
    write_matrix_csv(dir / ("truth_loadings_" + name + ".csv"), {topics, factors, st.wbar});
    write_matrix_csv(dir / ("truth_mu_link_" + name + ".csv"), {ids, topics, st.mu_link});
    write_matrix_csv(dir / ("truth_eta_" + name + ".csv"), {ids, topics, st.eta});
    write_matrix_csv(dir / ("truth_topics_" + name + ".csv"),
                     {topics, numbered("w", st.beta.cols()), st.beta});
    write_matrix_csv(dir / ("truth_mu0_" + name + ".csv"), {topics, {"mu0"}, Matrix(st.mu0)});
    write_matrix_csv(dir / ("truth_sigma0_" + name + ".csv"), {topics, topics, st.sigma0});
    write_assignments(dir / ("truth_assignments_" + name + ".tsv"), ids, st.xi);
    index["structured_views"].push_back(name);
  }
  write_text(dir / "truth.json", index.dump(2) + "\n");
}

LoadedTruth load_truth(const fs::path& dir) {
  LoadedTruth t;
  json index;
  try {
    index = json::parse(read_text(dir / "truth.json"));
    t.structured_names = index.at("structured_views").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError((dir / "truth.json").string() + ": " + e.what());
  }
  LabeledMatrix z = read_matrix_csv(dir / "truth_factors.csv");
  t.sample_ids = z.row_names;
  t.z = z.values;
  for (const auto& name : t.structured_names) {
    t.xi.push_back(read_assignments(dir / ("truth_assignments_" + name + ".tsv"), t.sample_ids));
    t.sigma0.push_back(read_matrix_csv(dir / ("truth_sigma0_" + name + ".csv")).values);
    t.mu_link.push_back(read_matrix_csv(dir / ("truth_mu_link_" + name + ".csv")).values);
  }
  return t;
}

rotation::FeatureSet read_features(const fs::path& path,
                                   const std::vector<std::string>& sample_ids) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw ParseError(path.string() + ": expected header and kind rows");
  const auto header = split(lines[0], ',');
  const auto kinds = split(lines[1], ',');
  if (header.size() < 2 || kinds.size() != header.size() || kinds[0] != "kind") {
    throw ParseError(where(path, 2) + "second row must be 'kind' followed by one kind per feature");
  }
  rotation::FeatureSet features(header.size() - 1);
  for (std::size_t p = 0; p < features.size(); ++p) {
    features[p].name = header[p + 1];
    if (kinds[p + 1] == "numeric") {
      features[p].kind = rotation::FeatureKind::numeric;
    } else if (kinds[p + 1] == "binary") {
      features[p].kind = rotation::FeatureKind::binary;
    } else {
      throw ParseError(where(path, 2) + "unknown feature kind '" + kinds[p + 1] + "'");
    }
    features[p].values = Vector::Constant(static_cast<Eigen::Index>(sample_ids.size()),
                                          std::numeric_limits<double>::quiet_NaN());
  }
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < sample_ids.size(); ++i) index[sample_ids[i]] = static_cast<Eigen::Index>(i);
  std::vector<bool> filled(sample_ids.size(), false);
  for (std::size_t ln = 2; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = split(lines[ln], ',');
    if (f.size() != header.size()) throw ParseError(where(path, ln + 1) + "wrong field count");
    const auto it = index.find(f[0]);
    if (it == index.end()) throw ParseError(where(path, ln + 1) + "unknown sample id '" + f[0] + "'");
    filled[static_cast<std::size_t>(it->second)] = true;
    for (std::size_t p = 0; p < features.size(); ++p) {
      features[p].values(it->second) = parse_double(f[p + 1], path, ln + 1);
    }
  }
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) throw ValidationError(path.string() + ": no row for sample '" + sample_ids[i] + "'");
  }
  return features;
}

}  // namespace factm::io
