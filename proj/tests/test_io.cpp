#include "factm/io.hpp"

#include "factm/inference.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <limits>

namespace factm::io {
namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("factm_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

TEST(Io, MatrixCsvRoundTripsExactly) {
  TempDir tmp;
  LabeledMatrix m{{"s1", "s2"}, {"a", "b"}, Matrix(2, 2)};
  m.values << 0.1, -1.0 / 3.0, 1e-300, std::numeric_limits<double>::max();
  write_matrix_csv(tmp.path() / "m.csv", m);
  const LabeledMatrix back = read_matrix_csv(tmp.path() / "m.csv");
  EXPECT_EQ(back.row_names, m.row_names);
  EXPECT_EQ(back.col_names, m.col_names);
  EXPECT_EQ(back.values, m.values);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 7.0, -2.5e-17, 123456789.125}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

void write_manifest(const fs::path& dir, int vocab) {
  write(dir / "manifest.json",
        R"({"simple_views":[{"name":"v","path":"v.csv"}],"structured_views":[{"name":"t","path":"t.tsv","vocab_size":)" +
            std::to_string(vocab) + "}]}");
  write(dir / "v.csv", "id,x,y\ns0,1,2\ns1,3,4\ns2,5,7\n");
}

TEST(Io, FractionalCountsAreAccepted) {
  TempDir tmp;
  write_manifest(tmp.path(), 8);
  write(tmp.path() / "t.tsv", "sample_id\tsentence_index\ttoken_index\tcount\ns0\t0\t1\t1\ns1\t0\t5\t2.5\ns2\t0\t3\t1\n");
  const Dataset d = load_dataset(tmp.path() / "manifest.json");
  ASSERT_EQ(d.n_samples, 3);
  EXPECT_EQ(d.structured_views[0].documents[1][0][0].index, 5);
  EXPECT_EQ(d.structured_views[0].documents[1][0][0].count, 2.5);
  EXPECT_EQ(d.simple_views[0].data(2, 1), 7.0);
}

TEST(Io, OutOfVocabularyTokenNamesTheRow) {
  TempDir tmp;
  write_manifest(tmp.path(), 4);
  write(tmp.path() / "t.tsv", "s0\t0\t1\t1\ns1\t0\t4\t1\ns2\t0\t3\t1\n");
  try {
    (void)load_dataset(tmp.path() / "manifest.json");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("t.tsv:2"), std::string::npos) << e.what();
  }
}

TEST(Io, MismatchedSampleIdsAreRejected) {
  TempDir tmp;
  write_manifest(tmp.path(), 8);
  write(tmp.path() / "t.tsv", "s0\t0\t1\t1\ns9\t0\t2\t1\n");
  EXPECT_THROW((void)load_dataset(tmp.path() / "manifest.json"), ValidationError);
}

TEST(Io, DatasetRoundTrips) {
  TempDir tmp;
  testing::SmallShape shape;
  shape.fractional_counts = true;
  const Dataset d = testing::random_dataset(shape, 3);
  save_dataset(d, tmp.path());
  const Dataset back = load_dataset(tmp.path() / "manifest.json");
  EXPECT_EQ(back.sample_ids, d.sample_ids);
  EXPECT_EQ(back.simple_views[0].data, d.simple_views[0].data);
  const auto& a = d.structured_views[0].documents;
  const auto& b = back.structured_views[0].documents;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    ASSERT_EQ(a[n].size(), b[n].size());
    for (std::size_t i = 0; i < a[n].size(); ++i) {
      ASSERT_EQ(a[n][i].size(), b[n][i].size());
      for (std::size_t j = 0; j < a[n][i].size(); ++j) {
        EXPECT_EQ(a[n][i][j].index, b[n][i][j].index);
        EXPECT_EQ(a[n][i][j].count, b[n][i][j].count);
      }
    }
  }
}

TEST(Io, ConfigParsing) {
  const RunConfig rc = parse_config(
      R"({"n_factors":4,"n_topics":6,"link_precision":2,"max_sweeps":0,"seed":7,
          "update_schedule":["z","w","xi"],"link_enabled":false})",
      2);
  EXPECT_EQ(rc.hp.n_factors, 4);
  EXPECT_EQ(rc.hp.n_topics, (std::vector<int>{6, 6}));
  EXPECT_EQ(rc.hp.link_precision, 2.0);
  EXPECT_FALSE(rc.hp.link_enabled);
  EXPECT_EQ(rc.fit.max_sweeps, 0);
  EXPECT_EQ(rc.fit.seed, 7u);
  EXPECT_EQ(rc.fit.update_schedule, (std::vector<Phase>{Phase::z, Phase::w, Phase::xi}));
  EXPECT_EQ(parse_config(R"({"n_topics":[3,5]})", 2).hp.n_topics, (std::vector<int>{3, 5}));
  EXPECT_THROW((void)parse_config(R"({"bogus":1})", 1), ValidationError);
  EXPECT_THROW((void)parse_config(R"({"n_topics":[3]})", 2), ValidationError);
  EXPECT_THROW((void)parse_config("{", 1), ValidationError);
}

TEST(Io, StateFileRoundTrips) {
  TempDir tmp;
  const Dataset d = testing::random_dataset({}, 4);
  const VariationalState s = testing::warmed_state(d, testing::small_hyperparams(2, {3}), 1, 1);
  write_state(tmp.path() / "state.bin", s);
  const VariationalState back = read_state(tmp.path() / "state.bin");
  EXPECT_EQ(back.z_mean, s.z_mean);
  EXPECT_EQ(back.structured[0].phi[3], s.structured[0].phi[3]);
  EXPECT_EQ(back.simple[0].tau_rate, s.simple[0].tau_rate);
}

TEST(Io, FeaturesFileWithKindRow) {
  TempDir tmp;
  write(tmp.path() / "f.csv", "id,age,group\nkind,numeric,binary\ns1,3.5,1\ns0,2,0\n");
  const auto f = read_features(tmp.path() / "f.csv", {"s0", "s1"});
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0].values(0), 2.0);
  EXPECT_EQ(f[1].kind, rotation::FeatureKind::binary);
  EXPECT_EQ(f[1].values(1), 1.0);
}

}  // namespace
}  // namespace factm::io
