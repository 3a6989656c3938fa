#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "amagold/dataio.hpp"
#include "amagold/errors.hpp"

using namespace amagold;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST(ParseDataset, DenseRows) {
  const Dataset d = parse_dataset("+1 0.5 2\n-1 1.5 -2\n");
  ASSERT_EQ(d.size(), 2u);
  ASSERT_EQ(d.num_features(), 2u);
  EXPECT_EQ(d.labels[0], 1.0);
  EXPECT_EQ(d.labels[1], -1.0);
  EXPECT_EQ(d.features(1, 0), 1.5);
  EXPECT_EQ(d.features(1, 1), -2.0);
  EXPECT_FALSE(d.standardized);
}

TEST(ParseDataset, SparseRowsCommentsAndZeroOneLabels) {
  const Dataset d = parse_dataset("# header\n\n1 1:1 3:2.5\n0 2:-1\n");
  ASSERT_EQ(d.size(), 2u);
  ASSERT_EQ(d.num_features(), 3u);
  EXPECT_EQ(d.features(0, 0), 1.0);
  EXPECT_EQ(d.features(0, 1), 0.0);
  EXPECT_EQ(d.features(0, 2), 2.5);
  EXPECT_EQ(d.features(1, 1), -1.0);
  EXPECT_EQ(d.labels[1], -1.0);
}

TEST(ParseDataset, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_dataset(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("1 1 2\n1 1\n"), 2u);
  EXPECT_EQ(line_of("1 1 2\n# c\n2 1 2\n"), 3u);
  EXPECT_EQ(line_of("1 abc\n"), 1u);
  EXPECT_EQ(line_of("1 1:2 3\n"), 1u);
  EXPECT_EQ(line_of("1 0:2\n"), 1u);
  EXPECT_EQ(line_of("1 1:1\n1 3:1 2:1\n"), 2u);
  EXPECT_THROW(parse_dataset("# nothing\n"), ParseError);
  EXPECT_THROW(load_dataset("/nonexistent/data.txt"), IoError);
}

TEST(Standardize, ZeroMeanUnitVariance) {
  Dataset d = parse_dataset("1 1 10\n-1 2 20\n1 3 30\n-1 4 45\n");
  standardize(d);
  EXPECT_TRUE(d.standardized);
  EXPECT_FALSE(d.constant_column_warning);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const auto col = d.features.col(j);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / 3.0;
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(var, 1.0, 1e-10);
  }
  EXPECT_DOUBLE_EQ(d.column_means[0], 2.5);
}

TEST(Standardize, ConstantColumnWarns) {
  Dataset d = parse_dataset("1 5 1\n-1 5 2\n");
  standardize(d);
  EXPECT_TRUE(d.constant_column_warning);
  EXPECT_EQ(d.column_scales[0], 1.0);
  EXPECT_EQ(d.features(0, 0), 0.0);
}

TEST(AppendIntercept, AddsOnesColumn) {
  Dataset d = parse_dataset("1 2\n-1 3\n");
  append_intercept(d);
  ASSERT_EQ(d.num_features(), 2u);
  EXPECT_TRUE(d.has_intercept);
  EXPECT_EQ(d.features(0, 1), 1.0);
  EXPECT_EQ(d.features(1, 1), 1.0);
}

TEST(BundledData, Shapes) {
  const DatasetOptions opts{true, true};
  const Dataset heart = load_dataset(std::string(AMAGOLD_DATA_DIR) + "/heart.txt", opts);
  EXPECT_EQ(heart.size(), 270u);
  EXPECT_EQ(heart.num_features(), 14u);
  const Dataset aus = load_dataset(std::string(AMAGOLD_DATA_DIR) + "/australian.txt", opts);
  EXPECT_EQ(aus.size(), 690u);
  EXPECT_EQ(aus.num_features(), 15u);
  EXPECT_NO_THROW(aus.validate());
}

TEST(Samples, RoundTripIsExact) {
  Matrix values(3, 2);
  values << 0.1, -1e-300, 1.0 / 3.0, 12345.678901234567, -0.0, 5e300;
  const std::vector<std::uint64_t> rounds{10, 11, 12};
  const auto path = temp_path("amagold_samples.csv");
  write_samples(rounds, values, path);
  const SampleTable t = read_samples(path);
  EXPECT_EQ(t.rounds, rounds);
  EXPECT_EQ(t.values, values);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "round,theta_0,theta_1");
}

TEST(Samples, HeaderOnlyAndMalformed) {
  const auto path = temp_path("amagold_empty.csv");
  write_text_file(path, "round,theta_0\n");
  const SampleTable t = read_samples(path);
  EXPECT_TRUE(t.rounds.empty());
  EXPECT_EQ(t.values.rows(), 0);
  write_text_file(path, "round,theta_0\n1,2,3\n");
  EXPECT_THROW(read_samples(path), ParseError);
}

TEST(RunReport, RoundTripIsByteIdentical) {
  RunReport r;
  r.config = "{\"a\":1}";
  r.experiment = "run";
  r.sampler = "amagold";
  r.model = "dist1";
  r.seed = 42;
  r.rounds = 1000;
  r.burn_in = 100;
  r.step_size = 0.15;
  r.accepted = 700;
  r.rejected = 300;
  r.acceptance_rate = 0.7;
  r.mean_acceptance_probability = 0.6912345678901234;
  r.wall_clock_seconds = 1.25;
  r.metrics = {{"kl", 0.0123}, {"mean_0", -1e-17}};
  r.outputs = {{"samples", "out/samples.csv"}};
  const std::string text = serialize_run_report(r);
  const RunReport back = parse_run_report(text);
  EXPECT_EQ(back, r);
  EXPECT_EQ(serialize_run_report(back), text);

  const auto path = temp_path("amagold_report.json");
  write_run_report(r, path);
  EXPECT_EQ(read_run_report(path), r);
  EXPECT_THROW(write_run_report(r, "/nonexistent/dir/report.json"), IoError);
  EXPECT_THROW(parse_run_report("{"), ParseError);
}

TEST(Vectors, RoundTrip) {
  Vector v(4);
  v << 1.0 / 7.0, -2.5, 1e-20, 3.0;
  const auto path = temp_path("amagold_vector.txt");
  write_vector(v, path);
  EXPECT_EQ(read_vector(path), v);
}
