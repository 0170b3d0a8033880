#include "chkp/config.hpp"
#include "chkp/error.hpp"
#include "chkp/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

namespace chkp {
namespace {

TEST(RunConfig, DefaultsAreValid) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.n, 1024);
  EXPECT_EQ(c.grid().n, 1024);
  EXPECT_DOUBLE_EQ(c.grid().half_length, 40.0);
  EXPECT_EQ(c.branch().ny, 8);
}

TEST(RunConfig, RejectsNonSmoothSpeed) {
  RunConfig c;
  c.c = 2.0;
  c.kappa = 1.0;
  try {
    c.validate();
    FAIL() << "expected ParameterError";
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("c > 2 kappa"), std::string::npos);
  }
}

TEST(RunConfig, RejectsBadFields) {
  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ParameterError);
  };
  bad([](RunConfig& c) { c.tol = 0.0; });
  bad([](RunConfig& c) { c.ds = -1e-3; });
  bad([](RunConfig& c) { c.n_range = {4, 1}; });
  bad([](RunConfig& c) { c.n_range = {-1}; });
  bad([](RunConfig& c) { c.n_range.clear(); });
  bad([](RunConfig& c) { c.n = 4; });
  bad([](RunConfig& c) { c.family = "fd5"; });
  bad([](RunConfig& c) { c.output_dir.clear(); });
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c;
  c.c = 3.25;
  c.n = 300;
  c.n_range = {-8, 4, 12};
  c.output_dir = "somewhere/else";
  const RunConfig back = merge_json(RunConfig{}, c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.n_range, c.n_range);
  EXPECT_DOUBLE_EQ(back.c, 3.25);
}

TEST(RunConfig, MergeOverlaysOnlyPresentKeys) {
  const RunConfig c = merge_json(RunConfig{}, R"({"kappa": 0.5, "ds": 0.002})");
  EXPECT_DOUBLE_EQ(c.kappa, 0.5);
  EXPECT_DOUBLE_EQ(c.ds, 0.002);
  EXPECT_DOUBLE_EQ(c.c, 3.0);
  EXPECT_EQ(c.n, 1024);
}

TEST(RunConfig, MergeRejectsUnknownKeysAndTypes) {
  EXPECT_THROW(merge_json(RunConfig{}, R"({"speed": 3})"), ParameterError);
  EXPECT_THROW(merge_json(RunConfig{}, R"({"c": "three"})"), ParameterError);
  EXPECT_THROW(merge_json(RunConfig{}, R"([1, 2])"), ParameterError);
  EXPECT_THROW(merge_json(RunConfig{}, "{not json"), ParameterError);
}

TEST(RunConfig, FileAndEnvironment) {
  const std::string dir = (std::filesystem::temp_directory_path() / "chkp_config_test").string();
  const std::string path = join_path(dir, "cfg.json");
  write_file(path, R"({"n": 512, "output_dir": "from_file"})");
  RunConfig c = load_config_file(RunConfig{}, path);
  EXPECT_EQ(c.n, 512);
  EXPECT_EQ(c.output_dir, "from_file");
  ::setenv(kOutputDirEnv, "from_env", 1);
  c = apply_environment(c);
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(c.output_dir, "from_env");
  EXPECT_EQ(apply_environment(c).output_dir, "from_env");
  EXPECT_THROW(load_config_file(RunConfig{}, join_path(dir, "missing.json")), ParameterError);
  std::filesystem::remove_all(dir);
}

TEST(Io, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.32167474174680316}) {
    const std::string s = format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Io, TableCsv) {
  Table t{{"a", "b"}, {{1.0, 0.25}, {-3.0, 1e-20}}};
  EXPECT_EQ(t.to_csv(), "a,b\n1,0.25\n-3,9.9999999999999995e-21\n");
  t.rows.push_back({1.0});
  EXPECT_THROW(t.to_csv(), std::logic_error);
}

TEST(Io, WriteCreatesDirectories) {
  const std::string dir = (std::filesystem::temp_directory_path() / "chkp_io_test").string();
  std::filesystem::remove_all(dir);
  const std::string path = join_path(join_path(dir, "nested/deeper"), "f.txt");
  write_file(path, "x\ny\n");
  EXPECT_EQ(read_file(path), "x\ny\n");
  std::filesystem::remove_all(dir);
  EXPECT_EQ(join_path("a/", "b"), "a/b");
  EXPECT_THROW(read_file(path), std::runtime_error);
}

}  // namespace
}  // namespace chkp
