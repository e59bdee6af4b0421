// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mvugpca/dataio.hpp"
#include "mvugpca/error.hpp"
#include "mvugpca/pipeline.hpp"
#include "mvugpca/synth.hpp"

using namespace mvugpca;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mvugpca_pipeline_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PointCloud cloud_of(const Eigen::MatrixXd& pts) {
  PointCloud c;
  c.points = pts;
  c.source_ids = index_ids(pts.rows());
  return c;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Input;
}

}  // namespace

TEST_CASE("defaults") {
  const pipeline::PipelineConfig cfg;
  CHECK(cfg.k == 4);
  CHECK(cfg.D_target == 5);
  CHECK(cfg.n_subspaces == 2);
  CHECK(cfg.d_sweep == std::vector<int>{1, 2, 3, 4});
  CHECK(cfg.tau == 0.4);
  CHECK(cfg.solver.tol_feas == 1e-6);
  CHECK(cfg.solver.tol_psd == 1e-8);
  CHECK_FALSE(cfg.noise_free);
}

TEST_CASE("settings by name") {
  pipeline::PipelineConfig cfg;
  pipeline::apply_setting(cfg, "k", "6");
  pipeline::apply_setting(cfg, "dim", "3");
  pipeline::apply_setting(cfg, "d", "1,2");
  pipeline::apply_setting(cfg, "tau", "0.25");
  pipeline::apply_setting(cfg, "tol_feas", "1e-5");
  pipeline::apply_setting(cfg, "max_iter", "77");
  pipeline::apply_setting(cfg, "backend", "al");
  pipeline::apply_setting(cfg, "noise_free", "true");
  CHECK(cfg.k == 6);
  CHECK(cfg.D_target == 3);
  CHECK(cfg.d_sweep == std::vector<int>{1, 2});
  CHECK(cfg.tau == 0.25);
  CHECK(cfg.solver.tol_feas == 1e-5);
  CHECK(cfg.solver.max_iter == 77);
  CHECK(cfg.solver.backend == mvu::Backend::AugmentedLagrangian);
  CHECK(cfg.noise_free);

  CHECK(kind_of([&] { pipeline::apply_setting(cfg, "colour", "red"); }) == ErrorKind::Input);
  CHECK(kind_of([&] { pipeline::apply_setting(cfg, "k", "four"); }) == ErrorKind::Input);
  CHECK(kind_of([&] { pipeline::apply_setting(cfg, "k", "4x"); }) == ErrorKind::Input);
  CHECK(kind_of([&] { pipeline::apply_setting(cfg, "backend", "simplex"); }) == ErrorKind::Input);
  CHECK(kind_of([&] { pipeline::apply_setting(cfg, "d", ""); }) == ErrorKind::Input);
  CHECK(pipeline::config_keys().size() == 13);
}

TEST_CASE("config text, environment and overrides") {
  pipeline::PipelineConfig cfg;
  pipeline::apply_config_text(cfg, "# run\nk = 5\n\ntau=0.3\nd = 2, 3\n");
  CHECK(cfg.k == 5);
  CHECK(cfg.tau == 0.3);
  CHECK(cfg.d_sweep == std::vector<int>{2, 3});
  CHECK(kind_of([&] { pipeline::apply_config_text(cfg, "k 5\n"); }) == ErrorKind::Input);

  std::map<std::string, std::string> env{{"MVUGPCA_K", "7"}, {"MVUGPCA_TOL_FEAS", "1e-4"}};
  pipeline::apply_environment(cfg, "MVUGPCA_", [&](const std::string& name) -> std::optional<std::string> {
    const auto it = env.find(name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  CHECK(cfg.k == 7);
  CHECK(cfg.solver.tol_feas == 1e-4);
  CHECK(cfg.tau == 0.3);  // untouched by the environment

  // A later explicit setting wins, as command-line flags do.
  pipeline::apply_setting(cfg, "k", "3");
  CHECK(cfg.k == 3);
}

TEST_CASE("two points unfold to ±1") {
  Eigen::MatrixXd pts(2, 3);
  pts << 0, 0, 0, 1, 1, std::sqrt(2.0);
  pipeline::PipelineConfig cfg;
  cfg.k = 1;
  cfg.D_target = 1;
  const auto r = pipeline::unfold(cloud_of(pts), cfg);
  REQUIRE(r.embedding.size() == 2);
  REQUIRE(r.embedding.dim() == 1);
  CHECK(std::abs(r.embedding.points(0, 0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.embedding.points(0, 0) == doctest::Approx(-r.embedding.points(1, 0)).epsilon(1e-6));
  CHECK(r.solution.eigenvalues(0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(r.solution.eigenvalues(1)) < 1e-6);

  const auto j = nlohmann::json::parse(pipeline::spectrum_json(r, cfg));
  CHECK(j["eigenvalues"].size() == 2);
  CHECK(j["converged"] == true);
  CHECK(j["n_points"] == 2);
  CHECK(j["edges_gprime"] == 1);
  CHECK(j["backend"] == "ip");
}

TEST_CASE("disconnected graphs") {
  Eigen::MatrixXd pts(5, 1);
  pts << 0, 1, 100, 101, 102;
  PointCloud c = cloud_of(pts);
  c.source_ids = {"a", "b", "c", "d", "e"};
  pipeline::PipelineConfig cfg;
  cfg.k = 1;
  cfg.D_target = 1;
  try {
    pipeline::unfold(c, cfg);
    FAIL("expected a graph error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Graph);
    const std::string msg = e.what();
    CHECK(msg.find("2 components") != std::string::npos);
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("e") != std::string::npos);
  }

  cfg.largest_component = true;
  const auto r = pipeline::unfold(c, cfg);
  CHECK(r.kept == std::vector<int>{2, 3, 4});
  CHECK(r.n_components == 2);
  CHECK(r.embedding.source_ids == std::vector<std::string>{"c", "d", "e"});
  CHECK(r.solution.objective == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("target dimension must fit") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 1, 0, 0, 1;
  pipeline::PipelineConfig cfg;
  cfg.k = 2;
  cfg.D_target = 4;
  CHECK(kind_of([&] { pipeline::unfold(cloud_of(pts), cfg); }) == ErrorKind::Input);
}

TEST_CASE("sweep over d") {
  synth::SubspaceOptions o;
  o.D = 5;
  o.dims = {2, 2};
  o.points_per_subspace = 40;
  o.seed = 3;
  const auto c = synth::subspaces(o);
  pipeline::PipelineConfig cfg;
  const auto cells = pipeline::sweep(c, cfg);
  REQUIRE(cells.size() == 4);
  for (std::size_t i = 0; i < cells.size(); ++i) CHECK(cells[i].d == cfg.d_sweep[i]);
  REQUIRE(cells[1].result);
  CHECK(cells[1].result->misclassified == 0);
  for (const auto& cell : cells) CHECK((cell.result.has_value() != !cell.error.empty()));

  // Concurrency does not change the answer.
  const auto again = pipeline::sweep(c, cfg);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].error == again[i].error);
    if (cells[i].result) CHECK(cells[i].result->labels == again[i].result->labels);
  }

  const std::vector<pipeline::TableRow> rows{{"two-planes", static_cast<int>(c.size()), cells}};
  const std::string csv = pipeline::table_csv(rows, cfg.d_sweep);
  CHECK(csv.rfind("set,N,d=1,d=2,d=3,d=4\n", 0) == 0);
  CHECK(csv.find("two-planes,80,") != std::string::npos);
  const std::string md = pipeline::table_markdown(rows, cfg.d_sweep);
  CHECK(md.find("| two-planes |") != std::string::npos);

  CHECK(kind_of([&] { pipeline::segment(c, 5, cfg); }) == ErrorKind::Input);
  CHECK(kind_of([&] { pipeline::segment(c, 0, cfg); }) == ErrorKind::Input);
}

TEST_CASE("plot and line exports") {
  synth::SubspaceOptions o;
  o.D = 2;
  o.dims = {1, 1};
  o.points_per_subspace = 6;
  o.seed = 2;
  const auto c = synth::subspaces(o);
  pipeline::PipelineConfig cfg;
  cfg.noise_free = true;
  const auto r = pipeline::segment(c, 1, cfg);
  const std::string plot = pipeline::plot_csv(c, r);
  std::istringstream in(plot);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,label,misclassified");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 12);

  const std::string lines = pipeline::lines_csv(r);
  CHECK(lines.rfind("subspace,x,y\n", 0) == 0);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 3);

  PointCloud three = c;
  three.points.conservativeResize(Eigen::NoChange, 3);
  three.points.col(2).setZero();
  CHECK(kind_of([&] { pipeline::plot_csv(three, r); }) == ErrorKind::Input);
}

TEST_CASE("image directories") {
  TempDir dir("images");
  for (int i = 0; i < 4; ++i) {
    dataio::Image img(3, 2);
    img << i, 0, 1, 2, 3, 4;
    dataio::write_pgm(img, dir.path / ("img" + std::to_string(i) + ".pgm"));
  }
  dataio::write_text(dir.path / "labels.csv", "filename,label\nimg0.pgm,0\nimg1.pgm,0\nimg2.pgm,1\nimg3.pgm,1\n");
  const auto c = pipeline::load_input(dir.path, false);
  CHECK(c.size() == 4);
  CHECK(c.dim() == 6);
  REQUIRE(c.labels);
  CHECK(*c.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(fs::path(c.source_ids[2]).filename() == "img2.pgm");

  dataio::write_text(dir.path / "labels.csv", "img0.pgm,0\n");
  CHECK(kind_of([&] { pipeline::load_input(dir.path, false); }) == ErrorKind::Input);

  TempDir empty("empty");
  CHECK(kind_of([&] { pipeline::load_input(empty.path, false); }) == ErrorKind::Input);
  CHECK(kind_of([&] { pipeline::load_input(empty.path / "missing.csv", false); }) == ErrorKind::Input);
}

TEST_CASE("unfold then segment recovers crossing segments") {
  synth::ExpressionOptions o;
  o.seed = 1;
  const auto c = synth::expression_like(o);
  pipeline::PipelineConfig cfg;
  cfg.d_sweep = {1};
  const auto u = pipeline::unfold(c, cfg);
  CHECK(u.solution.converged);
  CHECK(u.embedding.labels == c.labels);
  const auto cells = pipeline::sweep(u.embedding, cfg);
  REQUIRE(cells[0].result);
  CHECK(cells[0].result->misclassified == 0);
}
