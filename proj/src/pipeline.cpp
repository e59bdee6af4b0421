// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <future>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mvugpca/dataio.hpp"
#include "mvugpca/error.hpp"
#include "mvugpca/gpca.hpp"

namespace mvugpca::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    fail(ErrorKind::Input, "bad value for " + key + ": '" + raw + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  fail(ErrorKind::Input, "bad value for " + key + ": '" + raw + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& raw) {
  std::vector<int> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, item));
  if (out.empty()) fail(ErrorKind::Input, "empty list for " + key);
  return out;
}

const std::vector<std::string> keys = {"k",         "dim",      "n",    "d",           "tau",
                                       "tol_feas",  "tol_psd",  "max_iter", "seed",    "noise_sigma",
                                       "noise_free", "largest_component", "backend"};

std::string component_report(const PointCloud& cloud, const graph::Connectivity& conn) {
  std::map<int, std::vector<std::string>> members;
  for (std::size_t v = 0; v < conn.component.size(); ++v) members[conn.component[v]].push_back(cloud.source_ids[v]);
  std::string out = "disconnected neighbor graph: " + std::to_string(conn.n_components) + " components";
  for (const auto& [id, ids] : members) {
    out += "; component " + std::to_string(id) + " (" + std::to_string(ids.size()) + "):";
    for (const auto& s : ids) out += " " + s;
  }
  return out;
}

std::string cell_text(const SweepCell& cell) {
  if (!cell.result) return "fail";
  if (!cell.result->misclassified) return "-";
  return std::to_string(*cell.result->misclassified);
}

}  // namespace

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "k") {
    cfg.k = parse_number<int>(key, value);
  } else if (key == "dim") {
    cfg.D_target = parse_number<int>(key, value);
  } else if (key == "n") {
    cfg.n_subspaces = parse_number<int>(key, value);
  } else if (key == "d") {
    cfg.d_sweep = parse_int_list(key, value);
  } else if (key == "tau") {
    cfg.tau = parse_number<double>(key, value);
  } else if (key == "tol_feas") {
    cfg.solver.tol_feas = parse_number<double>(key, value);
  } else if (key == "tol_psd") {
    cfg.solver.tol_psd = parse_number<double>(key, value);
  } else if (key == "max_iter") {
    cfg.solver.max_iter = parse_number<int>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "noise_sigma") {
    cfg.noise_sigma = parse_number<double>(key, value);
  } else if (key == "noise_free") {
    cfg.noise_free = parse_bool(key, value);
  } else if (key == "largest_component") {
    cfg.largest_component = parse_bool(key, value);
  } else if (key == "backend") {
    const std::string v = trim(value);
    if (v == "ip") {
      cfg.solver.backend = mvu::Backend::InteriorPoint;
    } else if (v == "al") {
      cfg.solver.backend = mvu::Backend::AugmentedLagrangian;
    } else {
      fail(ErrorKind::Input, "backend must be ip or al, got '" + value + "'");
    }
  } else {
    fail(ErrorKind::Input, "unknown config key '" + key + "'");
  }
}

void apply_config_text(PipelineConfig& cfg, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Input, "config line " + std::to_string(line_no) + " has no '='");
    apply_setting(cfg, trim(t.substr(0, eq)), t.substr(eq + 1));
  }
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  apply_config_text(cfg, dataio::read_text(path));
}

void apply_environment(PipelineConfig& cfg, const std::string& prefix, EnvLookup lookup) {
  if (!lookup) {
    lookup = [](const std::string& name) -> std::optional<std::string> {
      const char* v = std::getenv(name.c_str());
      if (!v) return std::nullopt;
      return std::string(v);
    };
  }
  for (const auto& key : keys) {
    std::string name = prefix + key;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    if (const auto v = lookup(name)) apply_setting(cfg, key, *v);
  }
}

std::vector<std::string> config_keys() { return keys; }

PointCloud load_input(const std::filesystem::path& path, bool csv_labels) {
  std::error_code ec;
  if (!std::filesystem::is_directory(path, ec)) return dataio::load_csv(path, csv_labels);

  const auto files = dataio::list_images(path);
  if (files.empty()) fail(ErrorKind::Input, "no .pgm or .png images in " + path.string());
  PointCloud cloud = dataio::load_images(files);

  const auto label_file = path / "labels.csv";
  if (std::filesystem::exists(label_file, ec)) {
    std::map<std::string, int> by_name;
    std::stringstream ss(dataio::read_text(label_file));
    std::string line;
    while (std::getline(ss, line)) {
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto comma = t.rfind(',');
      if (comma == std::string::npos) fail(ErrorKind::Input, "labels.csv rows must be filename,label");
      const std::string label = trim(t.substr(comma + 1));
      int value = 0;
      const auto [ptr, perr] = std::from_chars(label.data(), label.data() + label.size(), value);
      if (perr != std::errc() || ptr != label.data() + label.size()) {
        if (by_name.empty()) continue;  // header
        fail(ErrorKind::Input, "bad label in labels.csv: '" + label + "'");
      }
      by_name[trim(t.substr(0, comma))] = value;
    }
    std::vector<int> labels;
    for (const auto& f : files) {
      const auto it = by_name.find(f.filename().string());
      if (it == by_name.end()) fail(ErrorKind::Input, "labels.csv has no entry for " + f.filename().string());
      labels.push_back(it->second);
    }
    cloud.labels = std::move(labels);
  }
  return cloud;
}

UnfoldResult unfold(const PointCloud& cloud, const PipelineConfig& cfg) {
  cloud.validate();
  UnfoldResult out;
  graph::NeighborGraph g = graph::build_knn(cloud, cfg.k);
  const auto conn = graph::check_connected(g);
  out.n_components = conn.n_components;

  PointCloud work = cloud;
  out.kept.resize(static_cast<std::size_t>(cloud.size()));
  for (std::size_t i = 0; i < out.kept.size(); ++i) out.kept[i] = static_cast<int>(i);
  if (!conn.connected) {
    if (!cfg.largest_component) fail(ErrorKind::Graph, component_report(cloud, conn));
    out.kept = graph::largest_component(conn);
    work = cloud.select(out.kept);
    g = graph::build_knn(work, std::min<int>(cfg.k, static_cast<int>(work.size()) - 1));
  }
  if (cfg.D_target < 1 || cfg.D_target > work.size())
    fail(ErrorKind::Input, "target dimension " + std::to_string(cfg.D_target) + " must lie in [1, " +
                               std::to_string(work.size()) + "]");

  g = graph::augment_cliques(g, work);
  out.edges_g = g.edges_g.size();
  out.edges_gprime = g.edges_gprime.size();
  const mvu::SdpProblem problem = mvu::assemble(g);

  mvu::SolverOptions opts = cfg.solver;
  if (!opts.initial) opts.initial = mvu::centered_gram(work.points);
  out.solution = mvu::solve(problem, opts);

  const mvu::Embedding emb = mvu::embed(out.solution, mvu::ExplicitDim{cfg.D_target});
  out.spectrum_fraction = emb.spectrum_fraction;
  out.embedding.points = emb.Y;
  out.embedding.labels = work.labels;
  out.embedding.source_ids = work.source_ids;
  return out;
}

std::string spectrum_json(const UnfoldResult& r, const PipelineConfig& cfg) {
  nlohmann::json j;
  const auto& s = r.solution;
  j["eigenvalues"] = std::vector<double>(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
  j["spectrum_fraction"] = r.spectrum_fraction;
  j["retained_dims"] = cfg.D_target;
  j["objective"] = s.objective;
  j["primal_residual"] = s.primal_residual;
  j["dual_residual"] = s.dual_residual;
  j["centering_residual"] = s.centering_residual;
  j["min_eigenvalue"] = s.min_eigenvalue;
  j["iterations"] = s.iterations;
  j["converged"] = s.converged;
  j["backend"] = cfg.solver.backend == mvu::Backend::InteriorPoint ? "ip" : "al";
  j["k"] = cfg.k;
  j["n_points"] = r.kept.size();
  j["n_components"] = r.n_components;
  j["edges_g"] = r.edges_g;
  j["edges_gprime"] = r.edges_gprime;
  j["source_ids"] = r.embedding.source_ids;
  return j.dump(2) + "\n";
}

SegmentationResult segment(const PointCloud& cloud, int d, const PipelineConfig& cfg) {
  cloud.validate();
  const int D = static_cast<int>(cloud.dim());
  if (d < 1 || d >= D)
    fail(ErrorKind::Input, "subspace dimension " + std::to_string(d) + " must lie in [1, " + std::to_string(D - 1) + "]");
  if (cfg.n_subspaces < 1) fail(ErrorKind::Input, "need at least one subspace");
  const auto n = static_cast<std::size_t>(cfg.n_subspaces);
  if (cfg.noise_free) return gpca::segment_basic(cloud, cfg.n_subspaces, std::vector<int>(n, d));
  gpca::VotingOptions vo;
  vo.tau = cfg.tau;
  return gpca::segment_voting(cloud, cfg.n_subspaces, std::vector<int>(n, D - d), vo);
}

std::vector<SweepCell> sweep(const PointCloud& cloud, const PipelineConfig& cfg) {
  std::vector<std::future<SweepCell>> jobs;
  for (int d : cfg.d_sweep) {
    jobs.push_back(std::async(std::launch::async, [&cloud, &cfg, d] {
      SweepCell cell;
      cell.d = d;
      try {
        cell.result = segment(cloud, d, cfg);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Segmentation && e.kind() != ErrorKind::Input) throw;
        cell.error = e.what();
      }
      return cell;
    }));
  }
  std::vector<SweepCell> cells;
  for (auto& j : jobs) cells.push_back(j.get());
  return cells;
}

std::string table_csv(const std::vector<TableRow>& rows, const std::vector<int>& d_sweep) {
  std::string out = "set,N";
  for (int d : d_sweep) out += ",d=" + std::to_string(d);
  out += '\n';
  for (const auto& row : rows) {
    out += row.name + ',' + std::to_string(row.n_points);
    for (const auto& cell : row.cells) out += ',' + cell_text(cell);
    out += '\n';
  }
  return out;
}

std::string table_markdown(const std::vector<TableRow>& rows, const std::vector<int>& d_sweep) {
  std::string out = "| set | N |";
  std::string rule = "|---|---|";
  for (int d : d_sweep) {
    out += " d=" + std::to_string(d) + " |";
    rule += "---|";
  }
  out += '\n' + rule + '\n';
  for (const auto& row : rows) {
    out += "| " + row.name + " | " + std::to_string(row.n_points) + " |";
    for (const auto& cell : row.cells) out += " " + cell_text(cell) + " |";
    out += '\n';
  }
  return out;
}

std::string plot_csv(const PointCloud& embedding, const SegmentationResult& result) {
  if (embedding.dim() != 2) fail(ErrorKind::Input, "plot data needs a 2-D embedding");
  if (static_cast<Eigen::Index>(result.labels.size()) != embedding.size())
    fail(ErrorKind::Input, "result and embedding differ in point count");
  std::vector<bool> wrong;
  if (embedding.labels) wrong = gpca::misclassified_points(result.labels, *embedding.labels);
  std::string out = "x,y,label,misclassified\n";
  for (Eigen::Index i = 0; i < embedding.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    out += dataio::format_double(embedding.points(i, 0)) + ',' + dataio::format_double(embedding.points(i, 1)) + ',' +
           std::to_string(result.labels[u]) + ',' + (wrong.empty() ? "" : (wrong[u] ? "1" : "0")) + '\n';
  }
  return out;
}

std::string lines_csv(const SegmentationResult& result) {
  std::string out = "subspace,x,y\n";
  for (std::size_t j = 0; j < result.models.size(); ++j) {
    const auto& B = result.models[j].basis;
    if (B.rows() != 2) fail(ErrorKind::Input, "line directions need subspaces of R^2");
    for (Eigen::Index c = 0; c < B.cols(); ++c)
      out += std::to_string(j) + ',' + dataio::format_double(B(0, c)) + ',' + dataio::format_double(B(1, c)) + '\n';
  }
  return out;
}

}  // namespace mvugpca::pipeline
