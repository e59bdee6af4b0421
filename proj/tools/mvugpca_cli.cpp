// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

// mvugpca unfold | segment | pipeline | synth. Exit codes: 0 ok, 1 input or
// I/O, 2 graph or solver, 3 segmentation.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvugpca/dataio.hpp"
#include "mvugpca/error.hpp"
#include "mvugpca/gpca.hpp"
#include "mvugpca/pipeline.hpp"
#include "mvugpca/synth.hpp"

namespace fs = std::filesystem;
using namespace mvugpca;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input:
      return 1;
    case ErrorKind::Graph:
    case ErrorKind::Solver:
      return 2;
    case ErrorKind::Segmentation:
      return 3;
  }
  return 1;
}

// Flag values stay unset unless given, so they can be layered over the
// config file and the environment.
struct Flags {
  std::optional<std::string> config;
  std::optional<int> k, dim, n, max_iter;
  std::vector<int> d;
  std::optional<double> tau, tol_feas, noise_sigma;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  bool noise_free = false;
  bool largest_component = false;
  bool labels = false;
  bool trace = false;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key=value config file");
  cmd->add_option("--k", f.k, "neighbours per point (default 4)");
  cmd->add_option("--dim", f.dim, "embedding dimension D (default 5)");
  cmd->add_option("--n", f.n, "number of subspaces (default 2)");
  cmd->add_option("--d", f.d, "subspace dimension(s), comma separated (default 1,2,3,4)")->delimiter(',');
  cmd->add_option("--tau", f.tau, "vote merge angle in radians (default 0.4)");
  cmd->add_option("--tol-feas", f.tol_feas, "SDP feasibility tolerance (default 1e-6)");
  cmd->add_option("--max-iter", f.max_iter, "SDP iteration cap (0: backend default)");
  cmd->add_option("--seed", f.seed, "generator seed");
  cmd->add_option("--noise-sigma", f.noise_sigma, "generator noise level");
  cmd->add_option("--backend", f.backend, "SDP backend: ip or al")->check(CLI::IsMember({"ip", "al"}));
  cmd->add_flag("--noise-free", f.noise_free, "basic GPCA instead of voting");
  cmd->add_flag("--largest-component", f.largest_component, "unfold only the largest graph component");
  cmd->add_flag("--labels", f.labels, "the last CSV column holds ground-truth labels");
  cmd->add_option("--out", f.out, "output directory (default .)");
}

pipeline::PipelineConfig resolve(const Flags& f) {
  pipeline::PipelineConfig cfg;
  if (f.config) pipeline::apply_config_file(cfg, *f.config);
  pipeline::apply_environment(cfg);
  if (f.k) cfg.k = *f.k;
  if (f.dim) cfg.D_target = *f.dim;
  if (f.n) cfg.n_subspaces = *f.n;
  if (!f.d.empty()) cfg.d_sweep = f.d;
  if (f.tau) cfg.tau = *f.tau;
  if (f.tol_feas) cfg.solver.tol_feas = *f.tol_feas;
  if (f.max_iter) cfg.solver.max_iter = *f.max_iter;
  if (f.seed) cfg.seed = *f.seed;
  if (f.noise_sigma) cfg.noise_sigma = *f.noise_sigma;
  if (f.backend) pipeline::apply_setting(cfg, "backend", *f.backend);
  if (f.noise_free) cfg.noise_free = true;
  if (f.largest_component) cfg.largest_component = true;
  return cfg;
}

fs::path prepare_out(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) fail(ErrorKind::Input, "cannot create output directory " + out + ": " + ec.message());
  return fs::path(out);
}

void write_sweep(const fs::path& dir, const std::vector<pipeline::SweepCell>& cells, std::size_t n_points) {
  for (const auto& cell : cells) {
    const std::string tag = "d" + std::to_string(cell.d);
    if (!cell.result) {
      std::cout << tag << ": failed: " << cell.error << "\n";
      continue;
    }
    dataio::write_result(*cell.result, dir / ("result_" + tag + ".json"), dataio::ResultFormat::Json);
    dataio::write_result(*cell.result, dir / ("result_" + tag + ".csv"), dataio::ResultFormat::Csv);
    std::cout << tag << ": ";
    if (cell.result->misclassified)
      std::cout << "error " << *cell.result->misclassified << "/" << n_points << "\n";
    else
      std::cout << "segmented (no ground truth)\n";
  }
}

bool any_failed(const std::vector<pipeline::SweepCell>& cells) {
  for (const auto& c : cells)
    if (!c.result) return true;
  return false;
}

int run_unfold(const std::string& input, const Flags& f) {
  const auto cfg = resolve(f);
  const PointCloud cloud = pipeline::load_input(input, f.labels);
  const fs::path dir = prepare_out(f.out);
  pipeline::PipelineConfig run = cfg;
  std::ofstream trace_out;
  if (f.trace) {
    trace_out.open(dir / "trace.csv");
    if (!trace_out) fail(ErrorKind::Input, "cannot write " + (dir / "trace.csv").string());
    run.solver.trace = mvu::write_trace_csv(trace_out);
  }
  const auto r = pipeline::unfold(cloud, run);
  dataio::write_csv(r.embedding, dir / "embedding.csv");
  dataio::write_text(dir / "spectrum.json", pipeline::spectrum_json(r, cfg));
  std::cout << "unfolded " << r.embedding.size() << " points to " << cfg.D_target << " dims, spectrum fraction "
            << r.spectrum_fraction << (r.solution.converged ? "" : " (not converged)") << "\n";
  return 0;
}

int run_segment(const std::string& input, const Flags& f) {
  const auto cfg = resolve(f);
  const PointCloud cloud = dataio::load_csv(input, f.labels);
  const fs::path dir = prepare_out(f.out);
  const auto cells = pipeline::sweep(cloud, cfg);
  write_sweep(dir, cells, static_cast<std::size_t>(cloud.size()));
  return any_failed(cells) ? 3 : 0;
}

int run_pipeline(const std::vector<std::string>& inputs, const Flags& f) {
  const auto cfg = resolve(f);
  const fs::path root = prepare_out(f.out);
  std::vector<pipeline::TableRow> rows;
  std::map<std::string, int> used;
  bool failed = false;
  for (const auto& input : inputs) {
    fs::path p(input);
    std::string name = (p.has_filename() ? p : p.parent_path()).stem().string();
    if (name.empty()) name = "input";
    if (const int seen = used[name]++; seen > 0) name += "_" + std::to_string(seen);

    const PointCloud cloud = pipeline::load_input(p, f.labels);
    const fs::path dir = prepare_out((root / name).string());
    const auto r = pipeline::unfold(cloud, cfg);
    dataio::write_csv(r.embedding, dir / "embedding.csv");
    dataio::write_text(dir / "spectrum.json", pipeline::spectrum_json(r, cfg));
    std::cout << name << ":\n";
    const auto cells = pipeline::sweep(r.embedding, cfg);
    write_sweep(dir, cells, static_cast<std::size_t>(r.embedding.size()));
    if (cfg.D_target == 2) {
      for (const auto& c : cells) {
        if (c.d != 1 || !c.result) continue;
        dataio::write_text(dir / "plot_d1.csv", pipeline::plot_csv(r.embedding, *c.result));
        dataio::write_text(dir / "lines_d1.csv", pipeline::lines_csv(*c.result));
      }
    }
    failed = failed || any_failed(cells);
    rows.push_back({name, static_cast<int>(r.embedding.size()), cells});
  }
  dataio::write_text(root / "table.csv", pipeline::table_csv(rows, cfg.d_sweep));
  const std::string md = pipeline::table_markdown(rows, cfg.d_sweep);
  dataio::write_text(root / "table.md", md);
  std::cout << md;
  return failed ? 3 : 0;
}

struct SynthFlags {
  std::string kind;
  int D = 0;
  std::vector<int> dims{1, 1};
  int points = 0;
  int manifold_dim = 1;
  double min_angle = 0.0;
};

int run_synth(const Flags& f, const SynthFlags& s) {
  const auto cfg = resolve(f);
  const fs::path dir = prepare_out(f.out);
  PointCloud cloud;
  if (s.kind == "subspaces") {
    synth::SubspaceOptions o;
    o.D = s.D > 0 ? s.D : 2;
    o.dims = s.dims;
    o.points_per_subspace = s.points > 0 ? s.points : 10;
    o.noise_sigma = cfg.noise_sigma;
    o.min_angle = s.min_angle;
    o.seed = cfg.seed;
    cloud = synth::subspaces(o);
  } else if (s.kind == "curved-manifold") {
    if (s.manifold_dim == 1) {
      synth::ArcOptions o;
      o.N = s.points > 0 ? s.points : 50;
      o.D = s.D > 0 ? s.D : 3;
      o.seed = cfg.seed;
      cloud = synth::curved_arc(o);
    } else if (s.manifold_dim == 2) {
      synth::SheetOptions o;
      const int side = s.points > 0 ? static_cast<int>(std::lround(std::sqrt(s.points))) : 8;
      o.rows = o.cols = side;
      o.D = s.D > 0 ? s.D : 3;
      o.seed = cfg.seed;
      cloud = synth::curved_sheet(o);
    } else {
      fail(ErrorKind::Input, "--manifold-dim must be 1 or 2");
    }
    if (cfg.noise_sigma > 0) fail(ErrorKind::Input, "curved-manifold data is noise-free");
  } else {
    synth::ExpressionOptions o;
    o.points = s.points > 0 ? s.points : 30;
    o.D_high = s.D > 0 ? s.D : 100;
    o.noise_sigma = cfg.noise_sigma;
    o.seed = cfg.seed;
    cloud = synth::expression_like(o);
  }
  const fs::path file = dir / (s.kind + ".csv");
  dataio::write_csv(cloud, file);
  std::cout << "wrote " << cloud.size() << " points to " << file.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold unfolding and subspace segmentation"};
  app.require_subcommand(1);

  Flags unfold_f, segment_f, pipeline_f, synth_f;
  std::string unfold_in, segment_in;
  std::vector<std::string> pipeline_in;
  SynthFlags sf;

  auto* unfold = app.add_subcommand("unfold", "unfold a point set or image directory: embedding.csv, spectrum.json");
  add_common(unfold, unfold_f);
  unfold->add_option("input", unfold_in, "CSV file or image directory")->required();
  unfold->add_flag("--trace", unfold_f.trace, "also write trace.csv with one row per solver iteration");

  auto* segment = app.add_subcommand("segment", "segment a CSV point set: result_d<d>.json and .csv per d");
  add_common(segment, segment_f);
  segment->add_option("input", segment_in, "CSV file")->required();

  auto* pipe = app.add_subcommand("pipeline", "unfold then segment each input set: <name>/..., table.csv, table.md");
  add_common(pipe, pipeline_f);
  pipe->add_option("inputs", pipeline_in, "CSV files or image directories, one input set each")->required();

  auto* syn = app.add_subcommand("synth", "write labelled synthetic data to <out>/<kind>.csv");
  add_common(syn, synth_f);
  syn->add_option("--kind", sf.kind, "subspaces, curved-manifold or expression-like")
      ->required()
      ->check(CLI::IsMember({"subspaces", "curved-manifold", "expression-like"}));
  syn->add_option("--ambient", sf.D, "ambient dimension (defaults 2, 3, 100 by kind)");
  syn->add_option("--dims", sf.dims, "subspace dimensions (subspaces)")->delimiter(',');
  syn->add_option("--points", sf.points, "points per subspace, or in total for the other kinds");
  syn->add_option("--manifold-dim", sf.manifold_dim, "1 (arc) or 2 (sheet), curved-manifold only");
  syn->add_option("--min-angle", sf.min_angle, "smallest angle between generated subspaces, radians");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*unfold) return run_unfold(unfold_in, unfold_f);
    if (*segment) return run_segment(segment_in, segment_f);
    if (*pipe) return run_pipeline(pipeline_in, pipeline_f);
    return run_synth(synth_f, sf);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
