// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/dataio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "mvugpca/error.hpp"

namespace mvugpca {

void PointCloud::validate() const {
  if (points.rows() < 1 || points.cols() < 1) fail(ErrorKind::Input, "point cloud must have N >= 1 and D >= 1");
  if (!points.allFinite()) fail(ErrorKind::Input, "point cloud contains non-finite coordinates");
  if (labels && static_cast<Eigen::Index>(labels->size()) != points.rows())
    fail(ErrorKind::Input, "label count does not match point count");
  if (static_cast<Eigen::Index>(source_ids.size()) != points.rows())
    fail(ErrorKind::Input, "source id count does not match point count");
}

PointCloud PointCloud::select(const std::vector<int>& rows) const {
  PointCloud out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
  if (labels) out.labels.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.points.row(static_cast<Eigen::Index>(r)) = points.row(rows[r]);
    if (labels) out.labels->push_back((*labels)[rows[r]]);
    out.source_ids.push_back(source_ids[rows[r]]);
  }
  return out;
}

std::vector<std::string> index_ids(Eigen::Index n) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

namespace dataio {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_real(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

nlohmann::json matrix_columns_json(const Eigen::MatrixXd& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    auto col = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
    out.push_back(std::move(col));
  }
  return out;
}

Eigen::MatrixXd matrix_from_columns_json(const nlohmann::json& j, Eigen::Index dim) {
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    if (static_cast<Eigen::Index>(j[c].size()) != dim) fail(ErrorKind::Input, "basis vector length mismatch");
    for (Eigen::Index r = 0; r < dim; ++r) m(r, static_cast<Eigen::Index>(c)) = j[c][static_cast<std::size_t>(r)];
  }
  return m;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Input, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Input, "read failure on " + path.string());
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::Input, "write failure on " + path.string());
}

PointCloud parse_csv(const std::string& text, bool has_labels) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  int line_no = 0;
  bool first_content = true;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;

    const auto cells = split_cells(line);
    std::vector<double> values(cells.size());
    std::size_t bad_col = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_real(cells[c], values[c])) {
        bad_col = c + 1;
        break;
      }
    }
    if (bad_col != 0) {
      if (first_content) {
        first_content = false;  // header row
        continue;
      }
      fail(ErrorKind::Input, "non-numeric cell at line " + std::to_string(line_no) + ", column " +
                                 std::to_string(bad_col));
    }
    for (std::size_t c = 0; c < values.size(); ++c)
      if (!std::isfinite(values[c]))
        fail(ErrorKind::Input, "non-finite value at line " + std::to_string(line_no) + ", column " +
                                   std::to_string(c + 1));
    first_content = false;
    if (rows.empty()) {
      width = values.size();
    } else if (values.size() != width) {
      fail(ErrorKind::Input, "ragged row at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) fail(ErrorKind::Input, "empty file");
  const std::size_t dim = has_labels ? width - 1 : width;
  if (dim < 1) fail(ErrorKind::Input, "no coordinate columns at line 1");

  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  if (has_labels) cloud.labels.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c)
      cloud.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    if (has_labels) {
      const double l = rows[r][dim];
      if (l != std::round(l))
        fail(ErrorKind::Input, "non-integer label in row " + std::to_string(r + 1) + ", column " +
                                   std::to_string(width));
      cloud.labels->push_back(static_cast<int>(l));
    }
  }
  cloud.source_ids = index_ids(cloud.points.rows());
  cloud.validate();
  return cloud;
}

PointCloud load_csv(const std::filesystem::path& path, bool has_labels) {
  return parse_csv(read_text(path), has_labels);
}

void write_csv(const PointCloud& cloud, const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index r = 0; r < cloud.points.rows(); ++r) {
    for (Eigen::Index c = 0; c < cloud.points.cols(); ++c) {
      if (c) out += ',';
      out += format_double(cloud.points(r, c));
    }
    if (cloud.labels) out += ',' + std::to_string((*cloud.labels)[static_cast<std::size_t>(r)]);
    out += '\n';
  }
  write_text(path, out);
}

Eigen::VectorXd stack_columns(const Image& image) {
  Eigen::VectorXd v(image.size());
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < image.cols(); ++c)
    for (Eigen::Index r = 0; r < image.rows(); ++r) v(k++) = image(r, c);
  return v;
}

Image unstack_columns(const Eigen::VectorXd& vec, Eigen::Index height, Eigen::Index width) {
  if (height * width != vec.size()) fail(ErrorKind::Input, "vector length does not match image size");
  Image img(height, width);
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < width; ++c)
    for (Eigen::Index r = 0; r < height; ++r) img(r, c) = vec(k++);
  return img;
}

PointCloud load_images(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) fail(ErrorKind::Input, "no images given");
  PointCloud cloud;
  Eigen::Index height = 0, width = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Image img = read_image(paths[i]);
    if (i == 0) {
      height = img.rows();
      width = img.cols();
      cloud.points.resize(static_cast<Eigen::Index>(paths.size()), height * width);
    } else if (img.rows() != height || img.cols() != width) {
      fail(ErrorKind::Input, "dimension mismatch: " + paths[i].string() + " is " + std::to_string(img.cols()) + "x" +
                                 std::to_string(img.rows()) + ", expected " + std::to_string(width) + "x" +
                                 std::to_string(height));
    }
    cloud.points.row(static_cast<Eigen::Index>(i)) = stack_columns(img).transpose();
    cloud.source_ids.push_back(paths[i].string());
  }
  cloud.validate();
  return cloud;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) fail(ErrorKind::Input, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".pgm" || ext == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

PointCloud center(const PointCloud& cloud) {
  PointCloud out = cloud;
  const Eigen::RowVectorXd mean = cloud.points.colwise().mean();
  out.points.rowwise() -= mean;
  return out;
}

void write_result(const SegmentationResult& result, const std::filesystem::path& path, ResultFormat format) {
  if (result.labels.empty()) fail(ErrorKind::Input, "no segmentation present");
  const auto n = result.labels.size();
  const auto id = [&](std::size_t i) { return i < result.source_ids.size() ? result.source_ids[i] : std::to_string(i); };

  if (format == ResultFormat::Csv) {
    std::string out = "source_id,label,distance\n";
    for (std::size_t i = 0; i < n; ++i) {
      out += id(i) + ',' + std::to_string(result.labels[i]) + ',';
      out += format_double(i < result.residuals.size() ? result.residuals[i] : 0.0);
      out += '\n';
    }
    write_text(path, out);
    return;
  }

  nlohmann::json j;
  j["labels"] = result.labels;
  j["bases"] = nlohmann::json::array();
  j["complement_bases"] = nlohmann::json::array();
  for (const auto& m : result.models) {
    j["bases"].push_back(matrix_columns_json(m.basis));
    j["complement_bases"].push_back(matrix_columns_json(m.complement_basis));
  }
  j["votes"] = result.votes;
  j["candidate_votes"] = result.candidate_votes;
  nlohmann::json metrics;
  metrics["residuals"] = result.residuals;
  if (!result.residuals.empty()) {
    metrics["max_residual"] = *std::max_element(result.residuals.begin(), result.residuals.end());
    double s = 0.0;
    for (double r : result.residuals) s += r;
    metrics["mean_residual"] = s / static_cast<double>(result.residuals.size());
  }
  metrics["misclassified"] = result.misclassified ? nlohmann::json(*result.misclassified) : nlohmann::json(nullptr);
  j["metrics"] = metrics;
  j["diagnostics"] = nlohmann::json::object();
  for (const auto& [k, v] : result.diagnostics) j["diagnostics"][k] = v;
  j["source_ids"] = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) j["source_ids"].push_back(id(i));
  write_text(path, j.dump(2) + "\n");
}

SegmentationResult read_result_json(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Input, "malformed result JSON " + path.string() + ": " + e.what());
  }
  SegmentationResult r;
  try {
    r.labels = j.at("labels").get<std::vector<int>>();
    const auto& bases = j.at("bases");
    const auto& comps = j.at("complement_bases");
    if (bases.size() != comps.size()) fail(ErrorKind::Input, "bases/complement_bases length mismatch");
    for (std::size_t m = 0; m < bases.size(); ++m) {
      Eigen::Index dim = 0;
      if (!bases[m].empty()) dim = static_cast<Eigen::Index>(bases[m][0].size());
      else if (!comps[m].empty()) dim = static_cast<Eigen::Index>(comps[m][0].size());
      r.models.push_back({matrix_from_columns_json(bases[m], dim), matrix_from_columns_json(comps[m], dim)});
    }
    r.votes = j.at("votes").get<std::vector<int>>();
    if (j.contains("candidate_votes")) r.candidate_votes = j["candidate_votes"].get<std::vector<int>>();
    const auto& metrics = j.at("metrics");
    r.residuals = metrics.at("residuals").get<std::vector<double>>();
    if (!metrics.at("misclassified").is_null()) r.misclassified = metrics["misclassified"].get<int>();
    for (const auto& [k, v] : j.at("diagnostics").items()) r.diagnostics[k] = v.get<double>();
    if (j.contains("source_ids")) r.source_ids = j["source_ids"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Input, "malformed result JSON " + path.string() + ": " + e.what());
  }
  return r;
}

}  // namespace dataio
}  // namespace mvugpca
