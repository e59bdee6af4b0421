// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>
#include <zlib.h>

#include "mvugpca/dataio.hpp"
#include "mvugpca/error.hpp"

using namespace mvugpca;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("mvugpca_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put_u32(std::string& s, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) s.push_back(static_cast<char>((v >> shift) & 0xff));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  put_u32(out, static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(body.data()),
                                                static_cast<uInt>(body.size()))));
}

// Minimal PNG encoder: filter type 0 on every row, one IDAT chunk.
void write_png(const fs::path& path, int width, int height, int bit_depth, int color_type,
               const std::vector<std::uint16_t>& samples) {
  const int channels = color_type == 2 ? 3 : 1;
  const int bytes = bit_depth / 8;
  std::string raw;
  for (int r = 0; r < height; ++r) {
    raw.push_back(0);
    for (int c = 0; c < width * channels; ++c) {
      const std::uint16_t v = samples[static_cast<std::size_t>(r * width * channels + c)];
      if (bytes == 2) raw.push_back(static_cast<char>(v >> 8));
      raw.push_back(static_cast<char>(v & 0xff));
    }
  }
  uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
  std::string z(zlen, '\0');
  REQUIRE(compress(reinterpret_cast<Bytef*>(z.data()), &zlen, reinterpret_cast<const Bytef*>(raw.data()),
                   static_cast<uLong>(raw.size())) == Z_OK);
  z.resize(zlen);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(static_cast<char>(bit_depth));
  ihdr.push_back(static_cast<char>(color_type));
  ihdr.append(3, '\0');
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", z);
  put_chunk(png, "IEND", "");
  std::ofstream(path, std::ios::binary) << png;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Input;
}

}  // namespace

TEST_CASE("parse plain rows") {
  const auto c = dataio::parse_csv("1,2\n3,4", false);
  REQUIRE(c.size() == 2);
  REQUIRE(c.dim() == 2);
  CHECK(c.points(0, 0) == 1);
  CHECK(c.points(0, 1) == 2);
  CHECK(c.points(1, 0) == 3);
  CHECK(c.points(1, 1) == 4);
  CHECK_FALSE(c.labels.has_value());
  CHECK(c.source_ids == std::vector<std::string>{"0", "1"});
}

TEST_CASE("parse with a trailing label column") {
  const auto c = dataio::parse_csv("1,2,0\n3,4,1", true);
  CHECK(c.dim() == 2);
  REQUIRE(c.labels.has_value());
  CHECK(*c.labels == std::vector<int>{0, 1});
}

TEST_CASE("header row, CRLF and blank lines are tolerated") {
  const auto c = dataio::parse_csv("x,y,label\r\n1.5,-2e-3,1\r\n\r\n+3,4,0\r\n", true);
  CHECK(c.size() == 2);
  CHECK(c.points(0, 1) == -2e-3);
  CHECK(c.points(1, 0) == 3);
}

TEST_CASE("malformed csv") {
  try {
    dataio::parse_csv("1,2\n3", false);
    FAIL("ragged input accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
    CHECK(std::string(e.what()).find("ragged row at line 2") != std::string::npos);
  }
  CHECK(kind_of([] { dataio::parse_csv("1,2\n3,x", false); }) == ErrorKind::Input);
  CHECK(kind_of([] { dataio::parse_csv("1,nan", false); }) == ErrorKind::Input);
  CHECK(kind_of([] { dataio::parse_csv("1,inf", false); }) == ErrorKind::Input);
  CHECK(kind_of([] { dataio::parse_csv("", false); }) == ErrorKind::Input);
  CHECK(kind_of([] { dataio::parse_csv("1,0.5", true); }) == ErrorKind::Input);
  CHECK(kind_of([] { dataio::load_csv("/nonexistent/points.csv", false); }) == ErrorKind::Input);
}

TEST_CASE("csv write then load round-trips every bit") {
  TempDir tmp("csv");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1e3);
  PointCloud c;
  c.points.resize(7, 3);
  for (Eigen::Index i = 0; i < c.points.size(); ++i) c.points.data()[i] = g(rng);
  c.labels = std::vector<int>{0, 1, 2, 0, 1, 2, 0};
  c.source_ids = index_ids(7);
  dataio::write_csv(c, tmp.path / "c.csv");
  const auto back = dataio::load_csv(tmp.path / "c.csv", true);
  CHECK(back.points == c.points);
  CHECK(*back.labels == *c.labels);
}

TEST_CASE("column stacking") {
  dataio::Image img(2, 2);
  img << 1, 2, 3, 4;  // rows [a,b], [c,d]
  const Eigen::VectorXd v = dataio::stack_columns(img);
  CHECK(v == Eigen::Vector4d(1, 3, 2, 4));

  dataio::Image big(200, 240);
  for (Eigen::Index i = 0; i < big.size(); ++i) big.data()[i] = static_cast<double>(i % 251);
  const Eigen::VectorXd w = dataio::stack_columns(big);
  CHECK(w.size() == 48000);
  CHECK(dataio::unstack_columns(w, 200, 240) == big);
  CHECK(kind_of([&] { dataio::unstack_columns(w, 100, 100); }) == ErrorKind::Input);
}

TEST_CASE("pgm round trip through load_images") {
  TempDir tmp("pgm");
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> px(0, 255);
  std::vector<dataio::Image> imgs;
  for (int k = 0; k < 3; ++k) {
    dataio::Image img(5, 4);
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = px(rng);
    imgs.push_back(img);
    dataio::write_pgm(img, tmp.path / ("img" + std::to_string(k) + ".pgm"), k != 1);
  }
  const auto files = dataio::list_images(tmp.path);
  REQUIRE(files.size() == 3);
  const auto cloud = dataio::load_images(files);
  REQUIRE(cloud.size() == 3);
  REQUIRE(cloud.dim() == 20);
  for (int k = 0; k < 3; ++k) CHECK(cloud.points.row(k).transpose() == dataio::stack_columns(imgs[static_cast<std::size_t>(k)]));
}

TEST_CASE("png decode: 8-bit, 16-bit, colour rejected") {
  TempDir tmp("png");
  write_png(tmp.path / "g8.png", 3, 2, 8, 0, {0, 10, 20, 30, 40, 255});
  write_png(tmp.path / "g16.png", 2, 2, 16, 0, {0, 1000, 65535, 7});
  write_png(tmp.path / "rgb.png", 1, 1, 8, 2, {1, 2, 3});

  const auto g8 = dataio::read_image(tmp.path / "g8.png");
  REQUIRE(g8.rows() == 2);
  REQUIRE(g8.cols() == 3);
  CHECK(g8(0, 0) == 0);
  CHECK(g8(0, 2) == 20);
  CHECK(g8(1, 0) == 30);
  CHECK(g8(1, 2) == 255);

  const auto g16 = dataio::read_image(tmp.path / "g16.png");
  CHECK(g16(0, 1) == 1000);
  CHECK(g16(1, 0) == 65535);

  CHECK(kind_of([&] { dataio::read_image(tmp.path / "rgb.png"); }) == ErrorKind::Input);
}

TEST_CASE("image sets must share a size") {
  TempDir tmp("mismatch");
  dataio::write_pgm(dataio::Image::Zero(2, 2), tmp.path / "a.pgm");
  dataio::write_pgm(dataio::Image::Zero(3, 2), tmp.path / "b.pgm");
  const auto files = dataio::list_images(tmp.path);
  try {
    dataio::load_images(files);
    FAIL("mismatched sizes accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("dimension mismatch") != std::string::npos);
  }
  CHECK(kind_of([] { dataio::load_images({}); }) == ErrorKind::Input);
}

TEST_CASE("unreadable images") {
  TempDir tmp("bad");
  std::ofstream(tmp.path / "x.pgm") << "P5\n2 2\n255\n\x01";
  std::ofstream(tmp.path / "y.txt") << "hello";
  CHECK(kind_of([&] { dataio::read_image(tmp.path / "x.pgm"); }) == ErrorKind::Input);
  CHECK(kind_of([&] { dataio::read_image(tmp.path / "y.txt"); }) == ErrorKind::Input);
  CHECK(kind_of([&] { dataio::read_image(tmp.path / "missing.png"); }) == ErrorKind::Input);
}

TEST_CASE("centering") {
  PointCloud a;
  a.points = Eigen::MatrixXd(2, 1);
  a.points << 1, 3;
  a.source_ids = index_ids(2);
  CHECK(dataio::center(a).points == Eigen::Vector2d(-1, 1));

  PointCloud b = a;
  b.points << -1, 1;
  CHECK(dataio::center(b).points == b.points);

  PointCloud c;
  c.points = Eigen::MatrixXd(3, 2);
  c.points << 0, 0, 2, 0, 1, 3;
  c.source_ids = index_ids(3);
  Eigen::MatrixXd want(3, 2);
  want << -1, -1, 1, -1, 0, 2;
  CHECK(dataio::center(c).points.isApprox(want, 1e-15));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(5.0, 3.0);
  PointCloud r;
  r.points.resize(20, 6);
  for (Eigen::Index i = 0; i < r.points.size(); ++i) r.points.data()[i] = g(rng);
  r.source_ids = index_ids(20);
  const auto once = dataio::center(r);
  const auto twice = dataio::center(once);
  CHECK((once.points - twice.points).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("segmentation results: csv shape, json round trip, empty rejected") {
  TempDir tmp("result");
  SegmentationResult r;
  r.labels = {0, 1};
  r.residuals = {1e-3, 0.25};
  r.votes = {3, 2};
  r.candidate_votes = {3, 2, 1};
  r.misclassified = 1;
  r.source_ids = {"a", "b"};
  r.diagnostics["h"] = 1;
  SubspaceModel m;
  m.basis = Eigen::Vector2d(1, 1).normalized();
  m.complement_basis = Eigen::Vector2d(1, -1).normalized();
  r.models = {m, m};

  dataio::write_result(r, tmp.path / "r.csv", dataio::ResultFormat::Csv);
  const std::string csv = dataio::read_text(tmp.path / "r.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.rfind("source_id,label,distance\n", 0) == 0);

  dataio::write_result(r, tmp.path / "r.json", dataio::ResultFormat::Json);
  const auto back = dataio::read_result_json(tmp.path / "r.json");
  CHECK(back.labels == r.labels);
  CHECK(back.votes == r.votes);
  CHECK(back.candidate_votes == r.candidate_votes);
  CHECK(back.misclassified == r.misclassified);
  CHECK(back.source_ids == r.source_ids);
  REQUIRE(back.models.size() == 2);
  CHECK((back.models[0].basis - m.basis).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((back.models[1].complement_basis - m.complement_basis).cwiseAbs().maxCoeff() <= 1e-15);

  SegmentationResult empty;
  try {
    dataio::write_result(empty, tmp.path / "e.json", dataio::ResultFormat::Json);
    FAIL("empty result written");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no segmentation present") != std::string::npos);
  }
}

TEST_CASE("point cloud validation and selection") {
  PointCloud c;
  c.points = Eigen::MatrixXd::Zero(3, 2);
  c.source_ids = index_ids(3);
  CHECK_NOTHROW(c.validate());
  c.labels = std::vector<int>{0, 1};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Input);
  c.labels = std::vector<int>{5, 6, 7};
  c.points(1, 0) = 2.0;
  const auto s = c.select({2, 1});
  CHECK(s.size() == 2);
  CHECK(s.points(1, 0) == 2.0);
  CHECK(*s.labels == std::vector<int>{7, 6});
  CHECK(s.source_ids == std::vector<std::string>{"2", "1"});
}
