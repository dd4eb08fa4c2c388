#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "einit/io.hpp"
#include "einit/perturb.hpp"

using namespace einit;
namespace fs = std::filesystem;

namespace {

int parse_error_line(const std::string& text, io::CloudFormat format) {
  std::istringstream in(text);
  try {
    io::read_cloud(in, format);
  } catch (const ParseError& e) {
    return static_cast<int>(e.line());
  }
  return -1;
}

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / ("einit_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(ReadCloud, TwoLineXyz) {
  std::istringstream in("0 0 0\n1 2 3\n");
  const PointCloud c = io::read_cloud(in, io::CloudFormat::Xyz);
  ASSERT_EQ(c.dim(), 3);
  ASSERT_EQ(c.size(), 2);
  EXPECT_EQ(c.point(1), Vector(Eigen::Vector3d(1, 2, 3)));
}

TEST(ReadCloud, CommentsBlankLinesAndTabs) {
  std::istringstream in("# header\n\n1\t2\n  3 4  \r\n");
  const PointCloud c = io::read_cloud(in, io::CloudFormat::Xyz);
  EXPECT_EQ(c.dim(), 2);
  EXPECT_EQ(c.size(), 2);
}

TEST(ReadCloud, CsvSkipsHeader) {
  std::istringstream in("x,y,z\n1, 2, 3\n4,5,6\n");
  const PointCloud c = io::read_cloud(in, io::CloudFormat::Csv);
  EXPECT_EQ(c.size(), 2);
  EXPECT_EQ(c.matrix()(2, 1), 6.0);
}

TEST(ReadCloud, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("1 2 3\n4 5\n", io::CloudFormat::Xyz), 2);
  EXPECT_EQ(parse_error_line("1 2 3\n# c\n4 five 6\n", io::CloudFormat::Xyz), 3);
  EXPECT_EQ(parse_error_line("1 2 3\nnan 1 1\n", io::CloudFormat::Xyz), 2);
  EXPECT_EQ(parse_error_line("x,y\n1,2\n3,\n", io::CloudFormat::Csv), 3);
  EXPECT_GE(parse_error_line("", io::CloudFormat::Xyz), 0);
}

TEST(ReadPly, ExtractsVerticesAndWarnsOnOtherElements) {
  const std::string text =
      "ply\nformat ascii 1.0\ncomment made by hand\n"
      "element vertex 3\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "0 0 0 255\n1 0 0 255\n0 1 0 255\n3 0 1 2\n";
  std::istringstream in(text);
  std::vector<std::string> warnings;
  const PointCloud c = io::read_cloud(in, io::CloudFormat::PlyAscii, &warnings);
  ASSERT_EQ(c.size(), 3);
  EXPECT_EQ(c.point(2), Vector(Eigen::Vector3d(0, 1, 0)));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("face"), std::string::npos);
}

TEST(ReadPly, RejectsBinaryAndMalformedBodies) {
  EXPECT_EQ(parse_error_line("ply\nformat binary_little_endian 1.0\nend_header\n", io::CloudFormat::PlyAscii), 2);
  EXPECT_EQ(parse_error_line("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
                             "property float z\nend_header\n1 2 3\n4 5\n",
                             io::CloudFormat::PlyAscii),
            9);
  EXPECT_GE(parse_error_line("mesh\n", io::CloudFormat::PlyAscii), 0);
}

TEST(SaveLoad, RoundTripAllFormats) {
  Rng rng(61);
  const PointCloud c = random_cloud(200, 3, 1e3, rng);
  const fs::path dir = temp_dir();
  for (const char* name : {"c.xyz", "c.csv", "c.ply"}) {
    io::save_cloud(dir / name, c);
    const PointCloud back = io::load_cloud(dir / name);
    ASSERT_EQ(back.size(), c.size());
    EXPECT_LE((back.matrix() - c.matrix()).cwiseAbs().maxCoeff(), 1e-12) << name;
  }
  fs::remove_all(dir);
}

TEST(SaveLoad, HigherDimensionalCsv) {
  Rng rng(62);
  const PointCloud c = random_cloud(10, 5, 1.0, rng);
  std::ostringstream out;
  io::write_cloud(out, c, io::CloudFormat::Csv);
  EXPECT_EQ(out.str().substr(0, 15), "c0,c1,c2,c3,c4\n");
  std::istringstream in(out.str());
  EXPECT_EQ(io::read_cloud(in, io::CloudFormat::Csv), c);
  EXPECT_THROW(io::write_cloud(out, c, io::CloudFormat::PlyAscii), Error);
}

TEST(LoadCloud, MissingFileAndUnknownExtension) {
  try {
    io::load_cloud("/nonexistent/cloud.xyz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
  }
  EXPECT_THROW(io::format_from_path("cloud.obj"), Error);
  EXPECT_EQ(io::format_from_path("A.PLY"), io::CloudFormat::PlyAscii);
}

TEST(BundledData, CloudsLoad) {
  for (const char* name : {"teapot.xyz", "bunny.xyz", "cow.xyz"}) {
    const PointCloud c = io::load_cloud(fs::path(EINIT_DATA_DIR) / name);
    EXPECT_EQ(c.dim(), 3);
    EXPECT_EQ(c.size(), 1000);
  }
}
