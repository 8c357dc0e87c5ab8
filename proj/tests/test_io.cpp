#include "fixtures.hpp"

#include "sdb/cli.hpp"
#include "sdb/config.hpp"
#include "sdb/report.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <doctest.h>

using namespace sdb;
using namespace sdb::testing;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("sdb_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

void write_text(const fs::path &p, const std::string &text) {
  std::ofstream(p) << text;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sdb");
  std::vector<char *> argv;
  for (auto &a : args)
    argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("raster round trip") {
  TempDir tmp;
  auto t = two_scene_truth(5, 4);
  auto scene = generate_synthetic(t)[1];
  scene.meta().scene_id = "S2";
  scene.meta().date = "2020-02-03";
  scene.meta().geotransform.t = {100.0, 10.0, 0.0, 200.0, 0.0, -10.0};
  scene.set(2, 7, scene.meta().nodata);
  io::write_scene(tmp.path / "a", scene);
  const auto back = io::read_scene(tmp.path / "a.json");
  CHECK(back.data() == scene.data());
  CHECK(back.bands() == scene.bands());
  CHECK(back.meta().scene_id == "S2");
  CHECK(back.meta().date == "2020-02-03");
  CHECK(back.meta().sun_elevation == scene.meta().sun_elevation);
  CHECK(back.meta().tide_offset == scene.meta().tide_offset);
  CHECK(back.meta().geotransform.t == scene.meta().geotransform.t);
  CHECK(back.is_nodata(7));
  CHECK_FALSE(back.is_nodata(6));

  fs::resize_file(io::binary_path(tmp.path / "a"), 100);
  try {
    io::read_scene(tmp.path / "a");
    FAIL("truncated raster was accepted");
  } catch (const DataError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("320") != std::string::npos);
    CHECK(msg.find("100") != std::string::npos);
  }
  CHECK_THROWS_AS(io::read_scene(tmp.path / "missing"), DataError);
}

TEST_CASE("pixel lookup") {
  GeoTransform gt;
  gt.t = {100.0, 10.0, 0.0, 200.0, 0.0, -10.0};
  CHECK(pixel_of(gt, 4, 3, 115.0, 195.0) == std::optional<std::size_t>(1));
  CHECK(pixel_of(gt, 4, 3, 139.9, 170.1) == std::optional<std::size_t>(11));
  CHECK_FALSE(pixel_of(gt, 4, 3, 99.0, 195.0).has_value());
  CHECK_FALSE(pixel_of(gt, 4, 3, 115.0, 169.0).has_value());
}

TEST_CASE("soundings") {
  TempDir tmp;
  write_text(tmp.path / "ok.csv", "x,y,depth_m\n1,2,3.5\n1,2,4\n5.5,6,7\n");
  const auto s = io::read_soundings(tmp.path / "ok.csv");
  CHECK(s.points.size() == 3);
  CHECK(s.points[1].depth == 4.0);
  CHECK(s.depths() == std::vector<double>{3.5, 4.0, 7.0});
  write_text(tmp.path / "zero.csv", "x,y,depth_m\n1,2,3\n4,5,0\n");
  try {
    io::read_soundings(tmp.path / "zero.csv");
    FAIL("zero depth was accepted");
  } catch (const DataError &e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  write_text(tmp.path / "bad.csv", "x,y\n");
  CHECK_THROWS_AS(io::read_soundings(tmp.path / "bad.csv"), DataError);
  io::write_soundings(tmp.path / "out.csv", s);
  CHECK(io::read_soundings(tmp.path / "out.csv").depths() == s.depths());
}

TEST_CASE("run configuration") {
  const auto c = RunConfig::parse("# comment\nmax_combination = 2\n"
                                  "bottom_types = coral\nn_bottom = 1\nuse_lut = false\n");
  CHECK(c.max_combination == 2);
  CHECK(c.bottom_types == std::vector<std::string>{"coral"});
  CHECK_FALSE(c.inversion.use_lut);
  CHECK(c.library().size() == 1);
  CHECK_THROWS_AS(RunConfig::parse("no_such_key = 1"), UsageError);
  CHECK_THROWS_AS(RunConfig::parse("max_combination"), UsageError);
  CHECK_THROWS_AS(RunConfig::parse("max_combination = x"), UsageError);
  RunConfig r;
  const auto again = RunConfig::parse(r.to_text());
  CHECK(again.to_text() == r.to_text());
}

TEST_CASE("regression report") {
  const std::vector<double> truth{2.0, 5.0, 8.0, 11.0, 14.0};
  const auto same = regression_report(truth, truth);
  CHECK(same.n == 5);
  CHECK(same.r2 == Approx(1.0));
  CHECK(same.mae == 0.0);
  for (double w : same.within_m)
    CHECK(w == 100.0);
  std::vector<double> shifted = truth;
  for (auto &h : shifted)
    h += 1.0;
  const auto plus = regression_report(shifted, truth);
  CHECK(plus.mae == Approx(1.0).epsilon(1e-12));
  CHECK(plus.within_m[3] == 100.0);
  CHECK(plus.within_m[2] == 0.0);
  CHECK(plus.slope == Approx(1.0));
  CHECK(plus.intercept == Approx(1.0));
  CHECK_FALSE(plus.to_text().empty());

  // Raster form samples the pixel under each sounding and skips missing cells.
  GeoTransform gt;
  std::vector<double> raster{3.0, 4.0, std::nan(""), 6.0};
  SoundingSet s;
  s.points = {{0.5, 0.5, 3.0}, {1.5, 0.5, 4.0}, {0.5, 1.5, 5.0}, {9.0, 9.0, 1.0}};
  const auto r = regression_report(raster, 2, 2, gt, s);
  CHECK(r.n == 2);
  CHECK(r.mae == 0.0);
}

TEST_CASE("shipped data files match the built-in tables") {
  const fs::path dir = SDB_DATA_DIR;
  auto same = [](const LookupCurve &a, const LookupCurve &b) {
    REQUIRE(a.wavelengths().size() == b.wavelengths().size());
    for (std::size_t i = 0; i < a.wavelengths().size(); ++i) {
      CHECK(a.wavelengths()[i] == b.wavelengths()[i]);
      CHECK(a.values()[i] == Approx(b.values()[i]).epsilon(1e-9));
    }
  };
  same(read_curve_file(dir / "a0.txt"), tables::a0());
  same(read_curve_file(dir / "a1.txt"), tables::a1());
  same(read_curve_file(dir / "water_absorption.txt"), tables::pure_water_absorption());
  same(read_curve_file(dir / "water_backscatter.txt"), tables::pure_water_backscatter());
  const auto lib = read_bottom_library(dir / "bottom");
  const auto builtin = tables::builtin_bottom_library();
  REQUIRE(lib.size() == builtin.size());
  for (const auto &name : builtin.names()) {
    const auto a = lib.select(std::vector<std::string>{name});
    const auto b = builtin.select(std::vector<std::string>{name});
    same(a[0], b[0]);
  }
}

TEST_CASE("command line exit codes") {
  Quiet quiet;
  TempDir tmp;
  CHECK(cli({"--help"}) == 0);
  CHECK(cli({"invert", "--help"}) == 0);
  CHECK(cli({}) == 1);
  CHECK(cli({"invert", "--no-such-flag"}) == 1);
  const std::string absent = (tmp.path / "absent").string();
  CHECK(cli({"report", "--depth", absent, "--soundings", absent}) == 2);
  write_text(tmp.path / "bad.cfg", "max_combination = x\n");
  CHECK(cli({"--config", (tmp.path / "bad.cfg").string(), "report", "--depth", absent,
             "--soundings", absent}) == 1);
  const std::string out = (tmp.path / "syn").string();
  CHECK(cli({"synth", "--out", out, "--width", "4", "--height", "3", "--scenes", "1",
             "--soundings", "5"}) == 0);
  CHECK(fs::exists(io::binary_path(out + "/scene_0")));
  CHECK(io::read_soundings(out + "/soundings.csv").points.size() == 5);
}
