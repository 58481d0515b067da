#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "twinrange/config.hpp"
#include "twinrange/csvio.hpp"
#include "twinrange/pgm.hpp"

using namespace twinrange;

TEST_CASE("config parses the supported value shapes") {
  const std::string text =
      "top = 1.5\n"
      "[run]\n"
      "seed = 42          # trailing comment\n"
      "rate = 5e5\n"
      "label = \"bench # 3\"\n"
      "flag = true\n"
      "grid = [1, 2.5, 10]\n"
      "names = [\"a\", \"b\"]\n"
      "\n"
      "[empty]\n";
  const auto cfg = io::Config::parse(text, "mem");

  CHECK(cfg.get_double("", "top") == 1.5);
  CHECK(cfg.get_int("run", "seed") == 42);
  CHECK(cfg.get_double("run", "rate") == 5e5);
  CHECK(cfg.get_string("run", "label") == "bench # 3");
  CHECK(cfg.get_bool_or("run", "flag", false));
  CHECK(cfg.get_double_array("run", "grid") ==
        std::vector<double>{1.0, 2.5, 10.0});
  CHECK(cfg.has("run", "names"));
  CHECK(cfg.has("empty", "anything") == false);
  CHECK(cfg.sections() == std::vector<std::string>{"", "empty", "run"});
  CHECK(cfg.origin() == "mem");
  CHECK(cfg.content_hash() == io::fnv1a64(text));

  CHECK(cfg.get_double_or("run", "absent", -1.0) == -1.0);
  CHECK(cfg.get_int_or("run", "absent", 7) == 7);
  CHECK(cfg.get_string_or("run", "absent", "dflt") == "dflt");
  CHECK(cfg.get_bool_or("run", "absent", true));
  CHECK(cfg.get_double_array_or("run", "absent", {3.0}) ==
        std::vector<double>{3.0});
}

TEST_CASE("config getter errors name the offending key") {
  const auto cfg = io::Config::parse(
      "[a]\nx = \"text\"\nf = 2.5\nn = 3\n", "cfg.toml");
  using doctest::Contains;
  CHECK_THROWS_WITH_AS((void)cfg.get_double("a", "x"),
                       Contains("must be a number"), io::ConfigError);
  CHECK_THROWS_WITH_AS((void)cfg.get_int("a", "f"),
                       Contains("must be an integer"), io::ConfigError);
  CHECK(cfg.get_int("a", "n") == 3);
  CHECK_THROWS_WITH_AS((void)cfg.get_string("a", "f"),
                       Contains("must be a quoted string"), io::ConfigError);
  CHECK_THROWS_WITH_AS((void)cfg.get_double("a", "gone"),
                       Contains("missing required key [a] gone"),
                       io::ConfigError);
  CHECK_THROWS_WITH_AS((void)cfg.get_double_array("a", "f"),
                       Contains("must be an array of numbers"),
                       io::ConfigError);
}

TEST_CASE("config rejects malformed input with file and line") {
  using doctest::Contains;
  CHECK_THROWS_WITH_AS(
      (void)io::Config::parse("[a]\nx = 1\nx = 2\n", "dup.toml"),
      Contains("dup.toml:3: duplicate key 'x'"), io::ConfigError);
  CHECK_THROWS_WITH_AS((void)io::Config::parse("[a.b]\n", "t"),
                       Contains("nested tables"), io::ConfigError);
  CHECK_THROWS_WITH_AS((void)io::Config::parse("just words\n", "t"),
                       Contains("expected 'key = value'"), io::ConfigError);
  CHECK_THROWS_WITH_AS((void)io::Config::parse("x = [1, 2\n", "t"),
                       Contains("unterminated array"), io::ConfigError);
  CHECK_THROWS_WITH_AS((void)io::Config::parse("x = [1, \"a\"]\n", "t"),
                       Contains("mixed array element types"), io::ConfigError);
  CHECK_THROWS_WITH_AS((void)io::Config::parse("x = @nope\n", "t"),
                       Contains("cannot parse value"), io::ConfigError);
  CHECK_THROWS_WITH_AS((void)io::Config::parse("x =\n", "t"),
                       Contains("missing value"), io::ConfigError);
  CHECK_THROWS_AS(
      (void)io::Config::parse_file("/nonexistent/definitely_not_here.toml"),
      io::ConfigError);
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("csv writer emits the provenance stamp and exact rows") {
  io::CsvTable t;
  t.add_column("x", {1.0, 2.5});
  t.add_column("y", {0.1, 1e300});
  std::ostringstream out;
  io::write_csv(out, t, {0xdeadbeefULL, 7, true});
  CHECK(out.str() ==
        "# config_hash=0x00000000deadbeef seed=7\n"
        "x,y\n"
        "1,0.1\n"
        "2.5,1e+300\n");

  std::ostringstream unseeded;
  io::write_csv(unseeded, t, {0xdeadbeefULL, 0, false});
  CHECK(unseeded.str().substr(0, unseeded.str().find('\n')) ==
        "# config_hash=0x00000000deadbeef");
}

TEST_CASE("csv label column leads the header and every row") {
  io::CsvTable t;
  t.add_column("v", {4.0, 5.0});
  t.set_labels("mode", {"ec", "all"});
  std::ostringstream out;
  io::write_csv(out, t, {1, 2, true});
  CHECK(out.str() ==
        "# config_hash=0x0000000000000001 seed=2\n"
        "mode,v\n"
        "ec,4\n"
        "all,5\n");
}

TEST_CASE("csv validation rejects ragged tables") {
  io::CsvTable ragged;
  ragged.add_column("a", {1.0, 2.0});
  ragged.add_column("b", {1.0});
  CHECK_THROWS_AS(ragged.validate(), std::invalid_argument);

  io::CsvTable labels;
  labels.add_column("a", {1.0, 2.0});
  labels.set_labels("name", {"only-one"});
  CHECK_THROWS_AS(labels.validate(), std::invalid_argument);

  io::CsvTable empty;
  CHECK(empty.rows() == 0);
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("format_double is shortest round-trip text") {
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(-0.0001) == "-1e-04");
  const double tricky[] = {0.1,     1.0 / 3.0, 6324.555320336759,
                           1e-300,  -2.5e17,   3.141592653589793};
  for (const double v : tricky) CHECK(std::stod(io::format_double(v)) == v);
}

TEST_CASE("pgm writer produces exact 16-bit big-endian P5 bytes") {
  Eigen::MatrixXd m(2, 3);
  m << 0.0, 1.0, 2.0, 0.5, 1.5, 2.0;
  std::ostringstream out;
  io::write_pgm16(out, m, "c");
  const std::string expect_header = "P5\n# c\n3 2\n65535\n";
  const unsigned char expect_pixels[] = {
      0x00, 0x00, 0x80, 0x00, 0xff, 0xff,   // 0, 32768, 65535
      0x40, 0x00, 0xbf, 0xff, 0xff, 0xff};  // 16384, 49151, 65535
  const std::string got = out.str();
  REQUIRE(got.size() == expect_header.size() + sizeof(expect_pixels));
  CHECK(got.substr(0, expect_header.size()) == expect_header);
  for (std::size_t i = 0; i < sizeof(expect_pixels); ++i)
    CHECK(static_cast<unsigned char>(got[expect_header.size() + i]) ==
          expect_pixels[i]);
}

TEST_CASE("pgm writer handles the all-zero image and rejects bad input") {
  std::ostringstream out;
  io::write_pgm16(out, Eigen::MatrixXd::Zero(1, 2), "");
  CHECK(out.str() == std::string("P5\n2 1\n65535\n") +
                         std::string("\x00\x00\x00\x00", 4));

  Eigen::MatrixXd neg(1, 1);
  neg << -1.0;
  CHECK_THROWS_AS(io::write_pgm16(out, neg, ""), std::invalid_argument);
  Eigen::MatrixXd nan(1, 1);
  nan << std::nan("");
  CHECK_THROWS_AS(io::write_pgm16(out, nan, ""), std::invalid_argument);
  CHECK_THROWS_AS(io::write_pgm16(out, Eigen::MatrixXd(), ""),
                  std::invalid_argument);
  Eigen::MatrixXd ok(1, 1);
  ok << 1.0;
  CHECK_THROWS_AS(io::write_pgm16(out, ok, "two\nlines"),
                  std::invalid_argument);
}
