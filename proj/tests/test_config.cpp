#include <doctest.h>

#include "epmc/config.hpp"
#include "epmc/errors.hpp"

using namespace epmc;

namespace {

const char* kSample = R"(# sample
[problem]
kind = lq
q = 0.0
sigma = 1.5
horizon = 2

[solve]
epsilon = 5.0
frac = 2.5
iterations = 15
seed = 42
u0 = 0.1, 0.2, 0.3
flag = true
)";

}  // namespace

TEST_CASE("config parses sections, comments and typed values") {
  const Config cfg = Config::parse_string(kSample);
  CHECK(cfg.get_string("problem", "kind") == "lq");
  CHECK(cfg.get_double("problem", "q") == 0.0);
  CHECK(cfg.get_double("problem", "sigma") == 1.5);
  CHECK(cfg.get_int("problem", "horizon") == 2);
  CHECK(cfg.get_u64("solve", "seed") == 42);
  CHECK(cfg.get_bool("solve", "flag"));
  CHECK(cfg.get_double("solve", "missing", 7.5) == 7.5);
  CHECK_THROWS_AS(cfg.get_double("solve", "missing"), ConfigError);
  CHECK(cfg.get_int("solve", "epsilon") == 5);  // 5.0 is integral
  CHECK_THROWS_AS(cfg.get_int("solve", "frac"), ConfigError);
  const auto v = cfg.get_vector("solve", "u0", 3);
  CHECK(v[1] == 0.2);
  const auto broadcast = cfg.get_vector("problem", "sigma", 4);
  CHECK(broadcast.size() == 4);
  CHECK(broadcast[3] == 1.5);
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(Config::parse_string("key = 1\n"), ConfigError);  // outside a section
  CHECK_THROWS_AS(Config::parse_string("[a\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[a]\nnokey\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[a]\nx = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_file("/nonexistent/path.cfg"), ConfigError);
  const Config cfg = Config::parse_string("[a]\nx = notanumber\n");
  CHECK_THROWS_AS(cfg.get_double("a", "x"), ConfigError);
  CHECK_THROWS_AS(cfg.get_vector("a", "x", 2), ConfigError);
}

TEST_CASE("config hash is stable and content-sensitive") {
  const Config a = Config::parse_string(kSample);
  const Config b = Config::parse_string(kSample);
  const Config c = Config::parse_string("[problem]\nkind = tcl\n");
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.content_hash() != c.content_hash());
}

TEST_CASE("inline comments after values are stripped") {
  const Config cfg = Config::parse_string("[s]\nx = 3.5 # trailing note\n");
  CHECK(cfg.get_double("s", "x") == 3.5);
}
