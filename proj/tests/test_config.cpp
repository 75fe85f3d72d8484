#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mgsim/config_parser.hpp"
#include "mgsim/scenario.hpp"

using namespace mgsim;

namespace {

// Minimal valid 2-DG scenario text; tests mutate pieces of it.
std::string minimal_text() {
  return R"(
[scenario]
duration = 0.01
dt_plant = 1e-6
control_period = 1e-4
seed = 7

[network]
buses = bus1 bus2
r_virtual = 1000

[line line1]
from = bus1
to = bus2
r = 0.23
l = 318e-6

[load load1]
bus = bus1
r = 4
l = 9.6e-3

[dg dg1]
bus = bus1
m_p = 6.28e-5
n_q = 0.5e-3
r_f = 0.1
l_f = 1.35e-3
c_f = 47e-6
r_c = 0.02
l_c = 2e-3
k_pv = 0.05
k_iv = 390
k_pc = 10.5
k_ic = 1.6e4

[dg dg2]
bus = bus2
m_p = 9.42e-5
n_q = 0.75e-3
r_f = 0.1
l_f = 1.35e-3
c_f = 47e-6
r_c = 0.02
l_c = 2e-3
k_pv = 0.05
k_iv = 390
k_pc = 10.5
k_ic = 1.6e4

[graph]
edges = dg1:dg2
pinned = dg1

[noise]
sigma2 = 0.01

[events]
0.001 activate-secondary
)";
}

}  // namespace

TEST_CASE("parser basics") {
  ConfigDocument doc = parse_config_text("[a]\nx = 1\n# comment\ny = 2.5 # tail\n[b c]\nz = on\n", "t");
  CHECK(doc.find("a") != nullptr);
  CHECK(doc.find("a")->get_double("t", "x", 0) == 1.0);
  CHECK(doc.find("a")->get_double("t", "y", 0) == 2.5);
  CHECK(doc.find("b", "c")->get_bool("t", "z", false));

  CHECK_THROWS_AS(parse_config_text("x = 1\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[a]\nbroken\n", "t"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[a]\nx = 1\nx = 2\n", "t"), ConfigError);
}

TEST_CASE("minimal scenario parses and validates") {
  Scenario sc = parse_scenario_text(minimal_text(), "mini.cfg");
  CHECK(sc.dg_count() == 2);
  CHECK(sc.network.lines.size() == 1);
  CHECK(sc.network.loads.size() == 1);
  CHECK(sc.graph->pin_gain(0) == 1.0);
  CHECK(sc.graph->weight(0, 1) == 1.0);
  CHECK(sc.events.size() == 1);
  CHECK(sc.events[0].kind == EventKind::ActivateSecondary);
  CHECK(sc.observer.enabled);          // defaults apply
  CHECK(sc.noise.sigma2 == 0.01);
  CHECK(sc.dgs[0].params.omega_b == doctest::Approx(2 * M_PI * 50));
}

TEST_CASE("missing required key names the section and key") {
  std::string text = minimal_text();
  auto pos = text.find("n_q = 0.5e-3\n");
  text.erase(pos, std::string("n_q = 0.5e-3\n").size());
  try {
    parse_scenario_text(text, "mini.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    std::string msg = err.what();
    CHECK(msg.find("dg dg1") != std::string::npos);
    CHECK(msg.find("n_q") != std::string::npos);
    CHECK(msg.find("mini.cfg:") != std::string::npos);
  }
}

TEST_CASE("unknown keys and sections are rejected with line info") {
  std::string text = minimal_text() + "\n[controller]\nbogus_key = 1\n";
  CHECK_THROWS_WITH_AS(parse_scenario_text(text, "t.cfg"),
                       doctest::Contains("unknown key 'bogus_key'"), ConfigError);

  std::string text2 = minimal_text() + "\n[wat]\nx = 1\n";
  CHECK_THROWS_WITH_AS(parse_scenario_text(text2, "t.cfg"),
                       doctest::Contains("unknown section kind 'wat'"), ConfigError);
}

TEST_CASE("event parsing and validation") {
  std::string text = minimal_text();

  SUBCASE("unknown event kind") {
    text += "\n[events]\n";  // duplicate events section is fine: raw lines append
    CHECK_THROWS_AS(parse_scenario_text(text + "0.002 explode\n", "t.cfg"), ConfigError);
  }
  SUBCASE("unknown load target") {
    CHECK_THROWS_WITH_AS(
        parse_scenario_text(text + "[events]\n0.002 load-connect loadX\n", "t.cfg"),
        doctest::Contains("unknown load"), std::invalid_argument);
  }
  SUBCASE("event outside duration") {
    CHECK_THROWS_WITH_AS(
        parse_scenario_text(text + "[events]\n5.0 load-connect load1\n", "t.cfg"),
        doctest::Contains("outside"), std::invalid_argument);
  }
  SUBCASE("event off the control grid") {
    CHECK_THROWS_WITH_AS(
        parse_scenario_text(text + "[events]\n0.00205 load-connect load1\n", "t.cfg"),
        doctest::Contains("not aligned"), std::invalid_argument);
  }
}

TEST_CASE("graph size must match the DG count") {
  std::string text = minimal_text();
  auto pos = text.find("edges = dg1:dg2");
  text.replace(pos, std::string("edges = dg1:dg2").size(), "edges = dg1:dgX");
  CHECK_THROWS_WITH_AS(parse_scenario_text(text, "t.cfg"),
                       doctest::Contains("unknown DG"), ConfigError);
}

TEST_CASE("dt and control period consistency") {
  std::string text = minimal_text();
  auto pos = text.find("dt_plant = 1e-6");
  text.replace(pos, std::string("dt_plant = 1e-6").size(), "dt_plant = 3e-5");
  CHECK_THROWS_AS(parse_scenario_text(text, "t.cfg"), std::invalid_argument);
}

TEST_CASE("shipped reference config loads clean") {
  const char* src_dir = std::getenv("MGSIM_CONFIG_DIR");
  std::string dir = src_dir ? src_dir : "configs";
  for (const std::string candidate :
       {dir + "/table1_4dg.cfg", std::string("../configs/table1_4dg.cfg"),
        std::string("../../configs/table1_4dg.cfg")}) {
    std::ifstream probe(candidate);
    if (!probe) continue;
    Scenario sc = load_scenario(candidate);
    CHECK(sc.dg_count() == 4);
    CHECK(sc.network.lines.size() == 3);
    CHECK(sc.network.loads.size() == 4);
    CHECK(sc.events.size() == 5);
    CHECK(sc.v_ref == 311.0);
    CHECK_FALSE(sc.network.loads[1].connected);  // load2 joins at 1.5 s
    CHECK(sc.dgs[2].params.k_pc == 15.0);
    return;
  }
  MESSAGE("reference config not found from test working directory; skipped");
}
