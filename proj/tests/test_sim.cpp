#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mgsim/integrator.hpp"
#include "mgsim/sim.hpp"
#include "testutil.hpp"

using namespace mgsim;

TEST_CASE("rk4: exponential decay single step") {
  double x = 1.0;
  double k1, k2, k3, k4, tmp;
  auto f = [](const double* xs, double* dxs) { dxs[0] = -xs[0]; };
  rk4_step(f, &x, 1, 0.1, &k1, &k2, &k3, &k4, &tmp);
  CHECK(std::abs(x - std::exp(-0.1)) < 1e-7);
  CHECK(x == doctest::Approx(0.9048375).epsilon(1e-7));
}

TEST_CASE("rk4: zero field leaves the state bit-exact") {
  double x[3] = {1.0, -2.5, 3.25e-7};
  double k1[3], k2[3], k3[3], k4[3], tmp[3];
  auto f = [](const double*, double* dxs) { dxs[0] = dxs[1] = dxs[2] = 0.0; };
  rk4_step(f, x, 3, 0.37, k1, k2, k3, k4, tmp);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == -2.5);
  CHECK(x[2] == 3.25e-7);
}

TEST_CASE("rk4: rotation generator vs matrix exponential over 1000 steps") {
  // dx/dt = [0 -w; w 0] x  =>  x(t) = rotation by w t.
  const double w = 2.0;
  const double dt = 1e-3;
  double x[2] = {1.0, 0.0};
  double k1[2], k2[2], k3[2], k4[2], tmp[2];
  auto f = [&](const double* xs, double* dxs) {
    dxs[0] = -w * xs[1];
    dxs[1] = w * xs[0];
  };
  for (int i = 0; i < 1000; ++i) rk4_step(f, x, 2, dt, k1, k2, k3, k4, tmp);
  const double theta = w * 1000 * dt;
  CHECK(std::abs(x[0] - std::cos(theta)) < 1e-9);
  CHECK(std::abs(x[1] - std::sin(theta)) < 1e-9);
}

TEST_CASE("assembled state layout") {
  Scenario sc = testutil::reference_scenario();
  Simulation sim(sc);
  CHECK(sim.plant().state_count() == 66);  // 4*13 + 2*3 + 2*4

  auto names = sim.plant().state_names();
  REQUIRE(names.size() == 66);
  CHECK(names[0] == "dg1.delta");
  CHECK(names[9] == "dg1.v_od");
  CHECK(names[13] == "dg2.delta");
  CHECK(names[52] == "line1.iD");
  CHECK(names[58] == "load1.iD");

  Scenario tiny = testutil::symmetric_pair_scenario();
  tiny.network.lines.clear();
  tiny.network.loads.pop_back();
  tiny.dgs.pop_back();
  tiny.network.dg_attachments.pop_back();
  tiny.graph = std::make_shared<const CommGraph>(make_graph(1, {}, {0}));
  Simulation tiny_sim(tiny);
  CHECK(tiny_sim.plant().state_count() == 15);  // 13 + 2
}

TEST_CASE("graph size mismatch is rejected naming both counts") {
  Scenario sc = testutil::reference_scenario();
  sc.graph = std::make_shared<const CommGraph>(make_graph(3, {{0, 1}, {1, 2}}, {0}));
  try {
    Simulation sim(sc);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& err) {
    std::string msg = err.what();
    CHECK(msg.find('3') != std::string::npos);
    CHECK(msg.find('4') != std::string::npos);
  }
}

TEST_CASE("symmetric pair stays symmetric through activation") {
  Scenario sc = testutil::symmetric_pair_scenario();
  RunResult rr = Simulation(sc).run();
  REQUIRE(rr.exit_code == 0);
  double worst = 0.0;
  for (const auto& rec : rr.trace.records) {
    worst = std::max(worst, std::abs(rec.dg[0].v_od - rec.dg[1].v_od));
    worst = std::max(worst, std::abs(rec.dg[0].p - rec.dg[1].p));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("determinism: same scenario and seed give identical traces") {
  Scenario sc = testutil::reference_scenario();
  sc.duration = 0.2;
  sc.events.clear();
  Event ev;
  ev.time = 0.1;
  ev.kind = EventKind::ActivateSecondary;
  sc.events.push_back(ev);
  sc.noise.sigma2 = 0.01;

  RunResult a = Simulation(sc).run();
  RunResult b = Simulation(sc).run();
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    const auto& ra = a.trace.records[i];
    const auto& rb = b.trace.records[i];
    CHECK(ra.t == rb.t);
    for (size_t g = 0; g < ra.dg.size(); ++g) {
      CHECK(ra.dg[g].v_od == rb.dg[g].v_od);
      CHECK(ra.dg[g].u == rb.dg[g].u);
      CHECK(ra.dg[g].x_hat3 == rb.dg[g].x_hat3);
    }
  }

  // Different seed changes the noisy trace.
  Scenario sc2 = sc;
  sc2.seed = 99;
  RunResult c = Simulation(sc2).run();
  bool differs = false;
  for (size_t i = 0; i < a.trace.size() && !differs; ++i)
    differs = a.trace.records[i].dg[0].x_hat1 != c.trace.records[i].dg[0].x_hat1;
  CHECK(differs);
}

TEST_CASE("csv export round trip is byte identical under equal seeds") {
  Scenario sc = testutil::symmetric_pair_scenario();
  sc.duration = 0.05;
  sc.events.clear();
  RunResult a = Simulation(sc).run();
  RunResult b = Simulation(sc).run();
  export_csv(a.trace, "trace_a.csv");
  export_csv(b.trace, "trace_b.csv");
  std::ifstream fa("trace_a.csv"), fb("trace_b.csv");
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(sa.size() > 1000);
  CHECK(sa.substr(0, 2) == "t,");
  std::remove("trace_a.csv");
  std::remove("trace_b.csv");
}

TEST_CASE("zero-duration disconnect/reconnect leaves the trajectory unchanged") {
  Scenario base = testutil::symmetric_pair_scenario();
  base.duration = 0.1;
  base.events.clear();

  Scenario flicker = base;
  Event out;
  out.time = 0.05;
  out.kind = EventKind::DgDisconnect;
  out.target = "dg2";
  Event in = out;
  in.kind = EventKind::DgReconnect;
  flicker.events = {out, in};

  RunResult a = Simulation(base).run();
  RunResult b = Simulation(flicker).run();
  REQUIRE(a.trace.size() == b.trace.size());
  double worst = 0.0;
  for (size_t i = 0; i < a.trace.size(); ++i)
    for (size_t g = 0; g < 2; ++g)
      worst = std::max(worst, std::abs(a.trace.records[i].dg[g].v_od -
                                       b.trace.records[i].dg[g].v_od));
  CHECK(worst == 0.0);
}

TEST_CASE("leader disconnect switches the frequency source at the event time") {
  Scenario sc = testutil::symmetric_pair_scenario();
  sc.duration = 0.2;
  sc.events.clear();
  Event ev;
  ev.time = 0.1;
  ev.kind = EventKind::DgDisconnect;
  ev.target = "dg1";  // dg1 is the default leader
  sc.events.push_back(ev);

  RunResult rr = Simulation(sc).run();
  REQUIRE(rr.exit_code == 0);
  CHECK(rr.diag.leader_switches == 1);
  bool found = false;
  for (const auto& [t, what] : rr.diag.log)
    if (what.find("omega_com source switched") != std::string::npos) {
      CHECK(t == doctest::Approx(0.1));
      found = true;
    }
  CHECK(found);
}

TEST_CASE("omega_com stays within 5 rad/s of rated") {
  Scenario sc = testutil::symmetric_pair_scenario();
  RunResult rr = Simulation(sc).run();
  const double wb = sc.dgs[0].params.omega_b;
  for (const auto& rec : rr.trace.records)
    CHECK(std::abs(rec.omega_com - wb) < 5.0);
}

TEST_CASE("scenario noise sweep produces paired metrics") {
  Scenario sc = testutil::symmetric_pair_scenario();
  sc.duration = 0.1;
  sc.events.clear();
  Event ev;
  ev.time = 0.02;
  ev.kind = EventKind::ActivateSecondary;
  sc.events.push_back(ev);
  auto points = run_noise_sweep(sc, {0.0, 0.01});
  REQUIRE(points.size() == 2);
  CHECK(points[0].variance == 0.0);
  CHECK(points[1].with_observer.windows.size() ==
        points[1].without_observer.windows.size());
}
