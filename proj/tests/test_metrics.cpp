#include <doctest.h>

#include <cmath>

#include "mgsim/metrics.hpp"

using namespace mgsim;

namespace {

// Scenario skeleton good enough for compute_metrics (v_ref, n_q, events).
Scenario metrics_scenario(double duration, std::vector<Event> events) {
  Scenario sc;
  sc.duration = duration;
  sc.dt_plant = 1e-6;
  sc.control_period = 1e-3;
  sc.v_ref = 311.0;
  for (int i = 0; i < 2; ++i) {
    DgConfig dg;
    dg.name = "dg" + std::to_string(i + 1);
    dg.params.n_q = 1e-3;
    sc.dgs.push_back(dg);
  }
  sc.events = std::move(events);
  return sc;
}

Trace synthetic_trace(double duration, double dt,
                      const std::function<double(double, int)>& v_of,
                      const std::function<double(double, int)>& q_of) {
  Trace tr;
  tr.dg_names = {"dg1", "dg2"};
  for (long k = 0; k * dt <= duration + 1e-12; ++k) {
    TraceRecord rec;
    rec.t = k * dt;
    rec.dg.resize(2);
    for (int g = 0; g < 2; ++g) {
      rec.dg[g].v_od = v_of(rec.t, g);
      rec.dg[g].q = q_of(rec.t, g);
      rec.dg[g].connected = true;
    }
    tr.records.push_back(rec);
  }
  return tr;
}

}  // namespace

TEST_CASE("settling time of an exponential approach") {
  // v(t) = 311 + 5 exp(-20 t): crosses the 1 V band at t = ln(5)/20.
  auto v = [](double t, int) { return 311.0 + 5.0 * std::exp(-20.0 * t); };
  auto q = [](double, int) { return 0.0; };
  Trace tr = synthetic_trace(1.0, 1e-3, v, q);
  Scenario sc = metrics_scenario(1.0, {});
  Metrics m = compute_metrics(tr, sc);
  REQUIRE(m.windows.size() == 1);
  CHECK(m.windows[0].settled);
  CHECK(m.windows[0].settling_time ==
        doctest::Approx(std::log(5.0) / 20.0).epsilon(0.02));
}

TEST_CASE("constant consensus trace: zero dispersion, zero error") {
  auto v = [](double, int) { return 311.0; };
  auto q = [](double, int) { return 1.0e4; };
  Trace tr = synthetic_trace(1.0, 1e-3, v, q);
  Scenario sc = metrics_scenario(1.0, {});
  Metrics m = compute_metrics(tr, sc);
  REQUIRE(m.windows.size() == 1);
  CHECK(m.windows[0].settled);
  CHECK(m.windows[0].settling_time == doctest::Approx(0.0));
  CHECK(m.windows[0].sharing_dispersion == doctest::Approx(0.0));
  CHECK(m.windows[0].dg[0].mean_v_err == doctest::Approx(0.0));
  CHECK(m.windows[0].dg[0].max_abs_v_err == doctest::Approx(0.0));
}

TEST_CASE("a trace that never enters the band is not settled") {
  auto v = [](double, int) { return 305.0; };
  auto q = [](double, int) { return 0.0; };
  Trace tr = synthetic_trace(1.0, 1e-3, v, q);
  Scenario sc = metrics_scenario(1.0, {});
  Metrics m = compute_metrics(tr, sc);
  CHECK_FALSE(m.windows[0].settled);
  CHECK(std::isnan(m.windows[0].settling_time));
  CHECK(m.windows[0].dg[0].mean_v_err == doctest::Approx(-6.0));
}

TEST_CASE("events split the trace into windows; short windows lack statistics") {
  std::vector<Event> events;
  Event e1;
  e1.time = 0.5;
  e1.kind = EventKind::LoadConnect;
  e1.target = "load1";
  Event e2;
  e2.time = 0.6;
  e2.kind = EventKind::LoadScale;
  e2.target = "load1";
  e2.value = 0.5;
  events = {e1, e2};

  auto v = [](double t, int) { return t < 0.5 ? 311.0 : 310.2; };
  auto q = [](double, int) { return 0.0; };
  Trace tr = synthetic_trace(1.0, 1e-3, v, q);
  Scenario sc = metrics_scenario(1.0, events);
  Metrics m = compute_metrics(tr, sc);
  REQUIRE(m.windows.size() == 3);
  CHECK(m.windows[0].stats_available);
  CHECK_FALSE(m.windows[1].stats_available);  // 0.1 s < 0.15 s
  CHECK(m.windows[2].stats_available);
  CHECK(m.windows[2].dg[0].mean_v_err == doctest::Approx(-0.8));
  CHECK(m.windows[2].settled);
}

TEST_CASE("sharing dispersion") {
  auto v = [](double, int) { return 311.0; };
  auto q = [](double, int g) { return g == 0 ? 1.6e4 : 1.5e4; };  // nq q: 16 V vs 15 V
  Trace tr = synthetic_trace(1.0, 1e-3, v, q);
  Scenario sc = metrics_scenario(1.0, {});
  Metrics m = compute_metrics(tr, sc);
  CHECK(m.windows[0].sharing_dispersion == doctest::Approx(1.0));
  CHECK(m.windows[0].sharing_mean == doctest::Approx(15.5));
}

TEST_CASE("disconnected DGs are excluded from settling and statistics") {
  auto v = [](double, int g) { return g == 0 ? 311.0 : 250.0; };
  auto q = [](double, int) { return 0.0; };
  Trace tr = synthetic_trace(1.0, 1e-3, v, q);
  for (auto& rec : tr.records) rec.dg[1].connected = false;
  Scenario sc = metrics_scenario(1.0, {});
  Metrics m = compute_metrics(tr, sc);
  CHECK(m.windows[0].settled);  // dg2 ignored
  CHECK(std::isnan(m.windows[0].dg[1].mean_v_err));
  CHECK(std::isnan(m.windows[0].sharing_dispersion));  // needs two connected DGs
}
