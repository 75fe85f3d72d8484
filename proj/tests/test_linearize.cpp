#include <doctest.h>

#include <cmath>
#include <random>

#include "mgsim/dg_plant.hpp"
#include "mgsim/linearize.hpp"

using namespace mgsim;

namespace {

DGParams dg1_params() {
  DGParams p;
  p.m_p = 6.28e-5;
  p.n_q = 0.5e-3;
  p.omega_c = 31.41;
  p.r_f = 0.1;
  p.l_f = 1.35e-3;
  p.c_f = 47e-6;
  p.r_c = 0.02;
  p.l_c = 2e-3;
  p.k_pv = 0.05;
  p.k_iv = 390;
  p.k_pc = 10.5;
  p.k_ic = 1.6e4;
  p.omega_b = 2.0 * M_PI * 50.0;
  p.omega_n = p.omega_b;
  return p;
}

DGParams dg3_params() {
  DGParams p = dg1_params();
  p.m_p = 12.56e-5;
  p.n_q = 1e-3;
  p.k_pv = 0.1;
  p.k_iv = 420;
  p.k_pc = 15;
  p.k_ic = 2e4;
  return p;
}

}  // namespace

TEST_CASE("input gain value and scaling") {
  DGParams p1 = dg1_params();
  const double g1 = lie_lg_lf_h(p1);
  CHECK(g1 == doctest::Approx(10.5 * 0.05 / (47e-6 * 1.35e-3)).epsilon(1e-12));
  CHECK(g1 == doctest::Approx(8.274e6).epsilon(1e-3));

  DGParams doubled = p1;
  doubled.c_f *= 2.0;
  CHECK(lie_lg_lf_h(doubled) == doctest::Approx(0.5 * g1).epsilon(1e-12));

  CHECK(lie_lg_lf_h(dg3_params()) / g1 ==
        doctest::Approx(15.0 * 0.1 / (10.5 * 0.05)).epsilon(1e-12));
}

TEST_CASE("second Lie derivative, special cases") {
  DGParams p = dg1_params();
  DGState s;
  CHECK(lie_lf2_h(p, s.x.data(), 0.0, 0.0) == 0.0);

  s[kVoD] = 1.0;
  const double expect =
      -(p.k_pc * p.k_pv + 1.0) / (p.c_f * p.l_f) - 1.0 / (p.c_f * p.l_c);
  CHECK(lie_lf2_h(p, s.x.data(), 0.0, 0.0) == doctest::Approx(expect).epsilon(1e-12));
}

// The printed expression must be the exact frozen-omega second derivative of
// v_od under the plant model: omega_i dv_oq + (di_ld - di_od)/C_f.
TEST_CASE("second Lie derivative is consistent with the plant equations") {
  DGParams p = dg1_params();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    DGState s;
    s[kDelta] = 0.3 * u(rng);
    s[kP] = 4e4 * u(rng);
    s[kQ] = 3e4 * u(rng);
    s[kPhiD] = u(rng);
    s[kPhiQ] = u(rng);
    s[kGammaD] = 0.1 * u(rng);
    s[kGammaQ] = 0.1 * u(rng);
    s[kIlD] = 100 * u(rng);
    s[kIlQ] = 100 * u(rng);
    s[kVoD] = 311 + 30 * u(rng);
    s[kVoQ] = 10 * u(rng);
    s[kIoD] = 100 * u(rng);
    s[kIoQ] = 100 * u(rng);
    const double v_bd = 300 + 20 * u(rng);
    const double v_bq = 5 * u(rng);
    const double cmd = 311 + 10 * u(rng);
    const double omega_com = p.omega_n + u(rng);

    double dx[kDgStateCount];
    dg_derivative(p, s.x.data(), cmd, v_bd, v_bq, omega_com, true, dx);
    const double omega_i = droop_omega(p, s.x.data());
    const double vddot_model = omega_i * dx[kVoQ] + (dx[kIlD] - dx[kIoD]) / p.c_f;
    const double vddot_lie = lie_lf2_h(p, s.x.data(), v_bd, omega_i) + lie_lg_lf_h(p) * cmd;
    CHECK(vddot_model == doctest::Approx(vddot_lie).epsilon(1e-9));
  }
}

TEST_CASE("vdot_od") {
  DGParams p = dg1_params();
  DGState s;
  s[kIlD] = 10.0;
  s[kIoD] = 10.0;
  CHECK(vdot_od(p, s.x.data(), 100.0) == 0.0);

  DGState s2;
  s2[kIlD] = 4.7e-5;
  CHECK(vdot_od(p, s2.x.data(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("input inversion and actuator clamp") {
  const double g0 = lie_lg_lf_h(dg1_params());
  const double u_max = 622.0;

  CHECK(invert_input(5.0, 5.0, g0, u_max, 0.0, 0.0, 0.0).u == 0.0);
  CHECK(invert_input(g0, 0.0, g0, u_max, 0.0, 0.0, 0.0).u == doctest::Approx(1.0));

  ActuatorCommand clamped = invert_input(1e10, 0.0, g0, u_max, 0.0, 0.0, 0.0);
  CHECK(clamped.u == 622.0);
  CHECK(clamped.saturated);

  // Inversion composed with z = xi + g0 u is the identity inside the range.
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uu(0.0, 622.0);
  for (int trial = 0; trial < 100; ++trial) {
    double cmd = uu(rng);
    double xi = -2.6e9 + 1e7 * uu(rng);
    double z = xi + g0 * cmd;
    CHECK(invert_input(z, xi, g0, u_max, 0.0, 0.0, 0.0).u ==
          doctest::Approx(cmd).epsilon(1e-12));
  }

  // Slew-rate limiting holds the step to rate*dt and flags it.
  ActuatorCommand slew = invert_input(g0 * 400.0, 0.0, g0, u_max, 300.0, 1e5, 1e-4);
  CHECK(slew.u == doctest::Approx(310.0));
  CHECK(slew.saturated);

  CHECK_THROWS_AS(ExtendedModel(-1.0), std::invalid_argument);
}

TEST_CASE("extended model structure") {
  ExtendedModel m(8.274e6);
  Eigen::Matrix3d a_expect;
  a_expect << 0, 1, 0, 0, 0, 1, 0, 0, 0;
  CHECK((m.a() - a_expect).isZero(0.0));
  CHECK(m.b()(0) == 0.0);
  CHECK(m.b()(1) == 8.274e6);
  CHECK(m.b()(2) == 0.0);
  CHECK(m.c()(0) == 1.0);
  CHECK(m.c()(1) == 0.0);
  CHECK(m.c()(2) == 0.0);

  // DGs sharing nominal K_Pc, K_Pv, C_f, L_f get the same model.
  DGParams a = dg1_params(), b = dg1_params();
  b.m_p *= 2.0;  // droop differences do not matter
  CHECK(lie_lg_lf_h(a) == lie_lg_lf_h(b));
}

TEST_CASE("ground-truth extended state") {
  DGParams nominal = dg1_params();
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DGState s;
  s[kVoD] = 305;
  s[kIlD] = 40;
  s[kIoD] = 38;
  s[kQ] = 1e4;

  SUBCASE("unperturbed plant: xi equals the Lie term") {
    CHECK(ground_truth_xi(nominal, nominal, s.x.data(), 300.0, nominal.omega_b, 311.0) ==
          lie_lf2_h(nominal, s.x.data(), 300.0, nominal.omega_b));
  }
  SUBCASE("C_f scaled by 0.8 shifts xi by g0 (1/0.8 - 1) u") {
    DGParams plant = nominal;
    plant.c_f *= 0.8;
    const double cmd = 1.0;
    const double xi = ground_truth_xi(plant, nominal, s.x.data(), 300.0, nominal.omega_b, cmd);
    const double lie_plant = lie_lf2_h(plant, s.x.data(), 300.0, nominal.omega_b);
    CHECK(xi - lie_plant ==
          doctest::Approx(lie_lg_lf_h(nominal) * (1.0 / 0.8 - 1.0)).epsilon(1e-9));
  }
  SUBCASE("zero state, zero input") {
    DGState zero;
    CHECK(ground_truth_xi(nominal, nominal, zero.x.data(), 0.0, 0.0, 0.0) == 0.0);
  }
  (void)u;
}
