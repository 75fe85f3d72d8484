#include "mgsim/dg_plant.hpp"

#include <stdexcept>

namespace mgsim {

const char* dg_state_name(int index) {
  static const char* names[kDgStateCount] = {
      "delta", "P", "Q", "phi_d", "phi_q", "gamma_d", "gamma_q",
      "i_ld", "i_lq", "v_od", "v_oq", "i_od", "i_oq"};
  if (index < 0 || index >= kDgStateCount) return "?";
  return names[index];
}

void DGParams::validate(const std::string& dg_name) const {
  auto positive = [&](double v, const char* field) {
    if (!(v > 0.0))
      throw std::invalid_argument("dg " + dg_name + ": parameter " + field +
                                  " must be strictly positive");
  };
  positive(m_p, "m_p");
  positive(n_q, "n_q");
  positive(omega_c, "omega_c");
  positive(r_f, "r_f");
  positive(l_f, "l_f");
  positive(c_f, "c_f");
  positive(r_c, "r_c");
  positive(l_c, "l_c");
  positive(k_pv, "k_pv");
  positive(k_iv, "k_iv");
  positive(k_pc, "k_pc");
  positive(k_ic, "k_ic");
  positive(omega_b, "omega_b");
  positive(omega_n, "omega_n");
  double g = g0();
  if (!(g > 0.0) || !std::isfinite(g))
    throw std::invalid_argument("dg " + dg_name + ": g0 = K_Pc K_Pv/(C_f L_f) is not finite positive");
}

void PerturbationConfig::validate(const std::string& dg_name) const {
  auto in_range = [&](double v, const char* field) {
    if (!(v >= 0.5 && v <= 1.5))
      throw std::invalid_argument("dg " + dg_name + ": perturbation factor " + field +
                                  " must lie in [0.5, 1.5]");
  };
  in_range(r_f, "r_f");
  in_range(l_f, "l_f");
  in_range(c_f, "c_f");
  in_range(r_c, "r_c");
  in_range(l_c, "l_c");
}

DGParams PerturbationConfig::apply(const DGParams& nominal) const {
  DGParams p = nominal;
  p.r_f *= r_f;
  p.l_f *= l_f;
  p.c_f *= c_f;
  p.r_c *= r_c;
  p.l_c *= l_c;
  return p;
}

DroopSetpoints droop_setpoints(const DGParams& params, const double* x, double u) {
  return {params.omega_n - params.m_p * x[kP], u - params.n_q * x[kQ], 0.0};
}

void instantaneous_power(const double* x, double& p_inst, double& q_inst) {
  p_inst = x[kVoD] * x[kIoD] + x[kVoQ] * x[kIoQ];
  q_inst = x[kVoQ] * x[kIoD] - x[kVoD] * x[kIoQ];
}

void dg_derivative(const DGParams& pr, const double* x, double u,
                   double v_bd, double v_bq, double omega_com, bool breaker_closed,
                   double* dx) {
  const double omega = pr.omega_n - pr.m_p * x[kP];
  const double v_od_star = u - pr.n_q * x[kQ];
  const double v_oq_star = 0.0;

  const double p_inst = x[kVoD] * x[kIoD] + x[kVoQ] * x[kIoQ];
  const double q_inst = x[kVoQ] * x[kIoD] - x[kVoD] * x[kIoQ];

  dx[kDelta] = omega - omega_com;
  dx[kP] = pr.omega_c * (p_inst - x[kP]);
  dx[kQ] = pr.omega_c * (q_inst - x[kQ]);

  // Voltage loop: PI plus capacitor decoupling feedforward, zero output-current
  // feedforward (F = 0).
  const double ev_d = v_od_star - x[kVoD];
  const double ev_q = v_oq_star - x[kVoQ];
  dx[kPhiD] = ev_d;
  dx[kPhiQ] = ev_q;
  const double il_d_star = -pr.omega_b * pr.c_f * x[kVoQ] + pr.k_pv * ev_d + pr.k_iv * x[kPhiD];
  const double il_q_star = pr.omega_b * pr.c_f * x[kVoD] + pr.k_pv * ev_q + pr.k_iv * x[kPhiQ];

  // Current loop: PI plus inductor decoupling feedforward; ideal inverter.
  const double ec_d = il_d_star - x[kIlD];
  const double ec_q = il_q_star - x[kIlQ];
  dx[kGammaD] = ec_d;
  dx[kGammaQ] = ec_q;
  const double v_id = -pr.omega_b * pr.l_f * x[kIlQ] + pr.k_pc * ec_d + pr.k_ic * x[kGammaD];
  const double v_iq = pr.omega_b * pr.l_f * x[kIlD] + pr.k_pc * ec_q + pr.k_ic * x[kGammaQ];

  // LC filter; cross coupling at the DG's own rotating frequency.
  dx[kIlD] = (-pr.r_f * x[kIlD] + v_id - x[kVoD]) / pr.l_f + omega * x[kIlQ];
  dx[kIlQ] = (-pr.r_f * x[kIlQ] + v_iq - x[kVoQ]) / pr.l_f - omega * x[kIlD];
  dx[kVoD] = omega * x[kVoQ] + (x[kIlD] - x[kIoD]) / pr.c_f;
  dx[kVoQ] = -omega * x[kVoD] + (x[kIlQ] - x[kIoQ]) / pr.c_f;

  if (breaker_closed) {
    dx[kIoD] = (-pr.r_c * x[kIoD] + x[kVoD] - v_bd) / pr.l_c + omega * x[kIoQ];
    dx[kIoQ] = (-pr.r_c * x[kIoQ] + x[kVoQ] - v_bq) / pr.l_c - omega * x[kIoD];
  } else {
    // Open breaker: coupling branch held at zero current.
    dx[kIoD] = 0.0;
    dx[kIoQ] = 0.0;
  }
}

}  // namespace mgsim
