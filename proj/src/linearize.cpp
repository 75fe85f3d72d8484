#include "mgsim/linearize.hpp"

#include <algorithm>
#include <stdexcept>

namespace mgsim {

ExtendedModel::ExtendedModel(double g0) : g0_(g0) {
  if (!(g0 > 0.0)) throw std::invalid_argument("extended model: g0 must be positive");
  a_.setZero();
  a_(0, 1) = 1.0;
  a_(1, 2) = 1.0;
  b_ << 0.0, g0, 0.0;
  c_ << 1.0, 0.0, 0.0;
}

double lie_lf2_h(const DGParams& p, const double* x, double v_bd, double omega_i) {
  const double cf_lf = p.c_f * p.l_f;
  const double cf_lc = p.c_f * p.l_c;
  double acc = 0.0;
  acc += (-omega_i * omega_i - (p.k_pc * p.k_pv + 1.0) / cf_lf - 1.0 / cf_lc) * x[kVoD];
  acc += -(p.omega_b * p.k_pc / p.l_f) * x[kVoQ];
  acc += (p.r_c / cf_lc) * x[kIoD];
  acc += -(2.0 * omega_i / p.c_f) * x[kIoQ];
  acc += -((p.r_f + p.k_pc) / cf_lf) * x[kIlD];
  acc += ((2.0 * omega_i - p.omega_b) / p.c_f) * x[kIlQ];
  acc += -(p.k_pc * p.k_pv * p.n_q / cf_lf) * x[kQ];
  acc += (p.k_pc * p.k_iv / cf_lf) * x[kPhiD];
  acc += (p.k_ic / cf_lf) * x[kGammaD];
  acc += v_bd / cf_lc;
  return acc;
}

double lie_lg_lf_h(const DGParams& p) { return p.k_pc * p.k_pv / (p.c_f * p.l_f); }

double vdot_od(const DGParams& p, const double* x, double omega_i) {
  return omega_i * x[kVoQ] + (x[kIlD] - x[kIoD]) / p.c_f;
}

ActuatorCommand invert_input(double z, double xi_hat, double g0, double u_max,
                             double u_prev, double max_rate, double dt) {
  double u = (z - xi_hat) / g0;
  bool sat = false;
  if (max_rate > 0.0 && dt > 0.0) {
    const double step = max_rate * dt;
    if (u > u_prev + step) {
      u = u_prev + step;
      sat = true;
    } else if (u < u_prev - step) {
      u = u_prev - step;
      sat = true;
    }
  }
  if (u < 0.0) {
    u = 0.0;
    sat = true;
  } else if (u > u_max) {
    u = u_max;
    sat = true;
  }
  return {u, sat};
}

double ground_truth_xi(const DGParams& plant, const DGParams& nominal,
                       const double* x, double v_bd, double omega_i, double u) {
  const double delta_g = lie_lg_lf_h(plant) - lie_lg_lf_h(nominal);
  return lie_lf2_h(plant, x, v_bd, omega_i) + delta_g * u;
}

}  // namespace mgsim
