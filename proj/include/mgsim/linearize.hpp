#pragma once

#include <Eigen/Dense>

#include "mgsim/dg_plant.hpp"

namespace mgsim {

/// Linearized view of one DG: output, its derivative, and the virtual
/// second-derivative command produced by the consensus law.
struct LinearizedOutputs {
  double y1 = 0.0;  // v_od (V)
  double y2 = 0.0;  // dv_od/dt (V/s)
  double z = 0.0;   // commanded d2v_od/dt2 (V/s^2)
};

/// Constant extended-state model [v_od, dv_od, xi] with input gain g0.
/// A is the integrator-chain shift matrix, B = (0, g0, 0), C = (1, 0, 0).
class ExtendedModel {
 public:
  explicit ExtendedModel(double g0);

  double g0() const { return g0_; }
  const Eigen::Matrix3d& a() const { return a_; }
  const Eigen::Vector3d& b() const { return b_; }
  const Eigen::RowVector3d& c() const { return c_; }

 private:
  double g0_;
  Eigen::Matrix3d a_;
  Eigen::Vector3d b_;
  Eigen::RowVector3d c_;
};

/// Second Lie derivative of v_od along the drift field, term by term.
/// `params` must be the plant's (possibly perturbed) set when computing
/// ground truth, or the nominal set when emulating an indirect measurement.
double lie_lf2_h(const DGParams& params, const double* x, double v_bd, double omega_i);

/// Input gain K_Pc K_Pv / (C_f L_f).
double lie_lg_lf_h(const DGParams& params);

/// dv_od/dt = omega_i v_oq + (i_ld - i_od)/C_f.
double vdot_od(const DGParams& params, const double* x, double omega_i);

struct ActuatorCommand {
  double u = 0.0;
  bool saturated = false;
};

/// u = (z - xi_hat) / g0, clamped to [0, u_max]. Optional slew-rate limit
/// against the previously applied command (rate <= 0 disables it).
ActuatorCommand invert_input(double z, double xi_hat, double g0, double u_max,
                             double u_prev, double max_rate, double dt);

/// Diagnostic ground-truth extended state: xi = L_F^2 h(plant) + Delta_g u,
/// Delta_g = g(plant) - g0(nominal). Never fed back into control.
double ground_truth_xi(const DGParams& plant, const DGParams& nominal,
                       const double* x, double v_bd, double omega_i, double u);

}  // namespace mgsim
