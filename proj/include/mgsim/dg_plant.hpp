#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

namespace mgsim {

/// Indices into the 13-entry per-DG state vector (paper ordering).
enum DgStateIndex : int {
  kDelta = 0,  // frame angle vs common frame (rad)
  kP,          // filtered active power (W)
  kQ,          // filtered reactive power (var)
  kPhiD,       // voltage-loop integrator, d axis (V s)
  kPhiQ,       // voltage-loop integrator, q axis (V s)
  kGammaD,     // current-loop integrator, d axis (A s)
  kGammaQ,     // current-loop integrator, q axis (A s)
  kIlD,        // filter inductor current, d (A)
  kIlQ,        // filter inductor current, q (A)
  kVoD,        // output capacitor voltage, d (V)
  kVoQ,        // output capacitor voltage, q (V)
  kIoD,        // coupling branch current, d (A)
  kIoQ,        // coupling branch current, q (A)
  kDgStateCount
};

const char* dg_state_name(int index);

/// Per-DG physical, droop, and inner-loop parameters (Table-I style).
struct DGParams {
  double m_p = 0.0;      // frequency droop gain (rad/s per W)
  double n_q = 0.0;      // voltage droop gain (V per var)
  double omega_c = 0.0;  // power measurement filter cutoff (rad/s)
  double r_f = 0.0, l_f = 0.0, c_f = 0.0;  // LC filter (ohm, H, F)
  double r_c = 0.0, l_c = 0.0;             // coupling branch (ohm, H)
  double k_pv = 0.0, k_iv = 0.0;           // voltage loop PI
  double k_pc = 0.0, k_ic = 0.0;           // current loop PI
  double omega_b = 0.0;  // rated angular frequency (rad/s)
  double omega_n = 0.0;  // primary frequency reference (rad/s)

  /// Throws std::invalid_argument naming the offending field.
  void validate(const std::string& dg_name) const;
  /// Nominal input gain g0 = K_Pc K_Pv / (C_f L_f).
  double g0() const { return k_pc * k_pv / (c_f * l_f); }
};

/// Multiplicative factors applied to the plant's physical parameters only;
/// the controller and observer keep the nominal values.
struct PerturbationConfig {
  double r_f = 1.0, l_f = 1.0, c_f = 1.0, r_c = 1.0, l_c = 1.0;

  bool is_identity() const {
    return r_f == 1.0 && l_f == 1.0 && c_f == 1.0 && r_c == 1.0 && l_c == 1.0;
  }
  void validate(const std::string& dg_name) const;
  DGParams apply(const DGParams& nominal) const;
};

/// Named view of one DG's 13 states.
struct DGState {
  std::array<double, kDgStateCount> x{};

  double& operator[](int i) { return x[static_cast<size_t>(i)]; }
  double operator[](int i) const { return x[static_cast<size_t>(i)]; }
  double delta() const { return x[kDelta]; }
  double p() const { return x[kP]; }
  double q() const { return x[kQ]; }
  double v_od() const { return x[kVoD]; }
  double v_oq() const { return x[kVoQ]; }
  double i_od() const { return x[kIoD]; }
  double i_oq() const { return x[kIoQ]; }
};

struct DroopSetpoints {
  double omega;      // rad/s
  double v_od_star;  // V
  double v_oq_star;  // V (always 0)
};

/// omega_i = omega_n - m_P P, v_od* = V_n - n_Q Q, v_oq* = 0.
DroopSetpoints droop_setpoints(const DGParams& params, const double* x, double u);

inline double droop_omega(const DGParams& params, const double* x) {
  return params.omega_n - params.m_p * x[kP];
}

/// p = v_od i_od + v_oq i_oq, q = v_oq i_od - v_od i_oq.
void instantaneous_power(const double* x, double& p_inst, double& q_inst);

/// Right-hand side of the 13 per-DG ODEs. Inputs: secondary command u = V_n,
/// bus voltage (v_bd, v_bq) in the DG's own frame, common frequency.
/// When the breaker is open the coupling-branch states are held at zero.
void dg_derivative(const DGParams& params, const double* x, double u,
                   double v_bd, double v_bq, double omega_com, bool breaker_closed,
                   double* dx);

/// Rotation by +delta (local -> common frame).
inline void local_to_common(double delta, double d, double q, double& out_d, double& out_q) {
  double c = std::cos(delta), s = std::sin(delta);
  out_d = c * d - s * q;
  out_q = s * d + c * q;
}

/// Rotation by -delta (common -> local frame).
inline void common_to_local(double delta, double d, double q, double& out_d, double& out_q) {
  double c = std::cos(delta), s = std::sin(delta);
  out_d = c * d + s * q;
  out_q = -s * d + c * q;
}

}  // namespace mgsim
