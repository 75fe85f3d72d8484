#pragma once

#include <cstddef>

namespace mgsim {

/// Classical 4th-order fixed-step Runge-Kutta advance of dx/dt = f(x).
/// `f(x, dx)` writes the derivative; k1..k4 and tmp are caller scratch of
/// size n. Deterministic; O(dt^5) local error on smooth fields.
template <typename Deriv>
inline void rk4_step(Deriv&& f, double* x, int n, double dt, double* k1,
                     double* k2, double* k3, double* k4, double* tmp) {
  f(x, k1);
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  f(tmp, k2);
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  f(tmp, k3);
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  f(tmp, k4);
  const double w = dt / 6.0;
  for (int i = 0; i < n; ++i)
    x[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace mgsim
