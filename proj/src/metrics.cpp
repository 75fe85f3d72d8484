#include "mgsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mgsim {

namespace {

double rms(const std::vector<double>& v) {
  if (v.empty()) return kUnavailable;
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kUnavailable;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return kUnavailable;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

Metrics compute_metrics(const Trace& trace, const Scenario& scenario) {
  Metrics out;
  out.v_ref = scenario.v_ref;
  if (trace.empty()) throw std::invalid_argument("compute_metrics: empty trace");

  const int n_dg = static_cast<int>(trace.dg_names.size());
  const auto& recs = trace.records;

  // Window boundaries: t = 0, each event timestamp, duration.
  std::vector<double> bounds{recs.front().t};
  for (const auto& ev : scenario.events)
    if (ev.time > bounds.back()) bounds.push_back(ev.time);
  if (recs.back().t > bounds.back()) bounds.push_back(recs.back().t);

  // Lyapunov tolerance reference: V at the first record at/after activation.
  double v_activation = kUnavailable;
  for (const auto& ev : scenario.events)
    if (ev.kind == EventKind::ActivateSecondary) {
      for (const auto& r : recs)
        if (r.t >= ev.time - 1e-12) {
          v_activation = r.lyapunov;
          break;
        }
      break;
    }
  const double lyap_tol = std::isnan(v_activation) ? 0.0 : 1e-6 * v_activation;
  const double layer = scenario.controller.ftsm.boundary_layer;

  size_t cursor = 0;
  for (size_t w = 0; w + 1 < bounds.size(); ++w) {
    WindowMetrics wm;
    wm.t_begin = bounds[w];
    wm.t_end = bounds[w + 1];
    wm.dg.resize(n_dg);

    // Collect record index range [first, last) of this window.
    while (cursor < recs.size() && recs[cursor].t < wm.t_begin - 1e-12) ++cursor;
    size_t first = cursor;
    size_t last = first;
    while (last < recs.size() && recs[last].t < wm.t_end - 1e-12) ++last;
    if (w + 2 == bounds.size() && last < recs.size()) ++last;  // include final record
    cursor = last;
    if (first >= last) {
      out.windows.push_back(std::move(wm));
      continue;
    }

    const double span = wm.t_end - wm.t_begin;
    wm.stats_available = span >= 0.15;
    const double steady_from = wm.t_end - 0.2 * span;

    // Settling: first tau with all connected DGs inside the band for 0.1 s.
    if (span >= out.settle_hold) {
      size_t hold_start = first;
      bool holding = false;
      for (size_t i = first; i < last; ++i) {
        bool inside = true;
        for (const auto& d : recs[i].dg)
          if (d.connected && std::abs(d.v_od - out.v_ref) >= out.settle_band) {
            inside = false;
            break;
          }
        if (inside && !holding) {
          holding = true;
          hold_start = i;
        } else if (!inside) {
          holding = false;
        }
        if (holding && recs[i].t - recs[hold_start].t >= out.settle_hold) {
          wm.settled = true;
          wm.settling_time = recs[hold_start].t - wm.t_begin;
          break;
        }
      }
      // A hold that reaches the window end also counts when the remaining
      // window was shorter than the hold period but the band held throughout.
      if (!wm.settled && holding &&
          recs[last - 1].t - recs[hold_start].t >= out.settle_hold) {
        wm.settled = true;
        wm.settling_time = recs[hold_start].t - wm.t_begin;
      }
    }

    // Per-DG accumulators.
    std::vector<std::vector<double>> v_err(n_dg), v_raw(n_dg), e_x1(n_dg), e_x2(n_dg),
        e_x3(n_dg), sig_vdot(n_dg), sig_xi(n_dg);
    std::vector<double> dispersion, share_mean;
    std::vector<double> whole_max(n_dg, kUnavailable);

    for (size_t i = first; i < last; ++i) {
      const auto& r = recs[i];
      for (int g = 0; g < n_dg; ++g) {
        const auto& d = r.dg[g];
        if (!d.connected) continue;
        const double err = std::abs(d.v_od - out.v_ref);
        if (std::isnan(whole_max[g]) || err > whole_max[g]) whole_max[g] = err;
      }
      if (!wm.stats_available || r.t < steady_from) continue;

      double share_lo = 0.0, share_hi = 0.0, share_acc = 0.0;
      int share_n = 0;
      for (int g = 0; g < n_dg; ++g) {
        const auto& d = r.dg[g];
        if (!d.connected) continue;
        v_err[g].push_back(d.v_od - out.v_ref);
        v_raw[g].push_back(d.v_od);
        e_x1[g].push_back(d.x_hat1 - d.v_od);
        e_x2[g].push_back(d.x_hat2 - d.vdot_true);
        e_x3[g].push_back(d.x_hat3 - d.xi_true);
        sig_vdot[g].push_back(d.vdot_true);
        sig_xi[g].push_back(d.xi_true);
        const double nq_q = scenario.dgs[g].params.n_q * d.q;
        if (share_n == 0) {
          share_lo = share_hi = nq_q;
        } else {
          share_lo = std::min(share_lo, nq_q);
          share_hi = std::max(share_hi, nq_q);
        }
        share_acc += nq_q;
        ++share_n;
      }
      if (share_n >= 2) {
        dispersion.push_back(share_hi - share_lo);
        share_mean.push_back(share_acc / share_n);
      }
    }

    for (int g = 0; g < n_dg; ++g) {
      auto& st = wm.dg[g];
      st.whole_max_abs_v_err = whole_max[g];
      if (v_err[g].empty()) continue;
      st.mean_v_err = mean(v_err[g]);
      std::vector<double> abs_err(v_err[g]);
      for (double& x : abs_err) x = std::abs(x);
      st.mean_abs_v_err = mean(abs_err);
      st.max_abs_v_err = *std::max_element(abs_err.begin(), abs_err.end());
      st.std_v = stddev(v_raw[g]);
      st.rmse_x1 = rms(e_x1[g]);
      st.rmse_x2 = rms(e_x2[g]);
      st.rmse_x3 = rms(e_x3[g]);
      st.rms_vdot = rms(sig_vdot[g]);
      st.rms_xi = rms(sig_xi[g]);
    }
    if (!dispersion.empty()) {
      wm.sharing_dispersion = mean(dispersion);
      wm.sharing_mean = mean(share_mean);
    }

    // Surface / Lyapunov behavior after the reaching transient.
    if (!std::isnan(v_activation) && wm.t_begin >= 0.0) {
      size_t reach_idx = last;
      for (size_t i = first; i < last; ++i) {
        bool all_inside = true;
        for (const auto& d : recs[i].dg)
          if (d.connected && layer > 0.0 && std::abs(d.s) >= layer) {
            all_inside = false;
            break;
          }
        if (all_inside) {
          reach_idx = i;
          wm.reach_time = recs[i].t - wm.t_begin;
          break;
        }
      }
      if (reach_idx < last) {
        double max_s = 0.0;
        for (size_t i = reach_idx; i < last; ++i) {
          for (const auto& d : recs[i].dg)
            if (d.connected) max_s = std::max(max_s, std::abs(d.s));
          if (i > reach_idx && recs[i].lyapunov > recs[i - 1].lyapunov + lyap_tol)
            ++wm.lyapunov_violations;
        }
        wm.max_abs_s_after_reach = max_s;
      }
    }

    out.windows.push_back(std::move(wm));
  }
  return out;
}

std::string Metrics::summary(const std::vector<std::string>& dg_names) const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "metrics: v_ref=" << v_ref << " V, band=+/-" << settle_band
     << " V, hold=" << settle_hold << " s\n";
  for (size_t w = 0; w < windows.size(); ++w) {
    const auto& wm = windows[w];
    os << "window " << w << " [" << wm.t_begin << ", " << wm.t_end << ")";
    if (wm.settled)
      os << " settled at +" << wm.settling_time << " s";
    else
      os << " not settled";
    if (!std::isnan(wm.sharing_dispersion))
      os << ", nqQ dispersion " << wm.sharing_dispersion << " V (mean "
         << wm.sharing_mean << " V)";
    if (wm.lyapunov_violations > 0)
      os << ", lyapunov violations " << wm.lyapunov_violations;
    os << "\n";
    if (!wm.stats_available) {
      os << "  (window too short for steady statistics)\n";
      continue;
    }
    for (size_t g = 0; g < wm.dg.size(); ++g) {
      const auto& st = wm.dg[g];
      const std::string name =
          g < dg_names.size() ? dg_names[g] : "dg" + std::to_string(g + 1);
      if (std::isnan(st.mean_v_err)) {
        os << "  " << name << ": disconnected\n";
        continue;
      }
      os << "  " << name << ": mean err " << st.mean_v_err << " V, max |err| "
         << st.max_abs_v_err << " V, std " << st.std_v << " V";
      if (!std::isnan(st.rmse_x2))
        os << ", obs rmse (x2 " << st.rmse_x2 << ", x3 " << st.rmse_x3 << ")";
      os << "\n";
    }
  }
  os << "covariance resets: " << covariance_resets << "\n";
  return os.str();
}

}  // namespace mgsim
