#include "mgsim/trace.hpp"

#include <cstdio>
#include <stdexcept>

namespace mgsim {

void export_csv(const Trace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("export_csv: cannot open '" + path + "' for writing");

  std::fputs("t", f);
  for (const auto& name : trace.dg_names) {
    const char* cols[] = {"v_od",  "v_oq",  "P",     "Q",     "u",    "s",
                          "e1",    "e2",    "xhat1", "xhat2", "xhat3", "p11",
                          "p22",   "p33",   "innov", "vdot",  "xi",    "sat",
                          "conn"};
    for (const char* c : cols) std::fprintf(f, ",%s_%s", name.c_str(), c);
  }
  std::fputs(",V_lyap,omega_com\n", f);

  for (const auto& rec : trace.records) {
    std::fprintf(f, "%.9g", rec.t);
    for (const auto& d : rec.dg) {
      std::fprintf(f,
                   ",%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                   "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%d",
                   d.v_od, d.v_oq, d.p, d.q, d.u, d.s, d.e1, d.e2, d.x_hat1,
                   d.x_hat2, d.x_hat3, d.p11, d.p22, d.p33, d.innovation,
                   d.vdot_true, d.xi_true, d.saturated ? 1 : 0, d.connected ? 1 : 0);
    }
    std::fprintf(f, ",%.9g,%.9g\n", rec.lyapunov, rec.omega_com);
  }
  std::fclose(f);
}

}  // namespace mgsim
