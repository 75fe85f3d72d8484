#include "mgsim/network.hpp"

#include <stdexcept>

namespace mgsim {

int NetworkModel::bus_index(const std::string& name) const {
  for (int i = 0; i < bus_count(); ++i)
    if (bus_names[i] == name) return i;
  return -1;
}

void NetworkModel::validate() const {
  if (bus_names.empty()) throw std::invalid_argument("network: no buses defined");
  if (!(r_virtual > 0.0))
    throw std::invalid_argument("network: r_virtual must be positive");
  auto check_bus = [&](int b, const std::string& what) {
    if (b < 0 || b >= bus_count())
      throw std::invalid_argument("network: " + what + " references unknown bus");
  };
  for (const auto& ln : lines) {
    check_bus(ln.from_bus, "line " + ln.name + " (from)");
    check_bus(ln.to_bus, "line " + ln.name + " (to)");
    if (ln.from_bus == ln.to_bus)
      throw std::invalid_argument("network: line " + ln.name + " connects a bus to itself");
    if (ln.r < 0.0 || !(ln.l > 0.0))
      throw std::invalid_argument("network: line " + ln.name + " needs R >= 0 and L > 0");
  }
  for (const auto& ld : loads) {
    check_bus(ld.bus, "load " + ld.name);
    if (ld.r < 0.0 || !(ld.l > 0.0))
      throw std::invalid_argument("network: load " + ld.name + " needs R >= 0 and L > 0");
    if (!(ld.scale > 0.0))
      throw std::invalid_argument("network: load " + ld.name + " scale must be positive");
  }
  for (size_t i = 0; i < dg_attachments.size(); ++i)
    check_bus(dg_attachments[i].bus, "dg attachment " + std::to_string(i));

  // Buses carrying connected DGs must all sit in one line-connected component.
  if (bus_count() > 1) {
    std::vector<int> comp(bus_names.size(), -1);
    int n_comp = 0;
    for (int b = 0; b < bus_count(); ++b) {
      if (comp[b] >= 0) continue;
      comp[b] = n_comp;
      std::vector<int> stack{b};
      while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        for (const auto& ln : lines) {
          int other = -1;
          if (ln.from_bus == cur) other = ln.to_bus;
          if (ln.to_bus == cur) other = ln.from_bus;
          if (other >= 0 && comp[other] < 0) {
            comp[other] = n_comp;
            stack.push_back(other);
          }
        }
      }
      ++n_comp;
    }
    int dg_comp = -1;
    for (const auto& att : dg_attachments) {
      if (!att.breaker_closed) continue;
      if (dg_comp < 0) dg_comp = comp[att.bus];
      if (comp[att.bus] != dg_comp)
        throw std::invalid_argument(
            "network: connected DGs sit on electrically disjoint bus groups");
    }
  }
}

void set_breaker(NetworkModel& net, const std::string& target, bool closed) {
  for (auto& ld : net.loads)
    if (ld.name == target) {
      ld.connected = closed;
      return;
    }
  throw std::invalid_argument("set_breaker: unknown target '" + target + "'");
}

void set_dg_breaker(NetworkModel& net, int dg_index, bool closed) {
  if (dg_index < 0 || dg_index >= static_cast<int>(net.dg_attachments.size()))
    throw std::invalid_argument("set_dg_breaker: unknown DG index " +
                                std::to_string(dg_index));
  net.dg_attachments[dg_index].breaker_closed = closed;
}

void bus_voltages(const NetworkModel& net, const double* net_x,
                  const double* dg_inj, double* v_bus_d, double* v_bus_q) {
  const int nb = net.bus_count();
  for (int b = 0; b < nb; ++b) {
    v_bus_d[b] = 0.0;
    v_bus_q[b] = 0.0;
  }
  for (size_t i = 0; i < net.dg_attachments.size(); ++i) {
    const auto& att = net.dg_attachments[i];
    if (!att.breaker_closed) continue;
    v_bus_d[att.bus] += dg_inj[2 * i];
    v_bus_q[att.bus] += dg_inj[2 * i + 1];
  }
  const int nl = static_cast<int>(net.lines.size());
  for (int k = 0; k < nl; ++k) {
    const auto& ln = net.lines[k];
    const double id = net_x[2 * k], iq = net_x[2 * k + 1];
    v_bus_d[ln.from_bus] -= id;
    v_bus_q[ln.from_bus] -= iq;
    v_bus_d[ln.to_bus] += id;
    v_bus_q[ln.to_bus] += iq;
  }
  for (size_t m = 0; m < net.loads.size(); ++m) {
    if (!net.loads[m].connected) continue;
    const int b = net.loads[m].bus;
    v_bus_d[b] -= net_x[2 * (nl + static_cast<int>(m))];
    v_bus_q[b] -= net_x[2 * (nl + static_cast<int>(m)) + 1];
  }
  for (int b = 0; b < nb; ++b) {
    v_bus_d[b] *= net.r_virtual;
    v_bus_q[b] *= net.r_virtual;
  }
}

void network_derivative(const NetworkModel& net, const double* net_x,
                        const double* v_bus_d, const double* v_bus_q,
                        double omega_com, double* dnet_x) {
  const int nl = static_cast<int>(net.lines.size());
  for (int k = 0; k < nl; ++k) {
    const auto& ln = net.lines[k];
    const double id = net_x[2 * k], iq = net_x[2 * k + 1];
    dnet_x[2 * k] = (-ln.r * id + v_bus_d[ln.from_bus] - v_bus_d[ln.to_bus]) / ln.l +
                    omega_com * iq;
    dnet_x[2 * k + 1] = (-ln.r * iq + v_bus_q[ln.from_bus] - v_bus_q[ln.to_bus]) / ln.l -
                        omega_com * id;
  }
  for (size_t m = 0; m < net.loads.size(); ++m) {
    const int o = 2 * (nl + static_cast<int>(m));
    const auto& ld = net.loads[m];
    if (!ld.connected) {
      dnet_x[o] = 0.0;
      dnet_x[o + 1] = 0.0;
      continue;
    }
    const double r = net.load_r_eff(static_cast<int>(m));
    const double l = net.load_l_eff(static_cast<int>(m));
    const double id = net_x[o], iq = net_x[o + 1];
    dnet_x[o] = (-r * id + v_bus_d[ld.bus]) / l + omega_com * iq;
    dnet_x[o + 1] = (-r * iq + v_bus_q[ld.bus]) / l - omega_com * id;
  }
}

double common_frequency(const std::vector<double>& dg_omegas,
                        const NetworkModel& net, int leader, int& source) {
  if (leader >= 0 && leader < static_cast<int>(dg_omegas.size()) &&
      net.dg_attachments[leader].breaker_closed) {
    source = leader;
    return dg_omegas[leader];
  }
  for (size_t i = 0; i < dg_omegas.size(); ++i)
    if (net.dg_attachments[i].breaker_closed) {
      source = static_cast<int>(i);
      return dg_omegas[i];
    }
  throw std::runtime_error("common_frequency: no connected DG to define the common frame");
}

}  // namespace mgsim
