// Walks a drop through increasing uniform demand and prints, per demand,
// the network power with coordinated on/off patterns next to the power
// with every base station always on.  Usage: power_vs_demand [config.json]

#include "hetnet/hetnet.hpp"

#include <cstdio>
#include <iostream>

using namespace hetnet;

int main(int argc, char** argv) {
  try {
    const std::string path = argc > 1 ? argv[1] : HETNET_CONFIG_DIR "/fifteen_cells.json";
    Scenario sc = load_scenario(path);
    const PatternSet proposed = experiments::make_patterns(sc, "auto");
    const PatternSet reuse = experiments::make_patterns(sc, "reuse1");
    const RateTensor r_prop = build_rate_tensor(sc, proposed);
    const RateTensor r_reuse = build_rate_tensor(sc, reuse);
    std::printf("%zu base stations, %zu test points, %zu patterns\n\n", sc.num_bs(), sc.num_tp(),
                proposed.num_patterns());
    std::printf("%10s  %14s  %8s  %14s\n", "Mbit/s", "patterns [W]", "BSs on", "all on [W]");

    const SolverParams params;
    for (int step = 1; step <= 24; ++step) {
      const double demand = 0.25e6 * step;
      sc.set_uniform_demand(demand);
      const std::vector<double> d = sc.demands();
      const EnergyResult p = minimize_energy(sc, r_prop, d, params);
      const EnergyResult q = minimize_energy(sc, r_reuse, d, params);
      if (!p.feasible && !q.feasible) break;
      auto watts = [](const EnergyResult& e) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", e.total_power);
        return e.feasible ? std::string(buf) : std::string("-");
      };
      std::printf("%10.2f  %14s  %8s  %14s\n", demand / 1e6, watts(p).c_str(),
                  p.feasible ? std::to_string(p.active_bs.size()).c_str() : "-", watts(q).c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
