#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chaosbench/dynamics.hpp"
#include "chaosbench/errors.hpp"

namespace chaosbench {

struct Preset {
  std::string name;
  std::string description;
  SystemSpec system;
  std::vector<double> x0;
  double step = 0.01;  // default integration step (Duffing: a whole fraction of the period)
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = [] {
    const DuffingParams holmes{};
    DuffingParams periodic{};
    periodic.gamma = 0.1;
    LorenzParams contracting{};
    contracting.R = 0.5;
    return std::vector<Preset>{
        {"lorenz-classic", "Lorenz sigma=10 R=28 b=8/3 (chaotic)", make_lorenz({}, "lorenz-classic"), {1.0, 1.0, 1.0}, 0.01},
        {"lorenz-contracting", "Lorenz R=0.5, globally attracted to the origin", make_lorenz(contracting, "lorenz-contracting"),
         {1.0, 1.0, 1.0}, 0.01},
        {"duffing-holmes", "Duffing alpha=1 beta=1 delta=0.25 gamma=0.3 omega=1 (chaotic)", make_duffing(holmes, "duffing-holmes"),
         {0.1, 0.0, 0.0}, forcing_period(holmes) / 64.0},
        {"duffing-periodic", "Duffing with gamma=0.1, period-1 response", make_duffing(periodic, "duffing-periodic"),
         {0.1, 0.0, 0.0}, forcing_period(periodic) / 64.0},
        {"harmonic", "x' = y, y' = -x", make_harmonic(), {1.0, 0.0}, 0.01},
    };
  }();
  return table;
}

inline const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace chaosbench
