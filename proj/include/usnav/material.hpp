#pragma once

#include <string>

#include "usnav/common.hpp"

namespace usnav {

/// Surface properties as seen by each sensing modality.
struct Material {
  std::string name = "wall";
  double acoustic_reflectivity = 0.8;  // [0, 1]
  bool optical_tof_visible = true;     // false for glass and black surfaces
  double feature_density = 0.5;        // optical texture, [0, 1]
  double softness = 0.0;               // [0, 1], soft objects return weak echoes off-axis
};

inline void validate(const Material& m) {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (m.name.empty() || !unit(m.acoustic_reflectivity) || !unit(m.feature_density) || !unit(m.softness)) {
    throw Error(ErrorCode::invalid_argument, "material '" + m.name + "' has properties outside [0, 1]");
  }
}

namespace materials {

inline Material wall() { return {"wall", 0.8, true, 0.5, 0.0}; }
inline Material glass() { return {"glass", 0.95, false, 0.0, 0.0}; }
inline Material black_panel() { return {"black", 0.7, false, 0.1, 0.0}; }
inline Material soft_chair() { return {"soft_chair", 0.5, true, 0.6, 0.8}; }
inline Material table_top() { return {"table", 0.9, true, 0.05, 0.0}; }
inline Material carpet() { return {"carpet", 0.6, true, 0.9, 0.3}; }

}  // namespace materials

}  // namespace usnav
