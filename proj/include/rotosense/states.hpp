#pragma once

// Built-in probe states.

#include "rotosense/spin_core.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace rotosense::states {

/// (|2,2> + sqrt(2)|2,-1>) / sqrt(3), the tetrahedron state.
inline SpinState tetra1() {
  const Spin j = Spin::from_value(2.0);
  CVector v = CVector::Zero(j.dim());
  v(0) = 1.0;            // m = 2
  v(3) = std::sqrt(2.0);  // m = -1
  return SpinState(j, v / std::sqrt(3.0));
}

/// (|2,2> + |2,-2> + i sqrt(2)|2,0>) / 2, the tetrahedron state used with Bell-pair readout.
inline SpinState tetra2() {
  const Spin j = Spin::from_value(2.0);
  CVector v = CVector::Zero(j.dim());
  v(0) = 0.5;
  v(2) = cd{0.0, std::sqrt(2.0) / 2.0};
  v(4) = 0.5;
  return SpinState(j, v);
}

/// (|3,2> + |3,-2>) / sqrt(2), the balanced six-photon state.
inline SpinState balance() {
  const Spin j = Spin::from_value(3.0);
  CVector v = CVector::Zero(j.dim());
  v(1) = 1.0 / std::sqrt(2.0);
  v(5) = 1.0 / std::sqrt(2.0);
  return SpinState(j, v);
}

/// Fully polarized |J, J>.
inline SpinState coherent_top(Spin j) { return SpinState::basis(j, j.value()); }

inline std::optional<SpinState> by_name(std::string_view name) {
  if (name == "tetra1") return tetra1();
  if (name == "tetra2") return tetra2();
  if (name == "balance") return balance();
  return std::nullopt;
}

}  // namespace rotosense::states
