#pragma once

#include <Eigen/Core>

namespace amagold {

// Position θ and momentum r of the momentum-augmented chain.
struct PhaseState {
  Eigen::VectorXd position;
  Eigen::VectorXd momentum;

  Eigen::Index dimension() const noexcept { return position.size(); }

  bool is_finite() const { return position.allFinite() && momentum.allFinite(); }

  bool consistent() const noexcept { return position.size() == momentum.size(); }

  friend bool operator==(const PhaseState& a, const PhaseState& b) {
    return a.position.size() == b.position.size() && a.momentum.size() == b.momentum.size() &&
           a.position == b.position && a.momentum == b.momentum;
  }
};

// (θ, r) ↦ (θ, -r)
inline PhaseState momentum_flip(const PhaseState& state) {
  return {state.position, -state.momentum};
}

struct MomentumFlip {
  PhaseState operator()(const PhaseState& state) const { return momentum_flip(state); }
};

}  // namespace amagold
