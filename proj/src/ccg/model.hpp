#pragma once

#include <string>
#include <vector>

#include "ccg/linalg.hpp"

namespace ccg {

enum class Direction { Forward, Backward };
enum class ChannelKind { Bus, Phantom };

/// Waveguide effective field coupled to the cavities at z = 0.
struct ChannelSpec {
  std::string label;
  double carrier_frequency = 0.0;  // rad/s
  double group_velocity = 0.0;     // m/s
  Direction direction = Direction::Forward;
  ChannelKind kind = ChannelKind::Bus;
};

struct CavitySpec {
  std::string label;
  double resonance_frequency = 0.0;  // rad/s
  double group_velocity = 0.0;       // phenomenological, m/s
};

/// Channels, cavities and the three coupling matrices of the linear
/// Hamiltonian: gamma (N x J, channel-cavity), g (N x N, cavity-cavity)
/// and C (J x J, channel-channel).
struct CoupledCavityModel {
  std::vector<ChannelSpec> channels;
  std::vector<CavitySpec> cavities;
  CMatrix gamma;
  CMatrix g;
  CMatrix C;

  int num_channels() const { return static_cast<int>(channels.size()); }
  int num_cavities() const { return static_cast<int>(cavities.size()); }

  /// Index by label; throws Error(UnknownLabel).
  int channel_index(const std::string& label) const;
  int cavity_index(const std::string& label) const;

  RVector channel_velocities() const;
  RVector cavity_velocities() const;
  RVector channel_frequencies() const;
  RVector cavity_frequencies() const;
};

/// Constant operators shared by every solver.
///   C_tilde = 1 + (i/2) V^-1 C
///   T       = C_tilde^-1 C_tilde^dagger
///   gamma_bar = gamma C_tilde^-1
///   Gamma_bar = 1/2 gamma_bar V^-1 gamma^dagger + i g
struct DerivedLinear {
  CMatrix C_tilde;
  CMatrix T;
  CMatrix gamma_bar;
  CMatrix Gamma_bar;

  RVector channel_velocity;
  RVector cavity_velocity;
  RVector channel_frequency;
  RVector cavity_frequency;
  std::vector<std::string> channel_labels;
  std::vector<std::string> cavity_labels;

  int num_channels() const { return static_cast<int>(T.rows()); }
  int num_cavities() const { return static_cast<int>(Gamma_bar.rows()); }
  int channel_index(const std::string& label) const;
  int cavity_index(const std::string& label) const;
};

inline constexpr double kHermitianTolerance = 1e-12;

/// Every broken invariant, one human-readable entry each; empty when the
/// model is valid. With require_tuned, also checks the equal-velocity and
/// equal-tuning conditions needed by the tuned solvers.
std::vector<std::string> validate_model(const CoupledCavityModel& model,
                                        bool require_tuned = false);

/// Throws Error(InvalidModel) on Hermiticity violations or shape mismatch,
/// Error(SingularSystem) when C_tilde cannot be inverted.
DerivedLinear derive_linear(const CoupledCavityModel& model);

/// Block-diagonal union of two models; labels must not collide.
CoupledCavityModel combine_models(const CoupledCavityModel& a,
                                  const CoupledCavityModel& b);

}  // namespace ccg
