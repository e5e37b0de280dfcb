#pragma once

#include <array>
#include <string>
#include <vector>

#include "ccg/gaussdyn.hpp"
#include "ccg/lingrid.hpp"
#include "ccg/model.hpp"

namespace ccg {

inline constexpr double kSpeedOfLight = 299792458.0;

/// n_eff(lambda) = sum_i c_i (lambda - center)^i, lambda in um.
struct WaveguideDispersion {
  std::vector<double> coefficients{2.44, -1.13, -0.04};
  double center_um = 1.55;

  double effective_index(double wavelength_um) const;
  double index_slope(double wavelength_um) const;  // d n_eff / d lambda, 1/um
  /// c / (n_eff - lambda dn/dlambda)
  double group_velocity(double wavelength_um) const;
};

struct RingGeometry {
  double circumference = 202.5625e-6;  // m
  double self_coupling = 0.984923;     // amplitude round-trip transmission

  /// sqrt(2 (1 - sigma) v^2 / L). Throws Error(InvalidModel) unless
  /// 0 < sigma < 1.
  double coupling_rate(double group_velocity) const;
};

/// Backscatter parameters of one resonance; deltas are fractions of gamma.
struct ResonanceDefects {
  cplx g{0.0, 0.0};         // rad/s
  cplx delta_fb{0.0, 0.0};
  cplx delta_bf{0.0, 0.0};
  cplx c{0.0, 0.0};
};

struct RingDefectParams {
  ResonanceDefects pump;
  ResonanceDefects signal;
  ResonanceDefects idler;
};

/// Wavelength (um) of ITU channel `ch` on the 100 GHz grid at 190 THz + ch.
double itu_wavelength_um(int channel);
double angular_frequency(double wavelength_um);

/// Two cavity modes <prefix>f, <prefix>b and four channels <prefix>1f,
/// <prefix>1b (bus), <prefix>2f, <prefix>2b (phantom loss):
///   gamma = g_r [[1, d_fb, 1, 0], [d_bf, 1, 0, 1]]
///   g     = [[0, g], [g*, 0]]
///   C     = v [[0, c], [c*, 0]] on the bus block
CoupledCavityModel build_resonance_model(const WaveguideDispersion& dispersion,
                                         const RingGeometry& geometry,
                                         double wavelength_um,
                                         const ResonanceDefects& defects,
                                         const std::string& prefix);

struct ScenarioParams {
  WaveguideDispersion dispersion;
  RingGeometry geometry;
  int pump_channel = 39;
  int signal_channel = 43;
  int idler_channel = 35;
  RingDefectParams defects;
  NonlinearCoupling coupling;
  KGrid grid = KGrid::standard();
  double detuning = 0.0;  // rad/s, enters the convolution argument only
};

/// Pump ring, signal+idler system and the wiring of the squeezing blocks.
struct FwmScenario {
  ScenarioParams params;
  CoupledCavityModel pump_model;
  CoupledCavityModel signal_model;  // cavities sf, sb, if, ib
  std::vector<ConvolutionSpec> convolutions;
  std::vector<SqWiring> wiring;
  std::string pump_input = "p1f";
  double v_pump = 0.0, v_signal = 0.0, v_idler = 0.0;
};

/// Forward pump pair drives (sf, if), backward pair drives (sb, ib).
FwmScenario build_fwm_scenario(const ScenarioParams& params);

/// Solves the pump and builds Gamma_Sq for the scenario.
struct PumpedScenario {
  FwmScenario scenario;
  DerivedLinear pump_derived;
  DerivedLinear signal_derived;
  PumpSolution pump;
  ConvolutionTable table;
  GammaBlocks blocks;
};

PumpedScenario pump_scenario(const FwmScenario& scenario);

}  // namespace ccg
