#include "ccg/model.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "ccg/error.hpp"

namespace ccg {

namespace {

template <typename Spec>
int find_label(const std::vector<Spec>& specs, const std::string& label,
               const char* what) {
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].label == label) return static_cast<int>(i);
  }
  throw Error(ErrorCode::UnknownLabel,
              std::string("unknown ") + what + " label '" + label + "'");
}

int find_in(const std::vector<std::string>& labels, const std::string& label,
            const char* what) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  throw Error(ErrorCode::UnknownLabel,
              std::string("unknown ") + what + " label '" + label + "'");
}

bool same_velocity(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

std::string entry(const char* name, Eigen::Index r, Eigen::Index c) {
  std::ostringstream os;
  os << name << "(" << r << "," << c << ")";
  return os.str();
}

}  // namespace

int CoupledCavityModel::channel_index(const std::string& label) const {
  return find_label(channels, label, "channel");
}

int CoupledCavityModel::cavity_index(const std::string& label) const {
  return find_label(cavities, label, "cavity");
}

RVector CoupledCavityModel::channel_velocities() const {
  RVector v(num_channels());
  for (int j = 0; j < num_channels(); ++j) v[j] = channels[j].group_velocity;
  return v;
}

RVector CoupledCavityModel::cavity_velocities() const {
  RVector v(num_cavities());
  for (int n = 0; n < num_cavities(); ++n) v[n] = cavities[n].group_velocity;
  return v;
}

RVector CoupledCavityModel::channel_frequencies() const {
  RVector v(num_channels());
  for (int j = 0; j < num_channels(); ++j) {
    v[j] = channels[j].carrier_frequency;
  }
  return v;
}

RVector CoupledCavityModel::cavity_frequencies() const {
  RVector v(num_cavities());
  for (int n = 0; n < num_cavities(); ++n) {
    v[n] = cavities[n].resonance_frequency;
  }
  return v;
}

int DerivedLinear::channel_index(const std::string& label) const {
  return find_in(channel_labels, label, "channel");
}

int DerivedLinear::cavity_index(const std::string& label) const {
  return find_in(cavity_labels, label, "cavity");
}

std::vector<std::string> validate_model(const CoupledCavityModel& model,
                                        bool require_tuned) {
  std::vector<std::string> issues;
  const Eigen::Index J = model.num_channels();
  const Eigen::Index N = model.num_cavities();

  if (model.gamma.rows() != N || model.gamma.cols() != J) {
    issues.push_back("gamma must be N x J");
  }
  if (model.g.rows() != N || model.g.cols() != N) {
    issues.push_back("g must be N x N");
  }
  if (model.C.rows() != J || model.C.cols() != J) {
    issues.push_back("C must be J x J");
  }
  if (!issues.empty()) return issues;

  std::set<std::string> seen;
  for (const auto& ch : model.channels) {
    if (!(ch.group_velocity > 0.0)) {
      issues.push_back("channel " + ch.label + ": group velocity must be > 0");
    }
    if (!(ch.carrier_frequency > 0.0)) {
      issues.push_back("channel " + ch.label +
                       ": carrier frequency must be > 0");
    }
    if (!seen.insert(ch.label).second) {
      issues.push_back("duplicate label " + ch.label);
    }
  }
  for (const auto& cav : model.cavities) {
    if (!(cav.group_velocity > 0.0)) {
      issues.push_back("cavity " + cav.label + ": group velocity must be > 0");
    }
    if (!(cav.resonance_frequency > 0.0)) {
      issues.push_back("cavity " + cav.label +
                       ": resonance frequency must be > 0");
    }
    if (!seen.insert(cav.label).second) {
      issues.push_back("duplicate label " + cav.label);
    }
  }

  // Entry-wise Hermiticity, scaled by the matrix norm.
  auto check_hermitian = [&](const CMatrix& m, const char* name) {
    const double scale = std::max(m.norm(), 1e-300);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = r; c < m.cols(); ++c) {
        if (std::abs(m(r, c) - std::conj(m(c, r))) >
            kHermitianTolerance * scale) {
          issues.push_back(std::string(name) + " is not Hermitian at " +
                           entry(name, r, c) + " vs " + entry(name, c, r));
        }
      }
    }
  };
  check_hermitian(model.g, "g");
  check_hermitian(model.C, "C");

  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index l = 0; l < J; ++l) {
      if (j == l || model.C(j, l) == cplx{0.0, 0.0}) continue;
      if (!same_velocity(model.channels[j].group_velocity,
                         model.channels[l].group_velocity)) {
        issues.push_back("velocity-match rule: " + entry("C", j, l) +
                         " couples channels " + model.channels[j].label +
                         " and " + model.channels[l].label +
                         " with different group velocities");
      }
    }
  }

  if (require_tuned) {
    for (Eigen::Index n = 0; n < N; ++n) {
      for (Eigen::Index j = 0; j < J; ++j) {
        if (model.gamma(n, j) == cplx{0.0, 0.0}) continue;
        if (!same_velocity(model.cavities[n].group_velocity,
                           model.channels[j].group_velocity)) {
          issues.push_back("tuned rule: " + entry("gamma", n, j) +
                           " couples unequal group velocities");
        }
      }
      for (Eigen::Index m = 0; m < N; ++m) {
        if (n == m || model.g(n, m) == cplx{0.0, 0.0}) continue;
        if (model.cavities[n].resonance_frequency !=
            model.cavities[m].resonance_frequency) {
          issues.push_back("tuned rule: " + entry("g", n, m) +
                           " couples unequal resonance frequencies");
        }
      }
    }
  }
  return issues;
}

DerivedLinear derive_linear(const CoupledCavityModel& model) {
  const auto issues = validate_model(model, false);
  if (!issues.empty()) {
    std::string msg = "invalid model:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw Error(ErrorCode::InvalidModel, msg);
  }
  const Eigen::Index J = model.num_channels();

  DerivedLinear d;
  d.channel_velocity = model.channel_velocities();
  d.cavity_velocity = model.cavity_velocities();
  d.channel_frequency = model.channel_frequencies();
  d.cavity_frequency = model.cavity_frequencies();
  for (const auto& ch : model.channels) d.channel_labels.push_back(ch.label);
  for (const auto& cav : model.cavities) d.cavity_labels.push_back(cav.label);

  const RVector inv_v = d.channel_velocity.cwiseInverse();
  d.C_tilde = CMatrix::Identity(J, J) +
              0.5 * I * (inv_v.asDiagonal() * model.C);

  Eigen::PartialPivLU<CMatrix> lu(d.C_tilde);
  const double det = std::abs(lu.determinant());
  if (!(det > 1e-14)) {
    throw Error(ErrorCode::SingularSystem,
                "C_tilde is singular: unphysical channel coupling");
  }
  const CMatrix c_inv = lu.inverse();
  d.T = c_inv * d.C_tilde.adjoint();
  d.gamma_bar = model.gamma * c_inv;
  d.Gamma_bar = 0.5 * d.gamma_bar * inv_v.asDiagonal() * model.gamma.adjoint() +
                I * model.g;
  return d;
}

CoupledCavityModel combine_models(const CoupledCavityModel& a,
                                  const CoupledCavityModel& b) {
  std::set<std::string> labels;
  for (const auto* m : {&a, &b}) {
    for (const auto& ch : m->channels) {
      if (!labels.insert(ch.label).second) {
        throw Error(ErrorCode::InvalidModel, "duplicate label " + ch.label);
      }
    }
    for (const auto& cav : m->cavities) {
      if (!labels.insert(cav.label).second) {
        throw Error(ErrorCode::InvalidModel, "duplicate label " + cav.label);
      }
    }
  }
  CoupledCavityModel out;
  out.channels = a.channels;
  out.channels.insert(out.channels.end(), b.channels.begin(), b.channels.end());
  out.cavities = a.cavities;
  out.cavities.insert(out.cavities.end(), b.cavities.begin(), b.cavities.end());
  const Eigen::Index Ja = a.num_channels(), Jb = b.num_channels();
  const Eigen::Index Na = a.num_cavities(), Nb = b.num_cavities();
  out.gamma = CMatrix::Zero(Na + Nb, Ja + Jb);
  out.gamma.topLeftCorner(Na, Ja) = a.gamma;
  out.gamma.bottomRightCorner(Nb, Jb) = b.gamma;
  out.g = CMatrix::Zero(Na + Nb, Na + Nb);
  out.g.topLeftCorner(Na, Na) = a.g;
  out.g.bottomRightCorner(Nb, Nb) = b.g;
  out.C = CMatrix::Zero(Ja + Jb, Ja + Jb);
  out.C.topLeftCorner(Ja, Ja) = a.C;
  out.C.bottomRightCorner(Jb, Jb) = b.C;
  return out;
}

}  // namespace ccg
