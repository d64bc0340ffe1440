#include "kvflow/mixing_length.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kvflow {

MixingLengthProfile MixingLengthProfile::obukhov(double kappa) {
  MixingLengthProfile p;
  p.kind = Kind::obukhov;
  p.kappa = kappa;
  return p;
}

MixingLengthProfile MixingLengthProfile::van_driest(double kappa, double damping) {
  MixingLengthProfile p;
  p.kind = Kind::van_driest;
  p.kappa = kappa;
  p.damping = damping;
  return p;
}

MixingLengthProfile MixingLengthProfile::constant_length(double l0) {
  MixingLengthProfile p;
  p.kind = Kind::constant;
  p.constant = l0;
  return p;
}

MixingLengthProfile MixingLengthProfile::tabulated(std::vector<double> samples) {
  MixingLengthProfile p;
  p.kind = Kind::tabulated;
  p.samples = std::move(samples);
  return p;
}

void MixingLengthProfile::validate() const {
  switch (kind) {
    case Kind::obukhov:
    case Kind::van_driest:
      if (!(kappa > 0.0)) throw std::invalid_argument("physics.kappa: must be positive");
      if (!allow_kappa_override && (kappa < 0.35 || kappa > 0.42))
        throw std::invalid_argument("physics.kappa: outside [0.35, 0.42] without override");
      if (kind == Kind::van_driest && damping < 0.0)
        throw std::invalid_argument("physics.damping: must be positive (or 0 for the default)");
      break;
    case Kind::constant:
      if (!(constant >= 0.0) || !std::isfinite(constant))
        throw std::invalid_argument("physics.ell0: must be a nonnegative length");
      break;
    case Kind::tabulated:
      if (samples.size() < 2) throw std::invalid_argument("physics.ell_samples: need at least 2 samples");
      for (double s : samples)
        if (!(s >= 0.0) || !std::isfinite(s))
          throw std::invalid_argument("physics.ell_samples: samples must be nonnegative");
      break;
  }
}

double default_van_driest_damping(double height) { return height / (4.0 * std::log(20.0)); }

double MixingLengthProfile::damping_length(double height) const {
  return damping > 0.0 ? damping : default_van_driest_damping(height);
}

double MixingLengthProfile::evaluate(double rho, double z, double height) const {
  switch (kind) {
    case Kind::obukhov:
      return kappa * rho;
    case Kind::van_driest:
      return kappa * rho * (-std::expm1(-rho / damping_length(height)));
    case Kind::constant:
      return constant;
    case Kind::tabulated: {
      const int m = static_cast<int>(samples.size());
      double s = z / height * (m - 1);
      s = std::clamp(s, 0.0, static_cast<double>(m - 1));
      const int i = std::min(static_cast<int>(s), m - 2);
      const double t = s - i;
      return (1.0 - t) * samples[i] + t * samples[i + 1];
    }
  }
  return 0.0;
}

std::string to_string(MixingLengthProfile::Kind kind) {
  switch (kind) {
    case MixingLengthProfile::Kind::obukhov: return "obukhov";
    case MixingLengthProfile::Kind::van_driest: return "van_driest";
    case MixingLengthProfile::Kind::constant: return "constant";
    case MixingLengthProfile::Kind::tabulated: return "tabulated";
  }
  return "unknown";
}

MixingLengthProfile::Kind mixing_length_kind_from_string(const std::string& name) {
  if (name == "obukhov") return MixingLengthProfile::Kind::obukhov;
  if (name == "van_driest" || name == "vandriest") return MixingLengthProfile::Kind::van_driest;
  if (name == "constant") return MixingLengthProfile::Kind::constant;
  if (name == "tabulated") return MixingLengthProfile::Kind::tabulated;
  throw std::invalid_argument("physics.profile: unknown mixing-length profile '" + name + "'");
}

ScalarField eval_mixing_length(const MixingLengthProfile& profile, const GridPtr& grid) {
  profile.validate();
  if (profile.wall_based() && !grid->is_channel())
    throw std::invalid_argument("physics.profile: wall-based mixing length needs a channel grid");

  const int axis = grid->dim() - 1;
  const double height = grid->extent(axis);
  WallParity parity = WallParity::even;
  if (profile.wall_based()) parity = WallParity::odd;
  if (profile.kind == MixingLengthProfile::Kind::tabulated && profile.samples.front() == 0.0 &&
      profile.samples.back() == 0.0 && grid->is_channel())
    parity = WallParity::odd;

  ScalarField ell(grid, 0.0, parity);
  const Array3& rho = grid->wall_distance();
  for_each_index(ell.values().shape(), [&](int i, int j, int k) {
    const Index3 q{i, j, k};
    const double z = grid->coordinate(Stagger::cell(), axis, q[axis]);
    ell(i, j, k) = profile.evaluate(rho(i, j, k), z, height);
  });
  return ell;
}

double boundary_layer_scale(double nu, double u_star) {
  if (!(nu > 0.0)) throw std::invalid_argument("boundary_layer_scale: nu must be positive");
  if (!(u_star > 0.0)) throw std::invalid_argument("boundary_layer_scale: u_star must be positive");
  return nu / u_star;
}

}  // namespace kvflow
