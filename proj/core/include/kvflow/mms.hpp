#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "kvflow/fields.hpp"
#include "kvflow/mixing_length.hpp"

namespace kvflow {

/// Manufactured channel flow from the stream function
///   g(t) [sin(k x) sin^2(pi z/H)] plus the mean shear g(t) a sin^2(pi z/H) e_x,
/// which is solenoidal and vanishes on both walls. The source is the exact
/// residual of the momentum equation with zero pressure.
struct MmsCase {
  std::string name = "newtonian";
  double nu = 0.05;
  double alpha = 0.0;
  MixingLengthProfile profile = MixingLengthProfile::constant_length(0.0);
  double length = 1.0;
  double height = 1.0;
  double mean = 0.5;
  double amplitude = 0.5;

  static MmsCase newtonian();
  static MmsCase voigt_van_driest();
};

/// Time factor of the manufactured solution and its derivative.
struct TimeFactor {
  std::function<double(double)> g;
  std::function<double(double)> dg;

  /// 1 + t: keeps the temporal error small for spatial studies.
  static TimeFactor linear(double amplitude);
  /// a (1 + sin(2t)/2): exercises the time discretization.
  static TimeFactor oscillating(double amplitude);
};

/// Mixing length and its derivative along the wall-normal coordinate.
std::pair<double, double> mixing_length_with_slope(const MixingLengthProfile& profile, double z, double height);

class ManufacturedFlow {
 public:
  ManufacturedFlow(MmsCase c, TimeFactor time);

  /// Component d at (x, z) and time t.
  double velocity(int d, double x, double z, double t) const;
  double source(int d, double x, double z, double t) const;

  VectorField sample_velocity(const GridPtr& grid, double t) const;
  VectorField sample_source(const GridPtr& grid, double t) const;

  const MmsCase& mms_case() const { return case_; }

 private:
  /// Spatial shape of velocity, Voigt divergence, advection and Laplacian.
  struct Shape {
    std::array<double, 2> v, voigt, adv, lap;
  };
  Shape shape(double x, double z) const;

  MmsCase case_;
  TimeFactor time_;
};

struct MmsOptions {
  std::vector<int> resolutions{16, 32, 64};
  /// Spatial study: g = amplitude (1 + t), small fixed dt.
  double space_t_end = 0.2;
  double space_dt = 0.002;
  /// Temporal study at every resolution: dt, dt/2, dt/4. Without the Voigt
  /// term the Picard loop needs dt |v| / h below about one on the finest grid.
  double time_t_end = 0.4;
  double time_dt = 0.02;
  double threshold = 1.9;
};

struct MmsReport {
  std::string name;
  std::vector<int> resolutions;
  /// ||v_h(T) - v(T)|| per resolution.
  std::vector<double> spatial_errors;
  /// log2 ratios of consecutive errors.
  std::vector<double> spatial_orders;
  /// Per resolution: ||v_dt - v_dt/2|| and ||v_dt/2 - v_dt/4||.
  std::vector<std::array<double, 2>> temporal_differences;
  std::vector<double> temporal_orders;
  double min_spatial_order = 0.0;
  double min_temporal_order = 0.0;
  bool passed = false;
};

/// L2 error at the final time of a channel run with the manufactured source.
double mms_error(const MmsCase& c, const TimeFactor& time, int cells, double t_end, double dt);

MmsReport mms_convergence(const MmsCase& c, const MmsOptions& options = {});

}  // namespace kvflow
