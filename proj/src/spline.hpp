#pragma once

#include <memory>
#include <span>
#include <vector>

#include <gsl/gsl_interp.h>

namespace su11::detail {

/// Natural cubic spline through strictly ascending x.
class CubicSpline {
public:
  CubicSpline(std::span<const double> x, std::span<const double> y);
  ~CubicSpline();
  CubicSpline(const CubicSpline&) = delete;
  CubicSpline& operator=(const CubicSpline&) = delete;

  /// x must lie inside [x.front(), x.back()].
  double operator()(double x) const;

private:
  std::vector<double> x_, y_;
  gsl_interp* interp_ = nullptr;
  gsl_interp_accel* accel_ = nullptr;
};

} // namespace su11::detail
