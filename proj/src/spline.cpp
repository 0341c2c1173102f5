#include "spline.hpp"

#include <mutex>

#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include "su11/error.hpp"

namespace su11::detail {

namespace {

std::once_flag handler_once;

} // namespace

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  std::call_once(handler_once, [] { gsl_set_error_handler_off(); });
  if (x_.size() != y_.size() || x_.size() < 3) throw ValidationError("spline: need >= 3 matching samples");
  for (std::size_t j = 1; j < x_.size(); ++j)
    if (!(x_[j] > x_[j - 1])) throw ValidationError("spline: abscissae must be strictly ascending");
  interp_ = gsl_interp_alloc(gsl_interp_cspline, x_.size());
  accel_ = gsl_interp_accel_alloc();
  if (!interp_ || !accel_) throw NumericError("spline: allocation failed");
  const int status = gsl_interp_init(interp_, x_.data(), y_.data(), x_.size());
  if (status != GSL_SUCCESS) throw NumericError(fmt::format("spline: {}", gsl_strerror(status)));
}

CubicSpline::~CubicSpline() {
  if (accel_) gsl_interp_accel_free(accel_);
  if (interp_) gsl_interp_free(interp_);
}

double CubicSpline::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  // accel is a lookup cache; evaluation order does not change results
  return gsl_interp_eval(interp_, x_.data(), y_.data(), x, accel_);
}

} // namespace su11::detail
