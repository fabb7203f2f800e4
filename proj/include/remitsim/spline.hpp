#pragma once

#include <span>
#include <vector>

namespace remitsim {

/// Natural cubic spline (zero second derivative at both ends) through
/// strictly increasing knots.
class NaturalCubicSpline {
  public:
    NaturalCubicSpline(std::span<const double> x, std::span<const double> y);

    /// Evaluates the spline; outside the knot range the end cubic pieces are extended.
    double operator()(double x) const;

  private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> second_derivative_;
};

} // namespace remitsim
