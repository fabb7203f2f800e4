#include "remitsim/spline.hpp"

#include <algorithm>

#include "remitsim/types.hpp"

namespace remitsim {

NaturalCubicSpline::NaturalCubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()), second_derivative_(x.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) {
        throw DomainError("spline needs at least two knots with matching values");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw DomainError("spline knots must be strictly increasing");
        }
    }
    if (n == 2) {
        return;
    }

    // Thomas algorithm on the interior second derivatives; M[0] = M[n-1] = 0.
    const std::size_t m = n - 2;
    std::vector<double> diag(m), upper(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = k + 1;
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[k] = 2.0 * (h0 + h1);
        upper[k] = h1;
        rhs[k] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t k = 1; k < m; ++k) {
        const double lower = x_[k + 1] - x_[k];
        const double w = lower / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    second_derivative_[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) {
        second_derivative_[k + 1] = (rhs[k] - upper[k] * second_derivative_[k + 2]) / diag[k];
    }
}

double NaturalCubicSpline::operator()(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);

    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    const double &m0 = second_derivative_[i];
    const double &m1 = second_derivative_[i + 1];
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
}

} // namespace remitsim
