#pragma once

#include <functional>

namespace pusmi::quad {

struct Result {
    double value;
    double abs_error;
    int evaluations;
};

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]: the interval with the
/// largest Kronrod-Gauss discrepancy is bisected until the summed discrepancy
/// meets max(abs_tol, rel_tol * |total|). Throws NumericError when that takes
/// more than max_intervals pieces.
Result integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-13,
                 double rel_tol = 1e-11, int max_intervals = 4000);

/// Iterated adaptive integration over the box [ax, bx] x [ay, by].
Result integrate_2d(const std::function<double(double, double)>& f, double ax, double bx, double ay, double by,
                    double abs_tol = 1e-11, double rel_tol = 1e-9);

}  // namespace pusmi::quad
