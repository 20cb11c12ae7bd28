#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lfgc {

// Weights that, applied to window samples at unit spacing, give the deriv-th
// derivative at sample pos (0-based within the window) of the least-squares
// polynomial of degree polyorder. pos defaults to the window center.
Eigen::VectorXd savgol_coefficients(int window, int polyorder, int deriv = 0, int pos = -1);

// Savitzky-Golay filter. Interior samples use the centered weights; the first
// and last window/2 samples are evaluated on the polynomial fitted to the
// first and last full window. delta is the sample spacing.
std::vector<double> savgol_filter(std::span<const double> y, int window, int polyorder,
                                  int deriv = 0, double delta = 1.0);

}  // namespace lfgc
