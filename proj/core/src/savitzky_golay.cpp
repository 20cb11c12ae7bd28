#include "lfgc/savitzky_golay.hpp"

#include <cmath>
#include <stdexcept>

namespace lfgc {

namespace {

void check_args(int window, int polyorder, int deriv) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("savgol: window must be odd");
  if (polyorder < 0 || polyorder >= window) {
    throw std::invalid_argument("savgol: polyorder must lie in [0, window)");
  }
  if (deriv < 0) throw std::invalid_argument("savgol: deriv must be nonnegative");
}

}  // namespace

Eigen::VectorXd savgol_coefficients(int window, int polyorder, int deriv, int pos) {
  check_args(window, polyorder, deriv);
  const int half = window / 2;
  if (pos < 0) pos = half;
  if (pos >= window) throw std::invalid_argument("savgol: pos outside the window");
  Eigen::MatrixXd A(window, polyorder + 1);
  for (int i = 0; i < window; ++i) {
    for (int k = 0; k <= polyorder; ++k) A(i, k) = std::pow(static_cast<double>(i - half), k);
  }
  const Eigen::MatrixXd pinv =
      A.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
  // d^deriv/du^deriv of u^k at u = pos - half
  const double u = static_cast<double>(pos - half);
  Eigen::VectorXd basis = Eigen::VectorXd::Zero(polyorder + 1);
  for (int k = deriv; k <= polyorder; ++k) {
    double falling = 1.0;
    for (int j = 0; j < deriv; ++j) falling *= static_cast<double>(k - j);
    basis(k) = falling * std::pow(u, k - deriv);
  }
  return pinv.transpose() * basis;
}

std::vector<double> savgol_filter(std::span<const double> y, int window, int polyorder,
                                  int deriv, double delta) {
  check_args(window, polyorder, deriv);
  const int n = static_cast<int>(y.size());
  if (n < window) throw std::invalid_argument("savgol: signal shorter than the window");
  const double scale = 1.0 / std::pow(delta, deriv);
  const int half = window / 2;
  std::vector<double> out(y.size());
  auto apply = [&](const Eigen::VectorXd& w, int start) {
    double acc = 0.0;
    for (int i = 0; i < window; ++i) acc += w(i) * y[static_cast<std::size_t>(start + i)];
    return acc * scale;
  };
  const Eigen::VectorXd center = savgol_coefficients(window, polyorder, deriv);
  for (int i = half; i < n - half; ++i) out[static_cast<std::size_t>(i)] = apply(center, i - half);
  for (int i = 0; i < half; ++i) {
    out[static_cast<std::size_t>(i)] = apply(savgol_coefficients(window, polyorder, deriv, i), 0);
    const int j = n - half + i;
    out[static_cast<std::size_t>(j)] =
        apply(savgol_coefficients(window, polyorder, deriv, half + 1 + i), n - window);
  }
  return out;
}

}  // namespace lfgc
