#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace ecim {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

// Log-density of a diagonal Gaussian at `action`:
//   sum_d [ -0.5*((a_d - mu_d)/sigma_d)^2 - log_std_d - 0.5*log(2*pi) ]
inline double gaussian_logprob(std::span<const double> mean, std::span<const double> log_std,
                               std::span<const double> action) {
  if (mean.size() != log_std.size() || mean.size() != action.size()) {
    throw std::invalid_argument("gaussian_logprob: dimension mismatch");
  }
  double lp = 0.0;
  for (std::size_t d = 0; d < mean.size(); ++d) {
    const double sigma = std::exp(log_std[d]);
    const double z = (action[d] - mean[d]) / sigma;
    lp += -0.5 * z * z - log_std[d] - 0.5 * kLog2Pi;
  }
  return lp;
}

// Entropy of a diagonal Gaussian: sum_d [ 0.5*log(2*pi*e) + log_std_d ].
// Independent of the mean; adding log(2) to every log_std adds d*log(2).
inline double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += 0.5 * (kLog2Pi + 1.0) + ls;
  return h;
}

// Accumulates upstream * d(logprob)/d(mean) and upstream * d(logprob)/d(log_std):
//   d/d mu_d      = (a_d - mu_d) / sigma_d^2
//   d/d log_std_d = ((a_d - mu_d)/sigma_d)^2 - 1
inline void gaussian_logprob_backward(std::span<const double> mean, std::span<const double> log_std,
                                      std::span<const double> action, double upstream,
                                      std::span<double> dmean, std::span<double> dlog_std) {
  for (std::size_t d = 0; d < mean.size(); ++d) {
    const double sigma = std::exp(log_std[d]);
    const double z = (action[d] - mean[d]) / sigma;
    dmean[d] += upstream * z / sigma;
    dlog_std[d] += upstream * (z * z - 1.0);
  }
}

}  // namespace ecim
