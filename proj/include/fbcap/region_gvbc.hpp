#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "fbcap/common.hpp"
#include "fbcap/gaussian.hpp"

namespace fbcap {

/// One point of the vector Gaussian BC rate region, with the input
/// covariance split that achieves it.  Rates are in nats.
struct GvbcRatePoint {
    double R1 = 0.0;
    double R2 = 0.0;
    Mat B1, B2;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    bool converged = true;
};

/// 32 log-spaced slopes in [1, 64] preceded by exactly 1.0 (33 entries).
std::vector<double> default_lambda_grid();

/// Rates for an explicit feasible split: R1 = 1/2 log(|G'B1G + K|/|K|),
/// R2 = 1/2 log(|G'(B1+B2)G + K + Kt|/|G'B1G + K + Kt|).
GvbcRatePoint region_point(const GaussianBCModel& model, const Mat& B1, const Mat& B2);

/// Per-lambda maximization of R1 + lambda R2 over 0 <= B1 <= K' with
/// B2 = K' - B1, by multistart projected gradient ascent; entries ordered
/// by lambda (largest R1 first).
std::vector<GvbcRatePoint> boundary_sweep(const GaussianBCModel& model,
                                          const std::vector<double>& lambda_grid,
                                          int workers = 1);

/// Scalar power-split rates (R1, R2) in nats:
/// R1 = 1/2 log(1 + beta P / n1), R2 = 1/2 log(1 + (1-beta)P/(beta P + n1 + n2)).
std::pair<double, double> scalar_closed_form(double P, double n1, double n2, double beta);

/// Supporting-hyperplane value of the lambda-weighted single-letter
/// objective over Gaussian inputs, with the achieving covariance.
struct EnvelopeValue {
    double lambda = 1.0;
    double value = 0.0;
    Mat Kdagger;
    bool converged = true;
};

/// max over 0 <= B <= K' of
///   1/2 log(|G'BG + K|/|K|) - (lambda/2) log(|G'BG + K + Kt|/|K + Kt|).
EnvelopeValue gaussian_envelope_value(const GaussianBCModel& model, double lambda);

/// Scalar extremality search: discretized (V, X) candidates under the power
/// constraint never beat the Gaussian closed form, while quantized Gaussians
/// approach it.  Requires d = 1.
CheckReport check_gaussian_extremality(const GaussianBCModel& model, double lambda, int budget,
                                       std::uint64_t seed, int workers = 1);

}  // namespace fbcap
