#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vton/core/types.hpp"

namespace vton::pixel {

inline constexpr double kPeak = 255.0;

/// 10·log10(L²/MSE) over all pixels and channels. nullopt stands for the
/// unbounded value of identical images.
std::optional<double> psnr(const Raster& a, const Raster& b);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = kPeak;
};

/// Mean local SSIM over all positions where the Gaussian window fits,
/// computed per channel and averaged across channels.
double ssim(const Raster& a, const Raster& b, const SsimParams& params = {});

/// One LPIPS layer: features shaped [C, H, W] (a leading batch dim of 1 is
/// accepted) and per-channel weights shaped [C] or [1, C, 1, 1].
double lpips_layer(const TensorBlob& feats_a, const TensorBlob& feats_b, const TensorBlob& weights);

/// Σ_layers mean_hw Σ_c w_c (â_chw − b̂_chw)², â unit-normalized across c.
double lpips_aggregate(std::span<const TensorBlob> feats_a, std::span<const TensorBlob> feats_b,
                       std::span<const TensorBlob> weights);

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t count = 0;
};

/// Sample mean and unbiased covariance, two-pass. Needs at least 2 vectors of
/// equal, non-zero dimension.
GaussianStats gaussian_stats(std::span<const std::vector<double>> features);

/// Symmetric PSD square root via eigendecomposition. Eigenvalues below
/// -kPsdTolerance throw kNotPositiveSemidefinite; smaller negatives clamp to 0.
inline constexpr double kPsdTolerance = 1e-6;
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& matrix);

/// ‖μ1−μ2‖² + Tr(Σ1 + Σ2 − 2(Σ1Σ2)^{1/2}), with the trace of the cross term
/// taken from the eigenvalues of Σ1^{1/2} Σ2 Σ1^{1/2}. Clamped at 0.
double fid(const GaussianStats& s1, const GaussianStats& s2);

}  // namespace vton::pixel
