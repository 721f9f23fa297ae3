#include "vton/pixel_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "vton/core/error.hpp"
#include "vton/core/numeric.hpp"

namespace vton::pixel {
namespace {

void require_same_shape(const Raster& a, const Raster& b) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::kDimensionMismatch,
         "image shapes differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
             std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" +
             std::to_string(b.height) + "x" + std::to_string(b.channels));
  }
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(size);
  const int half = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - half;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable "valid" filtering of a single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int width, int height,
                                 const std::vector<double>& kernel) {
  const int n = static_cast<int>(kernel.size());
  const int out_w = width - n + 1;
  const int out_h = height - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(out_w) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += kernel[i] * plane[static_cast<std::size_t>(y) * width + x + i];
      rows[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += kernel[i] * rows[static_cast<std::size_t>(y + i) * out_w + x];
      out[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  return out;
}

struct LayerView {
  std::size_t channels;
  std::size_t spatial;
};

LayerView layer_view(const TensorBlob& blob) {
  const auto& s = blob.shape;
  if (s.size() == 3) return {s[0], static_cast<std::size_t>(s[1]) * s[2]};
  if (s.size() == 4 && s[0] == 1) return {s[1], static_cast<std::size_t>(s[2]) * s[3]};
  fail(ErrorCode::kDimensionMismatch, "LPIPS features must be [C,H,W] or [1,C,H,W]");
}

}  // namespace

std::optional<double> psnr(const Raster& a, const Raster& b) {
  require_same_shape(a, b);
  if (a.pixels.empty()) fail(ErrorCode::kInvalidArgument, "PSNR of empty images");
  std::vector<double> sq(a.pixels.size());
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
    sq[i] = d * d;
  }
  const double mse = mean(sq);
  if (mse == 0.0) return std::nullopt;
  return 10.0 * std::log10(kPeak * kPeak / mse);
}

double ssim(const Raster& a, const Raster& b, const SsimParams& params) {
  require_same_shape(a, b);
  if (std::min(a.width, a.height) < params.window) {
    fail(ErrorCode::kInvalidArgument, "image smaller than the " + std::to_string(params.window) +
                                          "-pixel SSIM window");
  }
  const auto kernel = gaussian_kernel(params.window, params.sigma);
  const double c1 = (params.k1 * params.peak) * (params.k1 * params.peak);
  const double c2 = (params.k2 * params.peak) * (params.k2 * params.peak);
  const std::size_t n = static_cast<std::size_t>(a.width) * a.height;

  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a.pixels[i * a.channels + c];
      y[i] = b.pixels[i * b.channels + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, a.width, a.height, kernel);
    const auto my = filter_valid(y, a.width, a.height, kernel);
    const auto mxx = filter_valid(xx, a.width, a.height, kernel);
    const auto myy = filter_valid(yy, a.width, a.height, kernel);
    const auto mxy = filter_valid(xy, a.width, a.height, kernel);
    std::vector<double> local(mx.size());
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cov = mxy[i] - mx[i] * my[i];
      local[i] = ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
                 ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += mean(local);
  }
  return total / a.channels;
}

double lpips_layer(const TensorBlob& feats_a, const TensorBlob& feats_b, const TensorBlob& weights) {
  if (feats_a.shape != feats_b.shape) fail(ErrorCode::kDimensionMismatch, "LPIPS layer shapes differ");
  const auto view = layer_view(feats_a);
  if (weights.data.size() != view.channels) {
    fail(ErrorCode::kDimensionMismatch, "LPIPS weights do not match the channel count");
  }
  if (view.spatial == 0 || view.channels == 0) fail(ErrorCode::kDimensionMismatch, "empty LPIPS layer");
  constexpr double kEps = 1e-10;
  std::vector<double> per_position(view.spatial);
  for (std::size_t p = 0; p < view.spatial; ++p) {
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t c = 0; c < view.channels; ++c) {
      const double va = feats_a.data[c * view.spatial + p];
      const double vb = feats_b.data[c * view.spatial + p];
      na += va * va;
      nb += vb * vb;
    }
    na = std::sqrt(na) + kEps;
    nb = std::sqrt(nb) + kEps;
    double acc = 0.0;
    for (std::size_t c = 0; c < view.channels; ++c) {
      const double d = feats_a.data[c * view.spatial + p] / na - feats_b.data[c * view.spatial + p] / nb;
      acc += weights.data[c] * d * d;
    }
    per_position[p] = acc;
  }
  return mean(per_position);
}

double lpips_aggregate(std::span<const TensorBlob> feats_a, std::span<const TensorBlob> feats_b,
                       std::span<const TensorBlob> weights) {
  if (feats_a.size() != feats_b.size()) fail(ErrorCode::kDimensionMismatch, "LPIPS layer counts differ");
  if (weights.size() != feats_a.size()) fail(ErrorCode::kNotFound, "missing LPIPS layer weights");
  if (feats_a.empty()) fail(ErrorCode::kInvalidArgument, "LPIPS needs at least one layer");
  double total = 0.0;
  for (std::size_t l = 0; l < feats_a.size(); ++l) total += lpips_layer(feats_a[l], feats_b[l], weights[l]);
  return std::max(total, 0.0);
}

GaussianStats gaussian_stats(std::span<const std::vector<double>> features) {
  if (features.size() < 2) fail(ErrorCode::kInvalidArgument, "Gaussian fit needs at least 2 samples");
  const std::size_t dim = features.front().size();
  if (dim == 0) fail(ErrorCode::kInvalidArgument, "zero-dimensional features");
  for (const auto& f : features) {
    if (f.size() != dim) fail(ErrorCode::kDimensionMismatch, "feature dimensions differ");
  }
  const auto n = static_cast<double>(features.size());
  GaussianStats stats;
  stats.count = features.size();
  stats.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& f : features) stats.mean += Eigen::Map<const Eigen::VectorXd>(f.data(), dim);
  stats.mean /= n;
  stats.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& f : features) {
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(f.data(), dim) - stats.mean;
    stats.covariance.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  stats.covariance = stats.covariance.selfadjointView<Eigen::Lower>();
  stats.covariance /= (n - 1.0);
  return stats;
}

namespace {

Eigen::VectorXd checked_eigenvalues(const Eigen::VectorXd& values, const char* what) {
  Eigen::VectorXd out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out[i] < -kPsdTolerance) {
      fail(ErrorCode::kNotPositiveSemidefinite,
           std::string(what) + " has eigenvalue " + std::to_string(out[i]));
    }
    out[i] = std::max(out[i], 0.0);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) fail(ErrorCode::kDimensionMismatch, "matrix is not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
  if (eig.info() != Eigen::Success) fail(ErrorCode::kNotPositiveSemidefinite, "eigendecomposition failed");
  const Eigen::VectorXd roots = checked_eigenvalues(eig.eigenvalues(), "matrix").cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

double fid(const GaussianStats& s1, const GaussianStats& s2) {
  if (s1.mean.size() != s2.mean.size() || s1.covariance.rows() != s2.covariance.rows()) {
    fail(ErrorCode::kDimensionMismatch, "FID statistics have different dimensions");
  }
  if (s1.count < 2 || s2.count < 2) fail(ErrorCode::kInvalidArgument, "FID needs counts of at least 2");

  const double mean_term = (s1.mean - s2.mean).squaredNorm();
  const Eigen::MatrixXd root1 = psd_sqrt(s1.covariance);
  Eigen::MatrixXd middle = root1 * s2.covariance * root1;
  middle = 0.5 * (middle + middle.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(middle, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) fail(ErrorCode::kNotPositiveSemidefinite, "eigendecomposition failed");
  const Eigen::VectorXd values = checked_eigenvalues(eig.eigenvalues(), "Σ1^½ Σ2 Σ1^½");
  const double cross_trace = values.cwiseSqrt().sum();

  const double value = mean_term + s1.covariance.trace() + s2.covariance.trace() - 2.0 * cross_trace;
  return std::max(value, 0.0);
}

}  // namespace vton::pixel
