#include "vton/core/image_io.hpp"

#include <cstring>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vton/core/error.hpp"

namespace vton {
namespace {

void require_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) fail(ErrorCode::kNotFound, "no such file " + path.string());
}

}  // namespace

Raster load_image(const std::filesystem::path& path) {
  require_file(path);
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) fail(ErrorCode::kIo, "cannot decode image " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  Raster out(rgb.cols, rgb.rows, 3);
  for (int y = 0; y < rgb.rows; ++y) {
    std::memcpy(out.pixels.data() + static_cast<std::size_t>(y) * rgb.cols * 3, rgb.ptr(y),
                static_cast<std::size_t>(rgb.cols) * 3);
  }
  return out;
}

void save_image(const Raster& image, const std::filesystem::path& path) {
  if (image.channels != 3 && image.channels != 1) {
    fail(ErrorCode::kInvalidArgument, "save_image supports 1 or 3 channels");
  }
  const int type = image.channels == 3 ? CV_8UC3 : CV_8UC1;
  cv::Mat view(image.height, image.width, type, const_cast<std::uint8_t*>(image.pixels.data()));
  cv::Mat out;
  if (image.channels == 3) {
    cv::cvtColor(view, out, cv::COLOR_RGB2BGR);
  } else {
    out = view;
  }
  if (!cv::imwrite(path.string(), out)) fail(ErrorCode::kIo, "cannot write " + path.string());
}

BinaryMask load_mask(const std::filesystem::path& path) {
  require_file(path);
  cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (gray.empty()) fail(ErrorCode::kIo, "cannot decode mask " + path.string());
  BinaryMask mask(gray.cols, gray.rows);
  for (int y = 0; y < gray.rows; ++y) {
    const auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) mask.set(x, y, row[x] > 127);
  }
  return mask;
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask.at(x, y) ? 255 : 0;
  }
  if (!cv::imwrite(path.string(), gray)) fail(ErrorCode::kIo, "cannot write " + path.string());
}

std::pair<int, int> image_size(const std::filesystem::path& path) {
  require_file(path);
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (img.empty()) fail(ErrorCode::kIo, "cannot decode image " + path.string());
  return {img.cols, img.rows};
}

Raster multiply_by_mask(const Raster& image, const BinaryMask& mask) {
  if (image.width != mask.width() || image.height != mask.height()) {
    fail(ErrorCode::kDimensionMismatch, "image and mask sizes differ");
  }
  Raster out = image;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (mask.at(x, y)) continue;
      for (int c = 0; c < image.channels; ++c) out.at(x, y, c) = 0;
    }
  }
  return out;
}

}  // namespace vton
