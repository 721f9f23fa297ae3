#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <openssl/evp.h>

#include "vton/core/error.hpp"
#include "vton/core/image_io.hpp"
#include "vton/core/manifest.hpp"
#include "vton/curation.hpp"

namespace vton::testing {

namespace fs = std::filesystem;
using nlohmann::json;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Raster random_raster(int width, int height, std::mt19937_64& rng) {
  Raster r(width, height);
  for (auto& p : r.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return r;
}

BinaryMask random_mask(int width, int height, double density, std::mt19937_64& rng) {
  BinaryMask m(width, height);
  std::bernoulli_distribution on(density);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) m.set(x, y, on(rng));
  }
  return m;
}

BinaryMask rect_mask(int width, int height, int x0, int y0, int x1, int y1) {
  BinaryMask m(width, height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.set(x, y, true);
  }
  return m;
}

double mean_abs_diff(const Raster& a, const Raster& b) {
  if (a.pixels.size() != b.pixels.size()) return 255.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) sum += std::abs(int(a.pixels[i]) - int(b.pixels[i]));
  return a.pixels.empty() ? 0.0 : sum / static_cast<double>(a.pixels.size());
}

namespace {

std::uint8_t clamp8(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

struct Texture {
  std::array<int, 3> a;
  std::array<int, 3> b;
  int period;
  bool vertical;

  std::array<int, 3> at(int x, int y) const {
    const int t = vertical ? x : y;
    return (t / period) % 2 ? a : b;
  }
};

Texture random_texture(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> colour(20, 235);
  std::uniform_int_distribution<int> period(2, 6);
  return {{colour(rng), colour(rng), colour(rng)}, {colour(rng), colour(rng), colour(rng)}, period(rng),
          (rng() & 1) != 0};
}

}  // namespace

SyntheticBenchmark write_benchmark(const fs::path& root, int triplets, int size, std::uint64_t seed,
                                   const std::vector<std::string>& methods) {
  SyntheticBenchmark bench;
  bench.root = root;
  bench.manifest = root / "manifest.jsonl";
  bench.results = root / "results.jsonl";
  bench.methods = methods;
  fs::create_directories(root / "images");
  std::mt19937_64 rng(seed);
  std::vector<TripletRecord> records;
  std::vector<GeneratedResult> results;

  for (int i = 0; i < triplets; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "t%03d", i);
    bench.triplet_ids.push_back(id);
    const auto tex = random_texture(rng);
    std::uniform_int_distribution<int> jitter(-3, 3);
    const int x0 = size / 4 + jitter(rng), x1 = 3 * size / 4 + jitter(rng);
    const int y0 = size / 4 + jitter(rng), y1 = 7 * size / 8 + jitter(rng);
    const auto mask = rect_mask(size, size, x0, y0, x1, y1);
    std::uniform_int_distribution<int> tone(40, 200);
    const int bg_r = tone(rng), bg_g = tone(rng), bg_b = tone(rng);

    Raster gt(size, size), garment(size, size, 3, 255);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const int shade = (x + y) * 40 / (2 * size);
        std::array<int, 3> px = {bg_r + shade, bg_g + shade / 2, bg_b - shade / 2};
        if (mask.at(x, y)) px = tex.at(x, y);
        for (int c = 0; c < 3; ++c) gt.at(x, y, c) = clamp8(px[c]);
        if (x >= size / 8 && x < 7 * size / 8 && y >= size / 8 && y < 7 * size / 8) {
          const auto g = tex.at(x, y);
          for (int c = 0; c < 3; ++c) garment.at(x, y, c) = clamp8(g[c]);
        }
      }
    }
    const std::string stem = std::string("images/") + id;
    save_image(gt, root / (stem + "_gt.png"));
    save_image(garment, root / (stem + "_garment.png"));
    save_mask(mask, root / (stem + "_mask.png"));
    save_image(curation::build_masked_person(gt, mask), root / (stem + "_masked.png"));
    TripletRecord rec;
    rec.id = id;
    rec.garment_path = stem + "_garment.png";
    rec.ground_truth_path = stem + "_gt.png";
    rec.masked_person_path = stem + "_masked.png";
    rec.gt_mask_path = stem + "_mask.png";
    rec.caption = "striped garment";
    rec.category_id = i % kNumCategories;
    records.push_back(rec);

    for (std::size_t m = 0; m < methods.size(); ++m) {
      // Degradation grows with the method index.
      const int strength = static_cast<int>(m);
      Raster gen = gt;
      std::uniform_int_distribution<int> noise(-4 - 12 * strength, 4 + 12 * strength);
      const auto other = random_texture(rng);
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          for (int c = 0; c < 3; ++c) {
            int v = gt.at(x, y, c);
            if (mask.at(x, y)) {
              if (strength > 0 && (x + y) % (strength + 2) != 0) v = (v + other.at(x, y)[c]) / 2 + 10 * strength;
              v += noise(rng);
            } else if (strength > 0) {
              v += noise(rng) / 2;
            }
            gen.at(x, y, c) = clamp8(v);
          }
        }
      }
      const auto gen_mask = rect_mask(size, size, x0 + strength, y0 + strength, x1 - strength, y1 - strength);
      const std::string gstem = std::string("images/") + methods[m] + "_" + id;
      save_image(gen, root / (gstem + ".png"));
      save_mask(gen_mask, root / (gstem + "_mask.png"));
      results.push_back({id, methods[m], gstem + ".png", gstem + "_mask.png"});
    }
  }
  save_manifest(records, bench.manifest);
  save_results(results, bench.results);
  return bench;
}

std::string base64_decode(const std::string& text) {
  std::string out(text.size() / 4 * 3 + 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) fail(ErrorCode::kParse, "bad base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock counts padding bytes as output.
  if (text.size() >= 1 && text[text.size() - 1] == '=') --len;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

std::string chat_reply(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

namespace {

Raster decode_attachment(const json& part) {
  const auto url = part.at("image_url").at("url").get<std::string>();
  const auto bytes = base64_decode(url.substr(url.find(',') + 1));
  const std::vector<std::uint8_t> buf(bytes.begin(), bytes.end());
  const cv::Mat bgr = cv::imdecode(buf, cv::IMREAD_COLOR);
  Raster r(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    for (int x = 0; x < bgr.cols; ++x) {
      const auto v = bgr.at<cv::Vec3b>(y, x);
      for (int c = 0; c < 3; ++c) r.at(x, y, c) = v[2 - c];
    }
  }
  return r;
}

double half_steps(double v) { return std::round(std::clamp(v, 1.0, 5.0) * 2.0) / 2.0; }

}  // namespace

vlm::TransportResponse PixelJudgeTransport::post(const std::string& json_body) {
  {
    std::lock_guard lock(mutex_);
    ++calls_;
    if (flaky_ > 0) {
      --flaky_;
      return {200, chat_reply("I think the image looks fine, around a 4.")};
    }
  }
  const auto body = json::parse(json_body);
  std::vector<Raster> images;
  for (const auto& part : body.at("messages").at(1).at("content")) {
    if (part.at("type") == "image_url") images.push_back(decode_attachment(part));
  }
  if (images.size() != 3) return {400, "{\"error\":\"expected three images\"}"};
  const double d = mean_abs_diff(images[1], images[2]);
  const double base = 5.0 - d / 6.0;
  const std::array<double, 5> s = {half_steps(base + 0.3), half_steps(base), half_steps(base - 0.4),
                                   half_steps(base - 0.2), half_steps(base + 0.1)};
  const double final_score = (s[0] + s[1] + s[2] + s[3] + s[4]) / 5.0;
  const json content{{"reasoning",
                      {{"background_analysis", "background compared"},
                       {"person_analysis", "identity compared"},
                       {"garment_analysis", "texture compared"},
                       {"realism_analysis", "lighting compared"}}},
                     {"scores",
                      {{"background_consistency", s[0]},
                       {"person_consistency", s[1]},
                       {"texture_fidelity", s[2]},
                       {"shape_preservation", s[3]},
                       {"overall_realism", s[4]}}},
                     {"final_weighted_score", final_score}};
  return {200, chat_reply(content.dump())};
}

}  // namespace vton::testing
