#include "vton/rep_metrics.hpp"

#include "vton/core/error.hpp"
#include "vton/core/image_io.hpp"
#include "vton/core/numeric.hpp"

namespace vton::rep {

using embedding::Backend;
using embedding::EmbedRequest;

double global_consistency(const Embedding& emb_gen, const Embedding& emb_gt) {
  if (!emb_gen.variant.full_image || !emb_gt.variant.full_image) {
    fail(ErrorCode::kInvalidArgument, "global consistency needs full_image embeddings");
  }
  return embedding::cosine(emb_gen, emb_gt);
}

namespace {

std::optional<double> masked_cosine(const Embedding& gen, const Embedding& gt) {
  if (gen.degenerate || gt.degenerate || gen.norm() == 0.0 || gt.norm() == 0.0) {
    return std::nullopt;
  }
  return embedding::cosine(gen, gt);
}

}  // namespace

std::optional<double> garment_fidelity_at_scale(const Raster& gen_image,
                                                const BinaryMask& gen_mask_k,
                                                const Raster& gt_image,
                                                const BinaryMask& gt_mask_k,
                                                const Backend& backend, int level) {
  if (gen_mask_k.empty_region() || gt_mask_k.empty_region()) return std::nullopt;
  const auto variant = EmbeddingVariant::masked(level);
  const auto gen = backend.embed(
      {"generated", variant, [&] { return multiply_by_mask(gen_image, gen_mask_k); }});
  const auto gt =
      backend.embed({"ground_truth", variant, [&] { return multiply_by_mask(gt_image, gt_mask_k); }});
  return masked_cosine(gen, gt);
}

PairScores multi_scale_fidelity(const PairInputs& pair, const morphology::StructuringElement& elem,
                                int levels, const Backend& backend) {
  if (levels < 1) fail(ErrorCode::kInvalidArgument, "need at least one erosion level");
  const bool pixels = backend.computes_from_pixels();
  if (pixels && (!pair.gen_image || !pair.gt_image || !pair.gen_mask || !pair.gt_mask)) {
    fail(ErrorCode::kInvalidArgument, "pixel backend needs both images and both masks");
  }
  if (pair.gen_image && pair.gen_mask &&
      (pair.gen_image->width != pair.gen_mask->width() ||
       pair.gen_image->height != pair.gen_mask->height())) {
    fail(ErrorCode::kDimensionMismatch, pair.gen_source_id + ": generated mask size differs from image");
  }
  if (pair.gt_image && pair.gt_mask &&
      (pair.gt_image->width != pair.gt_mask->width() ||
       pair.gt_image->height != pair.gt_mask->height())) {
    fail(ErrorCode::kDimensionMismatch, pair.gt_source_id + ": ground-truth mask size differs from image");
  }

  const auto full = EmbeddingVariant::full();
  const auto gen_full = backend.embed({pair.gen_source_id, full, [&] { return *pair.gen_image; }});
  const auto gt_full = backend.embed({pair.gt_source_id, full, [&] { return *pair.gt_image; }});
  const double s_global = global_consistency(gen_full, gt_full);

  std::optional<morphology::ErosionHierarchy> gen_h;
  std::optional<morphology::ErosionHierarchy> gt_h;
  if (pair.gen_mask) gen_h = morphology::erosion_hierarchy(*pair.gen_mask, elem, levels);
  if (pair.gt_mask) gt_h = morphology::erosion_hierarchy(*pair.gt_mask, elem, levels);

  std::vector<std::optional<double>> s_rep(levels);
  std::vector<bool> degenerate(levels, false);
  for (int k = 0; k < levels; ++k) {
    if ((gen_h && gen_h->degenerate[k]) || (gt_h && gt_h->degenerate[k])) {
      degenerate[k] = true;
      continue;
    }
    const auto variant = EmbeddingVariant::masked(k);
    const auto gen = backend.embed({pair.gen_source_id, variant, [&] {
                                      return multiply_by_mask(*pair.gen_image, gen_h->levels[k]);
                                    }});
    const auto gt = backend.embed({pair.gt_source_id, variant, [&] {
                                     return multiply_by_mask(*pair.gt_image, gt_h->levels[k]);
                                   }});
    s_rep[k] = masked_cosine(gen, gt);
    degenerate[k] = !s_rep[k].has_value();
  }
  return {complete(s_global, std::move(s_rep)), std::move(degenerate)};
}

double aggregate_rep(std::span<const double> levels) { return mean(levels); }

std::optional<double> aggregate_rep(std::span<const std::optional<double>> levels) {
  std::vector<double> present;
  for (const auto& v : levels) {
    if (v) present.push_back(*v);
  }
  if (present.empty()) return std::nullopt;
  return mean(present);
}

double aggregate_overall(double s_global, double s_rep_mean) {
  return (s_global + s_rep_mean) / 2.0;
}

RepScoreSet complete(double s_global, std::vector<std::optional<double>> s_rep) {
  RepScoreSet out;
  out.s_global = s_global;
  out.s_rep = std::move(s_rep);
  out.s_rep_mean = aggregate_rep(out.s_rep);
  if (out.s_rep_mean) out.s_overall = aggregate_overall(s_global, *out.s_rep_mean);
  return out;
}

MethodRepSummary summarize(std::span<const RepScoreSet> pairs, int levels) {
  if (pairs.empty()) fail(ErrorCode::kNoResults, "no representation scores to summarize");
  MethodRepSummary summary;
  summary.pairs = pairs.size();
  summary.excluded_per_level.assign(levels, 0);

  std::vector<double> globals;
  globals.reserve(pairs.size());
  std::vector<std::vector<double>> columns(levels);
  for (const auto& p : pairs) {
    globals.push_back(p.s_global);
    for (int k = 0; k < levels; ++k) {
      if (k < static_cast<int>(p.s_rep.size()) && p.s_rep[k]) {
        columns[k].push_back(*p.s_rep[k]);
      } else {
        ++summary.excluded_per_level[k];
      }
    }
  }
  std::vector<std::optional<double>> level_means(levels);
  for (int k = 0; k < levels; ++k) {
    if (!columns[k].empty()) level_means[k] = mean(columns[k]);
  }
  summary.mean = complete(mean(globals), std::move(level_means));
  return summary;
}

}  // namespace vton::rep
