#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vton/core/types.hpp"
#include "vton/embedding.hpp"
#include "vton/morphology.hpp"

namespace vton::rep {

/// S_global: cosine of the two full-image embeddings.
double global_consistency(const Embedding& emb_gen, const Embedding& emb_gt);

/// S_rep^(k) for one pair at one level: cosine of Φ(Î ⊙ M̂^(k)) and
/// Φ(I_gt ⊙ M_gt^(k)). nullopt when either region is empty.
std::optional<double> garment_fidelity_at_scale(const Raster& gen_image,
                                                const BinaryMask& gen_mask_k,
                                                const Raster& gt_image,
                                                const BinaryMask& gt_mask_k,
                                                const embedding::Backend& backend, int level = 0);

/// Inputs for one (generated, ground truth) pair. Pixel backends need the
/// images and masks; file backends need only the source ids, and use masks
/// (when given) to flag empty levels.
struct PairInputs {
  std::string gen_source_id;
  std::string gt_source_id;
  std::optional<Raster> gen_image;
  std::optional<Raster> gt_image;
  std::optional<BinaryMask> gen_mask;
  std::optional<BinaryMask> gt_mask;
};

struct PairScores {
  RepScoreSet scores;
  std::vector<bool> degenerate;  // per level
};

PairScores multi_scale_fidelity(const PairInputs& pair,
                                const morphology::StructuringElement& elem, int levels,
                                const embedding::Backend& backend);

/// S̄_rep: arithmetic mean of the levels.
double aggregate_rep(std::span<const double> levels);
/// Mean over the present levels; nullopt when none is present.
std::optional<double> aggregate_rep(std::span<const std::optional<double>> levels);
/// S̄: arithmetic mean of S_global and S̄_rep.
double aggregate_overall(double s_global, double s_rep_mean);

/// Fills s_rep_mean and s_overall from s_global and s_rep.
RepScoreSet complete(double s_global, std::vector<std::optional<double>> s_rep);

struct MethodRepSummary {
  RepScoreSet mean;
  std::vector<std::size_t> excluded_per_level;
  std::size_t pairs = 0;
};

/// Per-pair scores averaged per column (missing levels excluded pairwise);
/// S̄_rep and S̄ are then recomputed from the column means so every summary
/// row satisfies the same arithmetic as a single pair.
MethodRepSummary summarize(std::span<const RepScoreSet> pairs, int levels);

}  // namespace vton::rep
