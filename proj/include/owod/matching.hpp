#pragma once

#include <algorithm>
#include <cstddef>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "owod/errors.hpp"
#include "owod/types.hpp"

namespace owod {

struct MatchConfig {
    double iou_threshold = 0.5;   // matches require IOU strictly above this
    double score_threshold = 0.0; // predictions below are ignored entirely

    void validate() const {
        if (iou_threshold < 0.0 || iou_threshold > 1.0)
            throw ValidationError("iou_threshold outside [0,1]");
        if (score_threshold < 0.0 || score_threshold > 1.0)
            throw ValidationError("score_threshold outside [0,1]");
    }
};

/// One known-class prediction after matching.  `dropped` marks predictions
/// whose best overlap was a crowd region above threshold; they count as
/// neither TP nor FP.
struct PredRecord {
    std::size_t pred_index = 0;
    double score = 0.0;
    bool is_tp = false;
    bool dropped = false;
};

struct ClassMatches {
    ClassId class_id = 0;
    int gt_count = 0;  // non-crowd ground truths of this class
    int tp = 0;
    int fp = 0;
    std::vector<PredRecord> records;  // score-descending, input-order stable
};

struct MatchTable {
    std::vector<ClassMatches> per_class;
    std::vector<bool> known_tp;  // per input prediction: TP of some known class
    // gt index -> pred index for matched known ground truths
    std::vector<std::pair<std::size_t, std::size_t>> assignments;
    std::vector<std::size_t> unmatched_gts;  // non-crowd known GTs left unmatched
    int tp_total = 0;
    int fp_total = 0;
    int dropped_total = 0;
    int known_gt_total = 0;
};

/// Raw counts behind every unknown-class metric.  fp_o counts unknown
/// ground-truth boxes claimed by a known-class prediction; the per-prediction
/// reading used by some other codebases is kept alongside.
struct UnknownCounts {
    int tp_u = 0;
    int fn_u = 0;
    int fn_u_star = 0;
    int fp_o = 0;
    int fp_o_predictions = 0;
    int total_unknown_gt = 0;
};

namespace detail {

struct ImageClassKey {
    ImageId image;
    ClassId cls;
    bool operator==(const ImageClassKey&) const = default;
};

struct ImageClassKeyHash {
    std::size_t operator()(const ImageClassKey& k) const {
        return std::hash<long long>()((static_cast<long long>(k.image) << 20) ^
                                      static_cast<long long>(k.cls + 1));
    }
};

inline std::vector<std::size_t> sorted_by_score_desc(const std::vector<Prediction>& preds,
                                                     const std::vector<std::size_t>& subset) {
    std::vector<std::size_t> order = subset;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].score > preds[b].score;
    });
    return order;
}

}  // namespace detail

/// Greedy per-class matching of known-class predictions against known-class
/// ground truths.  Predictions are visited in descending score order (ties
/// keep input-file order) and claim the unmatched same-class non-crowd GT of
/// highest IOU when that IOU exceeds cfg.iou_threshold.  Crowd regions are
/// never matched; a prediction whose best overlap is a crowd region above
/// threshold is dropped from FP counting.
inline MatchTable match_known(const std::vector<Prediction>& predictions,
                              const std::vector<GroundTruthBox>& ground_truths,
                              const TaskSpec& spec, std::size_t task_index,
                              const MatchConfig& cfg = {}) {
    cfg.validate();
    const std::vector<ClassId> known = spec.known(task_index);
    const std::unordered_set<ClassId> known_set(known.begin(), known.end());

    MatchTable table;
    table.known_tp.assign(predictions.size(), false);

    using detail::ImageClassKey;
    std::unordered_map<ImageClassKey, std::vector<std::size_t>, detail::ImageClassKeyHash>
        gts_by_group, crowds_by_group;
    for (std::size_t gi = 0; gi < ground_truths.size(); ++gi) {
        const auto& g = ground_truths[gi];
        if (!known_set.count(g.class_id)) continue;
        auto& bucket = (g.is_crowd ? crowds_by_group : gts_by_group);
        bucket[{g.image_id, g.class_id}].push_back(gi);
        if (!g.is_crowd) ++table.known_gt_total;
    }

    std::unordered_map<ClassId, std::vector<std::size_t>> preds_by_class;
    for (std::size_t pi = 0; pi < predictions.size(); ++pi) {
        const auto& p = predictions[pi];
        if (p.label == kUnknownClass || !known_set.count(p.label)) continue;
        if (p.score < cfg.score_threshold) continue;
        preds_by_class[p.label].push_back(pi);
    }

    std::vector<bool> gt_matched(ground_truths.size(), false);

    for (ClassId c : known) {
        ClassMatches cm;
        cm.class_id = c;
        for (const auto& [key, idxs] : gts_by_group)
            if (key.cls == c) cm.gt_count += static_cast<int>(idxs.size());

        auto it = preds_by_class.find(c);
        if (it != preds_by_class.end()) {
            for (std::size_t pi : detail::sorted_by_score_desc(predictions, it->second)) {
                const auto& p = predictions[pi];
                PredRecord rec{pi, p.score, false, false};

                double best_unmatched = 0.0, best_noncrowd = 0.0, best_crowd = 0.0;
                std::size_t best_gt = 0;
                bool have_gt = false;
                if (auto git = gts_by_group.find({p.image_id, c}); git != gts_by_group.end()) {
                    for (std::size_t gi : git->second) {
                        const double v = iou(p.bbox, ground_truths[gi].bbox);
                        best_noncrowd = std::max(best_noncrowd, v);
                        if (gt_matched[gi]) continue;
                        if (v > best_unmatched) {
                            best_unmatched = v;
                            best_gt = gi;
                            have_gt = true;
                        }
                    }
                }
                if (auto cit = crowds_by_group.find({p.image_id, c});
                    cit != crowds_by_group.end()) {
                    for (std::size_t gi : cit->second)
                        best_crowd = std::max(best_crowd, iou(p.bbox, ground_truths[gi].bbox));
                }

                if (have_gt && best_unmatched > cfg.iou_threshold) {
                    rec.is_tp = true;
                    gt_matched[best_gt] = true;
                    table.known_tp[pi] = true;
                    table.assignments.emplace_back(best_gt, pi);
                    ++cm.tp;
                } else if (best_crowd > cfg.iou_threshold && best_crowd >= best_noncrowd) {
                    rec.dropped = true;
                    ++table.dropped_total;
                } else {
                    ++cm.fp;
                }
                cm.records.push_back(rec);
            }
        }
        table.tp_total += cm.tp;
        table.fp_total += cm.fp;
        table.per_class.push_back(std::move(cm));
    }

    for (const auto& [key, idxs] : gts_by_group)
        for (std::size_t gi : idxs)
            if (!gt_matched[gi]) table.unmatched_gts.push_back(gi);
    std::sort(table.unmatched_gts.begin(), table.unmatched_gts.end());

    return table;
}

/// Unknown-side counts given precomputed known-TP flags.
///
/// tp_u: unknown GTs claimed greedily by UNKNOWN-labeled predictions.
/// fn_u_star: unknown GTs missed by UNKNOWN predictions but covered by a
///   known-class prediction that is not itself a known-class TP.
/// fp_o: unknown GTs covered by such a prediction, whether or not an UNKNOWN
///   prediction also claimed them.
inline UnknownCounts match_unknown(const std::vector<Prediction>& predictions,
                                   const std::vector<GroundTruthBox>& ground_truths,
                                   const TaskSpec& spec, std::size_t task_index,
                                   const MatchConfig& cfg, const std::vector<bool>& known_tp) {
    cfg.validate();
    const std::vector<ClassId> unknown = spec.unknown(task_index);
    const std::unordered_set<ClassId> unknown_set(unknown.begin(), unknown.end());
    const std::vector<ClassId> known = spec.known(task_index);
    const std::unordered_set<ClassId> known_set(known.begin(), known.end());

    UnknownCounts counts;

    std::unordered_map<ImageId, std::vector<std::size_t>> unknown_gts_by_image;
    for (std::size_t gi = 0; gi < ground_truths.size(); ++gi) {
        const auto& g = ground_truths[gi];
        if (g.is_crowd || !unknown_set.count(g.class_id)) continue;
        unknown_gts_by_image[g.image_id].push_back(gi);
        ++counts.total_unknown_gt;
    }

    std::vector<std::size_t> unk_preds;
    for (std::size_t pi = 0; pi < predictions.size(); ++pi)
        if (predictions[pi].label == kUnknownClass &&
            predictions[pi].score >= cfg.score_threshold)
            unk_preds.push_back(pi);

    std::unordered_set<std::size_t> gt_recalled;
    for (std::size_t pi : detail::sorted_by_score_desc(predictions, unk_preds)) {
        const auto& p = predictions[pi];
        auto it = unknown_gts_by_image.find(p.image_id);
        if (it == unknown_gts_by_image.end()) continue;
        double best = 0.0;
        std::size_t best_gt = 0;
        bool have = false;
        for (std::size_t gi : it->second) {
            if (gt_recalled.count(gi)) continue;
            const double v = iou(p.bbox, ground_truths[gi].bbox);
            if (v > best) {
                best = v;
                best_gt = gi;
                have = true;
            }
        }
        if (have && best > cfg.iou_threshold) {
            gt_recalled.insert(best_gt);
            ++counts.tp_u;
        }
    }
    counts.fn_u = counts.total_unknown_gt - counts.tp_u;

    // Misclassifying candidates: known-labeled predictions that are not TPs.
    std::unordered_map<ImageId, std::vector<std::size_t>> candidates_by_image;
    for (std::size_t pi = 0; pi < predictions.size(); ++pi) {
        const auto& p = predictions[pi];
        if (!known_set.count(p.label) || p.score < cfg.score_threshold) continue;
        if (pi < known_tp.size() && known_tp[pi]) continue;
        candidates_by_image[p.image_id].push_back(pi);
    }

    std::unordered_set<std::size_t> witness_preds;
    for (const auto& [image_id, gts] : unknown_gts_by_image) {
        auto it = candidates_by_image.find(image_id);
        if (it == candidates_by_image.end()) continue;
        for (std::size_t gi : gts) {
            bool covered = false;
            for (std::size_t pi : it->second) {
                if (iou(predictions[pi].bbox, ground_truths[gi].bbox) > cfg.iou_threshold) {
                    covered = true;
                    witness_preds.insert(pi);
                }
            }
            if (covered) {
                ++counts.fp_o;
                if (!gt_recalled.count(gi)) ++counts.fn_u_star;
            }
        }
    }
    counts.fp_o_predictions = static_cast<int>(witness_preds.size());

    return counts;
}

inline UnknownCounts match_unknown(const std::vector<Prediction>& predictions,
                                   const std::vector<GroundTruthBox>& ground_truths,
                                   const TaskSpec& spec, std::size_t task_index,
                                   const MatchConfig& cfg = {}) {
    const MatchTable table = match_known(predictions, ground_truths, spec, task_index, cfg);
    return match_unknown(predictions, ground_truths, spec, task_index, cfg, table.known_tp);
}

}  // namespace owod
