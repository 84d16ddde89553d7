#pragma once

// Independent brute-force matching oracle.  Shares only the plain data types
// with the library: IOU is re-derived here and the greedy assignment is found
// by enumerating every assignment vector and keeping the one consistent with
// the documented protocol (score-descending, input-order ties, highest-IOU
// unmatched GT, lowest-index ties, strict IOU threshold).  Kept deliberately
// slow and literal.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "owod/types.hpp"

namespace oracle {

inline double iou_ref(const owod::BBox& a, const owod::BBox& b) {
    const double ix0 = a.x_min > b.x_min ? a.x_min : b.x_min;
    const double iy0 = a.y_min > b.y_min ? a.y_min : b.y_min;
    const double ix1 = a.x_max < b.x_max ? a.x_max : b.x_max;
    const double iy1 = a.y_max < b.y_max ? a.y_max : b.y_max;
    double inter = 0.0;
    if (ix1 > ix0 && iy1 > iy0) inter = (ix1 - ix0) * (iy1 - iy0);
    const double area_a = (a.x_max - a.x_min) * (a.y_max - a.y_min);
    const double area_b = (b.x_max - b.x_min) * (b.y_max - b.y_min);
    const double uni = area_a + area_b - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// preds: indices in greedy priority order (already sorted by caller).
// gts: candidate GT indices in input order.
// Returns per-pred assignment (position into `gts`, or nullopt), found by
// exhaustive enumeration; asserts via *count that exactly one assignment
// vector is greedy-consistent.
inline std::vector<std::optional<std::size_t>> enumerate_greedy(
    const std::vector<std::vector<double>>& iou_matrix, double thr, int* count = nullptr) {
    const std::size_t n_pred = iou_matrix.size();
    const std::size_t n_gt = n_pred ? iou_matrix[0].size() : 0;

    std::vector<std::optional<std::size_t>> result(n_pred);
    int consistent = 0;

    std::vector<std::size_t> choice(n_pred, 0);  // 0 = none, g+1 = gts[g]
    while (true) {
        bool injective = true;
        {
            std::set<std::size_t> used;
            for (std::size_t p = 0; p < n_pred && injective; ++p)
                if (choice[p] > 0 && !used.insert(choice[p]).second) injective = false;
        }
        if (injective) {
            bool ok = true;
            std::vector<bool> taken(n_gt, false);
            for (std::size_t p = 0; p < n_pred && ok; ++p) {
                // the greedy choice for pred p given the earlier assignments
                std::optional<std::size_t> best;
                for (std::size_t g = 0; g < n_gt; ++g) {
                    if (taken[g] || !(iou_matrix[p][g] > thr)) continue;
                    if (!best || iou_matrix[p][g] > iou_matrix[p][*best]) best = g;
                }
                if (choice[p] == 0) {
                    if (best) ok = false;
                } else {
                    const std::size_t g = choice[p] - 1;
                    if (taken[g] || !(iou_matrix[p][g] > thr) || !best || *best != g)
                        ok = false;
                    else
                        taken[g] = true;
                }
            }
            if (ok) {
                ++consistent;
                for (std::size_t p = 0; p < n_pred; ++p)
                    result[p] = choice[p] > 0 ? std::optional<std::size_t>(choice[p] - 1)
                                              : std::nullopt;
            }
        }
        // odometer
        std::size_t pos = 0;
        while (pos < n_pred) {
            if (++choice[pos] <= n_gt) break;
            choice[pos] = 0;
            ++pos;
        }
        if (pos == n_pred) break;
    }
    if (count) *count = consistent;
    return result;
}

struct KnownOracle {
    int tp = 0;
    int fp = 0;
    int dropped = 0;
    std::vector<bool> is_tp;       // per input prediction
    std::vector<bool> considered;  // known-labeled and above score threshold
    std::map<owod::ClassId, std::pair<int, int>> per_class;  // class -> (tp, fp)
};

struct UnknownOracle {
    int tp_u = 0;
    int fn_u = 0;
    int fn_u_star = 0;
    int fp_o = 0;
    int total_unknown_gt = 0;
};

inline std::vector<std::size_t> priority_order(const std::vector<owod::Prediction>& preds,
                                               std::vector<std::size_t> subset) {
    std::stable_sort(subset.begin(), subset.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].score > preds[b].score;
    });
    return subset;
}

inline KnownOracle match_known_oracle(const std::vector<owod::Prediction>& preds,
                                      const std::vector<owod::GroundTruthBox>& gts,
                                      const std::vector<owod::ClassId>& known,
                                      double iou_thr, double score_thr,
                                      int* ambiguity = nullptr) {
    KnownOracle out;
    out.is_tp.assign(preds.size(), false);
    out.considered.assign(preds.size(), false);
    const std::set<owod::ClassId> known_set(known.begin(), known.end());
    for (owod::ClassId c : known) out.per_class[c] = {0, 0};

    std::set<std::pair<owod::ImageId, owod::ClassId>> groups;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (known_set.count(preds[i].label) && preds[i].score >= score_thr) {
            out.considered[i] = true;
            groups.insert({preds[i].image_id, preds[i].label});
        }

    for (const auto& [image, cls] : groups) {
        std::vector<std::size_t> group_preds;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (out.considered[i] && preds[i].image_id == image && preds[i].label == cls)
                group_preds.push_back(i);
        group_preds = priority_order(preds, group_preds);

        std::vector<std::size_t> group_gts, crowd_gts;
        for (std::size_t g = 0; g < gts.size(); ++g)
            if (gts[g].image_id == image && gts[g].class_id == cls)
                (gts[g].is_crowd ? crowd_gts : group_gts).push_back(g);

        std::vector<std::vector<double>> matrix(group_preds.size(),
                                                std::vector<double>(group_gts.size()));
        for (std::size_t p = 0; p < group_preds.size(); ++p)
            for (std::size_t g = 0; g < group_gts.size(); ++g)
                matrix[p][g] = iou_ref(preds[group_preds[p]].bbox, gts[group_gts[g]].bbox);

        int consistent = 0;
        const auto assignment = enumerate_greedy(matrix, iou_thr, &consistent);
        if (ambiguity && consistent != 1) ++*ambiguity;

        for (std::size_t p = 0; p < group_preds.size(); ++p) {
            const std::size_t pi = group_preds[p];
            if (assignment[p]) {
                out.is_tp[pi] = true;
                ++out.tp;
                ++out.per_class[cls].first;
                continue;
            }
            double best_noncrowd = 0.0, best_crowd = 0.0;
            for (std::size_t g = 0; g < group_gts.size(); ++g)
                best_noncrowd = std::max(best_noncrowd, matrix[p][g]);
            for (std::size_t g : crowd_gts)
                best_crowd = std::max(best_crowd, iou_ref(preds[pi].bbox, gts[g].bbox));
            if (best_crowd > iou_thr && best_crowd >= best_noncrowd) {
                ++out.dropped;
            } else {
                ++out.fp;
                ++out.per_class[cls].second;
            }
        }
    }
    return out;
}

inline UnknownOracle match_unknown_oracle(const std::vector<owod::Prediction>& preds,
                                          const std::vector<owod::GroundTruthBox>& gts,
                                          const std::vector<owod::ClassId>& known,
                                          const std::vector<owod::ClassId>& unknown,
                                          double iou_thr, double score_thr,
                                          const std::vector<bool>& known_tp) {
    UnknownOracle out;
    const std::set<owod::ClassId> known_set(known.begin(), known.end());
    const std::set<owod::ClassId> unknown_set(unknown.begin(), unknown.end());

    std::vector<std::size_t> unknown_gts;
    std::set<owod::ImageId> images;
    for (std::size_t g = 0; g < gts.size(); ++g)
        if (!gts[g].is_crowd && unknown_set.count(gts[g].class_id)) {
            unknown_gts.push_back(g);
            images.insert(gts[g].image_id);
        }
    out.total_unknown_gt = static_cast<int>(unknown_gts.size());

    std::set<std::size_t> recalled;  // positions into unknown_gts
    for (owod::ImageId image : images) {
        std::vector<std::size_t> group_preds;
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (preds[i].label == owod::kUnknownClass && preds[i].score >= score_thr &&
                preds[i].image_id == image)
                group_preds.push_back(i);
        group_preds = priority_order(preds, group_preds);

        std::vector<std::size_t> group_gts;  // positions into unknown_gts
        for (std::size_t k = 0; k < unknown_gts.size(); ++k)
            if (gts[unknown_gts[k]].image_id == image) group_gts.push_back(k);

        std::vector<std::vector<double>> matrix(group_preds.size(),
                                                std::vector<double>(group_gts.size()));
        for (std::size_t p = 0; p < group_preds.size(); ++p)
            for (std::size_t g = 0; g < group_gts.size(); ++g)
                matrix[p][g] =
                    iou_ref(preds[group_preds[p]].bbox, gts[unknown_gts[group_gts[g]]].bbox);

        const auto assignment = enumerate_greedy(matrix, iou_thr);
        for (std::size_t p = 0; p < group_preds.size(); ++p)
            if (assignment[p]) recalled.insert(group_gts[*assignment[p]]);
    }
    out.tp_u = static_cast<int>(recalled.size());
    out.fn_u = out.total_unknown_gt - out.tp_u;

    for (std::size_t k = 0; k < unknown_gts.size(); ++k) {
        const auto& g = gts[unknown_gts[k]];
        bool covered = false;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (!known_set.count(preds[i].label) || preds[i].score < score_thr) continue;
            if (known_tp[i] || preds[i].image_id != g.image_id) continue;
            if (iou_ref(preds[i].bbox, g.bbox) > iou_thr) covered = true;
        }
        if (covered) {
            ++out.fp_o;
            if (!recalled.count(k)) ++out.fn_u_star;
        }
    }
    return out;
}

}  // namespace oracle
