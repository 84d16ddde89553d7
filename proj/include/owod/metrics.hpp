#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "owod/matching.hpp"
#include "owod/types.hpp"

namespace owod {

enum class ApMode {
    kContinuous,  // area under the monotone precision envelope (all points)
    kVoc11Point,  // legacy 11-point interpolation, kept for cross-checks
};

struct EvalConfig {
    MatchConfig match;
    std::optional<double> wi_recall_level = 0.8;  // nullopt: no recall filtering
    ApMode ap_mode = ApMode::kContinuous;
    bool aose_per_prediction = false;  // count witness predictions instead of GT boxes
};

/// Average precision for one class from (score, is_tp) records.
/// Records must be score-descending with dropped predictions removed.
/// Classes with no ground truth have no defined AP.
inline std::optional<double> average_precision(const std::vector<PredRecord>& records,
                                               int gt_count,
                                               ApMode mode = ApMode::kContinuous) {
    if (gt_count <= 0) return std::nullopt;

    std::vector<double> recall, precision;
    int tp = 0, fp = 0;
    for (const auto& r : records) {
        if (r.dropped) continue;
        r.is_tp ? ++tp : ++fp;
        recall.push_back(static_cast<double>(tp) / gt_count);
        precision.push_back(static_cast<double>(tp) / (tp + fp));
    }
    if (recall.empty()) return 0.0;

    // Monotone envelope from the right.
    std::vector<double> env(precision.size());
    double running = 0.0;
    for (std::size_t i = precision.size(); i-- > 0;) {
        running = std::max(running, precision[i]);
        env[i] = running;
    }

    if (mode == ApMode::kVoc11Point) {
        double sum = 0.0;
        for (int k = 0; k <= 10; ++k) {
            const double level = k / 10.0;
            double best = 0.0;
            for (std::size_t i = 0; i < recall.size(); ++i)
                if (recall[i] >= level) {
                    best = env[i];
                    break;
                }
            sum += best;
        }
        return sum / 11.0;
    }

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
        ap += (recall[i] - prev_recall) * env[i];
        prev_recall = recall[i];
    }
    return ap;
}

/// Wilderness impact evaluated on the prediction set retained at the score
/// threshold where aggregate known recall first reaches `recall_level`.
struct WiResult {
    std::optional<double> value;
    int fp_o = 0;  // numerator, restricted to the retained set
    int tp_k = 0;
    int fp_k = 0;
    double score_threshold = 0.0;
    double achieved_recall = 0.0;
    bool recall_unreachable = false;
};

inline WiResult wilderness_impact(const MatchTable& table,
                                  const std::vector<Prediction>& predictions,
                                  const std::vector<GroundTruthBox>& ground_truths,
                                  const TaskSpec& spec, std::size_t task_index,
                                  const MatchConfig& cfg,
                                  std::optional<double> recall_level = 0.8,
                                  bool per_prediction = false) {
    WiResult res;

    struct Entry {
        std::size_t pred_index;
        double score;
        bool is_tp;
    };
    std::vector<Entry> merged;
    for (const auto& cm : table.per_class)
        for (const auto& r : cm.records)
            if (!r.dropped) merged.push_back({r.pred_index, r.score, r.is_tp});
    std::sort(merged.begin(), merged.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.pred_index < b.pred_index;
    });

    double threshold = -std::numeric_limits<double>::infinity();
    if (recall_level && table.known_gt_total > 0 && !merged.empty()) {
        int cum_tp = 0;
        bool reached = false;
        for (const auto& e : merged) {
            if (e.is_tp) ++cum_tp;
            const double rec = static_cast<double>(cum_tp) / table.known_gt_total;
            if (rec >= *recall_level) {
                threshold = e.score;
                reached = true;
                break;
            }
        }
        res.achieved_recall = static_cast<double>(table.tp_total) / table.known_gt_total;
        if (!reached) res.recall_unreachable = true;  // fall back to max attainable
    } else if (recall_level) {
        res.recall_unreachable = true;
    }
    res.score_threshold = threshold;

    std::unordered_set<std::size_t> retained;
    for (const auto& e : merged)
        if (e.score >= threshold) {
            retained.insert(e.pred_index);
            e.is_tp ? ++res.tp_k : ++res.fp_k;
        }

    // FP_o over the same retained set.
    const std::vector<ClassId> unknown = spec.unknown(task_index);
    const std::unordered_set<ClassId> unknown_set(unknown.begin(), unknown.end());
    std::unordered_map<ImageId, std::vector<std::size_t>> candidates_by_image;
    for (std::size_t pi : retained)
        if (!table.known_tp[pi]) candidates_by_image[predictions[pi].image_id].push_back(pi);
    std::unordered_set<std::size_t> witnesses;
    for (std::size_t gi = 0; gi < ground_truths.size(); ++gi) {
        const auto& g = ground_truths[gi];
        if (g.is_crowd || !unknown_set.count(g.class_id)) continue;
        auto it = candidates_by_image.find(g.image_id);
        if (it == candidates_by_image.end()) continue;
        bool covered = false;
        for (std::size_t pi : it->second) {
            if (iou(predictions[pi].bbox, g.bbox) > cfg.iou_threshold) {
                covered = true;
                witnesses.insert(pi);
            }
        }
        if (covered && !per_prediction) ++res.fp_o;
    }
    if (per_prediction) res.fp_o = static_cast<int>(witnesses.size());

    const int denom = res.tp_k + res.fp_k;
    if (denom > 0) res.value = static_cast<double>(res.fp_o) / denom;
    return res;
}

/// Unknown Detection Recall: localization rate of unknown objects, whether
/// recalled as "unknown" or by a misclassified known-class box.
inline std::optional<double> udr(const UnknownCounts& c) {
    const int denom = c.tp_u + c.fn_u;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp_u + c.fn_u_star) / denom;
}

/// Unknown Detection Precision: fraction of localized unknown objects that
/// were also classified as unknown.
inline std::optional<double> udp(const UnknownCounts& c) {
    const int denom = c.tp_u + c.fn_u_star;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp_u) / denom;
}

struct EvalReport {
    std::size_t task_index = 0;  // zero-based; rendered one-based in output
    std::size_t task_count = 0;
    std::map<ClassId, std::optional<double>> ap;
    std::map<ClassId, std::optional<double>> recall;
    std::optional<double> map_previous;
    std::optional<double> map_current;
    std::optional<double> map_both;
    std::optional<double> ur;
    std::optional<double> udr_value;
    std::optional<double> udp_value;
    WiResult wi;
    int a_ose = 0;
    int tp_k = 0;
    int fp_k = 0;
    UnknownCounts counts;
    EvalConfig config;
};

namespace detail {

inline std::optional<double> average_over(const std::map<ClassId, std::optional<double>>& ap,
                                          const std::vector<ClassId>& classes) {
    double sum = 0.0;
    int n = 0;
    for (ClassId c : classes) {
        auto it = ap.find(c);
        if (it == ap.end() || !it->second) continue;
        sum += *it->second;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

/// Full metric suite for one (task, prediction file) pair.
inline EvalReport evaluate(const Dataset& dataset, const std::vector<Prediction>& predictions,
                           const TaskSpec& spec, std::size_t task_index,
                           const EvalConfig& cfg = {}) {
    if (task_index >= spec.task_count())
        throw ValidationError("task index " + std::to_string(task_index + 1) +
                              " out of range (" + std::to_string(spec.task_count()) +
                              " tasks)");
    {
        const auto& all = spec.all_classes();
        for (const auto& cat : dataset.categories)
            if (!std::binary_search(all.begin(), all.end(), cat.id))
                throw ValidationError("task config does not cover dataset class " +
                                      std::to_string(cat.id) + " (" + cat.name + ")");
    }

    EvalReport rep;
    rep.task_index = task_index;
    rep.task_count = spec.task_count();
    rep.config = cfg;

    const MatchTable table =
        match_known(predictions, dataset.ground_truths, spec, task_index, cfg.match);
    rep.counts = match_unknown(predictions, dataset.ground_truths, spec, task_index, cfg.match,
                               table.known_tp);
    rep.tp_k = table.tp_total;
    rep.fp_k = table.fp_total;

    for (const auto& cm : table.per_class) {
        rep.ap[cm.class_id] = average_precision(cm.records, cm.gt_count, cfg.ap_mode);
        rep.recall[cm.class_id] =
            cm.gt_count > 0
                ? std::optional<double>(static_cast<double>(cm.tp) / cm.gt_count)
                : std::nullopt;
    }

    rep.map_previous = detail::average_over(rep.ap, spec.previous(task_index));
    rep.map_current = detail::average_over(rep.ap, spec.current(task_index));
    rep.map_both = detail::average_over(rep.ap, spec.known(task_index));

    if (rep.counts.total_unknown_gt > 0)
        rep.ur = static_cast<double>(rep.counts.tp_u) / rep.counts.total_unknown_gt;
    rep.udr_value = udr(rep.counts);
    rep.udp_value = udp(rep.counts);

    rep.wi = wilderness_impact(table, predictions, dataset.ground_truths, spec, task_index,
                               cfg.match, cfg.wi_recall_level, cfg.aose_per_prediction);
    rep.a_ose = cfg.aose_per_prediction ? rep.counts.fp_o_predictions : rep.counts.fp_o;

    return rep;
}

inline nlohmann::json report_to_json(const EvalReport& rep) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };

    json per_class = json::object();
    for (const auto& [cid, ap] : rep.ap) {
        per_class[std::to_string(cid)] = {{"ap", opt(ap)},
                                          {"recall", opt(rep.recall.at(cid))}};
    }

    json j{
        {"task", rep.task_index + 1},
        {"task_count", rep.task_count},
        {"per_class", per_class},
        {"mAP_prev", opt(rep.map_previous)},
        {"mAP_cur", opt(rep.map_current)},
        {"mAP_both", opt(rep.map_both)},
        {"UR", opt(rep.ur)},
        {"UDR", opt(rep.udr_value)},
        {"UDP", opt(rep.udp_value)},
        {"WI", opt(rep.wi.value)},
        {"A-OSE", rep.a_ose},
        {"tp_k", rep.tp_k},
        {"fp_k", rep.fp_k},
        {"wi_detail",
         {{"fp_o_retained", rep.wi.fp_o},
          {"tp_k_retained", rep.wi.tp_k},
          {"fp_k_retained", rep.wi.fp_k},
          {"score_threshold", rep.wi.score_threshold},
          {"achieved_recall", rep.wi.achieved_recall},
          {"recall_unreachable", rep.wi.recall_unreachable}}},
        {"counts",
         {{"tp_u", rep.counts.tp_u},
          {"fn_u", rep.counts.fn_u},
          {"fn_u_star", rep.counts.fn_u_star},
          {"fp_o", rep.counts.fp_o},
          {"fp_o_predictions", rep.counts.fp_o_predictions},
          {"total_unknown_gt", rep.counts.total_unknown_gt}}},
        {"config",
         {{"iou_threshold", rep.config.match.iou_threshold},
          {"score_threshold", rep.config.match.score_threshold},
          {"wi_recall_level",
           rep.config.wi_recall_level ? json(*rep.config.wi_recall_level) : json(nullptr)},
          {"ap_mode", rep.config.ap_mode == ApMode::kContinuous ? "continuous" : "voc11"},
          {"aose_per_prediction", rep.config.aose_per_prediction}}},
    };
    return j;
}

inline std::string csv_header() {
    return "task,WI,A-OSE,mAP_prev,mAP_cur,mAP_both,UR,UDR,UDP";
}

inline std::string csv_row(const EvalReport& rep) {
    auto cell = [](const std::optional<double>& v) {
        return v ? detail::format_number(*v) : std::string();
    };
    std::string row = std::to_string(rep.task_index + 1);
    row += ',' + cell(rep.wi.value);
    row += ',' + std::to_string(rep.a_ose);
    row += ',' + cell(rep.map_previous);
    row += ',' + cell(rep.map_current);
    row += ',' + cell(rep.map_both);
    row += ',' + cell(rep.ur);
    row += ',' + cell(rep.udr_value);
    row += ',' + cell(rep.udp_value);
    return row;
}

}  // namespace owod
