#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "owod/coco_io.hpp"
#include "owod/errors.hpp"
#include "owod/types.hpp"

namespace owod::cec {

/// Per-class calibration of the expelling classifier: m is the mean score a
/// training prediction gives class c when it sits on a class-c box (IOU
/// strictly above phi), M the number of such (prediction, box) pairs.
/// Classes with M = 0 have no evidence and never expel.
struct ClassStat {
    double m = 0.0;
    long long count = 0;
};

struct ExpellingProfile {
    double phi = 0.9;
    double alpha = 0.5;
    std::map<ClassId, ClassStat> classes;

    std::vector<ClassId> never_expels() const {
        std::vector<ClassId> out;
        for (const auto& [cid, st] : classes)
            if (st.count == 0) out.push_back(cid);
        return out;
    }
};

struct CalibratedPrediction {
    Prediction original;
    std::map<ClassId, double> surviving;  // each entry: original score or exactly 0
    ClassId label = kUnknownClass;
    double score = 1.0;
    bool expelled_all = false;
};

/// Builds the expelling profile from training predictions (with score
/// vectors) and training ground truth.  Every (prediction, class-c GT) pair
/// in the same image with IOU > phi contributes the prediction's class-c
/// score to the class-c mean.  Crowd regions do not pair.
inline ExpellingProfile calibrate(const std::vector<Prediction>& train_predictions,
                                  const std::vector<GroundTruthBox>& train_ground_truths,
                                  const std::vector<ClassId>& known_classes,
                                  double phi = 0.9, double alpha = 0.5) {
    if (phi < 0.0 || phi > 1.0) throw ValidationError("phi outside [0,1]");
    if (alpha < 0.0) throw ValidationError("alpha must be nonnegative");

    ExpellingProfile profile;
    profile.phi = phi;
    profile.alpha = alpha;
    std::map<ClassId, double> sums;
    for (ClassId c : known_classes) {
        profile.classes[c] = {};
        sums[c] = 0.0;
    }

    std::unordered_map<ImageId, std::vector<const GroundTruthBox*>> gts_by_image;
    for (const auto& g : train_ground_truths) {
        if (g.is_crowd) continue;
        if (!profile.classes.count(g.class_id)) continue;
        gts_by_image[g.image_id].push_back(&g);
    }

    for (std::size_t j = 0; j < train_predictions.size(); ++j) {
        const auto& p = train_predictions[j];
        if (!p.score_vector)
            throw ValidationError("training prediction #" + std::to_string(j) +
                                  " has no score vector");
        auto it = gts_by_image.find(p.image_id);
        if (it == gts_by_image.end()) continue;
        for (const GroundTruthBox* g : it->second) {
            if (!(iou(p.bbox, g->bbox) > phi)) continue;
            const auto sit = p.score_vector->find(g->class_id);
            if (sit == p.score_vector->end())
                throw ValidationError("training prediction #" + std::to_string(j) +
                                      " lacks a score for class " +
                                      std::to_string(g->class_id));
            sums[g->class_id] += sit->second;
            ++profile.classes[g->class_id].count;
        }
    }

    for (auto& [cid, st] : profile.classes)
        if (st.count > 0) st.m = sums[cid] / static_cast<double>(st.count);
    return profile;
}

/// Eq.-style expelling indicator: class c survives iff its score exceeds
/// alpha times the class's calibrated mean (strictly).  Classes without
/// calibration evidence keep their score untouched by the subtrahend.
inline bool survives(double score, const ClassStat& stat, double alpha) {
    const double subtrahend = stat.count > 0 ? alpha * stat.m : 0.0;
    return score - subtrahend > 0.0;
}

/// Re-allocates one prediction: expelled classes drop to score 0; if any
/// class survives the label is the surviving argmax, otherwise the
/// prediction becomes "unknown" with score exactly 1.  Predictions already
/// labeled unknown pass through untouched.
inline CalibratedPrediction expel(const Prediction& prediction,
                                  const ExpellingProfile& profile) {
    CalibratedPrediction out;
    out.original = prediction;

    if (prediction.label == kUnknownClass) {
        out.label = kUnknownClass;
        out.score = prediction.score;
        if (prediction.score_vector) out.surviving = *prediction.score_vector;
        return out;
    }
    if (!prediction.score_vector)
        throw ValidationError("prediction has no score vector; nothing to expel");

    const auto& vec = *prediction.score_vector;
    for (const auto& [cid, st] : profile.classes)
        if (!vec.count(cid))
            throw ValidationError("score vector lacks profiled class " + std::to_string(cid));

    ClassId best_class = kUnknownClass;
    double best_score = 0.0;
    for (const auto& [cid, s] : vec) {
        const auto pit = profile.classes.find(cid);
        static const ClassStat kNoEvidence{};
        const ClassStat& st = pit != profile.classes.end() ? pit->second : kNoEvidence;
        const bool keep = survives(s, st, profile.alpha);
        out.surviving[cid] = keep ? s : 0.0;
        if (keep && (best_class == kUnknownClass || s > best_score)) {
            best_class = cid;
            best_score = s;
        }
    }

    if (best_class == kUnknownClass) {
        out.expelled_all = true;
        out.label = kUnknownClass;
        out.score = 1.0;  // the minted unknown logit
    } else {
        out.label = best_class;
        out.score = best_score;
    }
    return out;
}

inline std::vector<CalibratedPrediction> apply_batch(const std::vector<Prediction>& predictions,
                                                     const ExpellingProfile& profile) {
    std::vector<CalibratedPrediction> out;
    out.reserve(predictions.size());
    for (const auto& p : predictions) out.push_back(expel(p, profile));
    return out;
}

/// Flattens calibrated predictions back into the shared prediction format.
inline std::vector<Prediction> to_predictions(const std::vector<CalibratedPrediction>& calibrated) {
    std::vector<Prediction> out;
    out.reserve(calibrated.size());
    for (const auto& c : calibrated) {
        Prediction p = c.original;
        p.label = c.label;
        p.score = c.score;
        if (!c.surviving.empty()) p.score_vector = c.surviving;
        out.push_back(std::move(p));
    }
    return out;
}

inline void save_profile(const ExpellingProfile& profile, const std::string& path,
                         const std::string& config_digest = "") {
    json classes = json::object();
    for (const auto& [cid, st] : profile.classes) {
        json entry = {{"M", st.count}};
        entry["m"] = st.count > 0 ? json(st.m) : json(nullptr);
        classes[std::to_string(cid)] = std::move(entry);
    }
    json root = {{"format", "owod-expelling-profile"},
                 {"version", 1},
                 {"phi", profile.phi},
                 {"alpha", profile.alpha},
                 {"classes", classes}};
    if (!config_digest.empty()) root["config_digest"] = config_digest;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << root.dump(1) << '\n';
}

inline ExpellingProfile load_profile(const std::string& path) {
    const json root = detail::parse_file(path);
    if (!root.is_object() || root.value("format", "") != "owod-expelling-profile")
        throw ParseError(path + ": not an expelling profile file");
    ExpellingProfile profile;
    profile.phi = root.at("phi").get<double>();
    profile.alpha = root.at("alpha").get<double>();
    for (const auto& [key, entry] : root.at("classes").items()) {
        ClassStat st;
        st.count = entry.at("M").get<long long>();
        if (st.count > 0) st.m = entry.at("m").get<double>();
        try {
            profile.classes[std::stoi(key)] = st;
        } catch (const std::exception&) {
            throw ParseError(path + ": class key '" + key + "' is not an id");
        }
    }
    return profile;
}

}  // namespace owod::cec
