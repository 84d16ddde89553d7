#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "owod/coco_io.hpp"
#include "owod/errors.hpp"
#include "owod/geometry.hpp"
#include "owod/types.hpp"

namespace owod::pad {

struct Proposal {
    BBox bbox;
    double objectness = 0.0;
    bool matched_known = false;          // assigned to a known-class GT by the RPN
    std::optional<int> anchor_id;        // originating anchor, when the RPN kept it
};

enum class AnchorLabel { kPositive, kNegative, kUnknownPositive, kIgnore };

struct Anchor {
    BBox bbox;
    AnchorLabel label = AnchorLabel::kNegative;
    std::optional<double> score;  // classifier output f(a), required for the loss
};

using AnchorSet = std::vector<Anchor>;

/// A proposal with its advisor-confirmed objectness (zero when unconfirmed).
struct ConfirmedProposal {
    Proposal proposal;
    double confirmed_score = 0.0;
};

/// Potential unknown proposals: among proposals not matched to known-class
/// ground truth, the k of highest objectness (ties keep input order).
inline std::vector<Proposal> select_potential_unknowns(const std::vector<Proposal>& proposals,
                                                       int k = 50) {
    if (k <= 0) throw ValidationError("top-k must be positive");
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < proposals.size(); ++i)
        if (!proposals[i].matched_known) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return proposals[a].objectness > proposals[b].objectness;
    });
    if (order.size() > static_cast<std::size_t>(k)) order.resize(k);
    std::vector<Proposal> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(proposals[i]);
    return out;
}

/// Advisor confirmation: a potential proposal keeps its objectness iff some
/// auxiliary region overlaps it with IOU strictly above theta, else zero.
inline std::vector<ConfirmedProposal> confirm(const std::vector<Proposal>& potentials,
                                              const std::vector<Proposal>& auxiliary,
                                              double theta = 0.7) {
    if (theta < 0.0 || theta > 1.0) throw ValidationError("theta outside [0,1]");
    std::vector<ConfirmedProposal> out;
    out.reserve(potentials.size());
    for (const auto& p : potentials) {
        double best = 0.0;
        for (const auto& a : auxiliary) best = std::max(best, iou(p.bbox, a.bbox));
        out.push_back({p, best > theta ? p.objectness : 0.0});
    }
    return out;
}

/// Selection over confirmed proposals: the nonzero-score ones, optionally
/// capped to the k best by confirmed score (ties keep input order).
inline std::vector<ConfirmedProposal> select_confirmed(
    const std::vector<ConfirmedProposal>& confirmed, std::optional<int> k = std::nullopt) {
    if (k && *k <= 0) throw ValidationError("top-k must be positive");
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < confirmed.size(); ++i)
        if (confirmed[i].confirmed_score > 0.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return confirmed[a].confirmed_score > confirmed[b].confirmed_score;
    });
    if (k && order.size() > static_cast<std::size_t>(*k)) order.resize(*k);
    std::vector<ConfirmedProposal> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(confirmed[i]);
    return out;
}

/// Moves negative anchors claimed by a confirmed proposal into the
/// unknown-positive set.  Provenance is the stored anchor id when present,
/// IOU above match_iou otherwise.  Positive and ignore anchors never move.
inline AnchorSet reassign_anchors(const AnchorSet& anchors,
                                  const std::vector<ConfirmedProposal>& confirmed,
                                  double match_iou = 0.7) {
    AnchorSet out = anchors;
    for (const auto& c : confirmed) {
        if (c.confirmed_score <= 0.0) continue;
        if (c.proposal.anchor_id) {
            const int id = *c.proposal.anchor_id;
            if (id >= 0 && static_cast<std::size_t>(id) < out.size() &&
                out[id].label == AnchorLabel::kNegative)
                out[id].label = AnchorLabel::kUnknownPositive;
            continue;
        }
        for (auto& a : out)
            if (a.label == AnchorLabel::kNegative &&
                iou(a.bbox, c.proposal.bbox) > match_iou)
                a.label = AnchorLabel::kUnknownPositive;
    }
    return out;
}

struct RpnClsLoss {
    double loss = 0.0;
    int clamped = 0;  // anchors whose score hit exactly 0 or 1 and was clamped
};

/// Binary cross-entropy over the anchor set: positives and unknown-positives
/// score against target 1, remaining negatives against target 0, ignore
/// contributes nothing.
inline RpnClsLoss rpn_cls_loss(const AnchorSet& anchors) {
    constexpr double kEps = 1e-7;
    RpnClsLoss out;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const auto& a = anchors[i];
        if (a.label == AnchorLabel::kIgnore) continue;
        if (!a.score)
            throw ValidationError("anchor " + std::to_string(i) +
                                  " contributes to the loss but has no score");
        double f = *a.score;
        if (f < 0.0 || f > 1.0)
            throw ValidationError("anchor " + std::to_string(i) + " score outside [0,1]");
        if (f <= 0.0 || f >= 1.0) {
            f = std::clamp(f, kEps, 1.0 - kEps);
            ++out.clamped;
        }
        if (a.label == AnchorLabel::kNegative)
            out.loss += -std::log(1.0 - f);
        else
            out.loss += -std::log(f);
    }
    return out;
}

// ---------------------------------------------------------------------------
// File formats: one JSON object per file, image id -> array of records.

using PerImageProposals = std::map<std::string, std::vector<Proposal>>;
using PerImageConfirmed = std::map<std::string, std::vector<ConfirmedProposal>>;
using PerImageAnchors = std::map<std::string, AnchorSet>;

inline PerImageProposals load_rpn_proposals(const std::string& path) {
    const json root = detail::parse_file(path);
    if (!root.is_object()) throw ParseError(path + ": expected object image_id -> proposals");
    PerImageProposals out;
    for (const auto& [image, arr] : root.items()) {
        std::vector<Proposal> props;
        for (const auto& j : arr) {
            Proposal p;
            p.bbox = detail::bbox_from_json(j.at("bbox"), path + " image " + image);
            p.objectness = j.at("objectness").get<double>();
            if (p.objectness < 0.0 || p.objectness > 1.0)
                throw ValidationError(path + " image " + image + ": objectness outside [0,1]");
            p.matched_known = j.value("matched_known", false);
            if (j.contains("anchor_id")) p.anchor_id = j.at("anchor_id").get<int>();
            props.push_back(std::move(p));
        }
        out[image] = std::move(props);
    }
    return out;
}

/// Auxiliary proposal files carry {bbox, score?}.  At most `top_k` regions
/// per image are kept, by descending score when scores exist, else file
/// order.
inline PerImageProposals load_auxiliary_proposals(const std::string& path, int top_k = 50) {
    if (top_k <= 0) throw ValidationError("top-k must be positive");
    const json root = detail::parse_file(path);
    if (!root.is_object()) throw ParseError(path + ": expected object image_id -> proposals");
    PerImageProposals out;
    for (const auto& [image, arr] : root.items()) {
        std::vector<Proposal> props;
        bool any_score = false;
        for (const auto& j : arr) {
            Proposal p;
            p.bbox = detail::bbox_from_json(j.at("bbox"), path + " image " + image);
            if (j.contains("score")) {
                p.objectness = j.at("score").get<double>();
                any_score = true;
            }
            props.push_back(std::move(p));
        }
        if (any_score) {
            std::vector<std::size_t> order(props.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return props[a].objectness > props[b].objectness;
            });
            if (order.size() > static_cast<std::size_t>(top_k)) order.resize(top_k);
            std::vector<Proposal> kept;
            kept.reserve(order.size());
            for (std::size_t i : order) kept.push_back(props[i]);
            props = std::move(kept);
        } else if (props.size() > static_cast<std::size_t>(top_k)) {
            props.resize(top_k);
        }
        out[image] = std::move(props);
    }
    return out;
}

inline void save_confirmed(const PerImageConfirmed& confirmed, const std::string& path) {
    json root = json::object();
    for (const auto& [image, list] : confirmed) {
        json arr = json::array();
        for (const auto& c : list) {
            json j = {{"bbox", detail::bbox_to_json(c.proposal.bbox)},
                      {"objectness", c.proposal.objectness},
                      {"confirmed_score", c.confirmed_score}};
            if (c.proposal.anchor_id) j["anchor_id"] = *c.proposal.anchor_id;
            arr.push_back(std::move(j));
        }
        root[image] = std::move(arr);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << root.dump(1) << '\n';
}

inline PerImageConfirmed load_confirmed(const std::string& path) {
    const json root = detail::parse_file(path);
    if (!root.is_object()) throw ParseError(path + ": expected object image_id -> proposals");
    PerImageConfirmed out;
    for (const auto& [image, arr] : root.items()) {
        std::vector<ConfirmedProposal> list;
        for (const auto& j : arr) {
            ConfirmedProposal c;
            c.proposal.bbox = detail::bbox_from_json(j.at("bbox"), path + " image " + image);
            c.proposal.objectness = j.value("objectness", 0.0);
            if (j.contains("anchor_id")) c.proposal.anchor_id = j.at("anchor_id").get<int>();
            c.confirmed_score = j.at("confirmed_score").get<double>();
            list.push_back(std::move(c));
        }
        out[image] = std::move(list);
    }
    return out;
}

inline const char* anchor_label_name(AnchorLabel l) {
    switch (l) {
        case AnchorLabel::kPositive: return "positive";
        case AnchorLabel::kNegative: return "negative";
        case AnchorLabel::kUnknownPositive: return "unknown_positive";
        case AnchorLabel::kIgnore: return "ignore";
    }
    return "negative";
}

inline AnchorLabel anchor_label_from_name(const std::string& s, const std::string& what) {
    if (s == "positive") return AnchorLabel::kPositive;
    if (s == "negative") return AnchorLabel::kNegative;
    if (s == "unknown_positive") return AnchorLabel::kUnknownPositive;
    if (s == "ignore") return AnchorLabel::kIgnore;
    throw ParseError(what + ": unknown anchor label '" + s + "'");
}

inline PerImageAnchors load_anchors(const std::string& path) {
    const json root = detail::parse_file(path);
    if (!root.is_object()) throw ParseError(path + ": expected object image_id -> anchors");
    PerImageAnchors out;
    for (const auto& [image, arr] : root.items()) {
        AnchorSet set;
        for (const auto& j : arr) {
            Anchor a;
            a.bbox = detail::bbox_from_json(j.at("bbox"), path + " image " + image);
            a.label = anchor_label_from_name(j.at("label").get<std::string>(),
                                             path + " image " + image);
            if (j.contains("score")) a.score = j.at("score").get<double>();
            set.push_back(std::move(a));
        }
        out[image] = std::move(set);
    }
    return out;
}

inline void save_anchors(const PerImageAnchors& anchors, const std::string& path) {
    json root = json::object();
    for (const auto& [image, set] : anchors) {
        json arr = json::array();
        for (const auto& a : set) {
            json j = {{"bbox", detail::bbox_to_json(a.bbox)},
                      {"label", anchor_label_name(a.label)}};
            if (a.score) j["score"] = *a.score;
            arr.push_back(std::move(j));
        }
        root[image] = std::move(arr);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << root.dump(1) << '\n';
}

}  // namespace owod::pad
