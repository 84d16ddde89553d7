#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "owod/errors.hpp"
#include "owod/types.hpp"

namespace owod {

using json = nlohmann::json;

namespace detail {

inline json parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": malformed JSON at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
}

inline BBox bbox_from_json(const json& arr, const std::string& what) {
    if (!arr.is_array() || arr.size() != 4)
        throw ParseError(what + ": bbox must be [x, y, w, h]");
    const double x = arr[0].get<double>();
    const double y = arr[1].get<double>();
    const double w = arr[2].get<double>();
    const double h = arr[3].get<double>();
    if (w < 0.0 || h < 0.0)
        throw ValidationError(what + ": negative bbox width/height");
    return BBox::from_xywh(x, y, w, h);
}

inline json bbox_to_json(const BBox& b) {
    return json::array({b.x_min, b.y_min, b.width(), b.height()});
}

}  // namespace detail

/// Reads a COCO-style annotation file ("images", "annotations", "categories").
/// Annotation bboxes are converted from [x, y, w, h] to corner form.
inline Dataset load_annotations(const std::string& path) {
    const json root = detail::parse_file(path);
    if (!root.is_object() || !root.contains("images") || !root.contains("annotations") ||
        !root.contains("categories"))
        throw ParseError(path + ": expected object with images/annotations/categories");

    Dataset ds;
    std::unordered_set<ImageId> image_ids;
    for (const auto& j : root.at("images")) {
        ImageInfo im;
        im.id = j.at("id").get<ImageId>();
        im.file_name = j.value("file_name", "");
        im.width = j.value("width", 0.0);
        im.height = j.value("height", 0.0);
        if (!image_ids.insert(im.id).second)
            throw IntegrityError(path + ": duplicate image id " + std::to_string(im.id));
        ds.images.push_back(std::move(im));
    }

    std::unordered_set<ClassId> class_ids;
    for (const auto& j : root.at("categories")) {
        Category c;
        c.id = j.at("id").get<ClassId>();
        c.name = j.value("name", "");
        c.supercategory = j.value("supercategory", "");
        if (c.id == kUnknownClass)
            throw ValidationError(path + ": category id -1 is reserved");
        if (!class_ids.insert(c.id).second)
            throw IntegrityError(path + ": duplicate category id " + std::to_string(c.id));
        ds.categories.push_back(std::move(c));
    }

    for (const auto& j : root.at("annotations")) {
        GroundTruthBox g;
        g.annotation_id = j.value("id", std::int64_t{0});
        g.image_id = j.at("image_id").get<ImageId>();
        g.class_id = j.at("category_id").get<ClassId>();
        const std::string what =
            path + ": annotation " + std::to_string(g.annotation_id);
        if (!image_ids.count(g.image_id))
            throw IntegrityError(what + " references missing image " +
                                 std::to_string(g.image_id));
        if (!class_ids.count(g.class_id))
            throw IntegrityError(what + " references missing category " +
                                 std::to_string(g.class_id));
        g.bbox = detail::bbox_from_json(j.at("bbox"), what);
        g.is_crowd = j.value("iscrowd", 0) != 0;
        ds.ground_truths.push_back(std::move(g));
    }
    return ds;
}

inline json dataset_to_json(const Dataset& ds) {
    json root;
    root["images"] = json::array();
    for (const auto& im : ds.images)
        root["images"].push_back({{"id", im.id},
                                  {"file_name", im.file_name},
                                  {"width", im.width},
                                  {"height", im.height}});
    root["annotations"] = json::array();
    for (const auto& g : ds.ground_truths)
        root["annotations"].push_back({{"id", g.annotation_id},
                                       {"image_id", g.image_id},
                                       {"category_id", g.class_id},
                                       {"bbox", detail::bbox_to_json(g.bbox)},
                                       {"area", g.bbox.area()},
                                       {"iscrowd", g.is_crowd ? 1 : 0}});
    root["categories"] = json::array();
    for (const auto& c : ds.categories)
        root["categories"].push_back(
            {{"id", c.id}, {"name", c.name}, {"supercategory", c.supercategory}});
    return root;
}

inline void save_annotations(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << dataset_to_json(ds).dump(1) << '\n';
}

/// Reads a prediction file: JSON array of {image_id, category_id, bbox,
/// score, scores?}.  category_id -1 denotes the unknown label; any other id
/// must be present in `classes`.
inline std::vector<Prediction> load_predictions(const std::string& path,
                                                const std::vector<Category>& classes) {
    const json root = detail::parse_file(path);
    if (!root.is_array())
        throw ParseError(path + ": expected a JSON array of predictions");

    std::unordered_set<ClassId> known_ids;
    for (const auto& c : classes) known_ids.insert(c.id);

    std::vector<Prediction> out;
    out.reserve(root.size());
    std::size_t idx = 0;
    for (const auto& j : root) {
        const std::string what = path + ": prediction #" + std::to_string(idx++);
        Prediction p;
        p.image_id = j.at("image_id").get<ImageId>();
        p.label = j.at("category_id").get<ClassId>();
        if (p.label != kUnknownClass && !known_ids.count(p.label))
            throw ValidationError(what + ": category_id " + std::to_string(p.label) +
                                  " is neither -1 nor a listed class");
        p.bbox = detail::bbox_from_json(j.at("bbox"), what);
        p.score = j.at("score").get<double>();
        if (!(p.score >= 0.0 && p.score <= 1.0))
            throw ValidationError(what + ": score " + std::to_string(p.score) +
                                  " outside [0,1]");
        if (j.contains("scores")) {
            std::map<ClassId, double> vec;
            for (const auto& [key, val] : j.at("scores").items()) {
                ClassId cid = 0;
                try {
                    cid = std::stoi(key);
                } catch (const std::exception&) {
                    throw ParseError(what + ": scores key '" + key + "' is not a class id");
                }
                if (!known_ids.count(cid))
                    throw ValidationError(what + ": scores key " + std::to_string(cid) +
                                          " is not a listed class");
                const double s = val.get<double>();
                if (!(s >= 0.0 && s <= 1.0))
                    throw ValidationError(what + ": scores[" + key + "] outside [0,1]");
                vec[cid] = s;
            }
            if (p.label != kUnknownClass && !vec.empty()) {
                double best = 0.0;
                for (const auto& [cid, s] : vec) best = std::max(best, s);
                const auto it = vec.find(p.label);
                if (it == vec.end() || it->second < best)
                    throw ValidationError(what + ": label " + std::to_string(p.label) +
                                          " is not the argmax of its score vector");
            }
            p.score_vector = std::move(vec);
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline json predictions_to_json(const std::vector<Prediction>& preds) {
    json root = json::array();
    for (const auto& p : preds) {
        json j = {{"image_id", p.image_id},
                  {"category_id", p.label},
                  {"bbox", detail::bbox_to_json(p.bbox)},
                  {"score", p.score}};
        if (p.score_vector) {
            json scores = json::object();
            for (const auto& [cid, s] : *p.score_vector) scores[std::to_string(cid)] = s;
            j["scores"] = std::move(scores);
        }
        root.push_back(std::move(j));
    }
    return root;
}

inline void save_predictions(const std::vector<Prediction>& preds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << predictions_to_json(preds).dump(1) << '\n';
}

}  // namespace owod
