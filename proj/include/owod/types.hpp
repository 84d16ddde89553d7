#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "owod/errors.hpp"
#include "owod/geometry.hpp"

namespace owod {

using ClassId = int;
using ImageId = std::int64_t;

/// Reserved label for "unknown" in prediction files.  COCO category ids are
/// positive, so -1 can never collide with a dataset class.
inline constexpr ClassId kUnknownClass = -1;

struct Category {
    ClassId id = 0;
    std::string name;
    std::string supercategory;
};

struct ImageInfo {
    ImageId id = 0;
    std::string file_name;
    double width = 0.0;
    double height = 0.0;
};

/// One annotated object.  class_id is always a real dataset class; whether
/// it counts as "unknown" is decided by the TaskSpec at evaluation time.
struct GroundTruthBox {
    std::int64_t annotation_id = 0;
    ImageId image_id = 0;
    BBox bbox;
    ClassId class_id = 0;
    bool is_crowd = false;
};

/// One detection: a known class id or kUnknownClass, a score in [0,1] and
/// optionally the full per-known-class score vector.
struct Prediction {
    ImageId image_id = 0;
    BBox bbox;
    ClassId label = kUnknownClass;
    double score = 0.0;
    std::optional<std::map<ClassId, double>> score_vector;
};

/// Ordered partition of the dataset classes into incremental tasks.
/// known(t) accumulates tasks 0..t; unknown(t) is everything after.
class TaskSpec {
public:
    TaskSpec() = default;

    explicit TaskSpec(std::vector<std::vector<ClassId>> tasks) : tasks_(std::move(tasks)) {
        std::unordered_set<ClassId> seen;
        for (std::size_t t = 0; t < tasks_.size(); ++t) {
            auto& cls = tasks_[t];
            if (cls.empty())
                throw ValidationError("task " + std::to_string(t + 1) + " has no classes");
            std::sort(cls.begin(), cls.end());
            for (ClassId c : cls) {
                if (c == kUnknownClass)
                    throw ValidationError("class id -1 is reserved for the unknown sentinel");
                if (!seen.insert(c).second)
                    throw ValidationError("class " + std::to_string(c) +
                                          " appears in more than one task");
            }
        }
        all_.assign(seen.begin(), seen.end());
        std::sort(all_.begin(), all_.end());
    }

    std::size_t task_count() const { return tasks_.size(); }
    const std::vector<std::vector<ClassId>>& tasks() const { return tasks_; }
    const std::vector<ClassId>& all_classes() const { return all_; }

    const std::vector<ClassId>& current(std::size_t t) const {
        check_index(t);
        return tasks_[t];
    }

    /// Union of tasks 0..t (sorted).
    std::vector<ClassId> known(std::size_t t) const {
        check_index(t);
        std::vector<ClassId> out;
        for (std::size_t i = 0; i <= t; ++i)
            out.insert(out.end(), tasks_[i].begin(), tasks_[i].end());
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Union of tasks 0..t-1 (empty for the first task).
    std::vector<ClassId> previous(std::size_t t) const {
        check_index(t);
        if (t == 0) return {};
        return known(t - 1);
    }

    /// all_classes minus known(t) (sorted).
    std::vector<ClassId> unknown(std::size_t t) const {
        const auto k = known(t);
        std::vector<ClassId> out;
        std::set_difference(all_.begin(), all_.end(), k.begin(), k.end(),
                            std::back_inserter(out));
        return out;
    }

private:
    void check_index(std::size_t t) const {
        if (t >= tasks_.size())
            throw ValidationError("task index " + std::to_string(t + 1) + " out of range (" +
                                  std::to_string(tasks_.size()) + " tasks)");
    }

    std::vector<std::vector<ClassId>> tasks_;
    std::vector<ClassId> all_;
};

struct Dataset {
    std::vector<ImageInfo> images;
    std::vector<GroundTruthBox> ground_truths;
    std::vector<Category> categories;

    const Category* find_category(ClassId id) const {
        for (const auto& c : categories)
            if (c.id == id) return &c;
        return nullptr;
    }

    const Category* find_category(const std::string& name) const {
        for (const auto& c : categories)
            if (c.name == name) return &c;
        return nullptr;
    }

    bool has_image(ImageId id) const {
        for (const auto& im : images)
            if (im.id == id) return true;
        return false;
    }

    std::vector<ClassId> class_ids() const {
        std::vector<ClassId> out;
        out.reserve(categories.size());
        for (const auto& c : categories) out.push_back(c.id);
        std::sort(out.begin(), out.end());
        return out;
    }
};

}  // namespace owod
