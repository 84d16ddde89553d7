#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "owod/coco_io.hpp"
#include "owod/errors.hpp"
#include "owod/manifest.hpp"
#include "owod/types.hpp"

namespace owod {

// ---------------------------------------------------------------------------
// Task configuration: ordered array of {name, classes:[names or ids]}.

struct TaskConfigEntry {
    std::string name;
    std::vector<std::string> class_refs;  // names, or ids spelled as digits
};

struct ResolvedTasks {
    TaskSpec spec;
    std::vector<std::string> names;
    std::vector<std::vector<ClassId>> classes;  // config order, per task
};

struct TaskConfig {
    std::vector<TaskConfigEntry> entries;

    static TaskConfig from_json(const json& root, const std::string& what) {
        const json* arr = &root;
        if (root.is_object() && root.contains("tasks")) arr = &root.at("tasks");
        if (!arr->is_array() || arr->empty())
            throw ParseError(what + ": task config must be a non-empty array of tasks");
        TaskConfig cfg;
        std::size_t idx = 1;
        for (const auto& j : *arr) {
            TaskConfigEntry e;
            e.name = j.value("name", "task" + std::to_string(idx));
            if (!j.contains("classes") || !j.at("classes").is_array())
                throw ParseError(what + ": task '" + e.name + "' lacks a classes array");
            for (const auto& c : j.at("classes")) {
                if (c.is_number_integer())
                    e.class_refs.push_back(std::to_string(c.get<long long>()));
                else if (c.is_string())
                    e.class_refs.push_back(c.get<std::string>());
                else
                    throw ParseError(what + ": class entries must be names or integer ids");
            }
            cfg.entries.push_back(std::move(e));
            ++idx;
        }
        return cfg;
    }

    static TaskConfig load(const std::string& path) {
        return from_json(detail::parse_file(path), path);
    }

    /// Resolves names/ids against the dataset's category table and checks
    /// the config partitions the dataset classes exactly.
    ResolvedTasks resolve(const std::vector<Category>& categories) const {
        std::unordered_map<std::string, ClassId> by_name;
        std::unordered_set<ClassId> ids;
        for (const auto& c : categories) {
            by_name[c.name] = c.id;
            ids.insert(c.id);
        }

        ResolvedTasks out;
        std::map<ClassId, int> uses;
        for (const auto& e : entries) {
            std::vector<ClassId> cls;
            for (const auto& ref : e.class_refs) {
                ClassId cid;
                const bool numeric =
                    !ref.empty() &&
                    std::all_of(ref.begin(), ref.end(), [](unsigned char ch) {
                        return std::isdigit(ch) != 0;
                    });
                if (numeric) {
                    cid = std::stoi(ref);
                    if (!ids.count(cid))
                        throw ValidationError("task config references unknown class id " + ref);
                } else {
                    auto it = by_name.find(ref);
                    if (it == by_name.end())
                        throw ValidationError("task config references unknown class '" + ref +
                                              "'");
                    cid = it->second;
                }
                cls.push_back(cid);
                ++uses[cid];
            }
            out.names.push_back(e.name);
            out.classes.push_back(std::move(cls));
        }

        std::vector<std::string> duplicated, missing;
        for (const auto& [cid, n] : uses)
            if (n > 1) duplicated.push_back(std::to_string(cid));
        for (const auto& c : categories)
            if (!uses.count(c.id)) missing.push_back(c.name + " (" + std::to_string(c.id) + ")");
        if (!duplicated.empty() || !missing.empty()) {
            std::string msg = "task config is not a partition of the dataset classes;";
            if (!duplicated.empty()) {
                msg += " duplicated:";
                for (const auto& s : duplicated) msg += ' ' + s;
                msg += ';';
            }
            if (!missing.empty()) {
                msg += " missing:";
                for (const auto& s : missing) msg += ' ' + s;
            }
            throw ValidationError(msg);
        }

        out.spec = TaskSpec(out.classes);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Split plan.

struct Subset {
    std::vector<ImageInfo> images;
    std::vector<GroundTruthBox> annotations;
};

struct TaskSplit {
    std::string name;
    std::vector<ClassId> classes;  // newly-known classes of this task
    Subset train;
    Subset val;
};

struct SplitPlan {
    std::vector<TaskSplit> tasks;
    Subset test;
    bool has_test = false;
    std::vector<Category> categories;
    std::vector<ImageId> exclusions;
    std::uint64_t seed = 0;
    std::uint64_t val_size = 0;
    bool fine_tune = false;
    std::vector<ImageId> train_dupes_removed;
    std::vector<ImageId> test_dupes_removed;
    std::size_t cross_pool_removed = 0;

    std::vector<std::vector<ClassId>> task_classes() const {
        std::vector<std::vector<ClassId>> out;
        for (const auto& t : tasks) out.push_back(t.classes);
        return out;
    }

    /// Throws if the stored tasks do not form a valid spec.
    TaskSpec spec() const { return TaskSpec(task_classes()); }
};

// ---------------------------------------------------------------------------
// Deterministic sampling: splitmix64 stream + Fisher-Yates, so identical
// seeds give identical validation splits on every platform.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::uint64_t seed) {
    std::uint64_t state = seed;
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(splitmix64(state) % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact-duplicate removal.

enum class DedupMode {
    kFileName,  // annotation-only: identical file_name values
    kContent,   // hash + byte-compare of the image files themselves
};

struct DedupResult {
    Dataset dataset;
    std::vector<ImageId> removed;
};

/// Removes exact duplicates, keeping the first occurrence.  In content mode
/// files are grouped by (size, hash) and byte-compared before removal, so a
/// hash collision can never delete a non-duplicate.
inline DedupResult deduplicate(const Dataset& input, DedupMode mode = DedupMode::kFileName,
                               const std::string& images_dir = "") {
    DedupResult out;
    std::unordered_set<ImageId> removed_ids;

    if (mode == DedupMode::kFileName) {
        std::unordered_set<std::string> seen;
        for (const auto& im : input.images) {
            if (!seen.insert(im.file_name).second) {
                out.removed.push_back(im.id);
                removed_ids.insert(im.id);
            }
        }
    } else {
        namespace fs = std::filesystem;
        struct FileKey {
            std::uintmax_t size;
            std::string digest;
            bool operator==(const FileKey&) const = default;
        };
        struct FileKeyHash {
            std::size_t operator()(const FileKey& k) const {
                return std::hash<std::string>()(k.digest) ^ std::hash<std::uintmax_t>()(k.size);
            }
        };
        auto read_all = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            if (!in) throw IoError("cannot read image file " + p.string());
            return std::string(std::istreambuf_iterator<char>(in),
                               std::istreambuf_iterator<char>());
        };
        std::unordered_map<FileKey, std::vector<fs::path>, FileKeyHash> groups;
        std::unordered_map<FileKey, std::vector<ImageId>, FileKeyHash> group_ids;
        for (const auto& im : input.images) {
            const fs::path p = fs::path(images_dir) / im.file_name;
            std::error_code ec;
            const auto size = fs::file_size(p, ec);
            if (ec) throw IoError("cannot read image file " + p.string());
            const FileKey key{size, digest_file(p.string())};
            bool duplicate = false;
            auto git = groups.find(key);
            if (git != groups.end()) {
                const std::string content = read_all(p);
                for (const auto& other : git->second)
                    if (read_all(other) == content) {
                        duplicate = true;
                        break;
                    }
            }
            if (duplicate) {
                out.removed.push_back(im.id);
                removed_ids.insert(im.id);
            } else {
                groups[key].push_back(p);
                group_ids[key].push_back(im.id);
            }
        }
    }

    for (const auto& im : input.images)
        if (!removed_ids.count(im.id)) out.dataset.images.push_back(im);
    for (const auto& g : input.ground_truths)
        if (!removed_ids.count(g.image_id)) out.dataset.ground_truths.push_back(g);
    out.dataset.categories = input.categories;
    return out;
}

// ---------------------------------------------------------------------------
// Build.

struct BuildOptions {
    std::uint64_t val_size = 1000;
    std::uint64_t seed = 0;
    bool fine_tune = false;  // retain annotations for all classes known so far
    DedupMode dedup_mode = DedupMode::kFileName;
    std::string images_dir;  // content-mode dedup root
};

inline std::vector<ImageId> load_exclusion_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<ImageId> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        try {
            out.push_back(std::stoll(line.substr(start)));
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected an integer image id");
        }
    }
    return out;
}

/// Builds the incremental task splits.
///
/// Per task: train images are the training-pool images holding at least one
/// instance of the task's newly-known classes, with annotations filtered to
/// those classes (or to everything known so far with opts.fine_tune);
/// val_size images move from train to val, drawn by seeded shuffle; the test
/// split is the test pool minus the exclusion list, annotations intact.
inline SplitPlan build(const Dataset& train_pool, const std::optional<Dataset>& test_pool,
                       const TaskConfig& config, const std::vector<ImageId>& exclusion_list,
                       const BuildOptions& opts = {}) {
    const ResolvedTasks resolved = config.resolve(train_pool.categories);

    SplitPlan plan;
    plan.categories = train_pool.categories;
    plan.seed = opts.seed;
    plan.val_size = opts.val_size;
    plan.fine_tune = opts.fine_tune;
    plan.exclusions = exclusion_list;

    DedupResult train_clean = deduplicate(train_pool, opts.dedup_mode, opts.images_dir);
    plan.train_dupes_removed = train_clean.removed;

    std::unordered_set<ImageId> test_ids;
    std::unordered_set<std::string> test_names;
    if (test_pool) {
        DedupResult test_clean = deduplicate(*test_pool, opts.dedup_mode, opts.images_dir);
        plan.test_dupes_removed = test_clean.removed;

        for (const auto& cat : test_pool->categories) {
            bool covered = false;
            for (const auto& cls : resolved.classes)
                if (std::find(cls.begin(), cls.end(), cat.id) != cls.end()) covered = true;
            if (!covered)
                throw ValidationError("test pool class " + std::to_string(cat.id) + " (" +
                                      cat.name + ") is not assigned to any task");
        }

        std::unordered_set<ImageId> excluded(exclusion_list.begin(), exclusion_list.end());
        std::unordered_set<ImageId> present;
        for (const auto& im : test_clean.dataset.images) present.insert(im.id);
        for (ImageId id : exclusion_list)
            if (!present.count(id))
                throw ValidationError("exclusion list image " + std::to_string(id) +
                                      " is not in the test source");

        for (const auto& im : test_clean.dataset.images) {
            if (excluded.count(im.id)) continue;
            plan.test.images.push_back(im);
            test_ids.insert(im.id);
            test_names.insert(im.file_name);
        }
        for (const auto& g : test_clean.dataset.ground_truths)
            if (test_ids.count(g.image_id)) plan.test.annotations.push_back(g);
        plan.has_test = true;
    } else if (!exclusion_list.empty()) {
        throw ValidationError("exclusion list given but no test source");
    }

    // Drop training-pool images that leak into the test split.
    {
        std::unordered_set<ImageId> drop;
        for (const auto& im : train_clean.dataset.images)
            if (test_ids.count(im.id) || test_names.count(im.file_name)) drop.insert(im.id);
        plan.cross_pool_removed = drop.size();
        if (!drop.empty()) {
            Dataset kept;
            kept.categories = train_clean.dataset.categories;
            for (const auto& im : train_clean.dataset.images)
                if (!drop.count(im.id)) kept.images.push_back(im);
            for (const auto& g : train_clean.dataset.ground_truths)
                if (!drop.count(g.image_id)) kept.ground_truths.push_back(g);
            train_clean.dataset = std::move(kept);
        }
    }

    const Dataset& pool = train_clean.dataset;
    std::unordered_map<ImageId, const ImageInfo*> image_by_id;
    for (const auto& im : pool.images) image_by_id[im.id] = &im;
    std::unordered_map<ImageId, std::vector<const GroundTruthBox*>> anns_by_image;
    for (const auto& g : pool.ground_truths) anns_by_image[g.image_id].push_back(&g);

    std::set<ClassId> known_so_far;
    for (std::size_t t = 0; t < resolved.classes.size(); ++t) {
        const std::vector<ClassId>& newly = resolved.classes[t];
        const std::set<ClassId> newly_set(newly.begin(), newly.end());
        known_so_far.insert(newly.begin(), newly.end());
        const std::set<ClassId>& keep_classes =
            opts.fine_tune ? known_so_far : newly_set;

        std::vector<ImageId> candidates;
        for (const auto& im : pool.images) {
            auto it = anns_by_image.find(im.id);
            if (it == anns_by_image.end()) continue;
            for (const GroundTruthBox* g : it->second)
                if (newly_set.count(g->class_id)) {
                    candidates.push_back(im.id);
                    break;
                }
        }

        if (opts.val_size >= candidates.size())
            throw ValidationError("val size " + std::to_string(opts.val_size) +
                                  " >= train size " + std::to_string(candidates.size()) +
                                  " for task " + std::to_string(t + 1));

        std::vector<ImageId> shuffled = candidates;
        std::sort(shuffled.begin(), shuffled.end());
        std::uint64_t stream = opts.seed;
        for (std::size_t i = 0; i <= t; ++i) detail::splitmix64(stream);
        detail::deterministic_shuffle(shuffled, stream);
        const std::unordered_set<ImageId> val_ids(shuffled.begin(),
                                                  shuffled.begin() + opts.val_size);

        TaskSplit split;
        split.name = resolved.names[t];
        split.classes = newly;
        for (ImageId id : candidates) {
            Subset& dst = val_ids.count(id) ? split.val : split.train;
            dst.images.push_back(*image_by_id.at(id));
            for (const GroundTruthBox* g : anns_by_image.at(id))
                if (keep_classes.count(g->class_id)) dst.annotations.push_back(*g);
        }
        plan.tasks.push_back(std::move(split));
    }

    return plan;
}

// ---------------------------------------------------------------------------
// Audit: executable form of the five benchmark principles.

struct AuditViolation {
    std::string detail;
    std::optional<ImageId> image_id;
    std::optional<std::int64_t> annotation_id;
    std::optional<std::size_t> task_index;  // zero-based
};

struct PrincipleResult {
    std::string principle;
    bool passed = true;
    std::vector<AuditViolation> violations;
};

struct AuditReport {
    std::vector<PrincipleResult> principles;

    bool all_passed() const {
        for (const auto& p : principles)
            if (!p.passed) return false;
        return true;
    }

    const PrincipleResult* find(const std::string& name) const {
        for (const auto& p : principles)
            if (p.principle == name) return &p;
        return nullptr;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : principles) {
            nlohmann::json viols = nlohmann::json::array();
            for (const auto& v : p.violations) {
                nlohmann::json jv = {{"detail", v.detail}};
                if (v.image_id) jv["image_id"] = *v.image_id;
                if (v.annotation_id) jv["annotation_id"] = *v.annotation_id;
                if (v.task_index) jv["task"] = *v.task_index + 1;
                viols.push_back(std::move(jv));
            }
            arr.push_back({{"principle", p.principle},
                           {"passed", p.passed},
                           {"violations", viols}});
        }
        return {{"principles", arr}, {"all_passed", all_passed()}};
    }
};

struct AuditOptions {
    int completeness_floor = 1;      // min annotations per test image
    std::size_t max_violations = 20; // per principle, to keep reports readable
};

inline AuditReport audit(const SplitPlan& plan, const AuditOptions& opts = {}) {
    AuditReport report;
    const std::size_t task_count = plan.tasks.size();

    auto add = [&](PrincipleResult& pr, AuditViolation v) {
        pr.passed = false;
        if (pr.violations.size() < opts.max_violations) pr.violations.push_back(std::move(v));
    };

    // Union of configured classes, and per-task known sets.
    std::set<ClassId> universe;
    std::vector<std::set<ClassId>> known(task_count);
    for (std::size_t t = 0; t < task_count; ++t) {
        universe.insert(plan.tasks[t].classes.begin(), plan.tasks[t].classes.end());
        known[t] = universe;
    }

    // 1. Class Openness: for every non-final task the test split must still
    //    contain instances the task treats as unknown.
    {
        PrincipleResult pr;
        pr.principle = "class_openness";
        for (std::size_t t = 0; t + 1 < task_count; ++t) {
            bool found = false;
            for (const auto& g : plan.test.annotations)
                if (!known[t].count(g.class_id)) {
                    found = true;
                    break;
                }
            if (!found)
                add(pr, {"test split has no instance of any class unknown at task " +
                             std::to_string(t + 1),
                         std::nullopt, std::nullopt, t});
        }
        if (!plan.has_test && task_count > 1)
            add(pr, {"plan has no test split", std::nullopt, std::nullopt, std::nullopt});
        report.principles.push_back(std::move(pr));
    }

    // 2. Task Increment: tasks are non-empty, pairwise disjoint, and every
    //    class seen in any split is assigned to some task.
    {
        PrincipleResult pr;
        pr.principle = "task_increment";
        std::map<ClassId, int> uses;
        for (std::size_t t = 0; t < task_count; ++t) {
            if (plan.tasks[t].classes.empty())
                add(pr, {"task " + std::to_string(t + 1) + " has no classes (known set "
                         "does not strictly grow)",
                         std::nullopt, std::nullopt, t});
            for (ClassId c : plan.tasks[t].classes) ++uses[c];
        }
        for (const auto& [cid, n] : uses)
            if (n > 1)
                add(pr, {"class " + std::to_string(cid) + " assigned to " +
                             std::to_string(n) + " tasks",
                         std::nullopt, std::nullopt, std::nullopt});
        auto check_assigned = [&](const Subset& s, const std::string& where) {
            for (const auto& g : s.annotations)
                if (!universe.count(g.class_id)) {
                    add(pr, {where + " annotation references class " +
                                 std::to_string(g.class_id) + " not assigned to any task",
                             g.image_id, g.annotation_id, std::nullopt});
                    return;
                }
        };
        for (std::size_t t = 0; t < task_count; ++t) {
            check_assigned(plan.tasks[t].train, "task " + std::to_string(t + 1) + " train");
            check_assigned(plan.tasks[t].val, "task " + std::to_string(t + 1) + " val");
        }
        check_assigned(plan.test, "test");
        report.principles.push_back(std::move(pr));
    }

    // 3. Annotation Specificity: train/val annotations never leak classes
    //    unknown to their task.
    {
        PrincipleResult pr;
        pr.principle = "annotation_specificity";
        for (std::size_t t = 0; t < task_count; ++t) {
            auto check = [&](const Subset& s, const std::string& where) {
                for (const auto& g : s.annotations)
                    if (!known[t].count(g.class_id))
                        add(pr, {where + " contains annotation " +
                                     std::to_string(g.annotation_id) + " of class " +
                                     std::to_string(g.class_id) + " unknown at task " +
                                     std::to_string(t + 1),
                                 g.image_id, g.annotation_id, t});
            };
            check(plan.tasks[t].train, "task " + std::to_string(t + 1) + " train");
            check(plan.tasks[t].val, "task " + std::to_string(t + 1) + " val");
        }
        report.principles.push_back(std::move(pr));
    }

    // 4. Label Integrity: every test image must carry at least the
    //    completeness floor of annotations, unless it was excluded.
    {
        PrincipleResult pr;
        pr.principle = "label_integrity";
        std::unordered_map<ImageId, int> counts;
        for (const auto& im : plan.test.images) counts[im.id] = 0;
        for (const auto& g : plan.test.annotations) {
            auto it = counts.find(g.image_id);
            if (it != counts.end()) ++it->second;
        }
        const std::unordered_set<ImageId> excluded(plan.exclusions.begin(),
                                                   plan.exclusions.end());
        for (const auto& im : plan.test.images) {
            if (excluded.count(im.id))
                add(pr, {"excluded image " + std::to_string(im.id) + " is still in the test "
                         "split",
                         im.id, std::nullopt, std::nullopt});
            else if (counts[im.id] < opts.completeness_floor)
                add(pr, {"test image " + std::to_string(im.id) + " has " +
                             std::to_string(counts[im.id]) + " annotations (floor " +
                             std::to_string(opts.completeness_floor) + "), suspected "
                             "incomplete labeling",
                         im.id, std::nullopt, std::nullopt});
        }
        report.principles.push_back(std::move(pr));
    }

    // 5. Data Specificity: splits are pairwise disjoint per task and contain
    //    no internal duplicates (by image id or file name).
    {
        PrincipleResult pr;
        pr.principle = "data_specificity";
        auto ids_of = [](const Subset& s) {
            std::unordered_set<ImageId> out;
            for (const auto& im : s.images) out.insert(im.id);
            return out;
        };
        auto check_internal = [&](const Subset& s, const std::string& where) {
            std::unordered_set<ImageId> ids;
            std::unordered_set<std::string> names;
            for (const auto& im : s.images) {
                if (!ids.insert(im.id).second)
                    add(pr, {where + " lists image " + std::to_string(im.id) + " twice",
                             im.id, std::nullopt, std::nullopt});
                if (!im.file_name.empty() && !names.insert(im.file_name).second)
                    add(pr, {where + " lists file '" + im.file_name + "' twice", im.id,
                             std::nullopt, std::nullopt});
            }
        };
        auto check_disjoint = [&](const Subset& a, const Subset& b, const std::string& what) {
            const auto bids = ids_of(b);
            for (const auto& im : a.images)
                if (bids.count(im.id))
                    add(pr, {"image " + std::to_string(im.id) + " appears in " + what, im.id,
                             std::nullopt, std::nullopt});
        };
        for (std::size_t t = 0; t < task_count; ++t) {
            const std::string tn = "task " + std::to_string(t + 1);
            check_internal(plan.tasks[t].train, tn + " train");
            check_internal(plan.tasks[t].val, tn + " val");
            check_disjoint(plan.tasks[t].train, plan.tasks[t].val,
                           tn + " both train and val");
            check_disjoint(plan.tasks[t].train, plan.test, tn + " train and test");
            check_disjoint(plan.tasks[t].val, plan.test, tn + " val and test");
        }
        check_internal(plan.test, "test");
        report.principles.push_back(std::move(pr));
    }

    return report;
}

// ---------------------------------------------------------------------------
// Plan serialization: one COCO-style JSON per (task, split) plus a manifest.

namespace detail {

inline Dataset subset_to_dataset(const Subset& s, const std::vector<Category>& categories,
                                 const std::set<ClassId>& allowed, bool restrict_categories) {
    Dataset ds;
    ds.images = s.images;
    ds.ground_truths = s.annotations;
    for (const auto& c : categories)
        if (!restrict_categories || allowed.count(c.id)) ds.categories.push_back(c);
    return ds;
}

inline Subset dataset_to_subset(const Dataset& ds) {
    return Subset{ds.images, ds.ground_truths};
}

}  // namespace detail

/// Writes the plan under `dir` and returns the manifest path.
inline std::string write_split_plan(const SplitPlan& plan, const std::string& dir,
                                    RunManifest manifest) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    json jtasks = json::array();
    std::set<ClassId> known_so_far;
    for (std::size_t t = 0; t < plan.tasks.size(); ++t) {
        const auto& split = plan.tasks[t];
        known_so_far.insert(split.classes.begin(), split.classes.end());
        const std::set<ClassId> allowed =
            plan.fine_tune ? known_so_far
                           : std::set<ClassId>(split.classes.begin(), split.classes.end());

        const std::string train_file = "task" + std::to_string(t + 1) + "_train.json";
        const std::string val_file = "task" + std::to_string(t + 1) + "_val.json";
        save_annotations(
            detail::subset_to_dataset(split.train, plan.categories, allowed, true),
            (fs::path(dir) / train_file).string());
        save_annotations(detail::subset_to_dataset(split.val, plan.categories, allowed, true),
                         (fs::path(dir) / val_file).string());
        manifest.outputs.push_back(train_file);
        manifest.outputs.push_back(val_file);

        jtasks.push_back({{"index", t + 1},
                          {"name", split.name},
                          {"classes", split.classes},
                          {"train",
                           {{"file", train_file},
                            {"images", split.train.images.size()},
                            {"annotations", split.train.annotations.size()}}},
                          {"val",
                           {{"file", val_file},
                            {"images", split.val.images.size()},
                            {"annotations", split.val.annotations.size()}}}});
    }

    json jtest = nullptr;
    if (plan.has_test) {
        const std::string test_file = "test.json";
        save_annotations(detail::subset_to_dataset(plan.test, plan.categories, {}, false),
                         (fs::path(dir) / test_file).string());
        manifest.outputs.push_back(test_file);
        jtest = {{"file", test_file},
                 {"images", plan.test.images.size()},
                 {"annotations", plan.test.annotations.size()}};
    }

    json root = manifest.to_json();
    root["plan"] = {{"seed", plan.seed},
                    {"val_size", plan.val_size},
                    {"fine_tune", plan.fine_tune},
                    {"tasks", jtasks},
                    {"test", jtest},
                    {"exclusions", plan.exclusions},
                    {"dedup",
                     {{"train_removed", plan.train_dupes_removed},
                      {"test_removed", plan.test_dupes_removed},
                      {"cross_pool_removed", plan.cross_pool_removed}}}};

    const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + manifest_path);
    out << root.dump(1) << '\n';
    return manifest_path;
}

inline SplitPlan load_split_plan(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    const json root = detail::parse_file(manifest_path);
    if (!root.is_object() || !root.contains("plan"))
        throw ParseError(manifest_path + ": not a split-plan manifest");
    const json& jplan = root.at("plan");
    const fs::path dir = fs::path(manifest_path).parent_path();

    SplitPlan plan;
    plan.seed = jplan.value("seed", std::uint64_t{0});
    plan.val_size = jplan.value("val_size", std::uint64_t{0});
    plan.fine_tune = jplan.value("fine_tune", false);
    plan.exclusions = jplan.value("exclusions", std::vector<ImageId>{});

    bool have_categories = false;
    for (const auto& jt : jplan.at("tasks")) {
        TaskSplit split;
        split.name = jt.value("name", "");
        split.classes = jt.at("classes").get<std::vector<ClassId>>();
        const Dataset train =
            load_annotations((dir / jt.at("train").at("file").get<std::string>()).string());
        const Dataset val =
            load_annotations((dir / jt.at("val").at("file").get<std::string>()).string());
        split.train = detail::dataset_to_subset(train);
        split.val = detail::dataset_to_subset(val);
        if (!have_categories) {
            plan.categories = train.categories;
            have_categories = true;
        }
        plan.tasks.push_back(std::move(split));
    }
    if (!jplan.at("test").is_null()) {
        const Dataset test =
            load_annotations((dir / jplan.at("test").at("file").get<std::string>()).string());
        plan.test = detail::dataset_to_subset(test);
        plan.categories = test.categories;  // test carries the full table
        plan.has_test = true;
    }
    return plan;
}

}  // namespace owod
