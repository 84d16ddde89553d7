#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "owod/benchmark.hpp"
#include "support/synthetic.hpp"

using namespace owod;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("owod_bench_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// ten-image, four-class fixture with two tasks; enumerated by hand below
synth::DatasetFixture small_fixture() {
    synth::DatasetFixture fx;
    for (int c = 1; c <= 4; ++c)
        fx.train_pool.categories.push_back({c, "class" + std::to_string(c), ""});
    fx.test_pool.categories = fx.train_pool.categories;

    // train pool: images 1..6
    // 1: c1         2: c1,c3      3: c2
    // 4: c2,c4      5: c1,c2      6: c3
    std::int64_t ann = 1;
    auto img = [&](Dataset& ds, ImageId id) {
        ds.images.push_back({id, "im" + std::to_string(id) + ".jpg", 50.0, 50.0});
    };
    auto add = [&](Dataset& ds, ImageId image, ClassId cls) {
        GroundTruthBox g;
        g.annotation_id = ann++;
        g.image_id = image;
        g.class_id = cls;
        g.bbox = {0, 0, 10, 10};
        ds.ground_truths.push_back(g);
    };
    for (ImageId i = 1; i <= 6; ++i) img(fx.train_pool, i);
    add(fx.train_pool, 1, 1);
    add(fx.train_pool, 2, 1);
    add(fx.train_pool, 2, 3);
    add(fx.train_pool, 3, 2);
    add(fx.train_pool, 4, 2);
    add(fx.train_pool, 4, 4);
    add(fx.train_pool, 5, 1);
    add(fx.train_pool, 5, 2);
    add(fx.train_pool, 6, 3);

    // test pool: images 101..104, all classes present, all annotated
    for (ImageId i = 101; i <= 104; ++i) img(fx.test_pool, i);
    add(fx.test_pool, 101, 1);
    add(fx.test_pool, 102, 2);
    add(fx.test_pool, 103, 3);
    add(fx.test_pool, 104, 4);

    TaskConfigEntry t1{"first", {"class1", "class2"}};
    TaskConfigEntry t2{"second", {"3", "4"}};  // ids also accepted
    fx.config.entries = {t1, t2};
    return fx;
}

std::vector<ImageId> image_ids(const Subset& s) {
    std::vector<ImageId> out;
    for (const auto& im : s.images) out.push_back(im.id);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("task config resolution") {
    const synth::DatasetFixture fx = small_fixture();

    SECTION("names and ids resolve") {
        const ResolvedTasks r = fx.config.resolve(fx.train_pool.categories);
        CHECK(r.names == std::vector<std::string>{"first", "second"});
        CHECK(r.classes[0] == std::vector<ClassId>{1, 2});
        CHECK(r.classes[1] == std::vector<ClassId>{3, 4});
        CHECK(r.spec.known(1) == std::vector<ClassId>{1, 2, 3, 4});
        CHECK(r.spec.unknown(0) == std::vector<ClassId>{3, 4});
    }

    SECTION("missing classes are listed") {
        TaskConfig cfg;
        cfg.entries = {{"only", {"class1", "class2"}}};
        try {
            cfg.resolve(fx.train_pool.categories);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("missing") != std::string::npos);
            CHECK(msg.find("class3") != std::string::npos);
        }
    }

    SECTION("duplicated classes are listed") {
        TaskConfig cfg;
        cfg.entries = {{"a", {"class1", "class2", "class3"}}, {"b", {"class3", "class4"}}};
        try {
            cfg.resolve(fx.train_pool.categories);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("duplicated") != std::string::npos);
        }
    }

    SECTION("unknown name rejected") {
        TaskConfig cfg;
        cfg.entries = {{"a", {"classX"}}};
        CHECK_THROWS_AS(cfg.resolve(fx.train_pool.categories), ValidationError);
    }
}

TEST_CASE("build on the hand-enumerated fixture") {
    const synth::DatasetFixture fx = small_fixture();
    BuildOptions opts;
    opts.val_size = 1;
    opts.seed = 7;

    const SplitPlan plan = build(fx.train_pool, fx.test_pool, fx.config, {}, opts);
    REQUIRE(plan.tasks.size() == 2);

    // task 1 candidates: images with c1 or c2 = {1,2,3,4,5}; one goes to val
    auto t1_ids = image_ids(plan.tasks[0].train);
    auto t1_val = image_ids(plan.tasks[0].val);
    CHECK(t1_ids.size() == 4);
    CHECK(t1_val.size() == 1);
    {
        std::vector<ImageId> all = t1_ids;
        all.insert(all.end(), t1_val.begin(), t1_val.end());
        std::sort(all.begin(), all.end());
        CHECK(all == std::vector<ImageId>{1, 2, 3, 4, 5});
    }
    // annotations filtered to newly-known classes: no c3/c4 in task 1
    for (const auto& g : plan.tasks[0].train.annotations) CHECK(g.class_id <= 2);
    for (const auto& g : plan.tasks[0].val.annotations) CHECK(g.class_id <= 2);

    // task 2 candidates: images with c3 or c4 = {2,4,6}
    {
        std::vector<ImageId> all = image_ids(plan.tasks[1].train);
        const auto val = image_ids(plan.tasks[1].val);
        all.insert(all.end(), val.begin(), val.end());
        std::sort(all.begin(), all.end());
        CHECK(all == std::vector<ImageId>{2, 4, 6});
        for (const auto& g : plan.tasks[1].train.annotations)
            CHECK((g.class_id == 3 || g.class_id == 4));
    }

    // test: full pool, annotations intact
    CHECK(image_ids(plan.test) == std::vector<ImageId>{101, 102, 103, 104});
    CHECK(plan.test.annotations.size() == 4);

    SECTION("fine-tune mode keeps all known classes") {
        BuildOptions ft = opts;
        ft.fine_tune = true;
        const SplitPlan plan2 = build(fx.train_pool, fx.test_pool, fx.config, {}, ft);
        bool saw_old_class = false;
        for (const auto& g : plan2.tasks[1].train.annotations)
            if (g.class_id <= 2) saw_old_class = true;
        CHECK(saw_old_class);  // image 2 carries c1 alongside c3
    }

    SECTION("exclusion list removes test images") {
        const SplitPlan plan2 = build(fx.train_pool, fx.test_pool, fx.config, {104}, opts);
        CHECK(image_ids(plan2.test) == std::vector<ImageId>{101, 102, 103});
        CHECK(plan2.test.annotations.size() == 3);
    }

    SECTION("exclusion id missing from the test pool") {
        CHECK_THROWS_AS(build(fx.train_pool, fx.test_pool, fx.config, {999}, opts),
                        ValidationError);
    }

    SECTION("val size >= train size") {
        BuildOptions big = opts;
        big.val_size = 5;
        CHECK_THROWS_AS(build(fx.train_pool, fx.test_pool, fx.config, {}, big),
                        ValidationError);
    }

    SECTION("val split is reproducible and seed-sensitive") {
        const SplitPlan again = build(fx.train_pool, fx.test_pool, fx.config, {}, opts);
        CHECK(image_ids(again.tasks[0].val) == image_ids(plan.tasks[0].val));

        BuildOptions other = opts;
        other.seed = 8;
        bool any_differs = false;
        for (int extra = 0; extra < 4 && !any_differs; ++extra) {
            other.seed = 8 + extra;
            const SplitPlan alt = build(fx.train_pool, fx.test_pool, fx.config, {}, other);
            if (image_ids(alt.tasks[0].val) != image_ids(plan.tasks[0].val))
                any_differs = true;
        }
        CHECK(any_differs);
    }
}

TEST_CASE("deduplicate") {
    Dataset ds;
    ds.categories = {{1, "c1", ""}};
    ds.images = {{1, "a.jpg", 10, 10}, {2, "b.jpg", 10, 10}, {3, "a.jpg", 10, 10}};
    GroundTruthBox g;
    g.annotation_id = 1;
    g.image_id = 3;
    g.class_id = 1;
    g.bbox = {0, 0, 5, 5};
    ds.ground_truths = {g};

    SECTION("file-name mode removes the later duplicate and its annotations") {
        const DedupResult r = deduplicate(ds);
        CHECK(r.removed == std::vector<ImageId>{3});
        CHECK(r.dataset.images.size() == 2);
        CHECK(r.dataset.ground_truths.empty());
    }

    SECTION("no duplicates is the identity") {
        ds.images[2].file_name = "c.jpg";
        const DedupResult r = deduplicate(ds);
        CHECK(r.removed.empty());
        CHECK(r.dataset.images.size() == 3);
        CHECK(r.dataset.ground_truths.size() == 1);
    }

    SECTION("content mode keeps one of three byte-identical copies") {
        TempDir dir;
        Dataset files;
        files.categories = ds.categories;
        files.images = {{1, "x.png", 4, 4}, {2, "y.png", 4, 4}, {3, "z.png", 4, 4},
                        {4, "w.png", 4, 4}};
        std::ofstream(dir.path / "x.png") << "SAMEBYTES";
        std::ofstream(dir.path / "y.png") << "SAMEBYTES";
        std::ofstream(dir.path / "z.png") << "SAMEBYTES";
        std::ofstream(dir.path / "w.png") << "different";
        const DedupResult r = deduplicate(files, DedupMode::kContent, dir.path.string());
        CHECK(r.removed == std::vector<ImageId>{2, 3});
        CHECK(r.dataset.images.size() == 2);
    }

    SECTION("content mode reports unreadable files") {
        TempDir dir;
        Dataset files;
        files.categories = ds.categories;
        files.images = {{1, "missing.png", 4, 4}};
        CHECK_THROWS_AS(deduplicate(files, DedupMode::kContent, dir.path.string()), IoError);
    }
}

TEST_CASE("audit passes on built plans and catches seeded violations") {
    const synth::DatasetFixture fx = small_fixture();
    BuildOptions opts;
    opts.val_size = 1;
    opts.seed = 3;
    const SplitPlan plan = build(fx.train_pool, fx.test_pool, fx.config, {}, opts);

    SECTION("clean plan passes all five principles") {
        const AuditReport rep = audit(plan);
        for (const auto& p : rep.principles) {
            INFO(p.principle);
            CHECK(p.passed);
        }
        CHECK(rep.all_passed());
    }

    SECTION("class openness violation") {
        SplitPlan bad = plan;
        std::erase_if(bad.test.annotations,
                      [](const GroundTruthBox& g) { return g.class_id >= 3; });
        const AuditReport rep = audit(bad);
        const auto* p = rep.find("class_openness");
        REQUIRE(p != nullptr);
        CHECK_FALSE(p->passed);
        REQUIRE_FALSE(p->violations.empty());
        CHECK(p->violations[0].task_index == std::size_t{0});
    }

    SECTION("task increment violation: class in two tasks") {
        SplitPlan bad = plan;
        bad.tasks[1].classes.push_back(1);  // class 1 already in task 1
        const AuditReport rep = audit(bad);
        const auto* p = rep.find("task_increment");
        REQUIRE(p != nullptr);
        CHECK_FALSE(p->passed);
        CHECK(p->violations[0].detail.find("class 1") != std::string::npos);
    }

    SECTION("annotation specificity violation cites the annotation") {
        SplitPlan bad = plan;
        GroundTruthBox leak;
        leak.annotation_id = 7777;
        leak.image_id = bad.tasks[0].train.images[0].id;
        leak.class_id = 4;  // unknown at task 1
        leak.bbox = {0, 0, 5, 5};
        bad.tasks[0].train.annotations.push_back(leak);
        const AuditReport rep = audit(bad);
        const auto* p = rep.find("annotation_specificity");
        REQUIRE(p != nullptr);
        CHECK_FALSE(p->passed);
        REQUIRE_FALSE(p->violations.empty());
        CHECK(p->violations[0].annotation_id == std::int64_t{7777});
    }

    SECTION("label integrity violation: empty test image") {
        SplitPlan bad = plan;
        bad.test.images.push_back({999, "empty.jpg", 10, 10});
        const AuditReport rep = audit(bad);
        const auto* p = rep.find("label_integrity");
        REQUIRE(p != nullptr);
        CHECK_FALSE(p->passed);
        CHECK(p->violations[0].image_id == ImageId{999});
    }

    SECTION("data specificity violation: image shared between train and test") {
        SplitPlan bad = plan;
        bad.test.images.push_back(bad.tasks[0].train.images[0]);
        GroundTruthBox g;
        g.annotation_id = 8888;
        g.image_id = bad.tasks[0].train.images[0].id;
        g.class_id = 1;
        g.bbox = {0, 0, 5, 5};
        bad.test.annotations.push_back(g);
        const AuditReport rep = audit(bad);
        const auto* p = rep.find("data_specificity");
        REQUIRE(p != nullptr);
        CHECK_FALSE(p->passed);
        CHECK(p->violations[0].image_id == bad.tasks[0].train.images[0].id);
    }
}

TEST_CASE("build-audit round trip on random datasets") {
    std::mt19937 rng(246810);
    for (int trial = 0; trial < 25; ++trial) {
        const synth::DatasetFixture fx = synth::make_dataset(rng);
        BuildOptions opts;
        opts.val_size = 2;
        opts.seed = trial;
        const SplitPlan plan = build(fx.train_pool, fx.test_pool, fx.config, {}, opts);
        const AuditReport rep = audit(plan);
        INFO("trial " << trial);
        for (const auto& p : rep.principles) {
            INFO(p.principle << (p.violations.empty() ? "" : ": " + p.violations[0].detail));
            REQUIRE(p.passed);
        }

        // partition invariants
        const TaskSpec spec = plan.spec();
        std::size_t class_total = 0;
        for (const auto& t : plan.tasks) class_total += t.classes.size();
        CHECK(class_total == spec.all_classes().size());
        const std::size_t last = spec.task_count() - 1;
        CHECK(spec.unknown(last).empty());
        for (std::size_t t = 0; t < spec.task_count(); ++t) {
            const auto known = spec.known(t);
            const auto unknown = spec.unknown(t);
            CHECK(known.size() + unknown.size() == spec.all_classes().size());
        }
    }
}

TEST_CASE("split plan round-trips through the filesystem") {
    const synth::DatasetFixture fx = small_fixture();
    BuildOptions opts;
    opts.val_size = 1;
    opts.seed = 11;
    const SplitPlan plan = build(fx.train_pool, fx.test_pool, fx.config, {103}, opts);

    TempDir dir;
    RunManifest manifest;
    manifest.command = "build";
    manifest.created_utc = utc_timestamp();
    const std::string manifest_path = write_split_plan(plan, dir.path.string(), manifest);

    const SplitPlan loaded = load_split_plan(manifest_path);
    REQUIRE(loaded.tasks.size() == plan.tasks.size());
    CHECK(loaded.seed == plan.seed);
    CHECK(loaded.exclusions == plan.exclusions);
    CHECK(loaded.has_test);
    CHECK(image_ids(loaded.test) == image_ids(plan.test));
    for (std::size_t t = 0; t < plan.tasks.size(); ++t) {
        CHECK(loaded.tasks[t].classes == plan.tasks[t].classes);
        CHECK(image_ids(loaded.tasks[t].train) == image_ids(plan.tasks[t].train));
        CHECK(image_ids(loaded.tasks[t].val) == image_ids(plan.tasks[t].val));
        CHECK(loaded.tasks[t].train.annotations.size() ==
              plan.tasks[t].train.annotations.size());
    }
    CHECK(audit(loaded).all_passed());
}
