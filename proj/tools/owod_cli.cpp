// owod: build OWOD benchmark splits, audit them against the five principles,
// evaluate detection files (mAP / WI / A-OSE / UR / UDR / UDP), and run the
// proposal-confirmation and expelling-calibrator post-processing steps.
//
// Exit codes: 0 success, 1 audit failure, 2 input or validation error.
// stdout carries machine-readable payloads; diagnostics go to stderr.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "owod/owod.hpp"

namespace {

using namespace owod;

int log_level() {
    const char* env = std::getenv("OWOD_LOG");
    if (!env) return 1;
    const std::string v = env;
    if (v == "debug") return 2;
    if (v == "quiet" || v == "error") return 0;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "owod: " << msg << "\n";
}

void debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "owod[debug]: " << msg << "\n";
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(1) << '\n';
}

void write_manifest(RunManifest manifest, const Timer& timer, const std::string& path) {
    manifest.created_utc = utc_timestamp();
    manifest.elapsed_seconds = timer.seconds();
    write_json_file(manifest.to_json(), path);
    debug("manifest written to " + path);
}

std::vector<Category> categories_from_profile(const cec::ExpellingProfile& profile) {
    std::vector<Category> out;
    for (const auto& [cid, st] : profile.classes)
        out.push_back({cid, "class" + std::to_string(cid), ""});
    return out;
}

// ---------------------------------------------------------------------------
// build

struct BuildArgs {
    std::string annotations;
    std::string test_annotations;
    std::string task_config;
    std::string exclusion_list;
    std::string out_dir = "owod_splits";
    std::string images_dir;
    std::uint64_t val_size = 1000;
    std::uint64_t seed = 0;
    bool fine_tune = false;
};

int run_build(const BuildArgs& args) {
    Timer timer;
    RunManifest manifest;
    manifest.command = "build";
    manifest.seed = args.seed;
    manifest.seeded = true;
    manifest.add_input(args.annotations);
    if (!args.test_annotations.empty()) manifest.add_input(args.test_annotations);
    manifest.add_input(args.task_config);
    if (!args.exclusion_list.empty()) manifest.add_input(args.exclusion_list);

    const json config_json = detail::parse_file(args.task_config);
    manifest.config_digest = digest_string(config_json.dump());
    const TaskConfig config = TaskConfig::from_json(config_json, args.task_config);

    info("loading " + args.annotations);
    const Dataset train_pool = load_annotations(args.annotations);
    std::optional<Dataset> test_pool;
    if (!args.test_annotations.empty()) {
        info("loading " + args.test_annotations);
        test_pool = load_annotations(args.test_annotations);
    }
    std::vector<ImageId> exclusions;
    if (!args.exclusion_list.empty()) exclusions = load_exclusion_list(args.exclusion_list);

    BuildOptions opts;
    opts.val_size = args.val_size;
    opts.seed = args.seed;
    opts.fine_tune = args.fine_tune;
    if (!args.images_dir.empty()) {
        opts.dedup_mode = DedupMode::kContent;
        opts.images_dir = args.images_dir;
    }

    const SplitPlan plan = build(train_pool, test_pool, config, exclusions, opts);
    const std::string manifest_path = write_split_plan(plan, args.out_dir, manifest);

    // count table in the layout of the benchmark composition table
    std::ostringstream table;
    table << "split";
    for (std::size_t t = 0; t < plan.tasks.size(); ++t) table << "\tTask " << t + 1;
    table << "\nTrain";
    for (const auto& t : plan.tasks) table << '\t' << t.train.images.size();
    table << "\nVal";
    for (const auto& t : plan.tasks) table << '\t' << t.val.images.size();
    table << "\nTest\t" << (plan.has_test ? std::to_string(plan.test.images.size()) : "-");
    table << "\n";
    std::cout << table.str();

    // rewrite the manifest with the final timing (the split writer already
    // embedded the run info once)
    {
        json root = detail::parse_file(manifest_path);
        root["elapsed_seconds"] = timer.seconds();
        root["created_utc"] = utc_timestamp();
        write_json_file(root, manifest_path);
    }
    info("plan written to " + args.out_dir);
    return 0;
}

// ---------------------------------------------------------------------------
// audit

struct AuditArgs {
    std::string plan;
    std::string out;
    int floor = 1;
};

int run_audit(const AuditArgs& args) {
    const SplitPlan plan = load_split_plan(args.plan);
    AuditOptions opts;
    opts.completeness_floor = args.floor;
    const AuditReport report = audit(plan, opts);
    const json j = report.to_json();
    if (args.out.empty()) {
        std::cout << j.dump(1) << "\n";
    } else {
        write_json_file(j, args.out);
        info("audit report written to " + args.out);
    }
    for (const auto& p : report.principles)
        info(p.principle + (p.passed ? ": pass" : ": FAIL"));
    return report.all_passed() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string gt;
    std::string preds;
    std::string task_config;
    std::size_t task = 1;  // one-based
    double iou = 0.5;
    double wi_recall = 0.8;
    double score_threshold = 0.0;
    std::string ap_mode = "continuous";
    bool aose_per_prediction = false;
    std::string out;
    std::string csv;
};

int run_eval(const EvalArgs& args) {
    Timer timer;
    if (args.task < 1) throw ValidationError("--task is one-based and must be >= 1");

    RunManifest manifest;
    manifest.command = "eval";
    manifest.add_input(args.gt);
    manifest.add_input(args.preds);
    manifest.add_input(args.task_config);

    const Dataset dataset = load_annotations(args.gt);
    const std::vector<Prediction> preds = load_predictions(args.preds, dataset.categories);
    const json config_json = detail::parse_file(args.task_config);
    manifest.config_digest = digest_string(config_json.dump());
    const ResolvedTasks resolved =
        TaskConfig::from_json(config_json, args.task_config).resolve(dataset.categories);

    EvalConfig cfg;
    cfg.match.iou_threshold = args.iou;
    cfg.match.score_threshold = args.score_threshold;
    cfg.wi_recall_level = args.wi_recall;
    if (args.ap_mode == "voc11")
        cfg.ap_mode = ApMode::kVoc11Point;
    else if (args.ap_mode != "continuous")
        throw ValidationError("--ap-mode must be continuous or voc11");
    cfg.aose_per_prediction = args.aose_per_prediction;

    const EvalReport report = evaluate(dataset, preds, resolved.spec, args.task - 1, cfg);
    const json j = report_to_json(report);

    if (args.out.empty()) {
        std::cout << j.dump(1) << "\n";
    } else {
        write_json_file(j, args.out);
        manifest.outputs.push_back(args.out);
        info("report written to " + args.out);
    }
    if (!args.csv.empty()) {
        std::ofstream out(args.csv, std::ios::binary);
        if (!out) throw IoError("cannot write " + args.csv);
        out << csv_header() << "\n" << csv_row(report) << "\n";
        manifest.outputs.push_back(args.csv);
    }
    if (!args.out.empty()) write_manifest(manifest, timer, args.out + ".manifest.json");
    return 0;
}

// ---------------------------------------------------------------------------
// cec

struct CecCalibrateArgs {
    std::string train_preds;
    std::string train_gt;
    double phi = 0.9;
    double alpha = 0.5;
    std::string out = "profile.json";
};

int run_cec_calibrate(const CecCalibrateArgs& args) {
    Timer timer;
    RunManifest manifest;
    manifest.command = "cec calibrate";
    manifest.add_input(args.train_preds);
    manifest.add_input(args.train_gt);
    {
        json cfg = {{"phi", args.phi}, {"alpha", args.alpha}};
        manifest.config_digest = digest_string(cfg.dump());
    }

    const Dataset gt = load_annotations(args.train_gt);
    const std::vector<Prediction> preds = load_predictions(args.train_preds, gt.categories);
    const cec::ExpellingProfile profile =
        cec::calibrate(preds, gt.ground_truths, gt.class_ids(), args.phi, args.alpha);

    for (ClassId cid : profile.never_expels())
        info("class " + std::to_string(cid) +
             " has no confident training pairs and will never expel");

    cec::save_profile(profile, args.out, manifest.config_digest);
    manifest.outputs.push_back(args.out);
    write_manifest(manifest, timer, args.out + ".manifest.json");
    info("profile written to " + args.out);
    return 0;
}

struct CecApplyArgs {
    std::string preds;
    std::string profile;
    std::optional<double> alpha;  // override the stored alpha
    std::string out = "calibrated.json";
};

int run_cec_apply(const CecApplyArgs& args) {
    Timer timer;
    RunManifest manifest;
    manifest.command = "cec apply";
    manifest.add_input(args.preds);
    manifest.add_input(args.profile);

    cec::ExpellingProfile profile = cec::load_profile(args.profile);
    if (args.alpha) profile.alpha = *args.alpha;
    manifest.config_digest =
        digest_string(json({{"phi", profile.phi}, {"alpha", profile.alpha}}).dump());

    const std::vector<Prediction> preds =
        load_predictions(args.preds, categories_from_profile(profile));
    const auto calibrated = cec::apply_batch(preds, profile);
    save_predictions(cec::to_predictions(calibrated), args.out);

    int minted = 0;
    for (const auto& c : calibrated) minted += c.expelled_all;
    info(std::to_string(minted) + " of " + std::to_string(calibrated.size()) +
         " predictions re-allocated to unknown");

    manifest.outputs.push_back(args.out);
    write_manifest(manifest, timer, args.out + ".manifest.json");
    return 0;
}

struct CecSweepArgs {
    std::string preds;
    std::string gt;
    std::string profile;
    std::string task_config;
    std::size_t task = 1;
    std::string alphas = "0,0.25,0.5,1.0";
    double iou = 0.5;
    double wi_recall = 0.8;
    std::string out;
};

int run_cec_sweep(const CecSweepArgs& args) {
    Timer timer;
    if (args.task < 1) throw ValidationError("--task is one-based and must be >= 1");

    RunManifest manifest;
    manifest.command = "cec sweep";
    manifest.add_input(args.preds);
    manifest.add_input(args.gt);
    manifest.add_input(args.profile);
    manifest.add_input(args.task_config);

    std::vector<double> alphas;
    {
        std::stringstream ss(args.alphas);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            alphas.push_back(std::stod(item));
        }
        if (alphas.empty()) throw ValidationError("--alphas grid is empty");
    }

    const Dataset dataset = load_annotations(args.gt);
    const json config_json = detail::parse_file(args.task_config);
    manifest.config_digest = digest_string(config_json.dump());
    const ResolvedTasks resolved =
        TaskConfig::from_json(config_json, args.task_config).resolve(dataset.categories);
    cec::ExpellingProfile profile = cec::load_profile(args.profile);
    const std::vector<Prediction> preds = load_predictions(args.preds, dataset.categories);

    EvalConfig cfg;
    cfg.match.iou_threshold = args.iou;
    cfg.wi_recall_level = args.wi_recall;

    const EvalReport base = evaluate(dataset, preds, resolved.spec, args.task - 1, cfg);
    const double base_map = base.map_both.value_or(0.0);

    auto fmt = [](const std::optional<double>& v) {
        if (!v) return std::string();
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.9g", *v);
        return std::string(buf);
    };

    std::ostringstream csv;
    csv << "alpha,mAP_both,mAP_drop_pct,UDP,UR,UDR,A-OSE,WI\n";
    for (double alpha : alphas) {
        profile.alpha = alpha;
        const auto calibrated = cec::to_predictions(cec::apply_batch(preds, profile));
        const EvalReport rep = evaluate(dataset, calibrated, resolved.spec, args.task - 1, cfg);
        const double map = rep.map_both.value_or(0.0);
        const double drop_pct = base_map > 0.0 ? (base_map - map) / base_map * 100.0 : 0.0;
        csv << fmt(alpha) << ',' << fmt(map) << ',' << fmt(drop_pct) << ','
            << fmt(rep.udp_value) << ',' << fmt(rep.ur) << ',' << fmt(rep.udr_value) << ','
            << rep.a_ose << ',' << fmt(rep.wi.value) << "\n";
    }

    if (args.out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(args.out, std::ios::binary);
        if (!out) throw IoError("cannot write " + args.out);
        out << csv.str();
        manifest.outputs.push_back(args.out);
        write_manifest(manifest, timer, args.out + ".manifest.json");
        info("sweep table written to " + args.out);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// pad

struct PadConfirmArgs {
    std::string rpn;
    std::string aux;
    double theta = 0.7;
    int top_k = 50;
    int aux_top_k = 50;
    int select_top_k = 0;  // 0: keep every entry, confirmed or not
    std::string out = "confirmed.json";
};

int run_pad_confirm(const PadConfirmArgs& args) {
    Timer timer;
    RunManifest manifest;
    manifest.command = "pad confirm";
    manifest.add_input(args.rpn);
    manifest.add_input(args.aux);
    manifest.config_digest = digest_string(
        json({{"theta", args.theta}, {"topk", args.top_k}, {"aux_topk", args.aux_top_k}})
            .dump());

    const pad::PerImageProposals rpn = pad::load_rpn_proposals(args.rpn);
    const pad::PerImageProposals aux = pad::load_auxiliary_proposals(args.aux, args.aux_top_k);

    pad::PerImageConfirmed confirmed;
    static const std::vector<pad::Proposal> kNone;
    for (const auto& [image, proposals] : rpn) {
        const auto ait = aux.find(image);
        const auto& advice = ait != aux.end() ? ait->second : kNone;
        auto result = pad::confirm(pad::select_potential_unknowns(proposals, args.top_k),
                                   advice, args.theta);
        if (args.select_top_k > 0) result = pad::select_confirmed(result, args.select_top_k);
        confirmed[image] = std::move(result);
    }
    pad::save_confirmed(confirmed, args.out);
    manifest.outputs.push_back(args.out);
    write_manifest(manifest, timer, args.out + ".manifest.json");
    info("confirmed proposals written to " + args.out);
    return 0;
}

struct PadReassignArgs {
    std::string anchors;
    std::string confirmed;
    double match_iou = 0.7;
    std::string out = "anchors_reassigned.json";
};

int run_pad_reassign(const PadReassignArgs& args) {
    Timer timer;
    RunManifest manifest;
    manifest.command = "pad reassign";
    manifest.add_input(args.anchors);
    manifest.add_input(args.confirmed);
    manifest.config_digest = digest_string(json({{"match_iou", args.match_iou}}).dump());

    const pad::PerImageAnchors anchors = pad::load_anchors(args.anchors);
    const pad::PerImageConfirmed confirmed = pad::load_confirmed(args.confirmed);

    pad::PerImageAnchors out;
    static const std::vector<pad::ConfirmedProposal> kNone;
    for (const auto& [image, set] : anchors) {
        const auto cit = confirmed.find(image);
        out[image] = pad::reassign_anchors(set, cit != confirmed.end() ? cit->second : kNone,
                                           args.match_iou);
    }
    pad::save_anchors(out, args.out);
    manifest.outputs.push_back(args.out);
    write_manifest(manifest, timer, args.out + ".manifest.json");
    info("anchors written to " + args.out);
    return 0;
}

struct PadLossArgs {
    std::string anchors;
};

int run_pad_loss(const PadLossArgs& args) {
    const pad::PerImageAnchors anchors = pad::load_anchors(args.anchors);
    double total = 0.0;
    int clamped = 0;
    for (const auto& [image, set] : anchors) {
        const pad::RpnClsLoss loss = pad::rpn_cls_loss(set);
        total += loss.loss;
        clamped += loss.clamped;
    }
    if (clamped > 0)
        info(std::to_string(clamped) + " anchor scores clamped away from {0,1}");
    std::printf("%.9g\n", total);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"open-world detection benchmark toolkit"};
    app.require_subcommand(1);

    BuildArgs build_args;
    auto* cmd_build = app.add_subcommand(
        "build", "construct task splits from COCO-style annotations");
    cmd_build->add_option("--annotations", build_args.annotations,
                          "training-pool annotation JSON")->required();
    cmd_build->add_option("--test-annotations", build_args.test_annotations,
                          "test-pool annotation JSON");
    cmd_build->add_option("--task-config", build_args.task_config,
                          "ordered task/class configuration JSON")->required();
    cmd_build->add_option("--exclusion-list", build_args.exclusion_list,
                          "newline-delimited image ids removed from the test pool");
    cmd_build->add_option("--val-size", build_args.val_size,
                          "validation images per task (default 1000)");
    cmd_build->add_option("--seed", build_args.seed, "sampling seed (default 0)");
    cmd_build->add_flag("--fine-tune", build_args.fine_tune,
                        "retain annotations for all classes known so far");
    cmd_build->add_option("--images-dir", build_args.images_dir,
                          "image file root; enables content-hash duplicate removal");
    cmd_build->add_option("--out", build_args.out_dir, "output directory");

    AuditArgs audit_args;
    auto* cmd_audit =
        app.add_subcommand("audit", "check a split plan against the five principles");
    cmd_audit->add_option("--plan", audit_args.plan, "path to a plan manifest.json")
        ->required();
    cmd_audit->add_option("--out", audit_args.out, "write the report JSON here");
    cmd_audit->add_option("--floor", audit_args.floor,
                          "minimum annotations per test image (default 1)");

    EvalArgs eval_args;
    auto* cmd_eval = app.add_subcommand("eval", "compute the OWOD metric suite");
    cmd_eval->add_option("--gt", eval_args.gt, "ground-truth annotation JSON")->required();
    cmd_eval->add_option("--preds", eval_args.preds, "prediction JSON")->required();
    cmd_eval->add_option("--task-config", eval_args.task_config, "task configuration JSON")
        ->required();
    cmd_eval->add_option("--task", eval_args.task, "one-based task number")->required();
    cmd_eval->add_option("--iou", eval_args.iou, "IOU threshold (default 0.5)");
    cmd_eval->add_option("--wi-recall", eval_args.wi_recall,
                         "recall level for WI (default 0.8)");
    cmd_eval->add_option("--score-threshold", eval_args.score_threshold,
                         "ignore predictions below this score");
    cmd_eval->add_option("--ap-mode", eval_args.ap_mode, "continuous (default) or voc11");
    cmd_eval->add_flag("--aose-per-prediction", eval_args.aose_per_prediction,
                       "count A-OSE witness predictions instead of ground-truth boxes");
    cmd_eval->add_option("--out", eval_args.out, "write the report JSON here");
    cmd_eval->add_option("--csv", eval_args.csv, "write a one-row CSV here");

    auto* cmd_cec = app.add_subcommand("cec", "class-specific expelling calibrator");
    cmd_cec->require_subcommand(1);

    CecCalibrateArgs cal_args;
    auto* cmd_cal = cmd_cec->add_subcommand("calibrate", "fit an expelling profile");
    cmd_cal->add_option("--train-preds", cal_args.train_preds,
                        "training predictions with score vectors")->required();
    cmd_cal->add_option("--train-gt", cal_args.train_gt, "training annotations")->required();
    cmd_cal->add_option("--phi", cal_args.phi, "IOU threshold (default 0.9)");
    cmd_cal->add_option("--alpha", cal_args.alpha, "expelling degree (default 0.5)");
    cmd_cal->add_option("--out", cal_args.out, "profile output path");

    CecApplyArgs apply_args;
    auto* cmd_apply = cmd_cec->add_subcommand("apply", "re-allocate predictions");
    cmd_apply->add_option("--preds", apply_args.preds, "prediction JSON")->required();
    cmd_apply->add_option("--profile", apply_args.profile, "expelling profile")->required();
    double apply_alpha = -1.0;
    auto* apply_alpha_opt =
        cmd_apply->add_option("--alpha", apply_alpha, "override the profile alpha");
    cmd_apply->add_option("--out", apply_args.out, "calibrated prediction output path");

    CecSweepArgs sweep_args;
    auto* cmd_sweep =
        cmd_cec->add_subcommand("sweep", "evaluate an alpha grid on a validation split");
    cmd_sweep->add_option("--preds", sweep_args.preds, "validation predictions")->required();
    cmd_sweep->add_option("--gt", sweep_args.gt, "validation annotations")->required();
    cmd_sweep->add_option("--profile", sweep_args.profile, "expelling profile")->required();
    cmd_sweep->add_option("--task-config", sweep_args.task_config, "task configuration JSON")
        ->required();
    cmd_sweep->add_option("--task", sweep_args.task, "one-based task number")->required();
    cmd_sweep->add_option("--alphas", sweep_args.alphas,
                          "comma-separated alpha grid (default 0,0.25,0.5,1.0)");
    cmd_sweep->add_option("--iou", sweep_args.iou, "IOU threshold (default 0.5)");
    cmd_sweep->add_option("--wi-recall", sweep_args.wi_recall,
                          "recall level for WI (default 0.8)");
    cmd_sweep->add_option("--out", sweep_args.out, "CSV output path (default stdout)");

    auto* cmd_pad = app.add_subcommand("pad", "auxiliary proposal advisor");
    cmd_pad->require_subcommand(1);

    PadConfirmArgs confirm_args;
    auto* cmd_confirm =
        cmd_pad->add_subcommand("confirm", "confirm potential unknown proposals");
    cmd_confirm->add_option("--rpn-proposals", confirm_args.rpn, "RPN proposal JSON")
        ->required();
    cmd_confirm->add_option("--aux-proposals", confirm_args.aux, "auxiliary proposal JSON")
        ->required();
    cmd_confirm->add_option("--theta", confirm_args.theta,
                            "confirmation IOU threshold (default 0.7)");
    cmd_confirm->add_option("--topk", confirm_args.top_k,
                            "potential unknown proposals per image (default 50)");
    cmd_confirm->add_option("--aux-topk", confirm_args.aux_top_k,
                            "auxiliary proposals kept per image (default 50)");
    cmd_confirm->add_option("--select-topk", confirm_args.select_top_k,
                            "keep only the k best confirmed proposals per image "
                            "(default: keep every entry)");
    cmd_confirm->add_option("--out", confirm_args.out, "confirmed proposal output path");

    PadReassignArgs reassign_args;
    auto* cmd_reassign =
        cmd_pad->add_subcommand("reassign", "move confirmed negatives to unknown-positive");
    cmd_reassign->add_option("--anchors", reassign_args.anchors, "anchor JSON")->required();
    cmd_reassign->add_option("--confirmed", reassign_args.confirmed,
                             "confirmed proposal JSON")->required();
    cmd_reassign->add_option("--match-iou", reassign_args.match_iou,
                             "anchor-proposal provenance IOU (default 0.7)");
    cmd_reassign->add_option("--out", reassign_args.out, "anchor output path");

    PadLossArgs loss_args;
    auto* cmd_loss = cmd_pad->add_subcommand("loss", "RPN classification loss of an anchor set");
    cmd_loss->add_option("--anchors", loss_args.anchors, "anchor JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(cmd_build)) return run_build(build_args);
        if (app.got_subcommand(cmd_audit)) return run_audit(audit_args);
        if (app.got_subcommand(cmd_eval)) return run_eval(eval_args);
        if (app.got_subcommand(cmd_cec)) {
            if (cmd_cec->got_subcommand(cmd_cal)) return run_cec_calibrate(cal_args);
            if (cmd_cec->got_subcommand(cmd_apply)) {
                if (apply_alpha_opt->count() > 0) apply_args.alpha = apply_alpha;
                return run_cec_apply(apply_args);
            }
            if (cmd_cec->got_subcommand(cmd_sweep)) return run_cec_sweep(sweep_args);
        }
        if (app.got_subcommand(cmd_pad)) {
            if (cmd_pad->got_subcommand(cmd_confirm)) return run_pad_confirm(confirm_args);
            if (cmd_pad->got_subcommand(cmd_reassign)) return run_pad_reassign(reassign_args);
            if (cmd_pad->got_subcommand(cmd_loss)) return run_pad_loss(loss_args);
        }
    } catch (const std::exception& e) {
        std::cerr << "owod: error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "owod: no subcommand\n";
    return 2;
}
