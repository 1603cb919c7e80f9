#include "commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

#include "sassseg/checkpoint.hpp"
#include "sassseg/image_io.hpp"
#include "sassseg/parallel.hpp"
#include "sassseg/pipeline.hpp"
#include "sassseg/trainer.hpp"

namespace fs = std::filesystem;

namespace sass::cli {
namespace {

std::ofstream open_csv(const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error(dir.string() + ": cannot create directory");
}

fs::path manifest_path(const std::optional<std::string>& flag, const ResolvedConfig& cfg) {
    if (flag) return *flag;
    if (auto it = cfg.data.find("manifest"); it != cfg.data.end()) return it->second;
    throw std::invalid_argument("no manifest: pass --manifest or set data.manifest");
}

std::uint64_t parse_uint(const std::string& s, const char* what) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw std::invalid_argument(std::string(what) + ": '" + s + "' is not a non-negative integer");
    }
    return v;
}

struct Splits {
    Dataset train, val, test;
};

Splits load_splits(const std::vector<ManifestEntry>& entries, const TrainConfig& cfg, MaskPolicy test_policy) {
    const MaskPolicy fit = cfg.mode == TrainMode::Supervised ? MaskPolicy::Require : MaskPolicy::Skip;
    return {load_dataset(filter_split(entries, Split::Train), cfg.width, cfg.height, fit),
            load_dataset(filter_split(entries, Split::Val), cfg.width, cfg.height, fit),
            load_dataset(filter_split(entries, Split::Test), cfg.width, cfg.height, test_policy)};
}

std::vector<std::uint64_t> seeds_or_default(const std::vector<std::uint64_t>& seeds, const TrainConfig& cfg) {
    return seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : seeds;
}

MetricsRow metrics_row(const std::string& split, std::uint64_t seed, const TrainConfig& cfg, const EvalReport& r) {
    return {split, seed, cfg.threshold_method.name(), cfg.loss.name(), r};
}

}  // namespace

ResolvedConfig resolve(const GlobalOptions& g, const std::vector<std::string>& extra) {
    std::vector<Setting> settings;
    if (g.config) settings = parse_config_file(*g.config);
    for (const auto& s : g.set) settings.push_back(parse_override(s));
    for (const auto& s : extra) settings.push_back(parse_override(s));
    if (g.seed) settings.push_back({"train.seed", std::to_string(*g.seed), "--seed"});
    return resolve_config(settings);
}

void cmd_synth(const GlobalOptions& g, const SynthArgs& a) {
    const ResolvedConfig cfg = resolve(g);
    const bool by_split = a.train + a.val + a.test > 0;
    if (a.n && by_split) throw std::invalid_argument("--n cannot be combined with --train/--val/--test");
    if (a.width < 16 || a.height < 16) throw std::invalid_argument("synthetic images must be at least 16x16");
    const std::size_t total = a.n.value_or(a.train + a.val + a.test);

    std::vector<Split> splits;
    if (by_split) {
        splits.assign(a.train, Split::Train);
        splits.insert(splits.end(), a.val, Split::Val);
        splits.insert(splits.end(), a.test, Split::Test);
    }
    ensure_dir(g.out);
    const auto samples = synth_blobs(total, a.width, a.height, cfg.train.seed);
    const fs::path manifest = write_synth_dataset(g.out, samples, splits);
    std::cout << manifest.string() << '\n';
}

void cmd_pseudo_mask(const GlobalOptions& g, const PseudoMaskArgs& a) {
    const ResolvedConfig cfg = resolve(g, a.method_overrides);
    const ThresholdMethod& method = cfg.train.threshold_method;
    auto entries = load_manifest(manifest_path(a.manifest, cfg));
    if (a.split) entries = filter_split(entries, split_from_string(*a.split));

    std::set<std::string> stems;
    for (const auto& e : entries) {
        if (!stems.insert(e.image_path.stem().string()).second) {
            throw std::invalid_argument("duplicate image name '" + e.image_path.stem().string() + "' in manifest");
        }
    }
    ensure_dir(g.out / "masks");
    if (a.dump_scores) ensure_dir(g.out / "scores");

    std::vector<std::optional<double>> thresholds(entries.size());
    std::vector<std::vector<double>> curves(entries.size());
    parallel_for(entries.size(), [&](std::size_t i) {
        const auto& e = entries[i];
        PseudoMask pm = generate_pseudo_mask(read_gray(e.image_path), method);
        write_mask(g.out / "masks" / (e.image_path.stem().string() + ".png"),
                   e.invert ? invert_mask(pm.mask) : pm.mask);
        thresholds[i] = pm.threshold;
        curves[i] = std::move(pm.score_curve);
    });

    auto csv = open_csv(g.out / "thresholds.csv");
    csv << "image,threshold\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        csv << entries[i].image_path.filename().string() << ','
            << (thresholds[i] ? format_double(*thresholds[i]) : std::string{}) << '\n';
        if (a.dump_scores && !curves[i].empty()) {
            auto sc = open_csv(g.out / "scores" / (entries[i].image_path.stem().string() + ".csv"));
            sc << "cut,score\n";
            for (std::size_t k = 0; k < curves[i].size(); ++k) sc << k << ',' << format_double(curves[i][k]) << '\n';
        }
    }
}

void cmd_train(const GlobalOptions& g, const TrainArgs& a) {
    const ResolvedConfig cfg = resolve(g, a.overrides);
    const auto entries = load_manifest(manifest_path(a.manifest, cfg));
    const Splits data = load_splits(entries, cfg.train, MaskPolicy::IfPresent);
    const bool scored = data.test.size() > 0 && data.test.has_all_masks();
    const auto seeds = seeds_or_default(a.seeds, cfg.train);

    std::vector<SeedRun> runs(seeds.size());
    std::vector<fs::path> dirs(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        TrainConfig c = cfg.train;
        c.seed = seeds[i];
        const TrainResult r = train(data.train, data.val, c);
        dirs[i] = write_run_artifacts(g.out, c, r);
        runs[i].seed = c.seed;
        runs[i].record = r.record;
        std::vector<MetricsRow> rows;
        if (scored) {
            runs[i].test = evaluate(r.params, data.test);
            rows.push_back(metrics_row("test", c.seed, c, runs[i].test));
        }
        write_metrics_csv(dirs[i] / "metrics.csv", rows);
    });
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& rec = runs[i].record;
        std::cout << dirs[i].string() << " best_epoch=" << rec.best_epoch
                  << " val_loss=" << format_double(rec.val_loss[static_cast<std::size_t>(rec.best_epoch - 1)]);
        if (scored) std::cout << " test_iou_macro=" << format_double(runs[i].test.iou_macro);
        std::cout << '\n';
    }
    if (seeds.size() > 1 && scored) {
        const MultiSeedResult agg = aggregate_runs(runs);
        auto csv = open_csv(g.out / config_hash(cfg.train) / "aggregate.csv");
        csv << "seed,iou_macro,iou_micro,recall,accuracy\n";
        for (const auto& r : agg.runs) {
            csv << r.seed << ',' << format_double(r.test.iou_macro) << ',' << format_double(r.test.iou_micro) << ','
                << format_double(r.test.recall) << ',' << format_double(r.test.accuracy) << '\n';
        }
        csv << "mean," << format_double(agg.iou_macro.mean) << ',' << format_double(agg.iou_micro.mean) << ','
            << format_double(agg.recall.mean) << ',' << format_double(agg.accuracy.mean) << '\n';
        csv << "std," << format_double(agg.iou_macro.std) << ',' << format_double(agg.iou_micro.std) << ','
            << format_double(agg.recall.std) << ',' << format_double(agg.accuracy.std) << '\n';
    }
}

void cmd_eval(const GlobalOptions& g, const EvalArgs& a) {
    const ResolvedConfig resolved = resolve(g);
    const fs::path run_dir = a.checkpoint.parent_path();
    const TrainConfig cfg = fs::exists(run_dir / "meta.txt") ? config_from_meta(run_dir / "meta.txt") : resolved.train;
    std::uint64_t seed = cfg.seed;
    if (fs::exists(run_dir / "checkpoint.meta")) {
        const auto meta = load_checkpoint_meta(run_dir / "checkpoint.meta");
        if (auto it = meta.find("seed"); it != meta.end()) seed = parse_uint(it->second, "checkpoint.meta seed");
    }
    const SegmenterParams params = load_checkpoint(a.checkpoint);
    const auto entries = filter_split(load_manifest(manifest_path(a.manifest, resolved)), split_from_string(a.split));
    if (entries.empty()) throw std::invalid_argument("split '" + a.split + "' has no entries");
    const Dataset data = load_dataset(entries, cfg.width, cfg.height, MaskPolicy::Require);
    const EvalReport report = evaluate(params, data, a.cut);
    const std::vector<MetricsRow> rows = {metrics_row(a.split, seed, cfg, report)};
    ensure_dir(g.out);
    write_metrics_csv(g.out / "metrics.csv", rows);
    std::cout << kMetricsHeader << '\n' << metrics_csv_row(rows[0]) << '\n';
}

void cmd_ablate(const GlobalOptions& g, const AblateArgs& a) {
    const ResolvedConfig cfg = resolve(g);
    std::vector<std::string> values = a.values;
    if (values.empty()) {
        if (a.axis == "thresholds") values = {"amt", "agt", "ght", "otsu", "met"};
        if (a.axis == "losses") values = {"bce", "focal", "dice", "tversky", "focal_tversky"};
        if (a.axis == "epochs") values = {"5", "10", "20"};
        if (a.axis == "batch") values = {"8", "16", "32"};
    }
    if (values.empty()) throw std::invalid_argument("unknown ablation axis '" + a.axis + "'");

    std::vector<TrainConfig> variants;
    for (const auto& v : values) {
        TrainConfig c = cfg.train;
        if (a.axis == "thresholds") {
            c.threshold_method = threshold_method_from_name(v);
        } else if (a.axis == "losses") {
            c.loss = loss_from_name(v);
        } else if (a.axis == "epochs") {
            c.epochs = static_cast<int>(parse_uint(v, "epochs"));
        } else {
            c.batch_size = static_cast<int>(parse_uint(v, "batch"));
        }
        c.validate();
        variants.push_back(c);
    }

    const auto entries = load_manifest(manifest_path(a.manifest, cfg));
    const Splits data = load_splits(entries, cfg.train, MaskPolicy::Require);
    if (data.test.size() == 0) throw std::invalid_argument("ablation needs a labelled test split");
    const auto seeds = seeds_or_default(a.seeds, cfg.train);

    ensure_dir(g.out);
    auto rows = open_csv(g.out / ("ablate_" + a.axis + ".csv"));
    auto summary = open_csv(g.out / ("ablate_" + a.axis + "_summary.csv"));
    rows << "axis,value," << kMetricsHeader << '\n';
    summary << "axis,value,runs,iou_macro_mean,iou_macro_std,iou_micro_mean,iou_micro_std,recall_mean,recall_std,"
               "accuracy_mean,accuracy_std\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
        const MultiSeedResult res = multi_seed_run(data.train, data.val, data.test, variants[k], seeds);
        for (const auto& r : res.runs) {
            rows << a.axis << ',' << values[k] << ',' << metrics_csv_row(metrics_row("test", r.seed, variants[k], r.test))
                 << '\n';
        }
        summary << a.axis << ',' << values[k] << ',' << res.runs.size();
        for (const MetricSummary* m : {&res.iou_macro, &res.iou_micro, &res.recall, &res.accuracy}) {
            summary << ',' << format_double(m->mean) << ',' << format_double(m->std);
        }
        summary << '\n';
        std::cout << a.axis << '=' << values[k] << " iou_macro=" << format_double(res.iou_macro.mean)
                  << " std=" << format_double(res.iou_macro.std) << '\n';
    }
}

}  // namespace sass::cli
