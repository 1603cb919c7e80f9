#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

void add_method_flags(CLI::App* cmd, std::vector<std::string>& overrides) {
    auto flag = [&](const char* name, const char* key, const char* help) {
        cmd->add_option_function<std::string>(
            name, [&overrides, key](const std::string& v) { overrides.push_back(std::string(key) + "=" + v); },
            help);
    };
    flag("--method", "threshold.method", "fixed|otsu|met|ght|amt|agt");
    flag("--t", "threshold.t", "Fixed threshold");
    flag("--nu", "threshold.nu", "GHT nu");
    flag("--tau", "threshold.tau", "GHT tau (default: image intensity std)");
    flag("--kappa", "threshold.kappa", "GHT kappa");
    flag("--omega", "threshold.omega", "GHT omega");
    flag("--window", "threshold.window", "Adaptive window (odd)");
    flag("--sigma", "threshold.sigma", "Adaptive Gaussian sigma (default: window/6)");
    flag("--c", "threshold.c", "Adaptive offset subtracted from the local mean");
    cmd->add_flag_callback("--invert", [&overrides] { overrides.emplace_back("threshold.invert=true"); },
                           "Swap foreground and background");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace sass::cli;

    CLI::App app{"Self-supervised segmentation from thresholding pseudo-labels"};
    app.name("sass-seg");
    app.require_subcommand(1);

    GlobalOptions g;
    std::string config;
    std::uint64_t seed = 0;
    app.add_option("--config", config, "Config file ([section] key = value)")->check(CLI::ExistingFile);
    app.add_option("--set", g.set, "Override a config key: section.key=value (repeatable)");
    app.add_option("--seed", seed, "Seed (overrides train.seed)");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();

    SynthArgs synth;
    std::size_t synth_n = 0;
    auto* c_synth = app.add_subcommand("synth", "Write a synthetic blob dataset with masks and a manifest");
    auto* n_opt = c_synth->add_option("--n", synth_n, "Number of images (split column left empty)");
    c_synth->add_option("--train", synth.train, "Images assigned to the train split")->excludes(n_opt);
    c_synth->add_option("--val", synth.val, "Images assigned to the val split")->excludes(n_opt);
    c_synth->add_option("--test", synth.test, "Images assigned to the test split")->excludes(n_opt);
    c_synth->add_option("--width", synth.width)->capture_default_str();
    c_synth->add_option("--height", synth.height)->capture_default_str();

    PseudoMaskArgs pm;
    auto* c_pm = app.add_subcommand("pseudo-mask", "Threshold every image of a manifest");
    c_pm->add_option("--manifest", pm.manifest, "Manifest CSV (default: data.manifest)");
    c_pm->add_option("--split", pm.split, "Only entries of this split");
    c_pm->add_flag("--dump-scores", pm.dump_scores, "Write the per-cut score curve of histogram methods");
    add_method_flags(c_pm, pm.method_overrides);

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "Train the segmenter and write run directories");
    c_train->add_option("--manifest", tr.manifest, "Manifest CSV (default: data.manifest)");
    c_train->add_option("--seeds", tr.seeds, "Seeds to run (default: train.seed)");
    c_train->add_option_function<std::string>(
        "--mode", [&tr](const std::string& v) { tr.overrides.push_back("train.mode=" + v); }, "selfsup|supervised");
    c_train->add_option_function<std::string>(
        "--loss", [&tr](const std::string& v) { tr.overrides.push_back("loss.name=" + v); },
        "bce|focal|dice|tversky|focal_tversky");
    c_train->add_option_function<std::string>(
        "--epochs", [&tr](const std::string& v) { tr.overrides.push_back("train.epochs=" + v); }, "Epoch budget");
    add_method_flags(c_train, tr.overrides);

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Score a checkpoint against ground-truth masks");
    c_eval->add_option("--checkpoint", ev.checkpoint, "checkpoint.bin of a run")->required()->check(CLI::ExistingFile);
    c_eval->add_option("--manifest", ev.manifest, "Manifest CSV (default: data.manifest)");
    c_eval->add_option("--split", ev.split)->capture_default_str();
    c_eval->add_option("--cut", ev.cut, "Probability cut (strict)")->capture_default_str();

    AblateArgs ab;
    auto* c_ablate = app.add_subcommand("ablate", "Sweep one axis over seeds and compare test scores");
    c_ablate->add_option("--axis", ab.axis)->required()->check(CLI::IsMember({"thresholds", "losses", "epochs", "batch"}));
    c_ablate->add_option("--values", ab.values, "Axis values (comma separated)")->delimiter(',');
    c_ablate->add_option("--manifest", ab.manifest, "Manifest CSV (default: data.manifest)");
    c_ablate->add_option("--seeds", ab.seeds, "Seeds (default: train.seed)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "sass-seg: error: " << e.what() << '\n';
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }
    if (!config.empty()) g.config = config;
    if (app.count("--seed") > 0) g.seed = seed;
    if (c_synth->count("--n") > 0) synth.n = synth_n;

    try {
        if (*c_synth) cmd_synth(g, synth);
        if (*c_pm) cmd_pseudo_mask(g, pm);
        if (*c_train) cmd_train(g, tr);
        if (*c_eval) cmd_eval(g, ev);
        if (*c_ablate) cmd_ablate(g, ab);
    } catch (const std::exception& e) {
        std::cerr << "sass-seg: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
