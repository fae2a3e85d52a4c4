#include <exception>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "support.hpp"

using namespace radarcast::cli;

int main(int argc, char** argv)
{
    CLI::App app{"radarcast: tokenized radar nowcasting pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kArtifactVersion);
    std::function<int()> action;

    SynthOptions synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic radar dataset");
    s->add_option("--config", synth.config, "JSON config file (section \"synth\")");
    s->add_option("--spec", synth.spec, "\"default\" or a JSON synth spec")->capture_default_str();
    s->add_option("--n", synth.n, "number of sequences")->capture_default_str();
    s->add_option("--out", synth.out, "output directory")->required();
    s->add_option("--seed", synth.seed, "seed of the first sequence");
    s->callback([&] { action = [&] { return run_synth(synth); }; });

    TrainTokenizerOptions tok;
    auto* t = app.add_subcommand("train-tokenizer", "train the VQ tokenizer");
    t->add_option("--config", tok.config, "JSON config file (sections \"tokenizer\", \"tokenizer_schedule\", \"preprocess\")");
    t->add_option("--data", tok.data, "dataset directory or manifest")->required();
    t->add_option("--out", tok.out, "output directory")->required();
    t->add_option("--seed", tok.seed);
    t->add_option("--steps", tok.steps);
    t->add_option("--batch", tok.batch);
    t->add_option("--lr", tok.lr);
    t->add_option("--crop", tok.crop, "square crop size in pixels");
    t->add_option("--loss", tok.loss, "mwae or mae")->check(CLI::IsMember({"mwae", "mae"}));
    t->add_option("--alpha", tok.alpha, "downsampling steps");
    t->add_option("--codebook", tok.codebook, "codebook size K");
    t->add_flag("--adversarial", tok.adversarial, "add the patch-discriminator term");
    t->add_flag("--revival", tok.revival, "re-seed codes unused for a while");
    t->callback([&] { action = [&] { return run_train_tokenizer(tok); }; });

    TrainForecasterOptions fc;
    auto* f = app.add_subcommand("train-forecaster", "train the token forecaster on a frozen tokenizer");
    f->add_option("--config", fc.config, "JSON config file (sections \"forecaster\", \"forecaster_schedule\")");
    f->add_option("--data", fc.data, "dataset directory or manifest")->required();
    f->add_option("--tokenizer", fc.tokenizer, "tokenizer checkpoint")->required();
    f->add_option("--out", fc.out, "output directory")->required();
    f->add_option("--seed", fc.seed);
    f->add_option("--steps", fc.steps);
    f->add_option("--batch", fc.batch);
    f->add_option("--lr", fc.lr);
    f->add_option("--context-frames", fc.context_frames, "frames per window T");
    f->add_flag("--no-dihedral", fc.no_dihedral, "skip rotated/flipped copies of the training sequences");
    f->callback([&] { action = [&] { return run_train_forecaster(fc); }; });

    NowcastOptions nc;
    auto* n = app.add_subcommand("nowcast", "generate an ensemble nowcast");
    n->add_option("--config", nc.config, "JSON config file (section \"nowcast\")");
    n->add_option("--tokenizer", nc.tokenizer)->required();
    n->add_option("--forecaster", nc.forecaster)->required();
    n->add_option("--context", nc.context, "RPRC file holding the context frames")->required();
    n->add_option("--start", nc.start, "index of the first context frame")->capture_default_str();
    n->add_option("--steps", nc.steps, "lead steps");
    n->add_option("--members", nc.members, "ensemble size");
    n->add_option("--mode", nc.mode, "multinomial, greedy, top_k:<k> or temperature:<tau>");
    n->add_option("--seed", nc.seed);
    n->add_option("--out", nc.out, "output directory")->required();
    n->add_flag("--allow-checkpoint-mismatch", nc.allow_mismatch, "run with a tokenizer the forecaster was not trained on");
    n->callback([&] { action = [&] { return run_nowcast(nc); }; });

    VerifyOptions vf;
    auto* v = app.add_subcommand("verify", "score a nowcast against observations");
    v->add_option("--config", vf.config, "JSON config file (section \"verify\")");
    v->add_option("--obs", vf.obs, "observation RPRC file")->required();
    v->add_option("--obs-offset", vf.obs_offset, "observation frame matching lead step 1")->capture_default_str();
    v->add_option("--forecast", vf.forecast_dir, "nowcast output directory");
    v->add_option("--members", vf.members, "member RPRC files");
    v->add_option("--thresholds", vf.thresholds, "rain-rate thresholds in mm/h");
    v->add_option("--seed", vf.seed, "rank tie-break seed");
    v->add_option("--out", vf.out, "output directory")->required();
    v->add_flag("--plots", vf.plots, "also write SVG charts");
    v->add_flag("--wet-only", vf.wet_only, "rank histogram over pixels with rain >= 0.1 mm/h in obs or any member");
    v->callback([&] { action = [&] { return run_verify(vf); }; });

    PlotOptions pl;
    auto* p = app.add_subcommand("plot", "render SVG charts from a verify report or RPRC files");
    p->add_option("--report", pl.report, "verify_report.json");
    p->add_option("--field", pl.fields, "RPRC files to draw frame by frame");
    p->add_option("--out", pl.out, "output directory")->required();
    p->callback([&] { action = [&] { return run_plot(pl); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", kUsage, e.what());
        return kUsage;
    }

    try {
        return action();
    } catch (const radarcast::Error& e) {
        const int code = exit_code_for(e);
        report_error(e.kind(), code, e.what());
        return code;
    } catch (const std::exception& e) {
        report_error("internal", kFailure, e.what());
        return kFailure;
    }
}
