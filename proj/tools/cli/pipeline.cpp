#include <cstdio>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "radarcast/forecaster.hpp"
#include "radarcast/hash.hpp"
#include "radarcast/inference.hpp"
#include "radarcast/synthetic.hpp"
#include "radarcast/tokenizer.hpp"
#include "support.hpp"

namespace radarcast::cli {

namespace {

std::ofstream open_log(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace

int run_synth(const SynthOptions& o)
{
    const auto doc = load_config(o.config);
    if (o.spec != "default")
        require_input(o.spec, "synth spec");
    SynthSpec spec = load_synth_spec(o.spec);
    if (o.spec == "default" && doc.contains("synth"))
        spec = section_as<SynthSpec>(doc, "synth");
    if (o.seed)
        spec.seed = *o.seed;
    spec.validate();
    const auto pre = section_as<PreprocessSpec>(doc, "preprocess");
    pre.validate();
    if (o.n < 1)
        throw ConfigError("--n must be >= 1");

    RunRecorder rec("synth", o.out);
    if (o.config)
        rec.input(*o.config);
    if (o.spec != "default")
        rec.input(o.spec);
    rec.config({{"synth", spec}, {"preprocess", pre}, {"n", o.n}});
    rec.seed(spec.seed);

    const auto manifest = generate_dataset(spec, o.n, o.out, {}, pre);
    const std::filesystem::path dir(o.out);
    for (const auto& e : manifest.entries)
        rec.output(dir / e.filename);
    rec.output(dir / kManifestName);
    rec.output(dir / "synth_spec.json");
    rec.finish();
    std::cout << "wrote " << manifest.entries.size() << " sequences to " << o.out << '\n';
    return kOk;
}

int run_train_tokenizer(const TrainTokenizerOptions& o)
{
    const auto doc = load_config(o.config);
    auto cfg = section_as<TokenizerConfig>(doc, "tokenizer");
    auto schedule = section_as<TokenizerSchedule>(doc, "tokenizer_schedule");
    const auto pre = section_as<PreprocessSpec>(doc, "preprocess");
    if (o.seed)
        schedule.seed = *o.seed;
    if (o.steps)
        schedule.steps = *o.steps;
    if (o.batch)
        schedule.batch_size = *o.batch;
    if (o.lr)
        schedule.learning_rate = *o.lr;
    if (o.crop)
        schedule.crop_size = *o.crop;
    if (o.loss)
        cfg.reconstruction_loss = *o.loss == "mae" ? ReconstructionLoss::mae : ReconstructionLoss::mwae;
    if (o.alpha)
        cfg.alpha = *o.alpha;
    if (o.codebook)
        cfg.codebook_size = *o.codebook;
    if (o.adversarial)
        cfg.use_adversarial = true;
    if (o.revival)
        cfg.dead_code_revival = true;
    cfg.validate();
    pre.validate();

    const auto manifest_path = resolve_manifest(o.data);
    const auto manifest = DatasetManifest::load(manifest_path);
    const auto train = manifest.load_split(Split::train);
    const auto val = manifest.load_split(Split::val);

    RunRecorder rec("train-tokenizer", o.out);
    rec.input(manifest_path);
    if (o.config)
        rec.input(*o.config);
    rec.config({{"tokenizer", cfg}, {"tokenizer_schedule", schedule}, {"preprocess", pre}});
    rec.seed(schedule.seed);

    const std::filesystem::path out(o.out);
    std::filesystem::create_directories(out);
    auto log = open_log(out / "tokenizer_log.jsonl");
    auto result = train_tokenizer(train, val, cfg, schedule,
                                  [&](const TokenizerLogRecord& r) { log << r.to_json().dump() << '\n'; }, pre);
    log.close();
    const auto ckpt = out / "tokenizer.ckpt";
    result.model.save(ckpt);
    rec.output(ckpt);
    rec.output(out / "tokenizer_log.jsonl");
    rec.extra("result", {{"initial_heldout_loss", result.initial_heldout_loss},
                         {"final_heldout_loss", result.final_heldout_loss},
                         {"diverged", result.diverged},
                         {"checkpoint_hash", file_hash(ckpt)}});
    rec.finish();
    if (result.diverged)
        throw TrainingDiverged("loss became non-finite at step " + std::to_string(result.model.step() + 1) +
                               "; saved the last finite parameters to " + ckpt.string());
    std::cout << "tokenizer=" << ckpt.string() << " hash=" << file_hash(ckpt) << " heldout_loss="
              << result.initial_heldout_loss << "->" << result.final_heldout_loss << '\n';
    return kOk;
}

int run_train_forecaster(const TrainForecasterOptions& o)
{
    const auto doc = load_config(o.config);
    auto cfg = section_as<ForecasterConfig>(doc, "forecaster");
    auto schedule = section_as<ForecasterSchedule>(doc, "forecaster_schedule");
    if (o.seed)
        schedule.seed = *o.seed;
    if (o.steps)
        schedule.steps = *o.steps;
    if (o.batch)
        schedule.batch_size = *o.batch;
    if (o.lr)
        schedule.learning_rate = *o.lr;
    if (o.context_frames)
        cfg.context_frames = *o.context_frames;
    if (o.no_dihedral)
        schedule.dihedral_augment = false;

    require_input(o.tokenizer, "tokenizer checkpoint");
    const auto manifest_path = resolve_manifest(o.data);
    if (!section(doc, "forecaster").contains("vocab_size"))
        cfg.vocab_size = Tokenizer::load(o.tokenizer).config().codebook_size;
    cfg.validate();

    RunRecorder rec("train-forecaster", o.out);
    rec.input(manifest_path);
    rec.input(o.tokenizer);
    if (o.config)
        rec.input(*o.config);
    rec.config({{"forecaster", cfg}, {"forecaster_schedule", schedule}});
    rec.seed(schedule.seed);

    const std::filesystem::path out(o.out);
    std::filesystem::create_directories(out);
    auto log = open_log(out / "forecaster_log.jsonl");
    auto result = train_forecaster(manifest_path, o.tokenizer, cfg, schedule,
                                   [&](const ForecasterLogRecord& r) { log << r.to_json().dump() << '\n'; });
    log.close();
    const auto ckpt = out / "forecaster.ckpt";
    result.model.save(ckpt);
    rec.output(ckpt);
    rec.output(out / "forecaster_log.jsonl");
    rec.extra("result", {{"initial_heldout_loss", result.initial_heldout_loss},
                         {"final_heldout_loss", result.final_heldout_loss},
                         {"diverged", result.diverged},
                         {"tokenizer_hash", result.model.tokenizer_hash()},
                         {"checkpoint_hash", file_hash(ckpt)}});
    rec.finish();
    if (result.diverged)
        throw TrainingDiverged("loss became non-finite; saved the last finite parameters to " + ckpt.string());
    std::cout << "forecaster=" << ckpt.string() << " hash=" << file_hash(ckpt) << " heldout_ce="
              << result.initial_heldout_loss << "->" << result.final_heldout_loss << '\n';
    return kOk;
}

int run_nowcast(const NowcastOptions& o)
{
    const auto doc = load_config(o.config);
    const auto sec = section(doc, "nowcast");
    NowcastRequest req;
    std::string mode;
    try {
        req.lead_steps = o.steps.value_or(sec.value("steps", 3));
        req.n_members = o.members.value_or(sec.value("members", 4));
        req.seed = o.seed.value_or(sec.value("seed", std::uint64_t{0}));
        mode = o.mode.value_or(sec.value("mode", std::string("multinomial")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config section 'nowcast': ") + e.what());
    }
    try {
        req.sampling = Sampling::parse(mode);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (req.lead_steps < 1 || req.n_members < 1)
        throw ConfigError("steps and members must be >= 1");
    req.allow_checkpoint_mismatch = o.allow_mismatch;

    require_input(o.tokenizer, "tokenizer checkpoint");
    require_input(o.forecaster, "forecaster checkpoint");
    require_input(o.context, "context sequence");
    const auto tokenizer = Tokenizer::load(o.tokenizer);
    const auto forecaster = Forecaster::load(o.forecaster);
    const auto seq = read_sequence(o.context);
    const int need = forecaster.config().context_frames - 1;
    if (o.start < 0 || o.start + need > seq.length())
        throw InvalidArgument("context file has " + std::to_string(seq.length()) + " frames; need " +
                              std::to_string(need) + " starting at " + std::to_string(o.start));
    req.context.timestep_minutes = seq.timestep_minutes;
    req.context.frames.assign(seq.frames.begin() + o.start, seq.frames.begin() + o.start + need);
    if (seq.start_time)
        req.context.start_time = *seq.start_time + static_cast<std::uint32_t>(o.start * seq.timestep_minutes);

    RunRecorder rec("nowcast", o.out);
    rec.input(o.tokenizer);
    rec.input(o.forecaster);
    rec.input(o.context);
    if (o.config)
        rec.input(*o.config);
    rec.config({{"nowcast",
                 {{"steps", req.lead_steps}, {"members", req.n_members}, {"mode", req.sampling.to_string()},
                  {"seed", req.seed}}}});
    rec.seed(req.seed);

    const auto ens = nowcast(req, tokenizer, forecaster);

    const std::filesystem::path out(o.out);
    std::filesystem::create_directories(out);
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t i = 0; i < ens.members.size(); ++i) {
        const auto& m = ens.members[i];
        RadarSequence fc;
        fc.frames = m.frames;
        fc.timestep_minutes = seq.timestep_minutes;
        if (req.context.start_time)
            fc.start_time = *req.context.start_time + static_cast<std::uint32_t>(need * seq.timestep_minutes);
        char name[32];
        std::snprintf(name, sizeof name, "member_%03zu.rprc", i);
        write_sequence(fc, out / name);
        rec.output(out / name);

        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : m.steps) {
            nlohmann::json windows = nlohmann::json::array();
            for (const auto& p : s.placements)
                windows.push_back({p.window_row, p.window_col});
            steps.push_back({{"seconds", s.seconds},
                             {"tokens", std::vector<std::int32_t>(s.tokens.indices().begin(), s.tokens.indices().end())},
                             {"window_origins", windows}});
        }
        members.push_back({{"index", i}, {"seed", m.seed}, {"file", name}, {"steps", steps}});
    }
    nlohmann::json report = {{"request",
                              {{"context", o.context},
                               {"start", o.start},
                               {"steps", req.lead_steps},
                               {"members", req.n_members},
                               {"mode", req.sampling.to_string()},
                               {"seed", req.seed},
                               {"allow_checkpoint_mismatch", req.allow_checkpoint_mismatch}}},
                             {"tokenizer_hash", file_hash(o.tokenizer)},
                             {"forecaster_hash", file_hash(o.forecaster)},
                             {"forecaster_trained_on", forecaster.tokenizer_hash()},
                             {"token_grid", {ens.context_tokens.front().height(), ens.context_tokens.front().width()}},
                             {"members", members}};
    std::ofstream(out / "nowcast.json") << report.dump(1) << '\n';
    rec.output(out / "nowcast.json");
    rec.finish();
    std::cout << "wrote " << ens.members.size() << " members x " << ens.lead_steps << " steps to " << o.out << '\n';
    return kOk;
}

}  // namespace radarcast::cli
