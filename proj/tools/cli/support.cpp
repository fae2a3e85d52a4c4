#include "support.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iostream>

#include "radarcast/hash.hpp"
#include "radarcast/synthetic.hpp"

namespace radarcast::cli {

int exit_code_for(const Error& e)
{
    if (dynamic_cast<const MissingInput*>(&e))
        return kMissingInput;
    if (dynamic_cast<const ConfigError*>(&e))
        return kConfigInvalid;
    if (dynamic_cast<const CheckpointMismatch*>(&e))
        return kCheckpointMismatch;
    if (dynamic_cast<const FormatError*>(&e))
        return kFormatError;
    if (dynamic_cast<const TrainingDiverged*>(&e))
        return kTrainingDiverged;
    if (dynamic_cast<const InvalidArgument*>(&e))
        return kInvalidArgument;
    if (dynamic_cast<const IoError*>(&e))
        return kIoError;
    return kFailure;
}

void report_error(const std::string& kind, int code, const std::string& message)
{
    std::string text = message;
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), '"', '\'');
    std::cerr << "error=" << kind << " exit=" << code << " message=\"" << text << "\"" << std::endl;
}

void require_input(const std::filesystem::path& path, const char* what)
{
    if (!std::filesystem::exists(path))
        throw MissingInput(std::string(what) + " not found: " + path.string());
}

nlohmann::json load_config(const std::optional<std::string>& path)
{
    if (!path)
        return nlohmann::json::object();
    require_input(*path, "config file");
    std::ifstream in(*path);
    try {
        auto doc = nlohmann::json::parse(in);
        if (!doc.is_object())
            throw ConfigError(*path + ": top level must be an object");
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(*path + ": " + e.what());
    }
}

nlohmann::json section(const nlohmann::json& doc, const char* name)
{
    if (doc.contains(name)) {
        if (!doc[name].is_object())
            throw ConfigError(std::string("config section '") + name + "' must be an object");
        return doc[name];
    }
    return nlohmann::json::object();
}

std::filesystem::path resolve_manifest(const std::filesystem::path& data)
{
    const auto path = std::filesystem::is_directory(data) ? data / kManifestName : data;
    require_input(path, "dataset manifest");
    return path;
}

RunRecorder::RunRecorder(std::string subcommand, std::filesystem::path out_dir)
    : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir))
{
}

void RunRecorder::input(const std::filesystem::path& path)
{
    if (std::filesystem::is_regular_file(path))
        inputs_[path.string()] = file_hash(path);
}

std::filesystem::path RunRecorder::finish() const
{
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::time_t t = std::chrono::system_clock::to_time_t(started_at_);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));

    nlohmann::json rec = {{"subcommand", subcommand_},
                          {"artifact_version", kArtifactVersion},
                          {"started_at", stamp},
                          {"wall_clock_seconds", seconds},
                          {"config", config_},
                          {"inputs", inputs_},
                          {"outputs", outputs_}};
    rec["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
    for (auto it = extra_.begin(); it != extra_.end(); ++it)
        rec[it.key()] = it.value();

    std::filesystem::create_directories(out_dir_);
    const auto path = out_dir_ / "run_manifest.jsonl";
    std::ofstream out(path, std::ios::app);
    if (!out)
        throw IoError("cannot append to " + path.string());
    out << rec.dump() << '\n';
    return path;
}

}  // namespace radarcast::cli
