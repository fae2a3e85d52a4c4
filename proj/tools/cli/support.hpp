#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "radarcast/error.hpp"

namespace radarcast::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kMissingInput = 3,
    kConfigInvalid = 4,
    kCheckpointMismatch = 5,
    kFormatError = 6,
    kTrainingDiverged = 7,
    kInvalidArgument = 8,
    kIoError = 9,
};

class MissingInput : public IoError {
public:
    using IoError::IoError;
    const char* kind() const noexcept override { return "missing_input"; }
};

int exit_code_for(const Error& e);

/// One line on stderr: error=<kind> exit=<code> message="<text>".
void report_error(const std::string& kind, int code, const std::string& message);

/// Throws MissingInput unless `path` exists.
void require_input(const std::filesystem::path& path, const char* what);

/// Parsed config document, or an empty object when no file was given.
nlohmann::json load_config(const std::optional<std::string>& path);

/// `doc[section]` when present, else an empty object.
nlohmann::json section(const nlohmann::json& doc, const char* name);

template <typename T>
T section_as(const nlohmann::json& doc, const char* name)
{
    try {
        return section(doc, name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config section '") + name + "': " + e.what());
    }
}

/// Dataset manifest path from a dataset directory or a manifest file.
std::filesystem::path resolve_manifest(const std::filesystem::path& data);

/// Accumulates one run-manifest record and appends it to
/// <out_dir>/run_manifest.jsonl.
class RunRecorder {
public:
    RunRecorder(std::string subcommand, std::filesystem::path out_dir);

    void config(nlohmann::json snapshot) { config_ = std::move(snapshot); }
    void seed(std::uint64_t s) { seed_ = s; }
    void input(const std::filesystem::path& path);
    void output(const std::filesystem::path& path) { outputs_.push_back(path.string()); }
    void extra(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

    /// Writes the record; returns its path.
    std::filesystem::path finish() const;

private:
    std::string subcommand_;
    std::filesystem::path out_dir_;
    nlohmann::json config_ = nlohmann::json::object();
    nlohmann::json inputs_ = nlohmann::json::object();
    nlohmann::json extra_ = nlohmann::json::object();
    std::vector<std::string> outputs_;
    std::optional<std::uint64_t> seed_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
    std::chrono::system_clock::time_point started_at_ = std::chrono::system_clock::now();
};

}  // namespace radarcast::cli
