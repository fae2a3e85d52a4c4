#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "../unit/test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string err;
};

Result run(const test::TempDir& dir, const std::string& args)
{
    const auto err = dir.path() / "stderr.txt";
    const std::string cmd = std::string(RADARCAST_BIN) + " " + args + " > " + (dir.path() / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    r.err = ss.str();
    return r;
}

int count_lines(const fs::path& p)
{
    std::ifstream in(p);
    int n = 0;
    for (std::string line; std::getline(in, line);)
        n += !line.empty();
    return n;
}

void write_tiny_config(const fs::path& path, int tokenizer_seed)
{
    std::ofstream(path) << R"({
  "synth": {"n_frames": 6},
  "tokenizer": {"alpha": 3, "codebook_size": 16, "base_channels": 8, "max_channels": 16, "bottleneck_channels": 4},
  "tokenizer_schedule": {"steps": 4, "batch_size": 2, "crop_size": 32, "heldout_frames": 4, "seed": )"
                        << tokenizer_seed << R"(},
  "forecaster": {"context_frames": 3, "tokens_h": 2, "tokens_w": 2, "n_layers": 1, "n_heads": 2, "embed_dim": 16, "max_positions": 12},
  "forecaster_schedule": {"steps": 4, "batch_size": 4, "warmup_steps": 1, "heldout_windows": 8, "dihedral_augment": false}
})";
}

}  // namespace

TEST_CASE("usage errors exit 2")
{
    test::TempDir dir;
    CHECK(run(dir, "").code == 2);
    CHECK(run(dir, "bogus").code == 2);
    const auto r = run(dir, "synth --n 2");
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error=usage exit=2 message=\"", 0) == 0);
    CHECK(run(dir, "--version").code == 0);
}

TEST_CASE("missing inputs, bad configs and corrupt files map to their exit codes")
{
    test::TempDir dir;
    const auto out = (dir.path() / "o").string();
    const auto missing = run(dir, "train-tokenizer --data " + (dir.path() / "nope").string() + " --out " + out);
    CHECK(missing.code == 3);
    CHECK(missing.err.find("error=missing_input exit=3") != std::string::npos);

    std::ofstream(dir.path() / "bad.json") << R"({"synth": {"peak_dbz": [20, 90]}})";
    CHECK(run(dir, "synth --config " + (dir.path() / "bad.json").string() + " --out " + out).code == 4);
    std::ofstream(dir.path() / "broken.json") << "{ not json";
    CHECK(run(dir, "synth --config " + (dir.path() / "broken.json").string() + " --out " + out).code == 4);

    std::ofstream(dir.path() / "junk.rprc") << "JUNKJUNKJUNKJUNKJUNKJUNKJUNK";
    const auto fmt = run(dir, "plot --field " + (dir.path() / "junk.rprc").string() + " --out " + out);
    CHECK(fmt.code == 6);
    CHECK(fmt.err.find("error=bad_magic exit=6") != std::string::npos);

    CHECK(run(dir, "synth --n 0 --out " + out).code == 4);
}

TEST_CASE("full pipeline, manifests and checkpoint pairing")
{
    test::TempDir dir;
    const auto p = [&](const char* name) { return (dir.path() / name).string(); };
    write_tiny_config(dir.path() / "a.json", 1);
    write_tiny_config(dir.path() / "b.json", 2);

    REQUIRE(run(dir, "synth --config " + p("a.json") + " --n 12 --out " + p("data")).code == 0);
    CHECK(fs::exists(dir.path() / "data" / "manifest.txt"));
    CHECK(count_lines(dir.path() / "data" / "run_manifest.jsonl") == 1);

    REQUIRE(run(dir, "train-tokenizer --config " + p("a.json") + " --data " + p("data") + " --out " + p("tok")).code == 0);
    CHECK(fs::exists(dir.path() / "tok" / "tokenizer.ckpt"));
    CHECK(count_lines(dir.path() / "tok" / "tokenizer_log.jsonl") == 4);
    REQUIRE(run(dir, "train-tokenizer --config " + p("b.json") + " --data " + p("data") + " --out " + p("tok2")).code == 0);

    const auto tok = p("tok") + "/tokenizer.ckpt";
    const auto tok2 = p("tok2") + "/tokenizer.ckpt";
    REQUIRE(run(dir, "train-forecaster --config " + p("a.json") + " --data " + p("data") + " --tokenizer " + tok + " --out " + p("fc")).code == 0);
    const auto fc = p("fc") + "/forecaster.ckpt";
    CHECK(fs::exists(fc));

    const auto seq = p("data") + "/seq_00000.rprc";
    const std::string common = " --forecaster " + fc + " --context " + seq + " --steps 2 --members 3 --seed 5";
    REQUIRE(run(dir, "nowcast --tokenizer " + tok + common + " --out " + p("now")).code == 0);
    CHECK(fs::exists(dir.path() / "now" / "member_002.rprc"));
    CHECK(fs::exists(dir.path() / "now" / "nowcast.json"));
    REQUIRE(run(dir, "nowcast --tokenizer " + tok + common + " --out " + p("now_again")).code == 0);
    CHECK(test::read_bytes(dir.path() / "now" / "member_001.rprc") == test::read_bytes(dir.path() / "now_again" / "member_001.rprc"));

    const auto mismatch = run(dir, "nowcast --tokenizer " + tok2 + common + " --out " + p("bad"));
    CHECK(mismatch.code == 5);
    CHECK(mismatch.err.find("error=checkpoint_mismatch exit=5") != std::string::npos);
    CHECK(run(dir, "nowcast --tokenizer " + tok2 + common + " --allow-checkpoint-mismatch --out " + p("forced")).code == 0);

    REQUIRE(run(dir, "verify --obs " + seq + " --obs-offset 2 --forecast " + p("now") + " --plots --out " + p("ver")).code == 0);
    CHECK(fs::exists(dir.path() / "ver" / "verify_report.json"));
    CHECK(fs::exists(dir.path() / "ver" / "crps_vs_lead.svg"));
    REQUIRE(run(dir, "plot --report " + p("ver") + "/verify_report.json --field " + p("now") + "/member_000.rprc --out " + p("plots")).code == 0);
    CHECK(fs::exists(dir.path() / "plots" / "member_000.svg"));
}
