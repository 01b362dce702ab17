#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "vige/checkpoint.hpp"
#include "vige/data.hpp"

using testutil::TempDir;

namespace {

struct CliResult {
    int exit_code;
    std::string output;  // stdout+stderr interleaved
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(VIGE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[512];
    while (fgets(buf, sizeof(buf), pipe)) output += buf;
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("synth generates the advertised sequence count deterministically") {
    TempDir tmp("cli_synth");
    const auto out = (tmp.path() / "d").string();
    const std::string flags =
        " --subjects 10 --views 8 --seqs 4 --frames 4 --seed 7";
    auto res = run_cli("synth --out " + out + flags);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("320 sequences") != std::string::npos);

    const auto index = vige::load_dataset(out);
    CHECK(index.records.size() == 320);
    CHECK(index.num_views() == 8);

    //

    const auto manifest_a = read_file(tmp.path() / "d" / "manifest.tsv");
    const auto out2 = (tmp.path() / "d2").string();
    res = run_cli("synth --out " + out2 + flags);
    CHECK(res.exit_code == 0);
    CHECK(read_file(tmp.path() / "d2" / "manifest.tsv") == manifest_a);

    // Missing required --out is a usage error.
    res = run_cli("synth --subjects 3");
    CHECK(res.exit_code == 2);
}

TEST_CASE("train/eval/inspect round trip on a small dataset") {
    TempDir tmp("cli_train");
    const auto data_dir = (tmp.path() / "d").string();
    auto res = run_cli("synth --out " + data_dir +
                       " --subjects 3 --views 3 --seqs 4 --frames 5 --seed 3");
    REQUIRE(res.exit_code == 0);

    const auto ckpt = (tmp.path() / "m.ckpt").string();
    const auto log = (tmp.path() / "m.tsv").string();
    const std::string small_model =
        " --widths 2,2 --scales 1,2 --out-dim 4 --view-dim 4 --frames-per-seq 3"
        " --batch-p 2 --batch-k 2";
    res = run_cli("train --data " + data_dir + " --out " + ckpt + " --log " + log +
                  small_model + " --iterations 1 --seed 5");
    INFO(res.output);
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(ckpt));

    // Exactly one step logged, with the TSV header.
    std::ifstream log_in(log);
    std::string header, row, extra;
    std::getline(log_in, header);
    std::getline(log_in, row);
    CHECK(header.rfind("iteration\t", 0) == 0);
    CHECK(row.rfind("1\t", 0) == 0);
    const bool has_extra = static_cast<bool>(std::getline(log_in, extra)) && !extra.empty();
    CHECK_FALSE(has_extra);

    // Eval produces report files; --no-exclude-identical changes the result.
    const auto rep = (tmp.path() / "rep").string();
    res = run_cli("eval --checkpoint " + ckpt + " --data " + data_dir +
                  " --gallery nm:0-1 --probe nm:2-3 --out " + rep + " --threads 2");
    INFO(res.output);
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(rep + ".tsv"));
    CHECK(std::filesystem::exists(rep + ".txt"));
    const auto excl = read_file(rep + ".tsv");

    res = run_cli("eval --checkpoint " + ckpt + " --data " + data_dir +
                  " --gallery nm:0-1 --probe nm:2-3 --no-exclude-identical --out " + rep +
                  "_all --threads 2");
    CHECK(res.exit_code == 0);
    const auto incl = read_file(rep + "_all.tsv");
    CHECK(excl != incl);

    // Missing checkpoint is a usage/input error.
    res = run_cli("eval --checkpoint " + (tmp.path() / "nope.ckpt").string() + " --data " +
                  data_dir);
    CHECK(res.exit_code == 2);

    // Inspect dumps CSVs and a PGM difference image.
    const auto ins = (tmp.path() / "ins").string();
    res = run_cli("inspect --model " + ckpt + " --strip 1 --views 0,2 --out " + ins);
    INFO(res.output);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("relative") != std::string::npos);
    CHECK(std::filesystem::exists(ins + "_absdiff.pgm"));
    CHECK(std::filesystem::exists(ins + "_view0.csv"));

    res = run_cli("inspect --model " + ckpt + " --strip 99 --views 0,1 --out " + ins);
    CHECK(res.exit_code == 2);
}

TEST_CASE("config file feeds flags, unknown keys error, flags override") {
    TempDir tmp("cli_config");
    const auto data_dir = (tmp.path() / "d").string();
    auto res = run_cli("synth --out " + data_dir +
                       " --subjects 3 --views 2 --seqs 2 --frames 4 --seed 2");
    REQUIRE(res.exit_code == 0);

    const auto cfg_path = tmp.path() / "run.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "# small run\n";
        cfg << "widths = 2,2\n";
        cfg << "scales = 1,2\n";
        cfg << "out-dim = 4\n";
        cfg << "view-dim = 4\n";
        cfg << "frames-per-seq = 3\n";
        cfg << "batch-p = 2\n";
        cfg << "batch-k = 2\n";
        cfg << "iterations = 2\n";
    }
    const auto ckpt = (tmp.path() / "m.ckpt").string();
    res = run_cli("train --data " + data_dir + " --out " + ckpt + " --config " +
                  cfg_path.string() + " --iterations 1");
    INFO(res.output);
    CHECK(res.exit_code == 0);
    // The command-line --iterations 1 overrides the file's 2.
    const auto ck = vige::load_checkpoint(ckpt);
    CHECK(ck.config_text.find("iterations = 1\n") != std::string::npos);

    {
        std::ofstream cfg(cfg_path, std::ios::app);
        cfg << "not-a-real-key = 3\n";
    }
    res = run_cli("train --data " + data_dir + " --out " + ckpt + " --config " +
                  cfg_path.string());
    CHECK(res.exit_code == 2);
}

TEST_CASE("gradcheck passes on the default tiny configuration") {
    auto res = run_cli("gradcheck");
    INFO(res.output);
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("worst") != std::string::npos);
    CHECK(res.output.find("FAIL") == std::string::npos);
}

TEST_CASE("unknown subcommands and bare invocation are usage errors") {
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);
}
