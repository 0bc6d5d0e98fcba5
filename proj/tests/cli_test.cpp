#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "isb/csv.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "isb_cli_test";

int run_isb(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" ISB_CLI_PATH "\" " + args + " >" + (work / "stdout.txt").string() + " 2>" +
                            (work / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

fs::path write_config(const std::string& name, const std::string& extra) {
    const fs::path p = work / (name + ".cfg");
    std::ofstream(p) << "rows = 4\ncols = 32\nbits_per_cell = 2\ndegrees_of_freedom = 64\nmax_rotation_offset = 1\n"
                        "base_subjects = 30\nsamples_per_subject = 3\naugmentations = none\ngallery_sizes = 8, 12\n"
                        "rotation_policies = single_1\naccuracy_targets = 0.01, 0.1\nn_permutations = 2\n"
                        "emit_transaction_log = true\noutput_dir = "
                     << (work / name).string() << "\n"
                     << extra;
    return p;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        fs::remove_all(work);
        fs::create_directories(work);
    }
    void TearDown() override { fs::remove_all(work); }
};

} // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run_isb(""), 2);
    EXPECT_EQ(run_isb("frobnicate"), 2);
    EXPECT_EQ(run_isb("run --no-such-flag"), 2);
    EXPECT_EQ(run_isb("run"), 2);
    EXPECT_NE(slurp(work / "stderr.txt").find("Usage"), std::string::npos);
    EXPECT_EQ(run_isb("run --config " + (work / "missing.cfg").string()), 2);
}

TEST_F(Cli, BadConfigExitsOne) {
    const fs::path p = work / "bad.cfg";
    std::ofstream(p) << "colour = blue\n";
    EXPECT_EQ(run_isb("run --config " + p.string()), 1);
    EXPECT_NE(slurp(work / "stderr.txt").find("colour"), std::string::npos);
    EXPECT_EQ(run_isb("report"), 1);
}

TEST_F(Cli, RunThenReport) {
    const fs::path cfg = write_config("a", "");
    ASSERT_EQ(run_isb("--jobs 2 run --config " + cfg.string()), 0) << slurp(work / "stderr.txt");
    const fs::path out = work / "a";
    for (const char* f : {"results.csv", "calibration.csv", "scenarios.csv", "population/manifest.csv"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    ASSERT_EQ(run_isb("report --dir " + out.string() + " --out " + (work / "again.csv").string()), 0);
    EXPECT_EQ(slurp(work / "again.csv"), slurp(out / "results.csv"));
    ASSERT_EQ(run_isb("report --config " + cfg.string()), 0);
    EXPECT_EQ(slurp(work / "stdout.txt"), slurp(out / "results.csv"));
}

TEST_F(Cli, GenerateAndCalibrate) {
    const fs::path cfg = write_config("g", "");
    ASSERT_EQ(run_isb("generate --config " + cfg.string()), 0);
    const auto manifest = isb::csv::read(work / "g" / "population" / "manifest.csv");
    EXPECT_EQ(manifest.rows.size(), 90u);
    ASSERT_EQ(run_isb("calibrate --config " + cfg.string()), 0);
    EXPECT_EQ(isb::csv::read(work / "g" / "calibration.csv").rows.size(), 2u);
}

TEST_F(Cli, SeedOverrides) {
    const fs::path a = write_config("s1", "seed = 5\n");
    const fs::path b = write_config("s2", "seed = 6\n");
    const fs::path c = write_config("s3", "seed = 6\n");
    ASSERT_EQ(run_isb("generate --config " + a.string()), 0);
    ASSERT_EQ(run_isb("--seed 5 generate --config " + b.string()), 0);
    ASSERT_EQ(run_isb("generate --config " + c.string(), "ISB_SEED=5"), 0);
    const auto first = slurp(work / "s1" / "population" / "samples" / "s00000_0.irtb");
    ASSERT_FALSE(first.empty());
    EXPECT_EQ(first, slurp(work / "s2" / "population" / "samples" / "s00000_0.irtb"));
    EXPECT_EQ(first, slurp(work / "s3" / "population" / "samples" / "s00000_0.irtb"));
    ASSERT_EQ(run_isb("--seed 7 generate --config " + c.string(), "ISB_SEED=5"), 0);
    EXPECT_NE(first, slurp(work / "s3" / "population" / "samples" / "s00000_0.irtb"));
    EXPECT_EQ(run_isb("generate --config " + c.string(), "ISB_SEED=abc"), 1);
}
