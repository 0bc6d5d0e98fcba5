#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <map>

#include "isb/runner.hpp"

using namespace isb;
namespace fs = std::filesystem;

namespace {

const char* small_cfg = R"(
seed = 515
rows = 4
cols = 48
bits_per_cell = 2
degrees_of_freedom = 96
max_rotation_offset = 2
base_subjects = 60
samples_per_subject = 3
augmentations = fliph
gallery_sizes = 10, 25
rotation_policies = single_2, two_stage_1_4
accuracy_targets = 0.005, 0.02, 0.1
n_permutations = 3
emit_transaction_log = true
)";

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("isb_runner_test_" + name);
    fs::remove_all(d);
    return d;
}

class Runner : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        cfg_ = new experiment_config(parse_config_string(small_cfg));
        cfg_->output_dir = fresh_dir("main");
        res_ = new experiment_results(run_experiment(*cfg_, 2));
    }
    static void TearDownTestSuite() {
        fs::remove_all(cfg_->output_dir);
        delete res_;
        delete cfg_;
    }
    static experiment_config* cfg_;
    static experiment_results* res_;
};

experiment_config* Runner::cfg_ = nullptr;
experiment_results* Runner::res_ = nullptr;

} // namespace

TEST_F(Runner, CoversEveryCellInCanonicalOrder) {
    const auto& rows = res_->rows;
    ASSERT_EQ(rows.size(), 2u * 2 * 2 * 3 * 2 * 3);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_LT(rows[i - 1].key(), rows[i].key());
    EXPECT_EQ(res_->scenarios.size(), 2u * 2 * 3);
}

TEST_F(Runner, WritesArtifacts) {
    const fs::path d = cfg_->output_dir;
    for (const char* f : {"results.csv", "calibration.csv", "scenarios.csv", "spread.csv", "population/manifest.csv"})
        EXPECT_TRUE(fs::exists(d / f)) << f;
    const auto t = csv::read(d / "results.csv");
    EXPECT_EQ(t.header, results_header());
    EXPECT_EQ(t.rows.size(), res_->rows.size());
    EXPECT_TRUE(fs::exists(d / "transactions" / (scenario_id(25, set_type::open, 2) + ".csv")));
}

TEST_F(Runner, CalibrationIsMonotone) {
    ASSERT_EQ(res_->calibration.size(), 6u);
    for (std::size_t i = 1; i < res_->calibration.size(); ++i) {
        const auto& a = res_->calibration[i - 1];
        const auto& b = res_->calibration[i];
        if (a.policy == b.policy) {
            EXPECT_LE(a.thr.value, b.thr.value);
        }
    }
    // largest gallery, minus mated pairs, over its closed probes
    EXPECT_EQ(res_->calibration[0].n_impostor_scores % 24, 0u);
}

TEST_F(Runner, ExhaustiveSearchExaminesWholeGallery) {
    for (const auto& r : res_->rows) {
        if (r.strat != strategy::one_to_n)
            continue;
        EXPECT_EQ(r.metrics.mean_normalized_comparisons, 1.0);
        EXPECT_EQ(r.metrics.std_normalized_comparisons, 0.0);
    }
}

TEST_F(Runner, MissRatesAgreeAcrossStrategies) {
    std::map<std::tuple<std::size_t, set_type, double, std::string, std::size_t>, const result_row*> n;
    for (const auto& r : res_->rows)
        if (r.strat == strategy::one_to_n)
            n[{r.gallery_size, r.set, r.target, r.policy, r.permutation}] = &r;
    std::size_t checked = 0;
    for (const auto& r : res_->rows) {
        if (r.strat != strategy::one_to_first)
            continue;
        const result_row* o = n.at({r.gallery_size, r.set, r.target, r.policy, r.permutation});
        EXPECT_EQ(r.metrics.n_fni, o->metrics.n_fni);
        EXPECT_EQ(r.metrics.n_fpi, o->metrics.n_fpi);
        EXPECT_EQ(r.metrics.n_efpi >= o->metrics.n_efpi, true);
        ++checked;
    }
    EXPECT_EQ(checked, res_->rows.size() / 2);
}

TEST_F(Runner, ReaggregationReproducesResults) {
    const fs::path out = cfg_->output_dir / "reaggregated.csv";
    write_results_csv(out, reaggregate(cfg_->output_dir));
    EXPECT_EQ(slurp(out), slurp(cfg_->output_dir / "results.csv"));
}

TEST_F(Runner, IndependentOfThreadCount) {
    auto cfg = *cfg_;
    cfg.output_dir = fresh_dir("serial");
    cfg.emit_transaction_log = false;
    run_experiment(cfg, 1);
    EXPECT_EQ(slurp(cfg.output_dir / "results.csv"), slurp(cfg_->output_dir / "results.csv"));
    EXPECT_EQ(slurp(cfg.output_dir / "calibration.csv"), slurp(cfg_->output_dir / "calibration.csv"));
    fs::remove_all(cfg.output_dir);
}

TEST_F(Runner, SessionRejectsOtherPopulation) {
    experiment_session s(cfg_->population, cfg_->plan, 1);
    auto other = *cfg_;
    other.population.seed += 1;
    EXPECT_THROW(s.run(other), error);
    other = *cfg_;
    other.plan.base_subjects = 61;
    EXPECT_THROW(s.calibrate(other), error);
}

TEST_F(Runner, SessionCalibrationMatchesRun) {
    experiment_session s(cfg_->population, cfg_->plan, 1);
    const auto cal = s.calibrate(*cfg_);
    ASSERT_EQ(cal.size(), res_->calibration.size());
    for (std::size_t i = 0; i < cal.size(); ++i) {
        EXPECT_EQ(cal[i].thr.value, res_->calibration[i].thr.value);
        EXPECT_EQ(cal[i].n_impostor_scores, res_->calibration[i].n_impostor_scores);
    }
    const auto scores = s.calibration_impostor_scores(*cfg_, cfg_->rotation_policies[0]);
    EXPECT_EQ(scores.values.size(), cal[0].n_impostor_scores);
}

TEST(RunnerErrors, GalleryLargerThanPool) {
    auto cfg = parse_config_string(small_cfg);
    cfg.gallery_sizes = {500};
    cfg.output_dir = fresh_dir("too_big");
    EXPECT_THROW(run_experiment(cfg, 1), error);
    fs::remove_all(cfg.output_dir);
}
