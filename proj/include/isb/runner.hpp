#ifndef ISB_RUNNER_HPP
#define ISB_RUNNER_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "isb/calibration.hpp"
#include "isb/config.hpp"
#include "isb/csv.hpp"
#include "isb/error.hpp"
#include "isb/matcher.hpp"
#include "isb/metrics.hpp"
#include "isb/parallel.hpp"
#include "isb/rng.hpp"
#include "isb/scenario.hpp"
#include "isb/score_table.hpp"
#include "isb/search.hpp"
#include "isb/synth.hpp"

namespace isb {

struct calibration_row {
    polarity pol = polarity::dissimilarity;
    std::string policy;
    threshold thr;
    std::size_t n_impostor_scores = 0;
};

struct scenario_row {
    std::string id;
    std::size_t gallery_size = 0;
    set_type set = set_type::closed;
    std::size_t permutation = 0;
    std::uint64_t seed = 0;
    std::string gallery_manifest;
    std::string probe_manifest;
};

struct result_row {
    std::size_t gallery_size = 0;
    set_type set = set_type::closed;
    strategy strat = strategy::one_to_n;
    double target = 0.0;
    std::string policy;
    std::size_t permutation = 0;
    polarity pol = polarity::dissimilarity;
    double threshold_value = 0.0;
    bool attainable = true;
    metrics_report metrics;

    auto key() const { return std::tuple(gallery_size, set, strat, target, policy, permutation); }
};

struct spread_row {
    std::size_t gallery_size = 0;
    set_type set = set_type::closed;
    strategy strat = strategy::one_to_n;
    double target = 0.0;
    std::string policy;
    metric_spread spread;
};

struct experiment_results {
    std::vector<calibration_row> calibration;
    std::vector<scenario_row> scenarios;
    std::vector<result_row> rows;
    std::vector<spread_row> spread;
};

inline void sort_canonical(std::vector<result_row>& rows) {
    std::sort(rows.begin(), rows.end(), [](const result_row& a, const result_row& b) { return a.key() < b.key(); });
}

inline std::string scenario_id(std::size_t size, set_type set, std::size_t perm) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "n%05zu_%s_p%03zu", size, std::string(to_string(set)).c_str(), perm);
    return buf;
}

inline std::string sample_path(const population& pool, sample_ref ref) {
    return "population/samples/" + sample_file_name(pool.subjects[ref.subject], ref.sample);
}

/// Reusable experiment state: the synthetic population and the pair-score
/// cache. Several configurations that share population parameters can run
/// against one session without recomputing pair scores.
class experiment_session {
public:
    experiment_session(const population_params& params, const population_plan& plan, unsigned jobs = 1,
                       std::ostream* progress = nullptr)
        : params_(params), plan_(plan), jobs_(std::max(1u, jobs)), progress_(progress) {
        say("generating population: " + std::to_string(plan.subject_count()) + " subjects x " +
            std::to_string(plan.samples_per_subject) + " samples");
        pool_ = generate_population(params, plan, jobs_);
    }

    const population& pool() const noexcept { return pool_; }
    unsigned jobs() const noexcept { return jobs_; }

    /// Runs every cell of `cfg`. With `out_dir` set, scenario manifests and
    /// (if enabled) transaction logs are written while the sweep runs.
    experiment_results run(const experiment_config& cfg, const std::filesystem::path* out_dir = nullptr) {
        check_compatible(cfg);
        if (cfg.matcher == "agreement")
            return run_impl<agreement_matcher>(cfg, out_dir);
        return run_impl<hamming_matcher>(cfg, out_dir);
    }

    /// Thresholds only, from the largest gallery and its closed probe set.
    std::vector<calibration_row> calibrate(const experiment_config& cfg) {
        check_compatible(cfg);
        if (cfg.matcher == "agreement")
            return calibrate_impl<agreement_matcher>(cfg, nullptr);
        return calibrate_impl<hamming_matcher>(cfg, nullptr);
    }

    /// The impostor score set calibration draws from, for one policy.
    score_list calibration_impostor_scores(const experiment_config& cfg, const rotation_policy& policy) {
        check_compatible(cfg);
        if (cfg.matcher == "agreement")
            return impostor_scores<agreement_matcher>(cfg, policy);
        return impostor_scores<hamming_matcher>(cfg, policy);
    }

private:
    void say(const std::string& msg) const {
        if (progress_)
            *progress_ << "[isb] " << msg << std::endl;
    }

    void check_compatible(const experiment_config& cfg) const {
        cfg.validate();
        const auto& p = cfg.population;
        if (!(p.geom == params_.geom) || p.degrees_of_freedom != params_.degrees_of_freedom ||
            p.genuine_flip_prob != params_.genuine_flip_prob || p.max_rotation_offset != params_.max_rotation_offset ||
            p.occlusion_min != params_.occlusion_min || p.occlusion_max != params_.occlusion_max ||
            p.seed != params_.seed || cfg.plan.base_subjects != plan_.base_subjects ||
            cfg.plan.samples_per_subject != plan_.samples_per_subject ||
            cfg.plan.augmentations != plan_.augmentations)
            throw error(errc::config, "configuration does not match the session's population");
    }

    static std::vector<shift_range> ranges_of(const experiment_config& cfg) {
        std::vector<shift_range> out;
        for (const auto& p : cfg.rotation_policies)
            for (const auto& r : {p.narrow(), p.wide()})
                if (std::find(out.begin(), out.end(), r) == out.end())
                    out.push_back(r);
        return out;
    }

    template <matcher M>
    std::unique_ptr<score_table<M>>& table_slot() {
        if constexpr (std::is_same_v<M, hamming_matcher>)
            return hamming_table_;
        else
            return agreement_table_;
    }

    template <matcher M>
    const score_table<M>& table_for(const experiment_config& cfg) {
        auto& slot = table_slot<M>();
        std::vector<shift_range> needed = ranges_of(cfg);
        if (slot && std::all_of(needed.begin(), needed.end(), [&](const auto& r) { return slot->has_range(r); }))
            return *slot;
        if (slot)
            for (const auto& r : slot->ranges())
                if (std::find(needed.begin(), needed.end(), r) == needed.end())
                    needed.push_back(r);
        say("scoring all probe/reference pairs (" + std::string(M::name) + ", " + std::to_string(needed.size()) +
            " shift ranges)");
        slot = std::make_unique<score_table<M>>(pool_, needed, jobs_);
        return *slot;
    }

    struct size_scenario {
        gallery base;
        std::optional<probe_set> closed;
        std::optional<probe_set> open;
    };

    size_scenario build_size(const experiment_config& cfg, std::size_t size, bool need_closed, bool need_open) const {
        const std::uint64_t seed = cfg.seed();
        rng_type grng = make_rng(seed, {3, size});
        size_scenario s{build_gallery(pool_, size, grng), std::nullopt, std::nullopt};
        if (need_closed) {
            rng_type prng = make_rng(seed, {4, size});
            s.closed = build_closed_probeset(pool_, s.base, cfg.probe_cap_factor * size, prng);
        }
        if (need_open) {
            rng_type orng = make_rng(seed, {5, size});
            s.open = build_open_probeset(pool_, s.base, orng);
        }
        return s;
    }

    template <matcher M>
    score_list impostor_scores(const experiment_config& cfg, const rotation_policy& policy) {
        const auto& table = table_for<M>(cfg);
        const std::size_t largest = cfg.gallery_sizes.back();
        size_scenario s;
        try {
            s = build_size(cfg, largest, true, false);
        } catch (const error& e) {
            throw error(e.code(), "calibration gallery (size " + std::to_string(largest) + "): " + e.what());
        }
        const std::size_t range = table.range_index(policy.effective());
        score_list out{M::pol, {}};
        out.values.reserve(s.closed->size() * largest);
        for (const auto& p : s.closed->probes) {
            const std::size_t row = table.row(p.source);
            for (const auto& e : s.base.entries()) {
                if (e.source.subject == p.source.subject)
                    continue;
                if (auto v = table.score_at(row, e.source.subject, range))
                    out.values.push_back(v->value());
            }
        }
        return out;
    }

    template <matcher M>
    std::vector<calibration_row> calibrate_impl(const experiment_config& cfg,
                                                std::vector<std::vector<threshold>>* per_policy) {
        std::vector<calibration_row> rows;
        for (const auto& policy : cfg.rotation_policies) {
            say("calibrating " + policy.name() + " on gallery size " + std::to_string(cfg.gallery_sizes.back()));
            const score_list scores = impostor_scores<M>(cfg, policy);
            if (scores.values.empty())
                throw error(errc::empty_input, "calibration produced no impostor scores");
            auto ths = thresholds_for_targets(scores, cfg.accuracy_targets);
            for (const auto& t : ths)
                rows.push_back({M::pol, policy.name(), t, scores.values.size()});
            if (per_policy)
                per_policy->push_back(std::move(ths));
        }
        return rows;
    }

    template <matcher M>
    experiment_results run_impl(const experiment_config& cfg, const std::filesystem::path* out_dir) {
        experiment_results res;
        std::vector<std::vector<threshold>> thresholds;
        res.calibration = calibrate_impl<M>(cfg, &thresholds);
        const auto& table = table_for<M>(cfg);

        const bool need_closed =
            std::find(cfg.set_types.begin(), cfg.set_types.end(), set_type::closed) != cfg.set_types.end();
        const bool need_open =
            std::find(cfg.set_types.begin(), cfg.set_types.end(), set_type::open) != cfg.set_types.end();
        const std::size_t n_policies = cfg.rotation_policies.size(), n_targets = cfg.accuracy_targets.size(),
                          n_strategies = cfg.strategies.size();
        const std::size_t n_combos = n_policies * n_targets * n_strategies;
        auto combo_index = [&](std::size_t q, std::size_t t, std::size_t s) {
            return (q * n_targets + t) * n_strategies + s;
        };

        if (out_dir) {
            std::filesystem::create_directories(*out_dir / "scenarios");
            if (cfg.emit_transaction_log)
                std::filesystem::create_directories(*out_dir / "transactions");
        }

        for (const std::size_t size : cfg.gallery_sizes) {
            say("gallery size " + std::to_string(size));
            size_scenario sc;
            try {
                sc = build_size(cfg, size, need_closed, need_open);
            } catch (const error& e) {
                throw error(e.code(), "scenario with gallery size " + std::to_string(size) + ": " + e.what());
            }
            for (std::size_t perm = 0; perm < cfg.n_permutations; ++perm) {
                const std::uint64_t perm_seed = derive_seed(cfg.seed(), {6, size, perm});
                gallery g = sc.base;
                if (perm > 0) {
                    rng_type prng = make_rng(perm_seed);
                    g = permute_gallery(sc.base, prng);
                }
                std::vector<std::uint32_t> cols;
                cols.reserve(g.size());
                for (const auto& e : g.entries())
                    cols.push_back(e.source.subject);

                char gname[64];
                std::snprintf(gname, sizeof gname, "scenarios/n%05zu_p%03zu_gallery.csv", size, perm);
                if (out_dir) {
                    csv::writer gw(*out_dir / gname);
                    gw.row({"position", "subject_id", "path"});
                    for (std::size_t i = 0; i < g.size(); ++i)
                        gw.row({std::to_string(i), g[i].subject_id, sample_path(pool_, g[i].source)});
                }

                for (const set_type st : cfg.set_types) {
                    const probe_set& probes = st == set_type::closed ? *sc.closed : *sc.open;
                    const std::string id = scenario_id(size, st, perm);
                    char pname[64];
                    std::snprintf(pname, sizeof pname, "scenarios/n%05zu_%s_probes.csv", size,
                                  std::string(to_string(st)).c_str());
                    res.scenarios.push_back({id, size, st, perm, perm_seed, gname, pname});
                    if (out_dir && perm == 0) {
                        csv::writer pw(*out_dir / pname);
                        pw.row({"subject_id", "enrolled", "path"});
                        for (const auto& p : probes.probes)
                            pw.row({p.subject_id, p.enrolled ? "1" : "0", sample_path(pool_, p.source)});
                    }

                    const std::size_t np = probes.size();
                    std::vector<std::vector<outcome_record>> records(n_combos, std::vector<outcome_record>(np));
                    std::vector<std::vector<scan_result>> logs;
                    if (cfg.emit_transaction_log)
                        logs.assign(n_combos, std::vector<scan_result>(np));

                    parallel_for(np, jobs_, [&](std::size_t i) {
                        const probe& p = probes.probes[i];
                        const std::size_t row = table.row(p.source);
                        for (std::size_t q = 0; q < n_policies; ++q) {
                            const rotation_policy& policy = cfg.rotation_policies[q];
                            const std::size_t nk = table.range_index(policy.narrow());
                            const std::size_t wk = table.range_index(policy.wide());
                            auto score_at = [&](std::size_t idx, range_kind kind) {
                                return table.score_at(row, cols[idx], kind == range_kind::narrow ? nk : wk);
                            };
                            for (std::size_t s = 0; s < n_strategies; ++s) {
                                const auto results =
                                    cfg.strategies[s] == strategy::one_to_n
                                        ? scan_one_to_n_multi(g.size(), score_at, thresholds[q], policy)
                                        : scan_one_to_first_multi(g.size(), score_at, thresholds[q], policy);
                                for (std::size_t t = 0; t < n_targets; ++t) {
                                    const scan_result& r = results[t];
                                    const bool same = r.index && cols[*r.index] == p.source.subject;
                                    const std::uint64_t rot = std::uint64_t{r.narrow_pairs} * policy.narrow().size() +
                                                              std::uint64_t{r.wide_pairs} * policy.wide().size();
                                    const std::size_t c = combo_index(q, t, s);
                                    records[c][i] = {classify(r.matched(), same, p.enrolled), r.pairs(), rot,
                                                     r.reached == stage::wide};
                                    if (!logs.empty())
                                        logs[c][i] = r;
                                }
                            }
                        }
                    }, 16);

                    for (std::size_t q = 0; q < n_policies; ++q)
                        for (std::size_t t = 0; t < n_targets; ++t)
                            for (std::size_t s = 0; s < n_strategies; ++s) {
                                const threshold& th = thresholds[q][t];
                                result_row row;
                                row.gallery_size = size;
                                row.set = st;
                                row.strat = cfg.strategies[s];
                                row.target = th.target;
                                row.policy = cfg.rotation_policies[q].name();
                                row.permutation = perm;
                                row.pol = M::pol;
                                row.threshold_value = th.value;
                                row.attainable = th.attainable;
                                row.metrics = aggregate_metrics(records[combo_index(q, t, s)], size,
                                                                cfg.rotation_policies[q].effective().size());
                                res.rows.push_back(std::move(row));
                            }

                    if (out_dir && cfg.emit_transaction_log)
                        write_transaction_log(*out_dir / "transactions" / (id + ".csv"), id, cfg, thresholds, probes,
                                              g, logs, combo_index);
                }
            }
        }
        sort_canonical(res.rows);
        res.spread = compute_spread(res.rows, cfg.n_permutations);
        return res;
    }

    template <class ComboIndex>
    void write_transaction_log(const std::filesystem::path& path, const std::string& id,
                               const experiment_config& cfg, const std::vector<std::vector<threshold>>& thresholds,
                               const probe_set& probes, const gallery& g,
                               const std::vector<std::vector<scan_result>>& logs, ComboIndex combo_index) const {
        csv::writer w(path);
        w.row({"scenario_id", "rotation_policy", "accuracy_target", "strategy", "probe_subject", "decision",
               "identified_subject", "score", "gallery_index", "pairs_examined", "rotations_evaluated",
               "stage_reached"});
        for (std::size_t q = 0; q < cfg.rotation_policies.size(); ++q) {
            const auto& policy = cfg.rotation_policies[q];
            for (std::size_t t = 0; t < cfg.accuracy_targets.size(); ++t)
                for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
                    const auto& rs = logs[combo_index(q, t, s)];
                    for (std::size_t i = 0; i < rs.size(); ++i) {
                        const scan_result& r = rs[i];
                        const std::uint64_t rot = std::uint64_t{r.narrow_pairs} * policy.narrow().size() +
                                                  std::uint64_t{r.wide_pairs} * policy.wide().size();
                        w.row({id, policy.name(), csv::format(thresholds[q][t].target),
                               std::string(to_string(cfg.strategies[s])), probes.probes[i].subject_id,
                               r.matched() ? "match" : "nonmatch", r.matched() ? g[*r.index].subject_id : "",
                               r.matched() ? csv::format(r.value->value()) : "",
                               r.matched() ? std::to_string(*r.index) : "", std::to_string(r.pairs()),
                               std::to_string(rot), std::string(to_string(r.reached))});
                    }
                }
        }
    }

    population_params params_;
    population_plan plan_;
    unsigned jobs_;
    std::ostream* progress_;
    population pool_;
    std::unique_ptr<score_table<hamming_matcher>> hamming_table_;
    std::unique_ptr<score_table<agreement_matcher>> agreement_table_;

public:
    /// Spread across permutations for every (size, set, strategy, target,
    /// policy) group; rows must be canonically sorted.
    static std::vector<spread_row> compute_spread(const std::vector<result_row>& rows, std::size_t n_permutations) {
        std::vector<spread_row> out;
        if (n_permutations < 2)
            return out;
        for (std::size_t begin = 0; begin < rows.size();) {
            std::size_t end = begin;
            std::vector<metrics_report> group;
            while (end < rows.size() && rows[end].gallery_size == rows[begin].gallery_size &&
                   rows[end].set == rows[begin].set && rows[end].strat == rows[begin].strat &&
                   rows[end].target == rows[begin].target && rows[end].policy == rows[begin].policy) {
                group.push_back(rows[end].metrics);
                ++end;
            }
            if (group.size() >= 2)
                for (auto& ms : permutation_spread(group))
                    out.push_back({rows[begin].gallery_size, rows[begin].set, rows[begin].strat, rows[begin].target,
                                   rows[begin].policy, std::move(ms)});
            begin = end;
        }
        return out;
    }
};

// ---------------------------------------------------------------- output files

inline const std::vector<std::string>& results_header() {
    static const std::vector<std::string> h{
        "gallery_size", "set_type", "strategy", "accuracy_target", "rotation_policy", "permutation_index",
        "matcher_polarity", "threshold", "attainable", "n_enrolled_probes", "n_unenrolled_probes", "n_ti", "n_efpi",
        "n_fni", "n_fpi", "n_tni", "tpir", "fnir", "e_fpir", "fpir", "tnir", "e_fpir_all", "fpir_all",
        "mean_normalized_comparisons", "std_normalized_comparisons", "mean_normalized_rotations", "n_stage_wide"};
    return h;
}

inline void write_results_csv(const std::filesystem::path& path, const std::vector<result_row>& rows) {
    csv::writer w(path);
    w.row(results_header());
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        w.row({std::to_string(r.gallery_size), std::string(to_string(r.set)), std::string(to_string(r.strat)),
               csv::format(r.target), r.policy, std::to_string(r.permutation), std::string(to_string(r.pol)),
               csv::format(r.threshold_value), r.attainable ? "1" : "0", std::to_string(m.n_enrolled_probes),
               std::to_string(m.n_unenrolled_probes), std::to_string(m.n_ti), std::to_string(m.n_efpi),
               std::to_string(m.n_fni), std::to_string(m.n_fpi), std::to_string(m.n_tni), csv::format(m.tpir),
               csv::format(m.fnir), csv::format(m.e_fpir), csv::format(m.fpir), csv::format(m.tnir),
               csv::format(m.e_fpir_all), csv::format(m.fpir_all), csv::format(m.mean_normalized_comparisons),
               csv::format(m.std_normalized_comparisons), csv::format(m.mean_normalized_rotations),
               std::to_string(m.n_stage_wide)});
    }
}

inline void write_calibration_csv(const std::filesystem::path& path, const std::vector<calibration_row>& rows) {
    csv::writer w(path);
    w.row({"matcher_polarity", "rotation_policy", "target", "threshold", "achieved_fraction", "n_impostor_scores"});
    for (const auto& r : rows)
        w.row({std::string(to_string(r.pol)), r.policy, csv::format(r.thr.target), csv::format(r.thr.value),
               csv::format(r.thr.achieved_fraction), std::to_string(r.n_impostor_scores)});
}

inline void write_scenarios_csv(const std::filesystem::path& path, const std::vector<scenario_row>& rows) {
    csv::writer w(path);
    w.row({"scenario_id", "gallery_size", "set_type", "permutation_index", "seed", "gallery_manifest",
           "probe_manifest"});
    for (const auto& s : rows)
        w.row({s.id, std::to_string(s.gallery_size), std::string(to_string(s.set)), std::to_string(s.permutation),
               std::to_string(s.seed), s.gallery_manifest, s.probe_manifest});
}

inline void write_spread_csv(const std::filesystem::path& path, const std::vector<spread_row>& rows) {
    csv::writer w(path);
    w.row({"gallery_size", "set_type", "strategy", "accuracy_target", "rotation_policy", "metric", "n_permutations",
           "mean", "stddev", "sem"});
    for (const auto& r : rows)
        w.row({std::to_string(r.gallery_size), std::string(to_string(r.set)), std::string(to_string(r.strat)),
               csv::format(r.target), r.policy, r.spread.metric, std::to_string(r.spread.count),
               csv::format(r.spread.mean), csv::format(r.spread.stddev), csv::format(r.spread.sem)});
}

/// Writes every output artifact of one sweep under cfg.output_dir, using an
/// existing session.
inline experiment_results run_experiment(experiment_session& session, const experiment_config& cfg,
                                         std::ostream* progress = nullptr) {
    cfg.validate();
    const auto& dir = cfg.output_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw error(errc::io, "cannot create output directory " + dir.string() + ": " + ec.message());
    if (progress)
        *progress << "[isb] writing population to " << (dir / "population").string() << std::endl;
    write_population(session.pool(), dir / "population");
    experiment_results res = session.run(cfg, &dir);
    write_calibration_csv(dir / "calibration.csv", res.calibration);
    write_scenarios_csv(dir / "scenarios.csv", res.scenarios);
    write_spread_csv(dir / "spread.csv", res.spread);
    write_results_csv(dir / "results.csv", res.rows);
    return res;
}

/// Full sweep: population, calibration, every scenario cell, and all
/// output artifacts under cfg.output_dir.
inline experiment_results run_experiment(const experiment_config& cfg, unsigned jobs = 1,
                                         std::ostream* progress = nullptr) {
    cfg.validate();
    experiment_session session(cfg.population, cfg.plan, jobs, progress);
    return run_experiment(session, cfg, progress);
}

/// Rebuilds the results table from scenarios.csv, calibration.csv, the
/// gallery manifests and transactions/*.csv of a finished run.
inline std::vector<result_row> reaggregate(const std::filesystem::path& dir) {
    const csv::table cal = csv::read(dir / "calibration.csv");
    struct cal_entry {
        polarity pol;
        double threshold;
        bool attainable;
    };
    std::map<std::pair<std::string, std::string>, cal_entry> thresholds;
    for (const auto& r : cal.rows) {
        const double achieved = csv::parse_double(r[cal.column("achieved_fraction")]);
        thresholds[{r[cal.column("rotation_policy")], r[cal.column("target")]}] = {
            parse_polarity(r[cal.column("matcher_polarity")]), csv::parse_double(r[cal.column("threshold")]),
            achieved > 0.0};
    }

    const csv::table scen = csv::read(dir / "scenarios.csv");
    std::vector<result_row> rows;
    for (const auto& s : scen.rows) {
        const std::string id = s[scen.column("scenario_id")];
        const auto size = csv::parse_int<std::size_t>(s[scen.column("gallery_size")]);
        const set_type st = parse_set_type(s[scen.column("set_type")]);
        const auto perm = csv::parse_int<std::size_t>(s[scen.column("permutation_index")]);
        const csv::table gal = csv::read(dir / s[scen.column("gallery_manifest")]);
        std::unordered_set<std::string> enrolled;
        for (const auto& g : gal.rows)
            enrolled.insert(g[gal.column("subject_id")]);
        if (enrolled.size() != size)
            throw error(errc::format, "gallery manifest of " + id + " does not list " + std::to_string(size) +
                                          " subjects");

        const csv::table tx = csv::read(dir / "transactions" / (id + ".csv"));
        const std::size_t c_policy = tx.column("rotation_policy"), c_target = tx.column("accuracy_target"),
                          c_strategy = tx.column("strategy"), c_probe = tx.column("probe_subject"),
                          c_decision = tx.column("decision"), c_ident = tx.column("identified_subject"),
                          c_pairs = tx.column("pairs_examined"), c_rot = tx.column("rotations_evaluated"),
                          c_stage = tx.column("stage_reached");
        std::map<std::tuple<std::string, std::string, std::string>, std::vector<outcome_record>> groups;
        std::vector<std::tuple<std::string, std::string, std::string>> order;
        for (const auto& r : tx.rows) {
            auto key = std::tuple(r[c_policy], r[c_target], r[c_strategy]);
            auto [it, inserted] = groups.try_emplace(key);
            if (inserted)
                order.push_back(key);
            const bool matched = r[c_decision] == "match";
            const bool is_enrolled = enrolled.contains(r[c_probe]);
            it->second.push_back({classify(matched, matched && r[c_ident] == r[c_probe], is_enrolled),
                                  csv::parse_int<std::size_t>(r[c_pairs]), csv::parse_int<std::uint64_t>(r[c_rot]),
                                  parse_stage(r[c_stage]) == stage::wide});
        }
        for (const auto& key : order) {
            const auto& [policy_name, target_text, strategy_name] = key;
            const auto cal_it = thresholds.find({policy_name, target_text});
            if (cal_it == thresholds.end())
                throw error(errc::format, "no calibration entry for " + policy_name + " at target " + target_text);
            const rotation_policy policy = rotation_policy::parse(policy_name);
            result_row row;
            row.gallery_size = size;
            row.set = st;
            row.strat = parse_strategy(strategy_name);
            row.target = csv::parse_double(target_text);
            row.policy = policy_name;
            row.permutation = perm;
            row.pol = cal_it->second.pol;
            row.threshold_value = cal_it->second.threshold;
            row.attainable = cal_it->second.attainable;
            row.metrics = aggregate_metrics(groups[key], size, policy.effective().size());
            rows.push_back(std::move(row));
        }
    }
    sort_canonical(rows);
    return rows;
}

} // namespace isb

#endif
