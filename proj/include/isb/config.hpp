#ifndef ISB_CONFIG_HPP
#define ISB_CONFIG_HPP

// Flat "key = value" experiment configuration. Lists are comma-separated,
// '#' starts a comment. See docs/config.md for the key reference.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "isb/error.hpp"
#include "isb/matcher.hpp"
#include "isb/scenario.hpp"
#include "isb/score.hpp"
#include "isb/search.hpp"
#include "isb/synth.hpp"

namespace isb {

struct experiment_config {
    population_params population{};
    population_plan plan{};
    std::vector<std::size_t> gallery_sizes{100};
    std::vector<set_type> set_types{set_type::closed, set_type::open};
    std::vector<strategy> strategies{strategy::one_to_n, strategy::one_to_first};
    std::vector<rotation_policy> rotation_policies{rotation_policy::two_stage(7, 21)};
    std::vector<accuracy_target> accuracy_targets{accuracy_target(1e-6), accuracy_target(1e-5),
                                                  accuracy_target(1e-4), accuracy_target(1e-3),
                                                  accuracy_target(1e-2)};
    std::size_t n_permutations = 5;
    std::size_t probe_cap_factor = 4;
    std::string matcher = "hamming";
    std::filesystem::path output_dir = "isb-out";
    bool emit_transaction_log = false;

    std::uint64_t seed() const noexcept { return population.seed; }

    void validate() const {
        population.validate();
        if (plan.base_subjects == 0 || plan.samples_per_subject < 2)
            throw error(errc::config, "need base_subjects >= 1 and samples_per_subject >= 2");
        if (gallery_sizes.empty() || set_types.empty() || strategies.empty() || rotation_policies.empty() ||
            accuracy_targets.empty())
            throw error(errc::config, "gallery_sizes, set_types, strategies, rotation_policies and "
                                      "accuracy_targets must all be nonempty");
        if (!std::is_sorted(gallery_sizes.begin(), gallery_sizes.end()) ||
            std::adjacent_find(gallery_sizes.begin(), gallery_sizes.end()) != gallery_sizes.end() ||
            gallery_sizes.front() == 0)
            throw error(errc::config, "gallery_sizes must be positive and strictly ascending");
        if (n_permutations < 1)
            throw error(errc::config, "n_permutations must be >= 1");
        if (probe_cap_factor < 1)
            throw error(errc::config, "probe_cap_factor must be >= 1");
        if (matcher != "hamming" && matcher != "agreement")
            throw error(errc::config, "matcher must be 'hamming' or 'agreement'");
        for (const auto& p : rotation_policies)
            if (p.effective().extent() >= population.geom.cols)
                throw error(errc::config, "rotation policy " + p.name() + " exceeds the column count");
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        const auto item = trim(s.substr(start, comma - start));
        if (!item.empty())
            out.emplace_back(item);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, std::string_view v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw error(errc::config, "config key '" + key + "': bad number '" + std::string(v) + "'");
    return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw error(errc::config, "config key '" + key + "': expected true/false, got '" + std::string(v) + "'");
}

} // namespace detail

inline experiment_config parse_config(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos)
            s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty())
            continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw error(errc::config, "config line " + std::to_string(lineno) + ": expected key = value");
        std::string key(detail::trim(s.substr(0, eq)));
        if (!kv.emplace(key, std::string(detail::trim(s.substr(eq + 1)))).second)
            throw error(errc::config, "config key '" + key + "' given twice");
    }

    experiment_config c;
    auto& pp = c.population;
    for (const auto& [key, value] : kv) {
        using detail::parse_number;
        const auto list = detail::split_list(value);
        if (key == "seed")
            pp.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "output_dir")
            c.output_dir = value;
        else if (key == "emit_transaction_log")
            c.emit_transaction_log = detail::parse_bool(key, value);
        else if (key == "rows")
            pp.geom.rows = parse_number<std::uint16_t>(key, value);
        else if (key == "cols")
            pp.geom.cols = parse_number<std::uint16_t>(key, value);
        else if (key == "bits_per_cell")
            pp.geom.bits_per_cell = parse_number<std::uint8_t>(key, value);
        else if (key == "degrees_of_freedom")
            pp.degrees_of_freedom = parse_number<std::uint32_t>(key, value);
        else if (key == "genuine_flip_prob")
            pp.genuine_flip_prob = parse_number<double>(key, value);
        else if (key == "max_rotation_offset")
            pp.max_rotation_offset = parse_number<int>(key, value);
        else if (key == "occlusion_min")
            pp.occlusion_min = parse_number<double>(key, value);
        else if (key == "occlusion_max")
            pp.occlusion_max = parse_number<double>(key, value);
        else if (key == "base_subjects")
            c.plan.base_subjects = parse_number<std::size_t>(key, value);
        else if (key == "samples_per_subject")
            c.plan.samples_per_subject = parse_number<std::size_t>(key, value);
        else if (key == "augmentations") {
            c.plan.augmentations.clear();
            for (const auto& a : list)
                if (a != "none") {
                    const origin o = parse_origin(a);
                    if (o == origin::original)
                        throw error(errc::config, "augmentations accepts rot180, fliph or none");
                    c.plan.augmentations.push_back(o);
                }
        } else if (key == "gallery_sizes") {
            c.gallery_sizes.clear();
            for (const auto& v : list)
                c.gallery_sizes.push_back(parse_number<std::size_t>(key, v));
        } else if (key == "set_types") {
            c.set_types.clear();
            for (const auto& v : list)
                c.set_types.push_back(parse_set_type(v));
        } else if (key == "strategies") {
            c.strategies.clear();
            for (const auto& v : list)
                c.strategies.push_back(parse_strategy(v));
        } else if (key == "rotation_policies") {
            c.rotation_policies.clear();
            for (const auto& v : list)
                c.rotation_policies.push_back(rotation_policy::parse(v));
        } else if (key == "accuracy_targets") {
            c.accuracy_targets.clear();
            for (const auto& v : list) {
                try {
                    c.accuracy_targets.emplace_back(parse_number<double>(key, v));
                } catch (const error& e) {
                    throw error(errc::config, std::string("accuracy_targets: ") + e.what());
                }
            }
        } else if (key == "n_permutations")
            c.n_permutations = parse_number<std::size_t>(key, value);
        else if (key == "probe_cap_factor")
            c.probe_cap_factor = parse_number<std::size_t>(key, value);
        else if (key == "matcher")
            c.matcher = value;
        else
            throw error(errc::config, "unknown config key '" + key + "'");
    }
    c.validate();
    return c;
}

inline experiment_config load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is)
        throw error(errc::io, "cannot open config " + path.string());
    return parse_config(is);
}

inline experiment_config parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

} // namespace isb

#endif
