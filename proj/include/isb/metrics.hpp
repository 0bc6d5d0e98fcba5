#ifndef ISB_METRICS_HPP
#define ISB_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isb/error.hpp"
#include "isb/search.hpp"

namespace isb {

/// TI: own subject returned. EFPI: another enrolled subject returned.
/// FNI: nothing returned for an enrolled probe. FPI: anything returned for
/// an unenrolled probe. TNI: nothing returned for an unenrolled probe.
enum class outcome { ti, efpi, tni, fni, fpi };

inline std::string_view to_string(outcome o) {
    switch (o) {
    case outcome::ti: return "TI";
    case outcome::efpi: return "EFPI";
    case outcome::tni: return "TNI";
    case outcome::fni: return "FNI";
    case outcome::fpi: return "FPI";
    }
    return "?";
}

inline outcome classify(bool matched, bool same_subject, bool enrolled) noexcept {
    if (enrolled)
        return matched ? (same_subject ? outcome::ti : outcome::efpi) : outcome::fni;
    return matched ? outcome::fpi : outcome::tni;
}

inline outcome classify_outcome(const transaction& tx, bool enrolled) {
    return classify(tx.match.has_value(), tx.match && tx.match->subject_id == tx.probe_subject, enrolled);
}

/// What aggregation needs from one classified transaction.
struct outcome_record {
    outcome category;
    std::size_t pairs_examined;
    std::uint64_t rotations_evaluated;
    bool reached_wide;
};

inline outcome_record make_record(const transaction& tx, bool enrolled) {
    return {classify_outcome(tx, enrolled), tx.pairs_examined, tx.rotations_evaluated, tx.stage_reached == stage::wide};
}

struct metrics_report {
    std::size_t n_enrolled_probes = 0;
    std::size_t n_unenrolled_probes = 0;
    std::size_t n_ti = 0, n_efpi = 0, n_fni = 0, n_fpi = 0, n_tni = 0;
    // Enrolled-probe denominators for TI/EFPI/FNI, unenrolled-probe
    // denominators for FPI/TNI; NA when the denominator is zero.
    std::optional<double> tpir, fnir, e_fpir, fpir, tnir;
    // Same numerators over all probes.
    double e_fpir_all = 0.0;
    double fpir_all = 0.0;
    double mean_normalized_comparisons = 0.0;
    double std_normalized_comparisons = 0.0;
    double mean_normalized_rotations = 0.0;
    std::size_t n_stage_wide = 0;

    friend bool operator==(const metrics_report&, const metrics_report&) = default;
};

/// Rates and speed statistics for one cell. Comparisons are normalized by
/// the gallery size, rotations by the cost of a full scan over the
/// effective range (gallery_size * full_scan_shifts).
inline metrics_report aggregate_metrics(std::span<const outcome_record> records, std::size_t gallery_size,
                                        std::size_t full_scan_shifts) {
    if (records.empty())
        throw error(errc::empty_input, "aggregate_metrics: no transactions");
    if (gallery_size == 0 || full_scan_shifts == 0)
        throw error(errc::invalid_argument, "aggregate_metrics: zero gallery size or shift count");
    metrics_report m;
    unsigned __int128 sum_sq = 0;
    std::uint64_t sum_pairs = 0;
    std::uint64_t sum_rot = 0;
    for (const auto& r : records) {
        switch (r.category) {
        case outcome::ti: ++m.n_ti; break;
        case outcome::efpi: ++m.n_efpi; break;
        case outcome::fni: ++m.n_fni; break;
        case outcome::fpi: ++m.n_fpi; break;
        case outcome::tni: ++m.n_tni; break;
        }
        sum_pairs += r.pairs_examined;
        sum_sq += static_cast<unsigned __int128>(r.pairs_examined) * r.pairs_examined;
        sum_rot += r.rotations_evaluated;
        if (r.reached_wide)
            ++m.n_stage_wide;
    }
    m.n_enrolled_probes = m.n_ti + m.n_efpi + m.n_fni;
    m.n_unenrolled_probes = m.n_fpi + m.n_tni;
    const auto rate = [](std::size_t k, std::size_t n) -> std::optional<double> {
        if (n == 0)
            return std::nullopt;
        return static_cast<double>(k) / static_cast<double>(n);
    };
    m.tpir = rate(m.n_ti, m.n_enrolled_probes);
    m.fnir = rate(m.n_fni, m.n_enrolled_probes);
    m.e_fpir = rate(m.n_efpi, m.n_enrolled_probes);
    m.fpir = rate(m.n_fpi, m.n_unenrolled_probes);
    m.tnir = rate(m.n_tni, m.n_unenrolled_probes);
    const std::size_t n = records.size();
    m.e_fpir_all = static_cast<double>(m.n_efpi) / static_cast<double>(n);
    m.fpir_all = static_cast<double>(m.n_fpi) / static_cast<double>(n);

    const double scale = static_cast<double>(n) * static_cast<double>(gallery_size);
    m.mean_normalized_comparisons = static_cast<double>(sum_pairs) / scale;
    // n * sum(p^2) - (sum p)^2 in exact integer arithmetic, so identical
    // scans give exactly zero spread.
    const unsigned __int128 spread =
        static_cast<unsigned __int128>(n) * sum_sq - static_cast<unsigned __int128>(sum_pairs) * sum_pairs;
    m.std_normalized_comparisons = std::sqrt(static_cast<double>(spread)) / scale;
    m.mean_normalized_rotations =
        static_cast<double>(sum_rot) / (scale * static_cast<double>(full_scan_shifts));
    return m;
}

struct metric_spread {
    std::string metric;
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation (n - 1)
    double sem = 0.0;    // stddev / sqrt(n)
};

/// Mean, standard deviation and standard error of each rate metric across
/// permutations of one cell. Metrics that are NA in any report are skipped.
inline std::vector<metric_spread> permutation_spread(std::span<const metrics_report> reports) {
    if (reports.size() < 2)
        throw error(errc::insufficient_data, "permutation_spread needs at least 2 reports, got " +
                                                 std::to_string(reports.size()));
    using getter = std::optional<double> (*)(const metrics_report&);
    static constexpr std::pair<std::string_view, getter> metrics[] = {
        {"tpir", [](const metrics_report& m) { return m.tpir; }},
        {"fnir", [](const metrics_report& m) { return m.fnir; }},
        {"e_fpir", [](const metrics_report& m) { return m.e_fpir; }},
        {"fpir", [](const metrics_report& m) { return m.fpir; }},
        {"tnir", [](const metrics_report& m) { return m.tnir; }},
        {"e_fpir_all", [](const metrics_report& m) { return std::optional<double>(m.e_fpir_all); }},
        {"fpir_all", [](const metrics_report& m) { return std::optional<double>(m.fpir_all); }},
        {"mean_normalized_comparisons",
         [](const metrics_report& m) { return std::optional<double>(m.mean_normalized_comparisons); }},
    };
    std::vector<metric_spread> out;
    for (const auto& [name, get] : metrics) {
        std::vector<double> xs;
        for (const auto& r : reports) {
            const auto v = get(r);
            if (!v)
                break;
            xs.push_back(*v);
        }
        if (xs.size() != reports.size())
            continue;
        // Shifted sums: all-equal inputs give exactly zero deviation.
        const double shift = xs.front();
        double s = 0.0, s2 = 0.0;
        for (double x : xs) {
            s += x - shift;
            s2 += (x - shift) * (x - shift);
        }
        const double n = static_cast<double>(xs.size());
        const double var = std::max(0.0, (s2 - s * s / n) / (n - 1.0));
        metric_spread ms{std::string(name), xs.size(), shift + s / n, std::sqrt(var), 0.0};
        ms.sem = ms.stddev / std::sqrt(n);
        out.push_back(ms);
    }
    return out;
}

} // namespace isb

#endif
