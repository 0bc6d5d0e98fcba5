#ifndef ISB_CALIBRATION_HPP
#define ISB_CALIBRATION_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "isb/error.hpp"
#include "isb/matcher.hpp"
#include "isb/parallel.hpp"
#include "isb/scenario.hpp"
#include "isb/score.hpp"

namespace isb {

struct score_list {
    polarity pol = polarity::dissimilarity;
    std::vector<double> values;
};

/// Best-of-rotations scores over the policy's effective range for every
/// probe/reference pair of different subjects. Pairs with no overlap at any
/// shift can never match and contribute nothing.
template <matcher M = hamming_matcher>
score_list collect_impostor_scores(const gallery& g, const probe_set& probes, const rotation_policy& policy,
                                   unsigned jobs = 1) {
    if (g.empty() || probes.probes.empty())
        throw error(errc::empty_input, "impostor scores need a nonempty gallery and probe set");
    const shift_range& r = policy.effective();
    const std::vector<int> order = r.search_order();
    std::vector<std::vector<double>> per_probe(probes.size());
    parallel_for(probes.size(), jobs, [&](std::size_t i) {
        const probe& p = probes.probes[i];
        const rotated_probe rp(p.sample, r);
        std::vector<pair_counts> buf(r.size());
        for (const auto& e : g.entries()) {
            if (e.subject_id == p.subject_id)
                continue;
            check_compatible(p.sample, e.reference);
            rp.counts_over(e.reference, r, buf);
            if (auto best = select_best<M>(buf, r.lo, order))
                per_probe[i].push_back(best->value.value());
        }
    });
    score_list out{M::pol, {}};
    for (auto& v : per_probe)
        out.values.insert(out.values.end(), v.begin(), v.end());
    return out;
}

/// Scores ordered best-first under their polarity.
inline std::vector<double> sorted_best_first(const score_list& scores) {
    std::vector<double> v = scores.values;
    if (scores.pol == polarity::dissimilarity)
        std::sort(v.begin(), v.end());
    else
        std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

/// Threshold from scores already sorted best-first: the most lenient
/// observed score whose admitted count (ties included) stays within
/// target * n. If no score can be admitted the perfect-match sentinel is
/// returned and the threshold is flagged unattainable.
inline threshold threshold_from_sorted(std::span<const double> sorted, polarity pol, accuracy_target target) {
    if (sorted.empty())
        throw error(errc::empty_input, "threshold selection over an empty score list");
    const std::size_t n = sorted.size();
    const double dn = static_cast<double>(n);
    auto allowed = static_cast<std::size_t>(std::floor(target.fraction() * dn));
    while (allowed > 0 && static_cast<double>(allowed) / dn > target.fraction())
        --allowed;
    allowed = std::min(allowed, n);

    threshold t;
    t.pol = pol;
    t.target = target.fraction();
    for (std::size_t k = allowed; k >= 1; --k) {
        if (k == n || sorted[k] != sorted[k - 1]) {
            t.value = sorted[k - 1];
            t.achieved_fraction = static_cast<double>(k) / dn;
            return t;
        }
    }
    t.attainable = false;
    t.achieved_fraction = 0.0;
    if (pol == polarity::dissimilarity)
        t.value = sorted.front() > 0.0 ? 0.0 : std::nextafter(0.0, -1.0);
    else
        t.value = std::nextafter(sorted.front(), std::numeric_limits<double>::infinity());
    return t;
}

inline threshold threshold_for_target(const score_list& scores, accuracy_target target) {
    const auto sorted = sorted_best_first(scores);
    return threshold_from_sorted(sorted, scores.pol, target);
}

inline std::vector<threshold> thresholds_for_targets(const score_list& scores,
                                                     std::span<const accuracy_target> targets) {
    const auto sorted = sorted_best_first(scores);
    std::vector<threshold> out;
    out.reserve(targets.size());
    for (const auto& t : targets)
        out.push_back(threshold_from_sorted(sorted, scores.pol, t));
    return out;
}

} // namespace isb

#endif
