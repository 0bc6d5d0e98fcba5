#ifndef ISB_SEARCH_HPP
#define ISB_SEARCH_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isb/error.hpp"
#include "isb/matcher.hpp"
#include "isb/scenario.hpp"
#include "isb/score.hpp"

namespace isb {

enum class stage { narrow, wide, single };

inline std::string_view to_string(stage s) {
    switch (s) {
    case stage::narrow: return "narrow";
    case stage::wide: return "wide";
    case stage::single: return "single";
    }
    return "?";
}

inline stage parse_stage(std::string_view s) {
    if (s == "narrow")
        return stage::narrow;
    if (s == "wide")
        return stage::wide;
    if (s == "single")
        return stage::single;
    throw error(errc::format, "unknown stage '" + std::string(s) + "'");
}

enum class strategy { one_to_n, one_to_first };

inline std::string_view to_string(strategy s) { return s == strategy::one_to_n ? "one_to_n" : "one_to_first"; }

inline strategy parse_strategy(std::string_view s) {
    if (s == "one_to_n")
        return strategy::one_to_n;
    if (s == "one_to_first")
        return strategy::one_to_first;
    throw error(errc::config, "unknown strategy '" + std::string(s) + "'");
}

/// Outcome of scanning one probe against an ordered gallery, without
/// identities attached. Pairs are counted per range actually used.
struct scan_result {
    std::optional<std::size_t> index;
    std::optional<score> value;
    std::size_t narrow_pairs = 0;
    std::size_t wide_pairs = 0;
    stage reached = stage::single;

    std::size_t pairs() const noexcept { return narrow_pairs + wide_pairs; }
    bool matched() const noexcept { return index.has_value(); }
};

// Both scans take `score_at(index, range_kind) -> std::optional<score>`;
// nullopt marks a pair with no overlap at any shift, which never matches.

/// Exhaustive scan. Under a two-stage policy this is one pass over the wide
/// range. Ties on the best score go to the lowest gallery index.
template <class ScoreAt>
scan_result scan_one_to_n(std::size_t n, ScoreAt&& score_at, const threshold& t, const rotation_policy& policy) {
    if (n == 0)
        throw error(errc::empty_gallery, "search over an empty gallery");
    const range_kind kind = policy.is_two_stage() ? range_kind::wide : range_kind::narrow;
    scan_result r;
    std::optional<score> best;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::optional<score> s = score_at(i, kind);
        if (s && (!best || s->better_than(*best))) {
            best = s;
            best_index = i;
        }
    }
    (policy.is_two_stage() ? r.wide_pairs : r.narrow_pairs) = n;
    r.reached = policy.is_two_stage() ? stage::wide : stage::single;
    if (best && meets_threshold(*best, t)) {
        r.index = best_index;
        r.value = best;
    }
    return r;
}

/// In-order scan that stops at the first entry meeting the threshold. A
/// two-stage policy rescans the whole gallery over the wide range when the
/// narrow pass finds nothing.
template <class ScoreAt>
scan_result scan_one_to_first(std::size_t n, ScoreAt&& score_at, const threshold& t, const rotation_policy& policy) {
    if (n == 0)
        throw error(errc::empty_gallery, "search over an empty gallery");
    scan_result r;
    r.reached = policy.is_two_stage() ? stage::narrow : stage::single;
    for (std::size_t i = 0; i < n; ++i) {
        const std::optional<score> s = score_at(i, range_kind::narrow);
        if (s && meets_threshold(*s, t)) {
            r.index = i;
            r.value = s;
            r.narrow_pairs = i + 1;
            return r;
        }
    }
    r.narrow_pairs = n;
    if (!policy.is_two_stage())
        return r;
    r.reached = stage::wide;
    for (std::size_t i = 0; i < n; ++i) {
        const std::optional<score> s = score_at(i, range_kind::wide);
        if (s && meets_threshold(*s, t)) {
            r.index = i;
            r.value = s;
            r.wide_pairs = i + 1;
            return r;
        }
    }
    r.wide_pairs = n;
    return r;
}

template <class ScoreAt>
scan_result scan(strategy which, std::size_t n, ScoreAt&& score_at, const threshold& t,
                 const rotation_policy& policy) {
    return which == strategy::one_to_n ? scan_one_to_n(n, score_at, t, policy)
                                       : scan_one_to_first(n, score_at, t, policy);
}

/// scan_one_to_n for several thresholds in one pass: element k equals
/// scan_one_to_n(n, score_at, thresholds[k], policy).
template <class ScoreAt>
std::vector<scan_result> scan_one_to_n_multi(std::size_t n, ScoreAt&& score_at, std::span<const threshold> thresholds,
                                             const rotation_policy& policy) {
    if (n == 0)
        throw error(errc::empty_gallery, "search over an empty gallery");
    const range_kind kind = policy.is_two_stage() ? range_kind::wide : range_kind::narrow;
    std::optional<score> best;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::optional<score> s = score_at(i, kind);
        if (s && (!best || s->better_than(*best))) {
            best = s;
            best_index = i;
        }
    }
    std::vector<scan_result> out(thresholds.size());
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        scan_result& r = out[k];
        (policy.is_two_stage() ? r.wide_pairs : r.narrow_pairs) = n;
        r.reached = policy.is_two_stage() ? stage::wide : stage::single;
        if (best && meets_threshold(*best, thresholds[k])) {
            r.index = best_index;
            r.value = best;
        }
    }
    return out;
}

/// scan_one_to_first for several thresholds in one pass: element k equals
/// scan_one_to_first(n, score_at, thresholds[k], policy). The pass ends once
/// every threshold has found its first qualifying entry.
template <class ScoreAt>
std::vector<scan_result> scan_one_to_first_multi(std::size_t n, ScoreAt&& score_at,
                                                 std::span<const threshold> thresholds,
                                                 const rotation_policy& policy) {
    if (n == 0)
        throw error(errc::empty_gallery, "search over an empty gallery");
    std::vector<scan_result> out(thresholds.size());
    std::vector<std::size_t> pending(thresholds.size());
    for (std::size_t k = 0; k < pending.size(); ++k) {
        pending[k] = k;
        out[k].reached = policy.is_two_stage() ? stage::narrow : stage::single;
    }
    const auto pass = [&](range_kind kind) {
        for (std::size_t i = 0; i < n && !pending.empty(); ++i) {
            const std::optional<score> s = score_at(i, kind);
            if (!s)
                continue;
            std::erase_if(pending, [&](std::size_t k) {
                if (!meets_threshold(*s, thresholds[k]))
                    return false;
                out[k].index = i;
                out[k].value = s;
                (kind == range_kind::narrow ? out[k].narrow_pairs : out[k].wide_pairs) = i + 1;
                return true;
            });
        }
        for (std::size_t k : pending)
            (kind == range_kind::narrow ? out[k].narrow_pairs : out[k].wide_pairs) = n;
    };
    pass(range_kind::narrow);
    if (policy.is_two_stage() && !pending.empty()) {
        for (std::size_t k : pending)
            out[k].reached = stage::wide;
        pass(range_kind::wide);
    }
    return out;
}

struct identification {
    std::string subject_id;
    score value;
    std::size_t gallery_index;
};

/// One identification attempt.
struct transaction {
    std::string probe_subject;
    std::optional<identification> match;
    std::size_t pairs_examined = 0;
    std::size_t narrow_pairs = 0;
    std::size_t wide_pairs = 0;
    std::size_t narrow_shifts = 0;
    std::size_t wide_shifts = 0;
    std::uint64_t rotations_evaluated = 0;
    stage stage_reached = stage::single;
};

/// Shift evaluations performed: each examined pair costs the size of the
/// range it was scored over.
inline std::uint64_t count_rotations(const transaction& tx) {
    return std::uint64_t{tx.narrow_pairs} * tx.narrow_shifts + std::uint64_t{tx.wide_pairs} * tx.wide_shifts;
}

inline transaction make_transaction(std::string probe_subject, const scan_result& r, const rotation_policy& policy,
                                    const gallery& g) {
    transaction tx;
    tx.probe_subject = std::move(probe_subject);
    if (r.index)
        tx.match = identification{g[*r.index].subject_id, *r.value, *r.index};
    tx.pairs_examined = r.pairs();
    tx.narrow_pairs = r.narrow_pairs;
    tx.wide_pairs = r.wide_pairs;
    tx.narrow_shifts = policy.narrow().size();
    tx.wide_shifts = policy.wide().size();
    tx.rotations_evaluated = count_rotations(tx);
    tx.stage_reached = r.reached;
    return tx;
}

/// Scores gallery entries against one probe by direct template comparison.
template <matcher M>
class direct_scorer {
public:
    direct_scorer(const iris_template& probe, const gallery& g, const rotation_policy& policy)
        : g_(g), policy_(policy), rotated_(probe, policy.effective()),
          narrow_order_(policy.narrow().search_order()), wide_order_(policy.wide().search_order()),
          buffer_(policy.effective().size()) {
        for (const auto& e : g.entries())
            check_compatible(probe, e.reference);
    }

    std::optional<score> operator()(std::size_t i, range_kind kind) {
        const shift_range& r = policy_.range(kind);
        rotated_.counts_over(g_[i].reference, r, buffer_);
        const auto best = select_best<M>(buffer_, rotated_.span().lo,
                                         kind == range_kind::narrow ? narrow_order_ : wide_order_);
        return best ? std::optional<score>(best->value) : std::nullopt;
    }

private:
    const gallery& g_;
    const rotation_policy& policy_;
    rotated_probe rotated_;
    std::vector<int> narrow_order_, wide_order_;
    std::vector<pair_counts> buffer_;
};

namespace detail {

template <matcher M>
transaction search(strategy which, const probe& p, const gallery& g, const threshold& t,
                   const rotation_policy& policy) {
    if (g.empty())
        throw error(errc::empty_gallery, "search over an empty gallery");
    if (t.pol != M::pol)
        throw error(errc::polarity_mismatch, "threshold polarity does not match the matcher");
    direct_scorer<M> scorer(p.sample, g, policy);
    return make_transaction(p.subject_id, scan(which, g.size(), scorer, t, policy), policy, g);
}

} // namespace detail

template <matcher M = hamming_matcher>
transaction search_one_to_n(const probe& p, const gallery& g, const threshold& t, const rotation_policy& policy) {
    return detail::search<M>(strategy::one_to_n, p, g, t, policy);
}

template <matcher M = hamming_matcher>
transaction search_one_to_first(const probe& p, const gallery& g, const threshold& t,
                                const rotation_policy& policy) {
    return detail::search<M>(strategy::one_to_first, p, g, t, policy);
}

} // namespace isb

#endif
