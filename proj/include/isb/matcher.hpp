#ifndef ISB_MATCHER_HPP
#define ISB_MATCHER_HPP

#include <algorithm>
#include <bit>
#include <charconv>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isb/error.hpp"
#include "isb/score.hpp"
#include "isb/template.hpp"

namespace isb {

/// Disagreeing and jointly valid bit counts of one aligned comparison.
struct pair_counts {
    std::uint32_t differing = 0;
    std::uint32_t valid = 0;
    friend bool operator==(const pair_counts&, const pair_counts&) = default;
};

/// A matcher turns aligned bit counts into a score of fixed polarity.
template <class M>
concept matcher = requires(pair_counts c) {
    { M::pol } -> std::convertible_to<polarity>;
    { M::value(c) } -> std::convertible_to<double>;
};

/// Fractional Hamming distance, the Daugman-style dissimilarity.
struct hamming_matcher {
    static constexpr polarity pol = polarity::dissimilarity;
    static constexpr std::string_view name = "hamming";
    static double value(pair_counts c) noexcept { return static_cast<double>(c.differing) / c.valid; }
};

/// Similarity analog: agreeing minus disagreeing valid bits, floored at 0.
/// Grows with both agreement and overlap, like commercial similarity scales.
struct agreement_matcher {
    static constexpr polarity pol = polarity::similarity;
    static constexpr std::string_view name = "agreement";
    static double value(pair_counts c) noexcept {
        const long long v = static_cast<long long>(c.valid) - 2LL * c.differing;
        return v > 0 ? static_cast<double>(v) : 0.0;
    }
};

template <matcher M>
bool better_value(double a, double b) noexcept {
    return M::pol == polarity::dissimilarity ? a < b : a > b;
}

inline void check_compatible(const iris_template& a, const iris_template& b) {
    if (!(a.geom() == b.geom()))
        throw error(errc::incompatible_templates,
                    "geometry mismatch: " + a.geom().to_string() + " vs " + b.geom().to_string());
}

inline pair_counts masked_counts(std::span<const std::uint64_t> code_a, std::span<const std::uint64_t> mask_a,
                                 std::span<const std::uint64_t> code_b, std::span<const std::uint64_t> mask_b) noexcept {
    std::uint32_t diff = 0, valid = 0;
    for (std::size_t i = 0; i < code_a.size(); ++i) {
        const std::uint64_t m = mask_a[i] & mask_b[i];
        valid += static_cast<std::uint32_t>(std::popcount(m));
        diff += static_cast<std::uint32_t>(std::popcount((code_a[i] ^ code_b[i]) & m));
    }
    return {diff, valid};
}

inline pair_counts aligned_counts(const iris_template& a, const iris_template& b) {
    check_compatible(a, b);
    return masked_counts(a.code().words(), a.mask().words(), b.code().words(), b.mask().words());
}

/// popcount((A xor B) & maskA & maskB) / popcount(maskA & maskB).
inline score fractional_hamming(const iris_template& a, const iris_template& b) {
    const pair_counts c = aligned_counts(a, b);
    if (c.valid == 0)
        throw error(errc::no_overlap, "templates share no valid bits");
    return score(hamming_matcher::value(c), polarity::dissimilarity);
}

/// Inclusive interval of column shifts.
struct shift_range {
    int lo = 0;
    int hi = 0;

    static shift_range symmetric(int k) { return {-k, k}; }

    std::size_t size() const noexcept { return lo > hi ? 0 : static_cast<std::size_t>(hi - lo + 1); }
    bool contains(int s) const noexcept { return s >= lo && s <= hi; }
    bool contains(const shift_range& r) const noexcept { return r.lo >= lo && r.hi <= hi; }
    int extent() const noexcept { return std::max(std::abs(lo), std::abs(hi)); }

    /// Evaluation order that realizes the tie-break: smallest |shift| first,
    /// negative before positive.
    std::vector<int> search_order() const {
        std::vector<int> order;
        order.reserve(size());
        for (int s = lo; s <= hi; ++s)
            order.push_back(s);
        std::sort(order.begin(), order.end(), [](int a, int b) {
            return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
        });
        return order;
    }

    friend bool operator==(const shift_range&, const shift_range&) = default;
};

struct rotation_match {
    score value;
    int shift;
    pair_counts counts;
};

/// Picks the best score over `order` from per-shift counts, where
/// counts[s - first_shift] belongs to shift s. Shifts without overlap are
/// skipped; returns nullopt if none overlaps.
template <matcher M>
std::optional<rotation_match> select_best(std::span<const pair_counts> counts, int first_shift,
                                          std::span<const int> order) {
    std::optional<rotation_match> best;
    double best_value = 0.0;
    for (int s : order) {
        const pair_counts c = counts[static_cast<std::size_t>(s - first_shift)];
        if (c.valid == 0)
            continue;
        const double v = M::value(c);
        if (!best || better_value<M>(v, best_value)) {
            best_value = v;
            best = rotation_match{score(v, M::pol), s, c};
        }
    }
    return best;
}

/// A probe pre-rotated over a span of shifts, so that comparing it against
/// many references costs no further rotation. counts(s, ref) equals the
/// counts of (probe, rotate_template(ref, s)).
class rotated_probe {
public:
    rotated_probe(const iris_template& probe, shift_range span)
        : geom_(probe.geom()), span_(span), words_(bit_vector::word_count(probe.geom().total_bits())) {
        if (span.size() == 0)
            throw error(errc::invalid_argument, "empty shift range");
        check_shift(geom_, span.lo);
        check_shift(geom_, span.hi);
        planes_.reserve(span.size() * 2 * words_);
        for (int s = span.lo; s <= span.hi; ++s) {
            // Rotating the reference by s pairs the same bits as rotating the
            // probe by -s.
            const bit_vector c = rotate_plane(probe.code(), geom_, -s);
            const bit_vector m = rotate_plane(probe.mask(), geom_, -s);
            planes_.insert(planes_.end(), c.words().begin(), c.words().end());
            planes_.insert(planes_.end(), m.words().begin(), m.words().end());
        }
    }

    const geometry& geom() const noexcept { return geom_; }
    const shift_range& span() const noexcept { return span_; }

    pair_counts counts(int shift, const iris_template& ref) const {
        const std::size_t j = static_cast<std::size_t>(shift - span_.lo) * 2 * words_;
        const std::span<const std::uint64_t> p(planes_);
        return masked_counts(p.subspan(j, words_), p.subspan(j + words_, words_), ref.code().words(),
                             ref.mask().words());
    }

    /// Fills out[s - span.lo] for every s in `r` (r must lie inside span).
    void counts_over(const iris_template& ref, shift_range r, std::span<pair_counts> out) const {
        for (int s = r.lo; s <= r.hi; ++s)
            out[static_cast<std::size_t>(s - span_.lo)] = counts(s, ref);
    }

    template <matcher M = hamming_matcher>
    std::optional<rotation_match> best(const iris_template& ref, shift_range r) const {
        check_compatible_geom(ref);
        if (!span_.contains(r))
            throw error(errc::invalid_argument, "shift range outside the pre-rotated span");
        std::vector<pair_counts> buf(span_.size());
        counts_over(ref, r, buf);
        const std::vector<int> order = r.search_order();
        return select_best<M>(buf, span_.lo, order);
    }

private:
    void check_compatible_geom(const iris_template& ref) const {
        if (!(ref.geom() == geom_))
            throw error(errc::incompatible_templates,
                        "geometry mismatch: " + geom_.to_string() + " vs " + ref.geom().to_string());
    }

    geometry geom_;
    shift_range span_;
    std::size_t words_;
    std::vector<std::uint64_t> planes_;
};

/// Best score of `a` against `b` rotated by every shift in `r`. Ties go to
/// the smallest |shift|, then to the negative shift.
template <matcher M = hamming_matcher>
rotation_match best_of_rotations(const iris_template& a, const iris_template& b, shift_range r) {
    check_compatible(a, b);
    if (r.size() == 0)
        throw error(errc::invalid_argument, "empty shift range");
    auto best = rotated_probe(a, r).template best<M>(b, r);
    if (!best)
        throw error(errc::no_overlap, "no shift in range gives a nonzero joint mask");
    return *best;
}

enum class range_kind { narrow, wide };

/// Narrow range for the first scan; wide range for a second scan that only
/// runs when two_stage is set and the first scan found nothing.
class rotation_policy {
public:
    static rotation_policy single(int k) { return rotation_policy(k, k, false); }
    static rotation_policy two_stage(int narrow_k, int wide_k) { return rotation_policy(narrow_k, wide_k, true); }

    const shift_range& narrow() const noexcept { return narrow_; }
    const shift_range& wide() const noexcept { return wide_; }
    bool is_two_stage() const noexcept { return two_stage_; }

    /// The range exhaustive search uses, and the widest one ever applied.
    const shift_range& effective() const noexcept { return two_stage_ ? wide_ : narrow_; }
    const shift_range& range(range_kind k) const noexcept { return k == range_kind::narrow ? narrow_ : wide_; }

    std::string name() const {
        if (!two_stage_)
            return "single_" + std::to_string(narrow_.hi);
        return "two_stage_" + std::to_string(narrow_.hi) + "_" + std::to_string(wide_.hi);
    }

    /// Accepts "single_<k>" and "two_stage_<k1>_<k2>".
    static rotation_policy parse(std::string_view s) {
        auto number = [&](std::string_view t) {
            int v = 0;
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || p != t.data() + t.size())
                throw error(errc::config, "bad rotation policy '" + std::string(s) + "'");
            return v;
        };
        if (s.starts_with("single_"))
            return single(number(s.substr(7)));
        if (s.starts_with("two_stage_")) {
            const std::string_view rest = s.substr(10);
            const auto us = rest.find('_');
            if (us == std::string_view::npos)
                throw error(errc::config, "bad rotation policy '" + std::string(s) + "'");
            return two_stage(number(rest.substr(0, us)), number(rest.substr(us + 1)));
        }
        throw error(errc::config, "bad rotation policy '" + std::string(s) + "'");
    }

    friend bool operator==(const rotation_policy&, const rotation_policy&) = default;

private:
    rotation_policy(int narrow_k, int wide_k, bool two)
        : narrow_(shift_range::symmetric(narrow_k)), wide_(shift_range::symmetric(wide_k)), two_stage_(two) {
        if (narrow_k < 0 || wide_k < narrow_k)
            throw error(errc::invalid_argument, "rotation policy needs 0 <= narrow <= wide");
    }

    shift_range narrow_;
    shift_range wide_;
    bool two_stage_;
};

} // namespace isb

#endif
