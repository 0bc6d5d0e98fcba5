// Naive per-bit reference implementations used as test oracles. They share
// no code with the library beyond the public types they convert to.
#ifndef ISB_TESTS_ORACLE_HPP
#define ISB_TESTS_ORACLE_HPP

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <vector>

#include "isb/template.hpp"

namespace oracle {

struct plain_template {
    int rows = 1, cols = 1, bpc = 1;
    std::vector<int> code, mask; // one int per bit, row-major then cell bits

    int at(const std::vector<int>& v, int r, int c, int b) const { return v[(r * cols + c) * bpc + b]; }
};

inline isb::iris_template to_template(const plain_template& t) {
    isb::geometry g{static_cast<std::uint16_t>(t.rows), static_cast<std::uint16_t>(t.cols),
                    static_cast<std::uint8_t>(t.bpc)};
    isb::bit_vector code(t.code.size()), mask(t.mask.size());
    for (std::size_t i = 0; i < t.code.size(); ++i) {
        code.set(i, t.code[i] != 0);
        mask.set(i, t.mask[i] != 0);
    }
    return isb::iris_template(g, code, mask);
}

inline plain_template from_template(const isb::iris_template& t) {
    plain_template p{t.geom().rows, t.geom().cols, t.geom().bits_per_cell, {}, {}};
    for (std::size_t i = 0; i < t.geom().total_bits(); ++i) {
        p.code.push_back(t.code().test(i) ? 1 : 0);
        p.mask.push_back(t.mask().test(i) ? 1 : 0);
    }
    return p;
}

template <class Rng>
plain_template random_template(Rng& rng, int rows, int cols, int bpc, double mask_keep = 0.8) {
    std::bernoulli_distribution coin(0.5), keep(mask_keep);
    plain_template t{rows, cols, bpc, {}, {}};
    const int n = rows * cols * bpc;
    bool any = false;
    for (int i = 0; i < n; ++i) {
        t.code.push_back(coin(rng) ? 1 : 0);
        t.mask.push_back(keep(rng) ? 1 : 0);
        any = any || t.mask.back();
    }
    if (!any)
        t.mask[0] = 1;
    return t;
}

/// Cell at column c moves to column (c + shift) mod cols.
inline plain_template rotate(const plain_template& t, int shift) {
    plain_template out = t;
    for (int r = 0; r < t.rows; ++r)
        for (int c = 0; c < t.cols; ++c) {
            const int d = ((c + shift) % t.cols + t.cols) % t.cols;
            for (int b = 0; b < t.bpc; ++b) {
                out.code[(r * t.cols + d) * t.bpc + b] = t.at(t.code, r, c, b);
                out.mask[(r * t.cols + d) * t.bpc + b] = t.at(t.mask, r, c, b);
            }
        }
    return out;
}

struct counts {
    long differing = 0, valid = 0;
};

inline counts count(const plain_template& a, const plain_template& b) {
    counts k;
    for (std::size_t i = 0; i < a.code.size(); ++i)
        if (a.mask[i] && b.mask[i]) {
            ++k.valid;
            if (a.code[i] != b.code[i])
                ++k.differing;
        }
    return k;
}

inline double hamming(counts k) { return static_cast<double>(k.differing) / static_cast<double>(k.valid); }
inline double agreement(counts k) { return std::max(0L, k.valid - 2 * k.differing); }

struct best_result {
    double value = 0.0;
    int shift = 0;
};

/// Enumerates every shift of b, then picks the winner with an explicit
/// ordering: better value, then smaller |shift|, then the negative shift.
inline std::optional<best_result> best(const plain_template& a, const plain_template& b, int lo, int hi,
                                       bool similarity = false) {
    std::optional<best_result> win;
    for (int s = lo; s <= hi; ++s) {
        const counts k = count(a, rotate(b, s));
        if (k.valid == 0)
            continue;
        const double v = similarity ? agreement(k) : hamming(k);
        if (!win) {
            win = best_result{v, s};
            continue;
        }
        const bool better = similarity ? v > win->value : v < win->value;
        const bool same = v == win->value;
        const bool closer = std::abs(s) < std::abs(win->shift) || (std::abs(s) == std::abs(win->shift) && s < win->shift);
        if (better || (same && closer))
            win = best_result{v, s};
    }
    return win;
}

struct search_result {
    std::optional<std::size_t> index;
    double value = 0.0;
    std::size_t narrow_pairs = 0, wide_pairs = 0;
};

inline bool meets(double v, double t, bool similarity) { return similarity ? v >= t : v <= t; }

/// Exhaustive: every entry scored over the widest range in use.
inline search_result one_to_n(const plain_template& probe, const std::vector<plain_template>& g, double t,
                              int narrow_k, int wide_k, bool two_stage, bool similarity = false) {
    const int k = two_stage ? wide_k : narrow_k;
    search_result r;
    std::optional<double> best_v;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto s = best(probe, g[i], -k, k, similarity);
        if (s && (!best_v || (similarity ? s->value > *best_v : s->value < *best_v))) {
            best_v = s->value;
            best_i = i;
        }
    }
    if (two_stage)
        r.wide_pairs = g.size();
    else
        r.narrow_pairs = g.size();
    if (best_v && meets(*best_v, t, similarity)) {
        r.index = best_i;
        r.value = *best_v;
    }
    return r;
}

/// Ordered scan, stopping at the first entry that meets t; a second full
/// pass over the wide range only for two-stage policies.
inline search_result one_to_first(const plain_template& probe, const std::vector<plain_template>& g, double t,
                                  int narrow_k, int wide_k, bool two_stage, bool similarity = false) {
    search_result r;
    for (std::size_t i = 0; i < g.size(); ++i) {
        ++r.narrow_pairs;
        const auto s = best(probe, g[i], -narrow_k, narrow_k, similarity);
        if (s && meets(s->value, t, similarity)) {
            r.index = i;
            r.value = s->value;
            return r;
        }
    }
    if (!two_stage)
        return r;
    for (std::size_t i = 0; i < g.size(); ++i) {
        ++r.wide_pairs;
        const auto s = best(probe, g[i], -wide_k, wide_k, similarity);
        if (s && meets(s->value, t, similarity)) {
            r.index = i;
            r.value = s->value;
            return r;
        }
    }
    return r;
}

/// Most lenient observed value whose meet-count fraction stays within
/// target, found by trying every candidate and counting.
inline std::optional<double> lenient_threshold(const std::vector<double>& scores, double target, bool similarity = false) {
    std::optional<double> out;
    for (double c : scores) {
        std::size_t hits = 0;
        for (double v : scores)
            hits += meets(v, c, similarity) ? 1 : 0;
        if (static_cast<double>(hits) / static_cast<double>(scores.size()) <= target &&
            (!out || (similarity ? c < *out : c > *out)))
            out = c;
    }
    return out;
}

} // namespace oracle

#endif
