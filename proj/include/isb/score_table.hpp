#ifndef ISB_SCORE_TABLE_HPP
#define ISB_SCORE_TABLE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "isb/error.hpp"
#include "isb/matcher.hpp"
#include "isb/parallel.hpp"
#include "isb/scenario.hpp"
#include "isb/synth.hpp"

namespace isb {

/// Best-of-rotations results for every (non-enrollment sample, enrollment
/// reference) pair of a population, for a fixed set of shift ranges.
///
/// Pair scores do not depend on gallery order, threshold or strategy, so a
/// sweep computes each pair once and every scan afterwards is a lookup.
/// Entries hold the counts of the winning shift, which reproduce the exact
/// score the direct comparison would give.
template <matcher M>
class score_table {
public:
    score_table(const population& pool, std::vector<shift_range> ranges, unsigned jobs = 1)
        : ranges_(std::move(ranges)), cols_(pool.subjects.size()) {
        if (ranges_.empty())
            throw error(errc::invalid_argument, "score table needs at least one shift range");
        if (pool.geom.total_bits() > std::numeric_limits<std::uint16_t>::max())
            throw error(errc::invalid_argument, "score table supports templates of at most 65535 bits");
        span_ = ranges_.front();
        for (const auto& r : ranges_)
            span_ = {std::min(span_.lo, r.lo), std::max(span_.hi, r.hi)};

        row_offset_.reserve(cols_ + 1);
        std::size_t rows = 0;
        for (const auto& s : pool.subjects) {
            row_offset_.push_back(rows);
            rows += s.samples.size() > 0 ? s.samples.size() - 1 : 0;
        }
        row_offset_.push_back(rows);
        cells_.assign(rows * cols_ * ranges_.size(), {});

        std::vector<std::vector<int>> orders;
        for (const auto& r : ranges_)
            orders.push_back(r.search_order());
        std::vector<sample_ref> row_refs;
        row_refs.reserve(rows);
        for (std::uint32_t s = 0; s < pool.subjects.size(); ++s)
            for (std::uint32_t j = 1; j < pool.subjects[s].samples.size(); ++j)
                row_refs.push_back({s, j});

        parallel_for(rows, jobs, [&](std::size_t row) {
            const sample_ref ref = row_refs[row];
            const rotated_probe rp(pool.subjects[ref.subject].samples[ref.sample], span_);
            std::vector<pair_counts> buf(span_.size());
            cell* out = &cells_[row * cols_ * ranges_.size()];
            for (std::size_t col = 0; col < cols_; ++col) {
                rp.counts_over(pool.subjects[col].samples.front(), span_, buf);
                for (std::size_t k = 0; k < ranges_.size(); ++k, ++out) {
                    const auto best = select_best<M>(buf, span_.lo, orders[k]);
                    if (best)
                        *out = {static_cast<std::uint16_t>(best->counts.differing),
                                static_cast<std::uint16_t>(best->counts.valid)};
                }
            }
        }, 8);
    }

    const std::vector<shift_range>& ranges() const noexcept { return ranges_; }

    std::size_t range_index(const shift_range& r) const {
        const auto it = std::find(ranges_.begin(), ranges_.end(), r);
        if (it == ranges_.end())
            throw error(errc::invalid_argument, "shift range not present in score table");
        return static_cast<std::size_t>(it - ranges_.begin());
    }

    bool has_range(const shift_range& r) const {
        return std::find(ranges_.begin(), ranges_.end(), r) != ranges_.end();
    }

    std::size_t row(sample_ref probe) const {
        if (probe.subject >= cols_ || probe.sample == 0 ||
            row_offset_[probe.subject] + probe.sample - 1 >= row_offset_[probe.subject + 1])
            throw error(errc::invalid_argument, "sample is not a probe row of this score table");
        return row_offset_[probe.subject] + probe.sample - 1;
    }

    /// Winning-shift counts; valid == 0 means no overlap at any shift.
    pair_counts counts(std::size_t row, std::uint32_t subject, std::size_t range) const noexcept {
        const cell& c = cells_[(row * cols_ + subject) * ranges_.size() + range];
        return {c.differing, c.valid};
    }

    std::optional<score> score_at(std::size_t row, std::uint32_t subject, std::size_t range) const {
        const pair_counts c = counts(row, subject, range);
        if (c.valid == 0)
            return std::nullopt;
        return score(M::value(c), M::pol);
    }

private:
    struct cell {
        std::uint16_t differing = 0;
        std::uint16_t valid = 0;
    };

    std::vector<shift_range> ranges_;
    shift_range span_;
    std::size_t cols_;
    std::vector<std::size_t> row_offset_;
    std::vector<cell> cells_;
};

} // namespace isb

#endif
