#ifndef ISB_SCENARIO_HPP
#define ISB_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "isb/error.hpp"
#include "isb/rng.hpp"
#include "isb/synth.hpp"
#include "isb/template.hpp"

namespace isb {

/// Position of a template inside a population.
struct sample_ref {
    std::uint32_t subject = 0;
    std::uint32_t sample = 0;
    friend bool operator==(const sample_ref&, const sample_ref&) = default;
};

struct gallery_entry {
    std::string subject_id;
    iris_template reference;
    sample_ref source;
    friend bool operator==(const gallery_entry&, const gallery_entry&) = default;
};

/// Ordered enrollment, one reference per subject. Order matters to 1:First
/// and is part of equality.
class gallery {
public:
    gallery() = default;
    explicit gallery(std::vector<gallery_entry> entries) : entries_(std::move(entries)) {
        std::unordered_set<std::string> seen;
        for (const auto& e : entries_) {
            if (!seen.insert(e.subject_id).second)
                throw error(errc::invalid_argument, "gallery lists subject '" + e.subject_id + "' twice");
            if (!(e.reference.geom() == entries_.front().reference.geom()))
                throw error(errc::incompatible_templates, "gallery mixes template geometries");
        }
    }

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const gallery_entry& operator[](std::size_t i) const noexcept { return entries_[i]; }
    const std::vector<gallery_entry>& entries() const noexcept { return entries_; }

    friend bool operator==(const gallery&, const gallery&) = default;

private:
    std::vector<gallery_entry> entries_;
};

enum class set_type { closed, open };

inline std::string_view to_string(set_type t) { return t == set_type::closed ? "closed" : "open"; }

inline set_type parse_set_type(std::string_view s) {
    if (s == "closed")
        return set_type::closed;
    if (s == "open")
        return set_type::open;
    throw error(errc::config, "unknown set type '" + std::string(s) + "'");
}

struct probe {
    std::string subject_id;
    iris_template sample;
    bool enrolled = true;
    sample_ref source;
};

struct probe_set {
    set_type type = set_type::closed;
    std::vector<probe> probes;

    std::size_t size() const noexcept { return probes.size(); }
    std::size_t enrolled_count() const noexcept {
        return static_cast<std::size_t>(
            std::count_if(probes.begin(), probes.end(), [](const probe& p) { return p.enrolled; }));
    }
};

namespace detail {

inline gallery_entry entry_for(const population& pool, std::uint32_t subject) {
    const auto& s = pool.subjects[subject];
    return {s.id, s.samples.front(), {subject, 0}};
}

inline probe probe_for(const population& pool, sample_ref ref, bool enrolled) {
    const auto& s = pool.subjects[ref.subject];
    return {s.id, s.samples[ref.sample], enrolled, ref};
}

inline std::vector<sample_ref> spare_samples(const population& pool, const std::vector<std::uint32_t>& subjects) {
    std::vector<sample_ref> out;
    for (std::uint32_t s : subjects)
        for (std::uint32_t j = 1; j < pool.subjects[s].samples.size(); ++j)
            out.push_back({s, j});
    return out;
}

inline std::vector<std::uint32_t> gallery_subjects(const gallery& g) {
    std::vector<std::uint32_t> out;
    out.reserve(g.size());
    for (const auto& e : g.entries())
        out.push_back(e.source.subject);
    return out;
}

// Uniform subset of `k` items, kept in their original order.
inline std::vector<sample_ref> subsample(const std::vector<sample_ref>& items, std::size_t k, rng_type& rng) {
    if (items.size() <= k)
        return items;
    std::vector<sample_ref> out;
    out.reserve(k);
    std::sample(items.begin(), items.end(), std::back_inserter(out), k, rng);
    return out;
}

} // namespace detail

/// Draws `size` distinct subjects uniformly without replacement; each is
/// enrolled with its first sample, in draw order.
inline gallery build_gallery(const population& pool, std::size_t size, rng_type& rng) {
    if (size == 0)
        throw error(errc::empty_gallery, "gallery size must be at least 1");
    std::vector<std::uint32_t> eligible;
    for (std::uint32_t s = 0; s < pool.subjects.size(); ++s)
        if (pool.subjects[s].samples.size() >= 2)
            eligible.push_back(s);
    if (eligible.size() < size)
        throw error(errc::pool_exhausted, "pool has " + std::to_string(eligible.size()) +
                                              " subjects with a spare sample; gallery of " + std::to_string(size) +
                                              " is short by " + std::to_string(size - eligible.size()));
    std::vector<gallery_entry> entries;
    entries.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
        std::swap(eligible[i], eligible[pick(rng)]);
        entries.push_back(detail::entry_for(pool, eligible[i]));
    }
    return gallery(std::move(entries));
}

/// Every non-enrollment sample of every enrolled subject, uniformly
/// subsampled down to `cap` when there are more.
inline probe_set build_closed_probeset(const population& pool, const gallery& g, std::size_t cap, rng_type& rng) {
    if (cap == 0)
        throw error(errc::invalid_argument, "probe cap must be at least 1");
    const auto chosen = detail::subsample(detail::spare_samples(pool, detail::gallery_subjects(g)), cap, rng);
    probe_set out{set_type::closed, {}};
    out.probes.reserve(chosen.size());
    for (const auto& ref : chosen)
        out.probes.push_back(detail::probe_for(pool, ref, true));
    return out;
}

/// round(1.5 N) samples of enrolled subjects plus round(0.75 N) samples of
/// subjects outside the gallery, so about a third of probes are unenrolled.
inline probe_set build_open_probeset(const population& pool, const gallery& g, rng_type& rng) {
    if (g.empty())
        throw error(errc::empty_gallery, "open probe set needs a nonempty gallery");
    const auto n = static_cast<double>(g.size());
    const auto enrolled_count = static_cast<std::size_t>(std::llround(1.5 * n));
    const auto unenrolled_count = static_cast<std::size_t>(std::llround(0.75 * n));

    const auto members = detail::gallery_subjects(g);
    std::vector<bool> in_gallery(pool.subjects.size(), false);
    for (auto s : members)
        in_gallery[s] = true;
    std::vector<std::uint32_t> outsiders;
    for (std::uint32_t s = 0; s < pool.subjects.size(); ++s)
        if (!in_gallery[s])
            outsiders.push_back(s);

    const auto enrolled_pool = detail::spare_samples(pool, members);
    const auto unenrolled_pool = detail::spare_samples(pool, outsiders);
    if (enrolled_pool.size() < enrolled_count)
        throw error(errc::pool_exhausted, "open set needs " + std::to_string(enrolled_count) +
                                              " enrolled-subject probes, pool has " +
                                              std::to_string(enrolled_pool.size()));
    if (unenrolled_pool.size() < unenrolled_count)
        throw error(errc::pool_exhausted, "open set needs " + std::to_string(unenrolled_count) +
                                              " unenrolled probes, pool has " + std::to_string(unenrolled_pool.size()) +
                                              " (short by " +
                                              std::to_string(unenrolled_count - unenrolled_pool.size()) + ")");
    probe_set out{set_type::open, {}};
    out.probes.reserve(enrolled_count + unenrolled_count);
    for (const auto& ref : detail::subsample(enrolled_pool, enrolled_count, rng))
        out.probes.push_back(detail::probe_for(pool, ref, true));
    for (const auto& ref : detail::subsample(unenrolled_pool, unenrolled_count, rng))
        out.probes.push_back(detail::probe_for(pool, ref, false));
    return out;
}

inline gallery permute_gallery(const gallery& g, rng_type& rng) {
    if (g.empty())
        throw error(errc::empty_gallery, "cannot permute an empty gallery");
    std::vector<gallery_entry> entries = g.entries();
    std::shuffle(entries.begin(), entries.end(), rng);
    return gallery(std::move(entries));
}

} // namespace isb

#endif
