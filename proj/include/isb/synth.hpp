#ifndef ISB_SYNTH_HPP
#define ISB_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "isb/bits.hpp"
#include "isb/csv.hpp"
#include "isb/error.hpp"
#include "isb/irtb.hpp"
#include "isb/parallel.hpp"
#include "isb/rng.hpp"
#include "isb/template.hpp"

namespace isb {

struct population_params {
    geometry geom{};
    // Number of independent fair bits per identity code. Each one is tiled
    // over a contiguous block of total_bits/dof bits, so impostor HD has
    // variance 0.25/dof.
    std::uint32_t degrees_of_freedom = 250;
    double genuine_flip_prob = 0.065;
    int max_rotation_offset = 7;
    double occlusion_min = 0.0;
    double occlusion_max = 0.25;
    std::uint64_t seed = 1;

    void validate() const {
        geom.validate();
        if (degrees_of_freedom == 0 || degrees_of_freedom > geom.total_bits())
            throw error(errc::invalid_argument, "degrees_of_freedom must lie in [1, total bits]");
        if (!(genuine_flip_prob >= 0.0 && genuine_flip_prob < 0.5))
            throw error(errc::invalid_argument, "genuine_flip_prob must lie in [0, 0.5)");
        if (max_rotation_offset < 0 || max_rotation_offset >= geom.cols)
            throw error(errc::invalid_argument, "max_rotation_offset must lie in [0, cols)");
        if (!(occlusion_min >= 0.0 && occlusion_min <= occlusion_max && occlusion_max < 0.5))
            throw error(errc::invalid_argument, "occlusion range must satisfy 0 <= min <= max < 0.5");
    }
};

enum class origin { original, rot180, fliph };

inline std::string_view to_string(origin o) {
    switch (o) {
    case origin::original: return "original";
    case origin::rot180: return "rot180";
    case origin::fliph: return "fliph";
    }
    return "?";
}

inline origin parse_origin(std::string_view s) {
    if (s == "original")
        return origin::original;
    if (s == "rot180")
        return origin::rot180;
    if (s == "fliph")
        return origin::fliph;
    throw error(errc::format, "unknown origin '" + std::string(s) + "'");
}

struct identity_master {
    std::string subject_id;
    origin source = origin::original;
    geometry geom{};
    bit_vector code;
};

/// Position of a bit in the block-tiling order. Rows are split into an
/// inner half and an outer half; inside each half the order is angular-major
/// (all cells of column 0, then column 1, ...). Each block then spans about
/// two columns of one half, so neither row reversal nor column reversal maps
/// a block onto itself.
inline std::size_t tiling_index(const geometry& g, std::size_t row, std::size_t col, std::size_t bit) {
    const std::size_t inner = g.rows / 2;
    const bool outer = row >= inner;
    const std::size_t band_rows = outer ? g.rows - inner : inner;
    const std::size_t offset = outer ? std::size_t{g.cols} * inner * g.bits_per_cell : 0;
    return offset + (col * band_rows + (row - (outer ? inner : 0))) * g.bits_per_cell + bit;
}

inline identity_master gen_identity(const population_params& params, rng_type& rng, std::string subject_id) {
    params.validate();
    const geometry& g = params.geom;
    const std::size_t total = g.total_bits(), dof = params.degrees_of_freedom;
    std::vector<std::uint8_t> free_bits(dof);
    std::bernoulli_distribution fair(0.5);
    for (auto& b : free_bits)
        b = fair(rng) ? 1 : 0;
    identity_master m{std::move(subject_id), origin::original, g, bit_vector(total)};
    for (std::size_t r = 0; r < g.rows; ++r)
        for (std::size_t c = 0; c < g.cols; ++c)
            for (std::size_t b = 0; b < g.bits_per_cell; ++b) {
                const std::size_t block = tiling_index(g, r, c, b) * dof / total;
                m.code.set(g.bit_index(r, c, b), free_bits[block] != 0);
            }
    return m;
}

/// One noisy acquisition of an identity: independent bit flips, a random
/// angular offset, and an eyelid-like band of fully masked rows.
inline iris_template gen_sample(const identity_master& master, const population_params& params, rng_type& rng) {
    const geometry& g = master.geom;
    if (!(g == params.geom) || master.code.size() != g.total_bits())
        throw error(errc::invalid_argument, "identity geometry does not match population parameters");
    bit_vector code = master.code;
    if (params.genuine_flip_prob > 0.0) {
        std::bernoulli_distribution flip(params.genuine_flip_prob);
        for (std::size_t i = 0; i < code.size(); ++i)
            if (flip(rng))
                code.flip(i);
    }
    std::uniform_int_distribution<int> offset(-params.max_rotation_offset, params.max_rotation_offset);
    const int shift = offset(rng);
    std::uniform_real_distribution<double> occl(params.occlusion_min, params.occlusion_max);
    const double fraction = params.occlusion_max > params.occlusion_min ? occl(rng) : params.occlusion_min;
    const auto masked_rows = static_cast<std::size_t>(std::lround(fraction * g.rows));
    std::uniform_int_distribution<std::size_t> start_dist(0, g.rows - masked_rows);
    const std::size_t start = start_dist(rng);

    bit_vector mask(g.total_bits());
    mask.fill(true);
    for (std::size_t r = start; r < start + masked_rows; ++r)
        for (std::size_t i = r * g.row_bits(); i < (r + 1) * g.row_bits(); ++i)
            mask.set(i, false);
    return iris_template(g, rotate_plane(code, g, shift), std::move(mask));
}

/// New identity from a deterministic spatial transform of an existing one.
/// rot180 reverses row and column order; fliph reverses column order only.
inline identity_master augment_identity(const identity_master& master, origin kind) {
    if (kind == origin::original)
        throw error(errc::invalid_argument, "augment_identity needs rot180 or fliph");
    const geometry& g = master.geom;
    identity_master out{master.subject_id + "_" + std::string(to_string(kind)), kind, g, bit_vector(g.total_bits())};
    for (std::size_t r = 0; r < g.rows; ++r)
        for (std::size_t c = 0; c < g.cols; ++c) {
            const std::size_t src_r = kind == origin::rot180 ? g.rows - 1 - r : r;
            const std::size_t src_c = g.cols - 1 - c;
            for (std::size_t b = 0; b < g.bits_per_cell; ++b)
                out.code.set(g.bit_index(r, c, b), master.code.test(g.bit_index(src_r, src_c, b)));
        }
    return out;
}

struct population_plan {
    std::size_t base_subjects = 1000;
    std::size_t samples_per_subject = 3;
    std::vector<origin> augmentations{origin::rot180, origin::fliph};

    std::size_t subject_count() const { return base_subjects * (1 + augmentations.size()); }
};

/// Enrolled-or-probe unit of the pool. Sample 0 is the enrollment reference.
struct subject_record {
    std::string id;
    origin source = origin::original;
    std::vector<iris_template> samples;
};

struct population {
    geometry geom{};
    std::vector<subject_record> subjects;
};

inline std::string subject_label(std::size_t index, std::size_t count) {
    std::string digits = std::to_string(index);
    const std::size_t width = std::max<std::size_t>(5, std::to_string(count == 0 ? 0 : count - 1).size());
    return "s" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

/// Base identities first, then one block per augmentation in plan order.
/// Every identity and every subject's samples use their own derived stream,
/// so the result does not depend on `jobs`.
inline population generate_population(const population_params& params, const population_plan& plan,
                                      unsigned jobs = 1) {
    params.validate();
    if (plan.base_subjects == 0 || plan.samples_per_subject == 0)
        throw error(errc::invalid_argument, "population needs at least one subject and one sample");
    std::vector<identity_master> masters(plan.base_subjects);
    parallel_for(plan.base_subjects, jobs, [&](std::size_t i) {
        rng_type rng = make_rng(params.seed, {1, i});
        masters[i] = gen_identity(params, rng, subject_label(i, plan.base_subjects));
    }, 16);
    for (origin kind : plan.augmentations)
        for (std::size_t i = 0; i < plan.base_subjects; ++i)
            masters.push_back(augment_identity(masters[i], kind));

    population pop{params.geom, std::vector<subject_record>(masters.size())};
    parallel_for(masters.size(), jobs, [&](std::size_t k) {
        rng_type rng = make_rng(params.seed, {2, k});
        subject_record rec{masters[k].subject_id, masters[k].source, {}};
        rec.samples.reserve(plan.samples_per_subject);
        for (std::size_t j = 0; j < plan.samples_per_subject; ++j)
            rec.samples.push_back(gen_sample(masters[k], params, rng));
        pop.subjects[k] = std::move(rec);
    }, 16);
    return pop;
}

inline std::string sample_file_name(const subject_record& s, std::size_t sample) {
    return s.id + "_" + std::to_string(sample) + ".irtb";
}

/// Writes <dir>/manifest.csv (subject_id,origin,path; one row per sample,
/// enrollment sample first) and the IRTB files under <dir>/samples/.
inline std::filesystem::path write_population(const population& pop, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "samples");
    const auto manifest = dir / "manifest.csv";
    csv::writer out(manifest);
    out.row({"subject_id", "origin", "path"});
    for (const auto& s : pop.subjects)
        for (std::size_t j = 0; j < s.samples.size(); ++j) {
            const std::string rel = "samples/" + sample_file_name(s, j);
            irtb::save(dir / rel, s.samples[j]);
            out.row({s.id, std::string(to_string(s.source)), rel});
        }
    return manifest;
}

inline population load_population(const std::filesystem::path& manifest) {
    const csv::table t = csv::read(manifest);
    const std::size_t id_col = t.column("subject_id"), origin_col = t.column("origin"), path_col = t.column("path");
    population pop;
    for (const auto& row : t.rows) {
        if (pop.subjects.empty() || pop.subjects.back().id != row[id_col])
            pop.subjects.push_back({row[id_col], parse_origin(row[origin_col]), {}});
        std::filesystem::path p = row[path_col];
        if (p.is_relative())
            p = manifest.parent_path() / p;
        pop.subjects.back().samples.push_back(irtb::load(p));
        if (!(pop.subjects.back().samples.back().geom() == pop.subjects.front().samples.front().geom()))
            throw error(errc::format, "population manifest mixes template geometries");
    }
    if (pop.subjects.empty())
        throw error(errc::format, "population manifest lists no samples");
    pop.geom = pop.subjects.front().samples.front().geom();
    return pop;
}

} // namespace isb

#endif
