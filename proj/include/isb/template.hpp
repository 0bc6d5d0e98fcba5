#ifndef ISB_TEMPLATE_HPP
#define ISB_TEMPLATE_HPP

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>

#include "isb/bits.hpp"
#include "isb/error.hpp"

namespace isb {

/// Grid layout of an iris code: `rows` radial bands by `cols` angular
/// positions, `bits_per_cell` bits per position. Bits are stored row-major,
/// cell bits contiguous: index = (row * cols + col) * bits_per_cell + bit.
struct geometry {
    std::uint16_t rows = 20;
    std::uint16_t cols = 240;
    std::uint8_t bits_per_cell = 2;

    std::size_t row_bits() const noexcept { return std::size_t{cols} * bits_per_cell; }
    std::size_t total_bits() const noexcept { return std::size_t{rows} * row_bits(); }
    std::size_t bit_index(std::size_t row, std::size_t col, std::size_t bit) const noexcept {
        return (row * cols + col) * bits_per_cell + bit;
    }

    void validate() const {
        if (rows < 1 || cols < 1 || bits_per_cell < 1)
            throw error(errc::invalid_argument, "geometry: rows, cols and bits_per_cell must all be >= 1");
    }

    std::string to_string() const {
        return std::to_string(rows) + "x" + std::to_string(cols) + "x" + std::to_string(bits_per_cell);
    }

    friend bool operator==(const geometry&, const geometry&) = default;
};

/// Binary template: code bits plus a validity mask (1 = usable bit).
class iris_template {
public:
    iris_template(geometry g, bit_vector code, bit_vector mask)
        : geom_(g), code_(std::move(code)), mask_(std::move(mask)) {
        geom_.validate();
        if (code_.size() != geom_.total_bits() || mask_.size() != geom_.total_bits())
            throw error(errc::invalid_argument, "template: code/mask length does not match geometry " +
                                                     geom_.to_string());
        if (mask_.none())
            throw error(errc::invalid_argument, "template: mask has no valid bits");
    }

    /// Template with every bit valid.
    static iris_template full_mask(geometry g, bit_vector code) {
        bit_vector mask(g.total_bits());
        mask.fill(true);
        return iris_template(g, std::move(code), std::move(mask));
    }

    const geometry& geom() const noexcept { return geom_; }
    const bit_vector& code() const noexcept { return code_; }
    const bit_vector& mask() const noexcept { return mask_; }

    friend bool operator==(const iris_template&, const iris_template&) = default;

private:
    geometry geom_;
    bit_vector code_;
    bit_vector mask_;
};

inline void check_shift(const geometry& g, int shift) {
    if (static_cast<std::size_t>(std::abs(shift)) >= g.cols)
        throw error(errc::invalid_shift, "shift " + std::to_string(shift) + " out of range for " +
                                             std::to_string(g.cols) + " columns");
}

/// Circularly shifts a bit plane along the angular axis: the cell at column
/// c moves to column (c + shift) mod cols. Cell bits travel together.
inline bit_vector rotate_plane(const bit_vector& plane, const geometry& g, int shift) {
    check_shift(g, shift);
    const long cols = g.cols;
    const std::size_t k = static_cast<std::size_t>(((shift % cols) + cols) % cols) * g.bits_per_cell;
    if (k == 0)
        return plane;
    bit_vector out(plane.size());
    rotate_rows(plane, out, g.row_bits(), k);
    return out;
}

inline iris_template rotate_template(const iris_template& t, int shift) {
    return iris_template(t.geom(), rotate_plane(t.code(), t.geom(), shift), rotate_plane(t.mask(), t.geom(), shift));
}

} // namespace isb

#endif
