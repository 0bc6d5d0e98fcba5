#ifndef ISB_BITS_HPP
#define ISB_BITS_HPP

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace isb {

/// Fixed-length packed bit sequence. Bit i lives in word i/64 at position
/// i%64, so the byte image on a little-endian host is LSB-first. Padding bits
/// past size() are always zero.
class bit_vector {
public:
    using word_type = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    bit_vector() = default;
    explicit bit_vector(std::size_t nbits) : size_(nbits), words_(word_count(nbits), 0) {}

    static constexpr std::size_t word_count(std::size_t nbits) { return (nbits + word_bits - 1) / word_bits; }

    std::size_t size() const noexcept { return size_; }

    bool test(std::size_t i) const noexcept {
        assert(i < size_);
        return (words_[i / word_bits] >> (i % word_bits)) & 1u;
    }

    void set(std::size_t i, bool v = true) noexcept {
        assert(i < size_);
        const word_type bit = word_type{1} << (i % word_bits);
        if (v)
            words_[i / word_bits] |= bit;
        else
            words_[i / word_bits] &= ~bit;
    }

    void flip(std::size_t i) noexcept {
        assert(i < size_);
        words_[i / word_bits] ^= word_type{1} << (i % word_bits);
    }

    void fill(bool v) noexcept {
        std::fill(words_.begin(), words_.end(), v ? ~word_type{0} : word_type{0});
        clear_padding();
    }

    std::size_t count() const noexcept {
        std::size_t n = 0;
        for (word_type w : words_)
            n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    bool none() const noexcept {
        return std::all_of(words_.begin(), words_.end(), [](word_type w) { return w == 0; });
    }

    std::span<const word_type> words() const noexcept { return words_; }
    std::span<word_type> words() noexcept { return words_; }

    friend bool operator==(const bit_vector&, const bit_vector&) = default;

private:
    void clear_padding() noexcept {
        if (size_ % word_bits != 0)
            words_.back() &= (word_type{1} << (size_ % word_bits)) - 1;
    }

    std::size_t size_ = 0;
    std::vector<word_type> words_;
};

namespace detail {

// Reads up to 64 bits starting at an arbitrary bit position.
inline std::uint64_t load_bits(std::span<const std::uint64_t> w, std::size_t pos, std::size_t n) noexcept {
    const std::size_t wi = pos / 64, off = pos % 64;
    std::uint64_t v = w[wi] >> off;
    if (off != 0 && off + n > 64)
        v |= w[wi + 1] << (64 - off);
    return n == 64 ? v : v & ((std::uint64_t{1} << n) - 1);
}

inline void store_bits(std::span<std::uint64_t> w, std::size_t pos, std::size_t n, std::uint64_t v) noexcept {
    const std::size_t wi = pos / 64, off = pos % 64;
    const std::uint64_t m = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    w[wi] = (w[wi] & ~(m << off)) | ((v & m) << off);
    if (off != 0 && off + n > 64) {
        const std::size_t spill = off + n - 64;
        const std::uint64_t m2 = (std::uint64_t{1} << spill) - 1;
        w[wi + 1] = (w[wi + 1] & ~m2) | ((v >> (64 - off)) & m2);
    }
}

} // namespace detail

/// Copies len bits from src[src_pos..) to dst[dst_pos..). Ranges must not alias.
inline void copy_bits(std::span<const std::uint64_t> src, std::size_t src_pos, std::span<std::uint64_t> dst,
                      std::size_t dst_pos, std::size_t len) noexcept {
    while (len > 0) {
        const std::size_t n = std::min<std::size_t>(len, 64);
        detail::store_bits(dst, dst_pos, n, detail::load_bits(src, src_pos, n));
        src_pos += n;
        dst_pos += n;
        len -= n;
    }
}

/// Rotates each row of `row_bits` bits right by `k` bit positions
/// (bit x moves to (x + k) mod row_bits). 0 <= k < row_bits.
inline void rotate_rows(const bit_vector& src, bit_vector& dst, std::size_t row_bits, std::size_t k) {
    assert(src.size() == dst.size() && row_bits > 0 && src.size() % row_bits == 0 && k < row_bits);
    const auto s = src.words();
    auto d = dst.words();
    for (std::size_t base = 0; base < src.size(); base += row_bits) {
        copy_bits(s, base, d, base + k, row_bits - k);
        copy_bits(s, base + row_bits - k, d, base, k);
    }
}

} // namespace isb

#endif
