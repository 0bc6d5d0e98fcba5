#ifndef ISB_IRTB_HPP
#define ISB_IRTB_HPP

// IRTB v1 binary template files:
//   "IRTB" | 0x01 | u16le rows | u16le cols | u8 bits_per_cell
//   | code plane | mask plane
// Each plane holds rows*cols*bits_per_cell bits packed LSB-first in bit-index
// order and is padded to a whole byte.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "isb/error.hpp"
#include "isb/template.hpp"

namespace isb::irtb {

inline constexpr char magic[4] = {'I', 'R', 'T', 'B'};
inline constexpr std::uint8_t version = 0x01;

namespace detail {

inline std::vector<std::uint8_t> pack_plane(const bit_vector& plane) {
    std::vector<std::uint8_t> bytes((plane.size() + 7) / 8, 0);
    const auto w = plane.words();
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<std::uint8_t>(w[i / 8] >> (8 * (i % 8)));
    return bytes;
}

inline bit_vector unpack_plane(const std::vector<std::uint8_t>& bytes, std::size_t nbits) {
    bit_vector plane(nbits);
    auto w = plane.words();
    for (std::size_t i = 0; i < bytes.size(); ++i)
        w[i / 8] |= std::uint64_t{bytes[i]} << (8 * (i % 8));
    if (nbits % 8 != 0 && (bytes.back() >> (nbits % 8)) != 0)
        throw error(errc::format, "IRTB: nonzero padding bits");
    return plane;
}

} // namespace detail

inline void write(std::ostream& os, const iris_template& t) {
    const geometry& g = t.geom();
    os.write(magic, 4);
    const std::uint8_t header[6] = {version,
                                    static_cast<std::uint8_t>(g.rows & 0xff),
                                    static_cast<std::uint8_t>(g.rows >> 8),
                                    static_cast<std::uint8_t>(g.cols & 0xff),
                                    static_cast<std::uint8_t>(g.cols >> 8),
                                    g.bits_per_cell};
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    for (const bit_vector* plane : {&t.code(), &t.mask()}) {
        const auto bytes = detail::pack_plane(*plane);
        os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    if (!os)
        throw error(errc::io, "IRTB: write failed");
}

inline iris_template read(std::istream& is) {
    char m[4];
    std::uint8_t header[6];
    if (!is.read(m, 4) || !std::equal(m, m + 4, magic))
        throw error(errc::format, "IRTB: bad magic");
    if (!is.read(reinterpret_cast<char*>(header), sizeof header))
        throw error(errc::format, "IRTB: truncated header");
    if (header[0] != version)
        throw error(errc::format, "IRTB: unsupported version " + std::to_string(header[0]));
    geometry g;
    g.rows = static_cast<std::uint16_t>(header[1] | (header[2] << 8));
    g.cols = static_cast<std::uint16_t>(header[3] | (header[4] << 8));
    g.bits_per_cell = header[5];
    g.validate();
    const std::size_t nbits = g.total_bits();
    std::vector<std::uint8_t> bytes((nbits + 7) / 8);
    std::vector<bit_vector> planes;
    for (int p = 0; p < 2; ++p) {
        if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
            throw error(errc::format, "IRTB: truncated bit plane");
        planes.push_back(detail::unpack_plane(bytes, nbits));
    }
    if (is.peek() != std::char_traits<char>::eof())
        throw error(errc::format, "IRTB: trailing bytes");
    return iris_template(g, std::move(planes[0]), std::move(planes[1]));
}

inline void save(const std::filesystem::path& path, const iris_template& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw error(errc::io, "cannot open " + path.string() + " for writing");
    write(os, t);
}

inline iris_template load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw error(errc::io, "cannot open " + path.string());
    return read(is);
}

} // namespace isb::irtb

#endif
