#ifndef ISB_CSV_HPP
#define ISB_CSV_HPP

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "isb/error.hpp"

namespace isb::csv {

/// Shortest decimal form that reads back to the same double.
inline std::string format(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline std::string format(const std::optional<double>& v) { return v ? format(*v) : std::string("NA"); }

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw error(errc::format, "not a number: '" + std::string(s) + "'");
    return v;
}

inline std::optional<double> parse_optional(std::string_view s) {
    if (s == "NA")
        return std::nullopt;
    return parse_double(s);
}

template <class Int = std::uint64_t>
Int parse_int(std::string_view s) {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw error(errc::format, "not an integer: '" + std::string(s) + "'");
    return v;
}

/// Comma-separated rows without quoting; fields may not contain ',' or newlines.
class writer {
public:
    explicit writer(const std::filesystem::path& path) : path_(path), os_(path, std::ios::binary) {
        if (!os_)
            throw error(errc::io, "cannot open " + path.string() + " for writing");
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (fields[i].find_first_of(",\n\r") != std::string::npos)
                throw error(errc::format, "CSV field contains a separator: '" + fields[i] + "'");
            if (i)
                os_ << ',';
            os_ << fields[i];
        }
        os_ << '\n';
        if (!os_)
            throw error(errc::io, "write failed: " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream os_;
};

struct table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw error(errc::format, "missing CSV column '" + std::string(name) + "'");
    }
};

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

inline table read(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw error(errc::io, "cannot open " + path.string());
    table t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
            continue;
        }
        if (fields.size() != t.header.size())
            throw error(errc::format, path.string() + ": row has " + std::to_string(fields.size()) +
                                          " fields, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
    }
    if (first)
        throw error(errc::format, path.string() + ": empty CSV");
    return t;
}

} // namespace isb::csv

#endif
