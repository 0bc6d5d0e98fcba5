#ifndef ISB_ERROR_HPP
#define ISB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace isb {

enum class errc {
    invalid_argument,
    invalid_shift,
    incompatible_templates,
    no_overlap,
    polarity_mismatch,
    empty_input,
    empty_gallery,
    pool_exhausted,
    insufficient_data,
    config,
    io,
    format,
};

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can tell them apart without parsing messages.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace isb

#endif
