#ifndef ISB_SCORE_HPP
#define ISB_SCORE_HPP

#include <cmath>
#include <string>
#include <string_view>

#include "isb/error.hpp"

namespace isb {

/// Dissimilarity: lower is better, values in [0,1] (fractional Hamming).
/// Similarity: higher is better, values >= 0.
enum class polarity { dissimilarity, similarity };

inline std::string_view to_string(polarity p) {
    return p == polarity::dissimilarity ? "dissimilarity" : "similarity";
}

inline polarity parse_polarity(std::string_view s) {
    if (s == "dissimilarity")
        return polarity::dissimilarity;
    if (s == "similarity")
        return polarity::similarity;
    throw error(errc::format, "unknown polarity '" + std::string(s) + "'");
}

class score {
public:
    score(double value, polarity p) : value_(value), polarity_(p) {
        if (std::isnan(value))
            throw error(errc::invalid_argument, "score: NaN");
        if (p == polarity::dissimilarity && (value < 0.0 || value > 1.0))
            throw error(errc::invalid_argument, "dissimilarity score outside [0,1]: " + std::to_string(value));
        if (p == polarity::similarity && value < 0.0)
            throw error(errc::invalid_argument, "similarity score below 0: " + std::to_string(value));
    }

    double value() const noexcept { return value_; }
    polarity pol() const noexcept { return polarity_; }

    /// Strictly better under the shared polarity.
    bool better_than(const score& other) const {
        require_same(other.polarity_);
        return polarity_ == polarity::dissimilarity ? value_ < other.value_ : value_ > other.value_;
    }

    friend bool operator==(const score&, const score&) = default;

private:
    void require_same(polarity other) const {
        if (other != polarity_)
            throw error(errc::polarity_mismatch, "comparing a " + std::string(to_string(polarity_)) + " score with a " +
                                                     std::string(to_string(other)) + " one");
    }

    double value_;
    polarity polarity_;
};

/// Allowed fraction of impostor comparisons that may meet the threshold.
class accuracy_target {
public:
    explicit accuracy_target(double fraction) : fraction_(fraction) {
        if (!(fraction > 0.0 && fraction < 1.0))
            throw error(errc::invalid_argument, "accuracy target must lie strictly between 0 and 1");
    }
    double fraction() const noexcept { return fraction_; }
    friend auto operator<=>(const accuracy_target&, const accuracy_target&) = default;

private:
    double fraction_;
};

struct threshold {
    double value = 0.0;
    polarity pol = polarity::dissimilarity;
    double target = 0.0;
    double achieved_fraction = 0.0;
    // false when no impostor score could be admitted; value is then a
    // sentinel that at most a perfect match can meet.
    bool attainable = true;
};

inline bool meets_threshold(const score& s, const threshold& t) {
    if (s.pol() != t.pol)
        throw error(errc::polarity_mismatch, "score and threshold polarity differ");
    return t.pol == polarity::dissimilarity ? s.value() <= t.value : s.value() >= t.value;
}

} // namespace isb

#endif
