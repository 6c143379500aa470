#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace ctl {

// Tolerance, in log10 units, used when comparing compute against a threshold.
// Two values parsed from the same decimal text compare equal; values that
// differ by a relative 1e-12 or less are treated as sitting on the boundary.
inline constexpr double kBoundaryEpsilonOoms = 1e-12;

/**
 * A non-negative FLOP count held as its base-10 logarithm.
 *
 * Non-zero amounts are at least 1 FLOP (log10 >= 0). Zero is a distinct
 * state with log10() == -inf so that Copy-style events can carry no compute
 * and `a + zero == a` holds exactly.
 */
class ComputeAmount {
public:
    constexpr ComputeAmount() = default;

    static constexpr ComputeAmount zero() { return ComputeAmount{}; }
    static ComputeAmount from_log10(double log10_flop);
    static ComputeAmount from_flop(double flop);

    /// Parses decimal text such as "9.9e25", "1500" or "0". The significand
    /// and exponent are split before taking the logarithm so that "1e26" maps
    /// to exactly 26.0.
    static ComputeAmount parse(std::string_view text);

    bool is_zero() const noexcept { return log10_ == kZero; }
    double log10() const noexcept { return log10_; }
    double flop() const;

    /// Linear-domain addition carried out in log space.
    ComputeAmount operator+(const ComputeAmount& other) const;
    ComputeAmount& operator+=(const ComputeAmount& other) { return *this = *this + other; }

    /// Multiplies by 10^ooms. Zero stays zero.
    ComputeAmount scaled_ooms(double ooms) const;
    /// Multiplies by a positive factor.
    ComputeAmount scaled(double factor) const;

    /// Strict `>` with the boundary epsilon applied.
    bool exceeds(const ComputeAmount& threshold) const;
    /// `>=` with the boundary epsilon applied.
    bool at_least(const ComputeAmount& threshold) const;

    /// Fixed "a.bce+NN" rendering used in reports ("1.10e+25"); "0" for zero.
    std::string to_string() const;
    /// Shortest decimal text that parses back to exactly this value when one
    /// exists with at most 17 significant digits.
    std::string to_decimal() const;

    friend bool operator==(const ComputeAmount&, const ComputeAmount&) = default;
    friend std::partial_ordering operator<=>(const ComputeAmount& a, const ComputeAmount& b) {
        return a.log10_ <=> b.log10_;
    }

private:
    static constexpr double kZero = -std::numeric_limits<double>::infinity();
    explicit constexpr ComputeAmount(double log10_flop) : log10_(log10_flop) {}

    double log10_ = kZero;
};

/// Ratio a / b computed in log space; b must be non-zero.
double ratio(const ComputeAmount& a, const ComputeAmount& b);

class MoneyAmount {
public:
    constexpr MoneyAmount() = default;
    explicit MoneyAmount(double usd);

    double usd() const noexcept { return usd_; }

    friend bool operator==(const MoneyAmount&, const MoneyAmount&) = default;
    friend auto operator<=>(const MoneyAmount&, const MoneyAmount&) = default;

private:
    double usd_ = 0.0;
};

/// Orders of magnitude (a factor of 10 each), always finite and >= 0.
class OomValue {
public:
    constexpr OomValue() = default;
    explicit OomValue(double ooms);

    double ooms() const noexcept { return ooms_; }

    friend bool operator==(const OomValue&, const OomValue&) = default;
    friend auto operator<=>(const OomValue&, const OomValue&) = default;

private:
    double ooms_ = 0.0;
};

} // namespace ctl
