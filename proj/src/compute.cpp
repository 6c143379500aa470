#include "ctl/compute.hpp"

#include "ctl/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace ctl {

namespace {

constexpr double kLn10 = 2.302585092994045684;

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_decimal(std::string_view text, const char* why) {
    throw Error(ErrorCode::DomainError,
                "invalid compute amount '" + std::string(text) + "': " + why);
}

} // namespace

ComputeAmount ComputeAmount::from_log10(double log10_flop) {
    if (!std::isfinite(log10_flop) || log10_flop < 0.0) {
        throw Error(ErrorCode::DomainError,
                    "compute log10 must be finite and >= 0, got " + std::to_string(log10_flop));
    }
    return ComputeAmount(log10_flop);
}

ComputeAmount ComputeAmount::from_flop(double flop) {
    if (flop == 0.0) return zero();
    if (!std::isfinite(flop) || flop < 1.0) {
        throw Error(ErrorCode::DomainError,
                    "compute must be 0 or >= 1 FLOP, got " + std::to_string(flop));
    }
    return ComputeAmount(std::log10(flop));
}

ComputeAmount ComputeAmount::parse(std::string_view raw) {
    const std::string text = trim(raw);
    std::size_t i = 0;
    std::string digits;
    long long point_shift = 0;  // digits after the decimal point
    bool seen_point = false;
    bool any_digit = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            any_digit = true;
            digits.push_back(c);
            if (seen_point) ++point_shift;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any_digit) bad_decimal(text, "expected digits");

    long long exponent = 0;
    if (i < text.size()) {
        if (text[i] != 'e' && text[i] != 'E') bad_decimal(text, "unexpected character");
        ++i;
        const std::string exp_text = text.substr(i);
        if (exp_text.empty()) bad_decimal(text, "missing exponent");
        std::size_t j = 0;
        if (exp_text[0] == '+' || exp_text[0] == '-') ++j;
        if (j == exp_text.size()) bad_decimal(text, "missing exponent digits");
        for (std::size_t k = j; k < exp_text.size(); ++k) {
            if (!std::isdigit(static_cast<unsigned char>(exp_text[k]))) {
                bad_decimal(text, "bad exponent");
            }
        }
        if (exp_text.size() - j > 6) bad_decimal(text, "exponent out of range");
        exponent = std::stoll(exp_text);
    }

    const auto first = digits.find_first_not_of('0');
    if (first == std::string::npos) return zero();
    digits.erase(0, first);
    while (digits.size() > 1 && digits.back() == '0') {
        digits.pop_back();
        --point_shift;
    }
    // value = 0.d1d2d3... * 10^(ndigits) * 10^(exponent - point_shift)
    //       = d1.d2d3... * 10^(ndigits - 1 + exponent - point_shift)
    const long long decade =
        static_cast<long long>(digits.size()) - 1 + exponent - point_shift;
    std::string significand = digits.substr(0, 1);
    if (digits.size() > 1) significand += "." + digits.substr(1);
    const double m = std::strtod(significand.c_str(), nullptr);
    const double log10_value = std::log10(m) + static_cast<double>(decade);
    if (log10_value < 0.0) bad_decimal(text, "non-zero amounts must be >= 1 FLOP");
    if (log10_value > 300.0) bad_decimal(text, "amount too large");
    return ComputeAmount(log10_value);
}

double ComputeAmount::flop() const {
    if (is_zero()) return 0.0;
    return std::pow(10.0, log10_);
}

ComputeAmount ComputeAmount::operator+(const ComputeAmount& other) const {
    if (is_zero()) return other;
    if (other.is_zero()) return *this;
    const double hi = std::max(log10_, other.log10_);
    const double lo = std::min(log10_, other.log10_);
    return ComputeAmount(hi + std::log1p(std::pow(10.0, lo - hi)) / kLn10);
}

ComputeAmount ComputeAmount::scaled_ooms(double ooms) const {
    if (is_zero()) return *this;
    return from_log10(log10_ + ooms);
}

ComputeAmount ComputeAmount::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw Error(ErrorCode::DomainError, "scale factor must be positive and finite");
    }
    return scaled_ooms(std::log10(factor));
}

bool ComputeAmount::exceeds(const ComputeAmount& threshold) const {
    if (is_zero()) return false;
    if (threshold.is_zero()) return true;
    return log10_ > threshold.log10_ + kBoundaryEpsilonOoms;
}

bool ComputeAmount::at_least(const ComputeAmount& threshold) const {
    if (threshold.is_zero()) return true;
    if (is_zero()) return false;
    return log10_ >= threshold.log10_ - kBoundaryEpsilonOoms;
}

std::string ComputeAmount::to_string() const {
    if (is_zero()) return "0";
    double decade = std::floor(log10_);
    double m = std::pow(10.0, log10_ - decade);
    // Round to two decimals first so 9.996e25 renders as 1.00e+26.
    m = std::round(m * 100.0) / 100.0;
    if (m >= 10.0) {
        m /= 10.0;
        decade += 1.0;
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2fe%c%02d", m, decade < 0 ? '-' : '+',
                  static_cast<int>(std::fabs(decade)));
    return buf;
}

std::string ComputeAmount::to_decimal() const {
    if (is_zero()) return "0";
    const long long decade = static_cast<long long>(std::floor(log10_));
    const double m = std::pow(10.0, log10_ - static_cast<double>(decade));
    std::string best;
    for (int precision = 0; precision <= 16; ++precision) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", precision, m);
        std::string mant = buf;
        long long d = decade;
        if (mant.rfind("10", 0) == 0) {  // rounding carried into the next decade
            std::snprintf(buf, sizeof buf, "%.*f", precision, m / 10.0);
            mant = buf;
            d += 1;
        }
        if (mant.find('.') != std::string::npos) {
            while (mant.back() == '0') mant.pop_back();
            if (mant.back() == '.') mant.pop_back();
        }
        std::string candidate = mant + "e" + std::to_string(d);
        best = candidate;
        if (parse(candidate).log10_ == log10_) return candidate;
    }
    return best;
}

double ratio(const ComputeAmount& a, const ComputeAmount& b) {
    if (b.is_zero()) throw Error(ErrorCode::DomainError, "ratio with zero denominator");
    if (a.is_zero()) return 0.0;
    return std::pow(10.0, a.log10() - b.log10());
}

MoneyAmount::MoneyAmount(double usd) : usd_(usd) {
    if (!std::isfinite(usd) || usd < 0.0) {
        throw Error(ErrorCode::DomainError, "money amount must be finite and >= 0");
    }
}

OomValue::OomValue(double ooms) : ooms_(ooms) {
    if (!std::isfinite(ooms) || ooms < 0.0) {
        throw Error(ErrorCode::DomainError, "OOM value must be finite and >= 0");
    }
}

} // namespace ctl
