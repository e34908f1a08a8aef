#ifndef RIFSLAB_RATIONAL_HPP
#define RIFSLAB_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rifslab {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

/// Exact conversion; every finite double is a dyadic rational.
inline Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rat_from_double: non-finite");
    if (x == 0.0) return Rat(0);
    int exp2 = 0;
    double m = std::frexp(x, &exp2);          // x = m * 2^exp2, |m| in [0.5,1)
    auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    exp2 -= 53;
    Rat r(mant);
    if (exp2 >= 0) r *= Rat(BigInt(1) << exp2);
    else r /= Rat(BigInt(1) << -exp2);
    return r;
}

/// Parses "p/q", "p", or a decimal literal (decimals become exact rationals).
inline Rat parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        BigInt p(s.substr(0, slash)), q(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("parse_rational: zero denominator");
        return Rat(p, q);
    }
    auto dot = s.find('.');
    auto e = s.find_first_of("eE");
    if (dot == std::string::npos && e == std::string::npos) return Rat(BigInt(s));
    // decimal, possibly with exponent
    long ex = 0;
    std::string body = s;
    if (e != std::string::npos) { ex = std::stol(s.substr(e + 1)); body = s.substr(0, e); }
    dot = body.find('.');
    std::string digits = body;
    long frac_len = 0;
    if (dot != std::string::npos) {
        frac_len = static_cast<long>(body.size() - dot - 1);
        digits = body.substr(0, dot) + body.substr(dot + 1);
    }
    if (digits.empty() || digits == "-" || digits == "+") throw std::invalid_argument("parse_rational: " + s);
    Rat r{BigInt(digits)};
    long shift = ex - frac_len;
    BigInt ten10 = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(shift < 0 ? -shift : shift));
    if (shift >= 0) r *= Rat(ten10); else r /= Rat(ten10);
    return r;
}

inline std::string rational_to_string(const Rat& r) {
    if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r).str();
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

/// Comparison policy: exact for Rat, tolerance-based for double.
template <class T>
struct scalar_policy;

template <>
struct scalar_policy<Rat> {
    static constexpr bool exact = true;
    static bool eq(const Rat& a, const Rat& b, const Rat& /*tol*/) { return a == b; }
    static Rat zero_tol(const Rat& /*scale*/) { return Rat(0); }
    static Rat from_rat(const Rat& r) { return r; }
};

template <>
struct scalar_policy<double> {
    static constexpr bool exact = false;
    static bool eq(double a, double b, double tol) { return std::fabs(a - b) <= tol; }
    static double zero_tol(double scale) { return 1e-12 * std::fabs(scale); }
    static double from_rat(const Rat& r) { return to_double(r); }
};

} // namespace rifslab

#endif
