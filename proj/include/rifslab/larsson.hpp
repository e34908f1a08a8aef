#ifndef RIFSLAB_LARSSON_HPP
#define RIFSLAB_LARSSON_HPP

#include "rifslab/errors.hpp"
#include "rifslab/rifs.hpp"

namespace rifslab {

/// Two-map homogeneous family: intervals of length a placed uniformly inside
/// the two admissible gaps of the unit interval. Valid for 0 < a, 0 < b,
/// 3a + 2b < 1; the supporting interval is [0, 1].
inline RIFSSpec larsson_system(const Rat& a, const Rat& b) {
    if (!(a > 0) || !(b > 0) || !(3 * a + 2 * b < 1))
        throw Error(ErrorCode::InvalidParameters, "need 0 < a, 0 < b, 3a + 2b < 1");
    Rat lo1 = b, hi1 = Rat(1, 2) - 3 * a / 2;
    Rat lo2 = Rat(1, 2) + a / 2, hi2 = 1 - b - a;
    RIFSSpec spec;
    spec.mode = ArithmeticMode::rational;
    spec.ratios = {a, a};
    spec.laws.push_back(make_uniform_law((lo1 + hi1) / 2, (hi1 - lo1) / 2));
    spec.laws.push_back(make_uniform_law((lo2 + hi2) / 2, (hi2 - lo2) / 2));
    return spec;
}

inline HomogeneousRIFS larsson_homogeneous(const Rat& a, const Rat& b) {
    RIFSSpec spec = larsson_system(a, b);
    HomogeneousRIFS h;
    h.ratio = a;
    h.laws = spec.laws;
    h.mode = spec.mode;
    return h;
}

} // namespace rifslab

#endif
