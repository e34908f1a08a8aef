#ifndef TESTS_HELPERS_HPP
#define TESTS_HELPERS_HPP

#include "rifslab/larsson.hpp"
#include "rifslab/rifs.hpp"

namespace testsys {

using namespace rifslab;

// three uniform maps of ratio 2/5 with disjoint strips
inline HomogeneousRIFS system_a() {
    HomogeneousRIFS h;
    h.ratio = Rat(2, 5);
    for (int t : {0, 1, 2}) h.laws.push_back(make_uniform_law(Rat(t), Rat(3, 10)));
    return h;
}

// two far-apart uniform maps: the pretype iteration trims once
inline HomogeneousRIFS system_b() {
    HomogeneousRIFS h;
    h.ratio = Rat(2, 5);
    h.laws.push_back(make_uniform_law(Rat(0), Rat(1, 2)));
    h.laws.push_back(make_uniform_law(Rat(10), Rat(1, 2)));
    return h;
}

// deterministic full-interval system (attractor [0,1])
inline RIFSSpec dyadic() {
    RIFSSpec s;
    s.ratios = {Rat(1, 2), Rat(1, 2)};
    s.laws.push_back(make_uniform_law(Rat(0), Rat(0)));
    s.laws.push_back(make_uniform_law(Rat(1, 2), Rat(0)));
    return s;
}

// deterministic middle-third Cantor system
inline RIFSSpec cantor() {
    RIFSSpec s;
    s.ratios = {Rat(1, 3), Rat(1, 3)};
    s.laws.push_back(make_uniform_law(Rat(0), Rat(0)));
    s.laws.push_back(make_uniform_law(Rat(2, 3), Rat(0)));
    return s;
}

} // namespace testsys

#endif
