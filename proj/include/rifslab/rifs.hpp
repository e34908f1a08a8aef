#ifndef RIFSLAB_RIFS_HPP
#define RIFSLAB_RIFS_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rifslab/errors.hpp"
#include "rifslab/law.hpp"
#include "rifslab/rational.hpp"

namespace rifslab {

enum class ArithmeticMode { rational, floating };

/// Node address in the L-ary construction tree; letters are 1-based.
struct Word {
    std::vector<int> letters;

    std::size_t length() const { return letters.size(); }
    bool empty() const { return letters.empty(); }
    Word child(int letter) const {
        Word w = *this;
        w.letters.push_back(letter);
        return w;
    }
    bool operator==(const Word& o) const { return letters == o.letters; }
    bool operator<(const Word& o) const { return letters < o.letters; }

    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < letters.size(); ++i) {
            if (i) s += '.';
            s += std::to_string(letters[i]);
        }
        return s.empty() ? "()" : s;
    }
};

struct RIFSSpec {
    std::vector<Rat> ratios;
    std::vector<PerturbationLaw> laws;
    ArithmeticMode mode = ArithmeticMode::rational;

    std::size_t L() const { return ratios.size(); }
};

struct HomogeneousRIFS {
    Rat ratio;  // a in (0,1)
    std::vector<PerturbationLaw> laws;
    ArithmeticMode mode = ArithmeticMode::rational;

    std::size_t L() const { return laws.size(); }

    RIFSSpec as_spec() const {
        RIFSSpec s;
        s.ratios.assign(laws.size(), ratio);
        s.laws = laws;
        s.mode = mode;
        return s;
    }
};

struct Violation {
    std::string code;  // RatioOutOfRange, DegenerateSupport, TooFewMaps, LengthMismatch, BadSampledGrid, BadDensity
    int index = -1;    // offending map, 1-based; -1 for whole-spec violations

    std::string str() const { return index < 0 ? code : code + "(" + std::to_string(index) + ")"; }
};

inline std::vector<Violation> validate_spec(const RIFSSpec& spec) {
    std::vector<Violation> out;
    if (spec.ratios.size() < 2) out.push_back({"TooFewMaps", -1});
    if (spec.ratios.size() != spec.laws.size()) {
        out.push_back({"LengthMismatch", -1});
        return out;
    }
    for (std::size_t i = 0; i < spec.ratios.size(); ++i) {
        int idx = static_cast<int>(i) + 1;
        const Rat& r = spec.ratios[i];
        if (r == 0 || boost::multiprecision::abs(r) >= 1) out.push_back({"RatioOutOfRange", idx});
        const PerturbationLaw& law = spec.laws[i];
        if (law.half_width <= 0) out.push_back({"DegenerateSupport", idx});
        if (law.shape == LawShape::sampled) {
            bool bad = law.grid.size() < 3;
            if (!bad) {
                double th = law.theta();
                if (law.grid.front().first != -th || law.grid.back().first != th) bad = true;
                for (std::size_t j = 0; j + 1 < law.grid.size() && !bad; ++j)
                    if (law.grid[j].first >= law.grid[j + 1].first) bad = true;
                for (std::size_t j = 0; j < law.grid.size() && !bad; ++j) {
                    if (law.grid[j].second < 0) bad = true;
                    if (j > 0 && j + 1 < law.grid.size() && law.grid[j].second <= 0) bad = true;
                }
            }
            if (bad) {
                out.push_back({"BadSampledGrid", idx});
                continue;
            }
            if (std::fabs(law.density_integral() - 1.0) > 1e-9) out.push_back({"BadDensity", idx});
        }
    }
    return out;
}

inline void require_valid(const RIFSSpec& spec) {
    auto v = validate_spec(spec);
    if (!v.empty()) {
        std::string msg;
        for (const auto& x : v) {
            if (!msg.empty()) msg += ", ";
            msg += x.str();
        }
        throw Error(ErrorCode::Validation, msg);
    }
}

/// Unique root of sum |r_i|^s = 1, by bisection on the decreasing sum.
inline double similarity_dimension(const std::vector<Rat>& ratios, double tol = 1e-12) {
    std::vector<double> r;
    r.reserve(ratios.size());
    for (const auto& q : ratios) r.push_back(std::fabs(to_double(q)));
    auto sum = [&](double s) {
        double v = 0;
        for (double x : r) v += std::pow(x, s);
        return v;
    };
    double hi = 1.0;
    while (sum(hi) > 1.0) hi *= 2.0;
    double lo = 0.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        (sum(mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double similarity_dimension(const RIFSSpec& spec, double tol = 1e-12) {
    return similarity_dimension(spec.ratios, tol);
}

inline double similarity_dimension(const HomogeneousRIFS& h, double tol = 1e-12) {
    // L * a^s = 1
    (void)tol;
    return std::log(static_cast<double>(h.L())) / (-std::log(to_double(h.ratio)));
}

/// Minimal compact [alpha, beta] with f_i([alpha,beta]) inside it for every
/// admissible draw. Positive ratios decouple into per-map fixed points; signed
/// ratios couple the endpoints, solved exactly after locating the attaining maps.
inline std::pair<Rat, Rat> supporting_interval(const RIFSSpec& spec) {
    // tolerates degenerate (theta = 0) laws: deterministic IFS geometry is useful
    // for control experiments even though the analysis pipeline rejects them
    const std::size_t L = spec.L();
    if (L == 0) throw Error(ErrorCode::Validation, "supporting_interval: empty system");
    bool all_positive = true;
    for (const auto& r : spec.ratios)
        if (r < 0) all_positive = false;

    if (all_positive) {
        Rat alpha, beta;
        for (std::size_t i = 0; i < L; ++i) {
            Rat lo = (spec.laws[i].center - spec.laws[i].half_width) / (1 - spec.ratios[i]);
            Rat hi = (spec.laws[i].center + spec.laws[i].half_width) / (1 - spec.ratios[i]);
            if (i == 0 || lo < alpha) alpha = lo;
            if (i == 0 || hi > beta) beta = hi;
        }
        return {alpha, beta};
    }

    // lower_i(A,B) = r_i*(r_i>0 ? A : B) + t_i - theta_i
    // upper_i(A,B) = r_i*(r_i>0 ? B : A) + t_i + theta_i
    auto lower = [&](std::size_t i, const Rat& A, const Rat& B) {
        return spec.ratios[i] * (spec.ratios[i] > 0 ? A : B) + spec.laws[i].center - spec.laws[i].half_width;
    };
    auto upper = [&](std::size_t i, const Rat& A, const Rat& B) {
        return spec.ratios[i] * (spec.ratios[i] > 0 ? B : A) + spec.laws[i].center + spec.laws[i].half_width;
    };
    auto verify = [&](const Rat& A, const Rat& B) {
        if (A > B) return false;
        for (std::size_t i = 0; i < L; ++i)
            if (lower(i, A, B) < A || upper(i, A, B) > B) return false;
        return true;
    };
    // candidate (p,q): alpha attained by map p, beta by map q; 2x2 exact solve
    auto solve = [&](std::size_t p, std::size_t q, Rat& A, Rat& B) {
        // A = cpA*A + cpB*B + dp ; B = cqA*A + cqB*B + dq
        Rat cpA = spec.ratios[p] > 0 ? spec.ratios[p] : Rat(0);
        Rat cpB = spec.ratios[p] > 0 ? Rat(0) : spec.ratios[p];
        Rat dp = spec.laws[p].center - spec.laws[p].half_width;
        Rat cqB = spec.ratios[q] > 0 ? spec.ratios[q] : Rat(0);
        Rat cqA = spec.ratios[q] > 0 ? Rat(0) : spec.ratios[q];
        Rat dq = spec.laws[q].center + spec.laws[q].half_width;
        Rat det = (1 - cpA) * (1 - cqB) - cpB * cqA;
        if (det == 0) return false;
        A = (dp * (1 - cqB) + cpB * dq) / det;
        B = (dq * (1 - cpA) + cqA * dp) / det;
        return true;
    };

    // locate attaining maps by contraction iteration in double
    double A = 0, B = 0;
    for (int it = 0; it < 2000; ++it) {
        double nA = 0, nB = 0;
        for (std::size_t i = 0; i < L; ++i) {
            double r = to_double(spec.ratios[i]);
            double t = to_double(spec.laws[i].center), th = to_double(spec.laws[i].half_width);
            double lo = r * (r > 0 ? A : B) + t - th;
            double hi = r * (r > 0 ? B : A) + t + th;
            if (i == 0 || lo < nA) nA = lo;
            if (i == 0 || hi > nB) nB = hi;
        }
        A = nA;
        B = nB;
    }
    std::size_t p = 0, q = 0;
    {
        double bestA = 0, bestB = 0;
        for (std::size_t i = 0; i < L; ++i) {
            double r = to_double(spec.ratios[i]);
            double t = to_double(spec.laws[i].center), th = to_double(spec.laws[i].half_width);
            double lo = r * (r > 0 ? A : B) + t - th;
            double hi = r * (r > 0 ? B : A) + t + th;
            if (i == 0 || lo < bestA) { bestA = lo; p = i; }
            if (i == 0 || hi > bestB) { bestB = hi; q = i; }
        }
    }
    Rat Ar, Br;
    if (solve(p, q, Ar, Br) && verify(Ar, Br)) return {Ar, Br};
    // ties near the fixed point: try every attaining pair
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j)
            if (solve(i, j, Ar, Br) && verify(Ar, Br)) return {Ar, Br};
    throw Error(ErrorCode::NoConvergence, "supporting_interval: no verified fixed interval");
}

inline std::pair<Rat, Rat> supporting_interval(const HomogeneousRIFS& h) {
    return supporting_interval(h.as_spec());
}

} // namespace rifslab

#endif
