#ifndef RIFSLAB_TRANSFORMS_HPP
#define RIFSLAB_TRANSFORMS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

#include "rifslab/cylinders.hpp"
#include "rifslab/errors.hpp"
#include "rifslab/rifs.hpp"

namespace rifslab {

inline constexpr std::size_t kDefaultLawGrid = std::size_t(1) << 12;
inline constexpr std::size_t kDefaultMapCap = 4096;

struct SubsystemSelection {
    int depth = 1;
    std::vector<Word> words;
};

inline Rat word_ratio(const RIFSSpec& spec, const Word& word) {
    Rat r(1);
    for (int letter : word.letters) {
        if (letter < 1 || letter > static_cast<int>(spec.L()))
            throw Error(ErrorCode::InvalidWord, "letter out of range in " + word.str());
        r *= spec.ratios[static_cast<std::size_t>(letter - 1)];
    }
    return r;
}

/// Pushforward law of the composed translation T_w: center and half-width are
/// exact geometric sums; the shape is the convolution of the letter laws
/// scaled by the ratio prefix products.
inline PerturbationLaw word_law(const RIFSSpec& spec, const Word& word,
                                std::size_t grid = kDefaultLawGrid) {
    if (word.empty()) throw Error(ErrorCode::InvalidWord, "empty word has no law");
    std::vector<std::pair<const PerturbationLaw*, Rat>> terms;
    Rat coeff(1);
    for (int letter : word.letters) {
        if (letter < 1 || letter > static_cast<int>(spec.L()))
            throw Error(ErrorCode::InvalidWord, "letter out of range in " + word.str());
        terms.push_back({&spec.laws[static_cast<std::size_t>(letter - 1)], coeff});
        coeff *= spec.ratios[static_cast<std::size_t>(letter - 1)];
    }
    return combine_laws(terms, grid);
}

/// {f_w : w in selection}; the level-n iterate restricted to chosen words.
inline RIFSSpec subsystem(const RIFSSpec& spec, const SubsystemSelection& sel,
                          std::size_t grid = kDefaultLawGrid) {
    if (sel.words.size() < 2) throw Error(ErrorCode::InvalidWord, "subsystem needs at least 2 words");
    std::set<Word> seen;
    RIFSSpec out;
    out.mode = spec.mode;
    for (const auto& w : sel.words) {
        if (static_cast<int>(w.length()) != sel.depth)
            throw Error(ErrorCode::InvalidWord, "word " + w.str() + " has wrong length");
        if (!seen.insert(w).second) throw Error(ErrorCode::InvalidWord, "duplicate word " + w.str());
        out.ratios.push_back(word_ratio(spec, w));
        out.laws.push_back(word_law(spec, w, grid));
    }
    return out;
}

struct PositivizeResult {
    RIFSSpec spec;            // all ratios positive
    int depth = 1;            // n of the underlying iterate
    std::vector<Word> words;  // source word per output map (negative words carry the sign-fixing prefix)
    double achieved_s = 0;
};

/// Sign correction: take the depth-n iterate and prepend a fixed negative-ratio
/// map to every negative-ratio word. n is the smallest depth keeping the
/// dimension within eps of the original.
inline PositivizeResult positivize(const RIFSSpec& spec, double eps,
                                   std::size_t grid = kDefaultLawGrid) {
    require_valid(spec);
    if (eps <= 0) throw Error(ErrorCode::InvalidParameters, "eps must be positive");
    PositivizeResult res;
    bool any_negative = false;
    for (const auto& r : spec.ratios)
        if (r < 0) any_negative = true;
    if (!any_negative) {
        res.spec = spec;
        res.depth = 1;
        for (std::size_t i = 0; i < spec.L(); ++i) res.words.push_back(Word{{static_cast<int>(i) + 1}});
        res.achieved_s = similarity_dimension(spec);
        return res;
    }
    double s = similarity_dimension(spec);
    std::size_t p = 0;
    while (spec.ratios[p] >= 0) ++p;  // the sign-fixing map
    double sum = 0;
    for (const auto& r : spec.ratios) sum += std::pow(std::fabs(to_double(r)), s - eps);
    double c = -(s - eps) * std::log(std::fabs(to_double(spec.ratios[p])));
    // smallest n with n*log(sum) >= c, up to roundoff
    int n = std::max(1, static_cast<int>(std::ceil(c / std::log(sum) - 1e-9)));

    const std::size_t L = spec.L();
    res.depth = n;
    res.spec.mode = spec.mode;
    std::vector<Word> level{{Word{}}};
    for (int d = 0; d < n; ++d) {
        std::vector<Word> next;
        next.reserve(level.size() * L);
        for (const auto& w : level)
            for (int i = 1; i <= static_cast<int>(L); ++i) next.push_back(w.child(i));
        level = std::move(next);
    }
    for (auto& w : level) {
        Rat r = word_ratio(spec, w);
        Word use = w;
        if (r < 0) {
            use = Word{};
            use.letters.push_back(static_cast<int>(p) + 1);
            use.letters.insert(use.letters.end(), w.letters.begin(), w.letters.end());
            r = word_ratio(spec, use);
        }
        res.spec.ratios.push_back(r);
        res.spec.laws.push_back(word_law(spec, use, grid));
        res.words.push_back(use);
    }
    res.achieved_s = similarity_dimension(res.spec);
    return res;
}

struct HomogenizeResult {
    HomogeneousRIFS h;
    SubsystemSelection selection;
    double achieved_s = 0;
    int k = 0;
    std::vector<int> composition;  // letter multiplicities (k_1..k_L)
};

namespace detail {
inline BigInt multinomial(int k, const std::vector<int>& parts) {
    BigInt out = 1;
    int used = 0;
    for (int p : parts) {
        // out *= C(used + p, p)
        for (int j = 1; j <= p; ++j) {
            out *= used + j;
            out /= j;
        }
        used += p;
    }
    (void)k;
    return out;
}

inline void enumerate_multiset_words(const std::vector<int>& remaining, Word& cur,
                                     std::vector<Word>& out) {
    bool done = true;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
        if (remaining[i] > 0) {
            done = false;
            auto rem = remaining;
            --rem[i];
            cur.letters.push_back(static_cast<int>(i) + 1);
            enumerate_multiset_words(rem, cur, out);
            cur.letters.pop_back();
        }
    }
    if (done) out.push_back(cur);
}
} // namespace detail

/// Equal-ratio subsystem: words sharing the letter multiset (k_1..k_L) with
/// k_i ~ k * r_i^s, searched over k until the dimension loss is under eps.
inline HomogenizeResult homogenize(const RIFSSpec& input, double eps,
                                   std::size_t grid = kDefaultLawGrid,
                                   std::size_t map_cap = kDefaultMapCap) {
    require_valid(input);
    if (eps <= 0) throw Error(ErrorCode::InvalidParameters, "eps must be positive");

    RIFSSpec spec = input;
    bool any_negative = false;
    for (const auto& r : spec.ratios)
        if (r < 0) any_negative = true;
    if (any_negative) spec = positivize(input, eps, grid).spec;

    double s_target = similarity_dimension(input);
    const std::size_t L = spec.L();

    // already homogeneous: keep every map
    bool homogeneous = true;
    for (const auto& r : spec.ratios)
        if (r != spec.ratios[0]) homogeneous = false;
    if (homogeneous) {
        HomogenizeResult res;
        res.h.ratio = spec.ratios[0];
        res.h.laws = spec.laws;
        res.h.mode = spec.mode;
        res.k = 1;
        res.composition.assign(L, 0);
        res.selection.depth = 1;
        for (std::size_t i = 0; i < L; ++i) res.selection.words.push_back(Word{{static_cast<int>(i) + 1}});
        res.achieved_s = similarity_dimension(spec);
        return res;
    }

    double s = similarity_dimension(spec);
    std::vector<double> p(L);
    for (std::size_t i = 0; i < L; ++i) p[i] = std::pow(to_double(spec.ratios[i]), s);

    for (int k = 1; k <= 100000; ++k) {
        std::vector<int> parts(L);
        std::vector<std::pair<double, std::size_t>> fracs(L);
        int total = 0;
        for (std::size_t i = 0; i < L; ++i) {
            double x = k * p[i];
            parts[i] = static_cast<int>(std::llround(x));
            fracs[i] = {x - std::floor(x), i};
            total += parts[i];
        }
        // distribute the rounding remainder toward the largest fractional parts
        while (total != k) {
            if (total < k) {
                std::size_t best = 0;
                double bf = -1;
                for (std::size_t i = 0; i < L; ++i)
                    if (parts[i] == static_cast<int>(std::floor(k * p[i])) && fracs[i].first > bf) {
                        bf = fracs[i].first;
                        best = i;
                    }
                ++parts[best];
                ++total;
            } else {
                std::size_t best = 0;
                double bf = 2;
                for (std::size_t i = 0; i < L; ++i)
                    if (parts[i] > 0 && fracs[i].first < bf) {
                        bf = fracs[i].first;
                        best = i;
                    }
                --parts[best];
                --total;
            }
        }
        BigInt count = detail::multinomial(k, parts);
        if (count < 2) continue;
        Rat rho(1);
        for (std::size_t i = 0; i < L; ++i)
            for (int j = 0; j < parts[i]; ++j) rho *= spec.ratios[i];
        double log_count = std::lgamma(static_cast<double>(k) + 1.0);
        for (int part : parts) log_count -= std::lgamma(static_cast<double>(part) + 1.0);
        double s_k = log_count / (-std::log(to_double(rho)));
        if (s_k > s_target - eps) {
            if (count > BigInt(map_cap))
                throw Error(ErrorCode::BudgetExceeded,
                            "homogenize needs " + count.str() + " maps (cap " + std::to_string(map_cap) +
                                "); relax eps");
            HomogenizeResult res;
            res.k = k;
            res.composition = parts;
            res.achieved_s = s_k;
            res.h.ratio = rho;
            res.h.mode = spec.mode;
            res.selection.depth = k;
            Word cur;
            detail::enumerate_multiset_words(parts, cur, res.selection.words);
            res.h.laws.reserve(res.selection.words.size());
            for (const auto& w : res.selection.words) res.h.laws.push_back(word_law(spec, w, grid));
            return res;
        }
        if (count > BigInt(map_cap))
            throw Error(ErrorCode::BudgetExceeded,
                        "homogenize map count " + count.str() + " passed the cap before reaching eps");
    }
    throw Error(ErrorCode::BudgetExceeded, "homogenize: no k within search bound");
}

/// System of pairwise differences: attractor is C' - C'' for two independent
/// copies; dimension doubles.
inline HomogeneousRIFS difference_system(const HomogeneousRIFS& h, std::size_t grid = kDefaultLawGrid) {
    if (h.L() < 2) throw Error(ErrorCode::Validation, "difference_system needs L >= 2");
    if (h.ratio <= 0 || h.ratio >= 1) throw Error(ErrorCode::Validation, "ratio must be in (0,1)");
    HomogeneousRIFS out;
    out.ratio = h.ratio;
    out.mode = h.mode;
    out.laws.reserve(h.L() * h.L());
    for (std::size_t i = 0; i < h.L(); ++i)
        for (std::size_t j = 0; j < h.L(); ++j)
            out.laws.push_back(difference_law(h.laws[i], h.laws[j], grid));
    return out;
}

/// Exact composition of the block maps along `word`, reading draws from the
/// original tree starting at `state`; returns (ratio, translation, end state).
struct BlockMap {
    Rat R, T;
    std::uint64_t state;
};

inline BlockMap apply_block(const RIFSSpec& spec, const RealizationTree& tree, BlockMap from,
                            const Word& word) {
    for (int letter : word.letters) {
        Rat D = rat_from_double(tree.draw_at(from.state, letter));
        from.T += from.R * D;
        from.R *= spec.ratios[static_cast<std::size_t>(letter - 1)];
        from.state = RealizationTree::child_state(from.state, letter);
    }
    return from;
}

/// Level-n cylinders of the word subsystem driven by the original realization
/// tree (blocks read the tree at their own node addresses).
inline std::vector<std::pair<Rat, Rat>> subsystem_cylinders(const RIFSSpec& spec,
                                                            const std::vector<Word>& words,
                                                            const RealizationTree& tree, int level) {
    auto [alpha, beta] = supporting_interval(spec);
    std::vector<std::pair<Rat, Rat>> out;
    std::vector<BlockMap> frontier{{Rat(1), Rat(0), tree.root_state()}};
    for (int d = 0; d < level; ++d) {
        std::vector<BlockMap> next;
        next.reserve(frontier.size() * words.size());
        for (const auto& fr : frontier)
            for (const auto& w : words) next.push_back(apply_block(spec, tree, fr, w));
        frontier = std::move(next);
    }
    out.reserve(frontier.size());
    for (const auto& fr : frontier) {
        Rat lo = fr.R * alpha + fr.T, hi = fr.R * beta + fr.T;
        if (lo > hi) std::swap(lo, hi);
        out.push_back({lo, hi});
    }
    return out;
}

} // namespace rifslab

#endif
