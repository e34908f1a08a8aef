#ifndef RIFSLAB_INTERVAL_UNION_HPP
#define RIFSLAB_INTERVAL_UNION_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

#include "rifslab/rational.hpp"

namespace rifslab {

template <class T>
struct Interval {
    T lo{}, hi{};
    bool lo_closed = false, hi_closed = false;

    bool degenerate() const { return lo == hi; }
    bool empty() const { return lo > hi || (lo == hi && !(lo_closed && hi_closed)); }
    T length() const { return hi - lo; }

    static Interval open(T a, T b) { return {a, b, false, false}; }
    static Interval closed(T a, T b) { return {a, b, true, true}; }
    static Interval point(T a) { return {a, a, true, true}; }

    bool contains(const T& x) const {
        if (x < lo || x > hi) return false;
        if (x == lo && !lo_closed) return false;
        if (x == hi && !hi_closed) return false;
        return true;
    }
    bool operator==(const Interval& o) const {
        return lo == o.lo && hi == o.hi && lo_closed == o.lo_closed && hi_closed == o.hi_closed;
    }
};

/// Finite union of disjoint sorted intervals. Touching intervals are merged
/// regardless of facing endpoint flags; a degenerate interval survives only
/// when both flags are closed.
template <class T>
class IntervalUnion {
public:
    IntervalUnion() = default;
    explicit IntervalUnion(Interval<T> iv) {
        if (!iv.empty()) parts_.push_back(iv);
    }
    explicit IntervalUnion(std::vector<Interval<T>> ivs, T merge_tol = T{}) {
        for (auto& iv : ivs)
            if (!iv.empty()) parts_.push_back(iv);
        normalize(merge_tol);
    }

    const std::vector<Interval<T>>& components() const { return parts_; }
    std::size_t size() const { return parts_.size(); }
    bool empty() const { return parts_.empty(); }

    T measure() const {
        T m{};
        for (const auto& p : parts_) m += p.length();
        return m;
    }

    bool contains(const T& x) const {
        for (const auto& p : parts_) {
            if (x < p.lo) return false;
            if (p.contains(x)) return true;
        }
        return false;
    }

    /// Set containment, exact on endpoints.
    bool contains(const IntervalUnion& other) const {
        for (const auto& b : other.parts_) {
            bool ok = false;
            for (const auto& a : parts_) {
                bool lo_ok = a.lo < b.lo || (a.lo == b.lo && (a.lo_closed || !b.lo_closed));
                bool hi_ok = b.hi < a.hi || (b.hi == a.hi && (a.hi_closed || !b.hi_closed));
                if (lo_ok && hi_ok) { ok = true; break; }
            }
            if (!ok) return false;
        }
        return true;
    }

    void add(Interval<T> iv, T merge_tol = T{}) {
        if (iv.empty()) return;
        parts_.push_back(iv);
        normalize(merge_tol);
    }

    IntervalUnion unite(const IntervalUnion& other, T merge_tol = T{}) const {
        std::vector<Interval<T>> all = parts_;
        all.insert(all.end(), other.parts_.begin(), other.parts_.end());
        return IntervalUnion(std::move(all), merge_tol);
    }

    IntervalUnion intersect(const IntervalUnion& other, T merge_tol = T{}) const {
        std::vector<Interval<T>> out;
        for (const auto& a : parts_) {
            for (const auto& b : other.parts_) {
                if (b.lo > a.hi) break;
                Interval<T> r;
                if (a.lo > b.lo) { r.lo = a.lo; r.lo_closed = a.lo_closed; }
                else if (b.lo > a.lo) { r.lo = b.lo; r.lo_closed = b.lo_closed; }
                else { r.lo = a.lo; r.lo_closed = a.lo_closed && b.lo_closed; }
                if (a.hi < b.hi) { r.hi = a.hi; r.hi_closed = a.hi_closed; }
                else if (b.hi < a.hi) { r.hi = b.hi; r.hi_closed = b.hi_closed; }
                else { r.hi = a.hi; r.hi_closed = a.hi_closed && b.hi_closed; }
                if (!r.empty()) out.push_back(r);
            }
        }
        return IntervalUnion(std::move(out), merge_tol);
    }

    /// Set difference this \ other.
    IntervalUnion subtract(const IntervalUnion& other) const {
        std::vector<Interval<T>> out;
        for (const auto& a : parts_) {
            std::vector<Interval<T>> rem{a};
            for (const auto& b : other.parts_) {
                std::vector<Interval<T>> next;
                for (const auto& r : rem) {
                    if (b.hi < r.lo || b.lo > r.hi) { next.push_back(r); continue; }
                    Interval<T> left{r.lo, b.lo, r.lo_closed, !b.lo_closed};
                    Interval<T> right{b.hi, r.hi, !b.hi_closed, r.hi_closed};
                    if (b.lo < r.lo || (b.lo == r.lo && (b.lo_closed || !r.lo_closed))) left = {};
                    if (b.hi > r.hi || (b.hi == r.hi && (b.hi_closed || !r.hi_closed))) right = {};
                    if (!left.empty() && !(left.lo == left.hi && !(left.lo_closed && left.hi_closed)))
                        if (left.lo < left.hi || (left.lo == left.hi && left.lo_closed && left.hi_closed))
                            next.push_back(left);
                    if (!right.empty())
                        if (right.lo < right.hi || (right.lo == right.hi && right.lo_closed && right.hi_closed))
                            next.push_back(right);
                }
                rem = std::move(next);
            }
            out.insert(out.end(), rem.begin(), rem.end());
        }
        IntervalUnion res;
        std::sort(out.begin(), out.end(), [](const Interval<T>& x, const Interval<T>& y) { return x.lo < y.lo; });
        res.parts_ = std::move(out);   // pieces are separated by `other`; no merge pass
        return res;
    }

    /// Image under x -> a*x + c with a > 0.
    IntervalUnion affine(const T& a, const T& c) const {
        IntervalUnion out;
        out.parts_.reserve(parts_.size());
        for (const auto& p : parts_)
            out.parts_.push_back({a * p.lo + c, a * p.hi + c, p.lo_closed, p.hi_closed});
        return out;
    }

    bool equals(const IntervalUnion& other, T tol = T{}) const {
        if (parts_.size() != other.parts_.size()) return false;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (!scalar_policy<T>::eq(parts_[i].lo, other.parts_[i].lo, tol)) return false;
            if (!scalar_policy<T>::eq(parts_[i].hi, other.parts_[i].hi, tol)) return false;
            if (parts_[i].lo_closed != other.parts_[i].lo_closed) return false;
            if (parts_[i].hi_closed != other.parts_[i].hi_closed) return false;
        }
        return true;
    }

    /// Equality of closures: endpoint flags ignored (boundary is measure zero).
    bool equals_closure(const IntervalUnion& other, T tol = T{}) const {
        if (parts_.size() != other.parts_.size()) return false;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (!scalar_policy<T>::eq(parts_[i].lo, other.parts_[i].lo, tol)) return false;
            if (!scalar_policy<T>::eq(parts_[i].hi, other.parts_[i].hi, tol)) return false;
        }
        return true;
    }

    IntervalUnion closure() const {
        IntervalUnion out = *this;
        for (auto& p : out.parts_) { p.lo_closed = p.hi_closed = true; }
        return out;
    }

    bool operator==(const IntervalUnion& other) const { return equals(other); }

private:
    void normalize(T merge_tol) {
        std::sort(parts_.begin(), parts_.end(),
                  [](const Interval<T>& x, const Interval<T>& y) {
                      return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
                  });
        std::vector<Interval<T>> out;
        for (auto& p : parts_) {
            if (!out.empty() && p.lo - out.back().hi <= merge_tol) {
                auto& b = out.back();
                if (p.lo == b.lo) b.lo_closed = b.lo_closed || p.lo_closed;
                if (p.hi > b.hi) { b.hi = p.hi; b.hi_closed = p.hi_closed; }
                else if (p.hi == b.hi) b.hi_closed = b.hi_closed || p.hi_closed;
            } else {
                out.push_back(p);
            }
        }
        parts_ = std::move(out);
    }

    std::vector<Interval<T>> parts_;
};

using RatIntervalUnion = IntervalUnion<Rat>;

} // namespace rifslab

#endif
