#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "bethe/rational.hpp"

namespace bethe::grassmann {

// Exact finite exterior algebra over the generators of one or more
// supermatrices.  Generators psi_{k,l} / psibar_{k,l} are identified by
// (tag, bar, k, l); the canonical total order is lexicographic on
// (tag, l, k, bar) with the barred generator first.  Elements are maps
// from generator subsets (bitmasks in canonical ascending order) to
// coefficients; products resolve to canonical form by counting
// transpositions.  Coefficients are exact Gaussian rationals or complex
// doubles, selected by template parameter.

struct Gen {
    std::uint8_t tag = 0;
    bool bar = false;
    int k = 1;  // 1..m
    int l = 1;  // 1..n
};

inline bool gen_less(const Gen& a, const Gen& b) {
    if (a.tag != b.tag) return a.tag < b.tag;
    if (a.l != b.l) return a.l < b.l;
    if (a.k != b.k) return a.k < b.k;
    return a.bar && !b.bar;  // bar < unbar
}

inline bool gen_eq(const Gen& a, const Gen& b) {
    return a.tag == b.tag && a.bar == b.bar && a.k == b.k && a.l == b.l;
}

class Universe {
  public:
    Universe() = default;
    explicit Universe(std::vector<Gen> gens) : gens_(std::move(gens)) {
        std::sort(gens_.begin(), gens_.end(), gen_less);
        if (gens_.size() > 63) throw std::length_error("too many Grassmann generators");
    }

    // all 2mn generators of one supermatrix
    static Universe supermatrix(std::uint8_t tag, int m, int n) {
        std::vector<Gen> g;
        for (int l = 1; l <= n; ++l)
            for (int k = 1; k <= m; ++k)
                for (bool bar : {true, false}) g.push_back({tag, bar, k, l});
        return Universe(std::move(g));
    }

    static Universe join(const Universe& a, const Universe& b) {
        std::vector<Gen> g = a.gens_;
        g.insert(g.end(), b.gens_.begin(), b.gens_.end());
        return Universe(std::move(g));
    }

    int size() const { return static_cast<int>(gens_.size()); }
    const Gen& gen(int i) const { return gens_[static_cast<std::size_t>(i)]; }

    int index_of(const Gen& g) const {
        auto it = std::lower_bound(gens_.begin(), gens_.end(), g, gen_less);
        if (it == gens_.end() || !gen_eq(*it, g))
            throw std::out_of_range("generator not in universe");
        return static_cast<int>(it - gens_.begin());
    }

  private:
    std::vector<Gen> gens_;
};

// parity of the merge of two disjoint ascending monomials
inline int merge_sign(std::uint64_t a, std::uint64_t b) {
    int t = 0;
    std::uint64_t bb = b;
    while (bb) {
        const int p = std::countr_zero(bb);
        bb &= bb - 1;
        t += std::popcount(a >> (p + 1));
    }
    return (t & 1) ? -1 : 1;
}

template <class C>
class Element {
  public:
    Element() = default;
    explicit Element(const Universe* u) : u_(u) {}

    static Element one(const Universe* u) {
        Element e(u);
        e.terms_[0] = C(1);
        return e;
    }

    static Element generator(const Universe* u, const Gen& g) {
        Element e(u);
        e.terms_[std::uint64_t(1) << u->index_of(g)] = C(1);
        return e;
    }

    const Universe* universe() const { return u_; }
    const std::map<std::uint64_t, C>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    C coefficient(std::uint64_t mask) const {
        auto it = terms_.find(mask);
        return it == terms_.end() ? C(0) : it->second;
    }

    void add_term(std::uint64_t mask, const C& c) {
        auto it = terms_.find(mask);
        if (it == terms_.end()) {
            if (!coeff_is_zero(c)) terms_[mask] = c;
        } else {
            it->second = it->second + c;
            if (coeff_is_zero(it->second)) terms_.erase(it);
        }
    }

    friend Element operator+(const Element& a, const Element& b) {
        Element r = a;
        for (const auto& [m, c] : b.terms_) r.add_term(m, c);
        return r;
    }
    friend Element operator-(const Element& a, const Element& b) {
        Element r = a;
        for (const auto& [m, c] : b.terms_) r.add_term(m, -c);
        return r;
    }
    friend Element operator*(const C& s, const Element& a) {
        Element r(a.u_);
        if (coeff_is_zero(s)) return r;
        for (const auto& [m, c] : a.terms_) r.add_term(m, s * c);
        return r;
    }
    friend Element operator*(const Element& a, const Element& b) {
        Element r(a.u_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                if (ma & mb) continue;  // repeated generator
                const C prod = ca * cb;
                const C signed_prod = (merge_sign(ma, mb) < 0) ? C(-prod) : prod;
                r.add_term(ma | mb, signed_prod);
            }
        return r;
    }

    // re-expresses the element in a larger universe (the canonical order is
    // global, so the bit remap is monotone and introduces no signs)
    Element embedded(const Universe* big) const {
        std::vector<int> remap(static_cast<std::size_t>(u_->size()));
        for (int i = 0; i < u_->size(); ++i)
            remap[static_cast<std::size_t>(i)] = big->index_of(u_->gen(i));
        Element r(big);
        for (const auto& [m, c] : terms_) {
            std::uint64_t mm = m, nm = 0;
            while (mm) {
                const int p = std::countr_zero(mm);
                mm &= mm - 1;
                nm |= std::uint64_t(1) << remap[static_cast<std::size_t>(p)];
            }
            r.add_term(nm, c);
        }
        return r;
    }

  private:
    const Universe* u_ = nullptr;
    std::map<std::uint64_t, C> terms_;
};

// int F dpsibar_{k,l} dpsi_{k,l} = -F_3 where
// F = F_0 + F_1 psibar + F_2 psi + F_3 psibar psi
template <class C>
Element<C> berezin(const Element<C>& e, std::uint8_t tag, int k, int l) {
    const Universe* u = e.universe();
    const int pb = u->index_of({tag, true, k, l});
    const int pu = u->index_of({tag, false, k, l});
    const std::uint64_t bb = std::uint64_t(1) << pb;
    const std::uint64_t bu = std::uint64_t(1) << pu;
    Element<C> r(u);
    for (const auto& [m, c] : e.terms()) {
        if (!(m & bb) || !(m & bu)) continue;
        // bring psibar then psi to the front: count crossed generators
        int t = std::popcount(m & (bb - 1));
        t += std::popcount((m ^ bb) & (bu - 1));
        const C val = (t & 1) ? c : C(-c);  // extra -1 from the convention
        r.add_term(m & ~(bb | bu), val);
    }
    return r;
}

// applies all mn pair integrals of DPsi for one supermatrix
template <class C>
Element<C> berezin_all(const Element<C>& e, std::uint8_t tag, int m, int n) {
    Element<C> r = e;
    for (int k = 1; k <= m; ++k)
        for (int l = 1; l <= n; ++l) r = berezin(r, tag, k, l);
    return r;
}

// Psi_{abar, a, l}: ordered product of psibar over abar then psi over a
// (subsets as bitmasks over {1..m}, bit k-1 <-> index k)
template <class C>
Element<C> monomial(const Universe* u, std::uint8_t tag, unsigned abar, unsigned a, int l) {
    Element<C> r = Element<C>::one(u);
    for (int k = 1; k <= 16; ++k)
        if (abar & (1u << (k - 1))) r = r * Element<C>::generator(u, {tag, true, k, l});
    for (int k = 1; k <= 16; ++k)
        if (a & (1u << (k - 1))) r = r * Element<C>::generator(u, {tag, false, k, l});
    return r;
}

// Psi_{abar, a} = prod_l Psi_{abar_l, a_l, l}
template <class C>
Element<C> monomial_tuple(const Universe* u, std::uint8_t tag,
                          const std::vector<unsigned>& abar, const std::vector<unsigned>& a) {
    Element<C> r = Element<C>::one(u);
    for (std::size_t l = 0; l < a.size(); ++l)
        r = r * monomial<C>(u, tag, abar[l], a[l], static_cast<int>(l) + 1);
    return r;
}

// Psi^{(l)}_{abar,a} = prod_j psibar_{abar_j, l} psi_{a_j, l}, |abar| = |a|
template <class C>
Element<C> monomial_paired(const Universe* u, std::uint8_t tag, unsigned abar, unsigned a,
                           int l) {
    std::vector<int> kb, ka;
    for (int k = 1; k <= 16; ++k) {
        if (abar & (1u << (k - 1))) kb.push_back(k);
        if (a & (1u << (k - 1))) ka.push_back(k);
    }
    if (kb.size() != ka.size()) throw std::invalid_argument("paired monomial needs |abar|=|a|");
    Element<C> r = Element<C>::one(u);
    for (std::size_t j = 0; j < kb.size(); ++j) {
        r = r * Element<C>::generator(u, {tag, true, kb[j], l});
        r = r * Element<C>::generator(u, {tag, false, ka[j], l});
    }
    return r;
}

// exp of an even nilpotent element (no constant term)
template <class C>
Element<C> exp_nilpotent(const Element<C>& x) {
    if (!coeff_is_zero(x.coefficient(0)))
        throw std::invalid_argument("exp_nilpotent: nonzero constant term");
    Element<C> acc = Element<C>::one(x.universe());
    Element<C> term = Element<C>::one(x.universe());
    for (long long k = 1; k <= x.universe()->size(); ++k) {
        const Element<C> prod = term * x;
        Element<C> next(x.universe());
        for (const auto& [m, c] : prod.terms()) next.add_term(m, coeff_div_int(c, k));
        term = std::move(next);  // x^k / k!
        if (term.is_zero()) break;
        acc = acc + term;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// combinatorial signs on subset tuples

inline int popcnt(unsigned x) { return std::popcount(x); }

inline int tuple_weight(const std::vector<unsigned>& a) {
    int w = 0;
    for (unsigned s : a) w += popcnt(s);
    return w;
}

// sgn(a) = prod_l (-1)^{|a_l|(|a_l|-1)/2}
inline int sgn_tuple(const std::vector<unsigned>& a) {
    int s = 1;
    for (unsigned al : a) {
        const int c = popcnt(al);
        if ((c * (c - 1) / 2) & 1) s = -s;
    }
    return s;
}

// s(abar,a) = prod_{l<l'} (-1)^{(|abar_l|+|a_l|)(|abar_l'|+|a_l'|)}
inline int s_factor(const std::vector<unsigned>& abar, const std::vector<unsigned>& a) {
    const std::size_t n = a.size();
    int s = 1;
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t lp = l + 1; lp < n; ++lp) {
            const int w1 = popcnt(abar[l]) + popcnt(a[l]);
            const int w2 = popcnt(abar[lp]) + popcnt(a[lp]);
            if ((w1 * w2) & 1) s = -s;
        }
    return s;
}

inline bool addable(const std::vector<unsigned>& a, const std::vector<unsigned>& b) {
    for (std::size_t l = 0; l < a.size(); ++l)
        if (a[l] & b[l]) return false;
    return true;
}

inline std::vector<unsigned> tuple_union(const std::vector<unsigned>& a,
                                         const std::vector<unsigned>& b) {
    std::vector<unsigned> c(a.size());
    for (std::size_t l = 0; l < a.size(); ++l) c[l] = a[l] | b[l];
    return c;
}

inline std::vector<unsigned> tuple_complement(const std::vector<unsigned>& a, int m) {
    const unsigned full = (1u << m) - 1u;
    std::vector<unsigned> c(a.size());
    for (std::size_t l = 0; l < a.size(); ++l) c[l] = full & ~a[l];
    return c;
}

}  // namespace bethe::grassmann
