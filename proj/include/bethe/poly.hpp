#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace bethe {

// Sparse integer polynomials in the commuting indeterminates x_{jk} = x_{kj},
// 1 <= j <= k <= m, m <= 4.  Partial derivatives on symmetric-matrix
// functions commute, which is what turns the cofactor and column-expansion
// operator identities into polynomial identities over these variables.
// Monomials pack one 4-bit exponent per variable into a 64-bit key.
class SymPoly {
  public:
    static int var_id(int j, int k, int m) {
        if (j > k) std::swap(j, k);
        // row-major upper triangle
        int id = 0;
        for (int r = 1; r < j; ++r) id += m - r + 1;
        return id + (k - j);
    }

    SymPoly() = default;

    static SymPoly constant(long long c) {
        SymPoly p;
        if (c != 0) p.terms_[0] = c;
        return p;
    }

    static SymPoly variable(int j, int k, int m) {
        SymPoly p;
        p.terms_[std::uint64_t(1) << (4 * var_id(j, k, m))] = 1;
        return p;
    }

    bool is_zero() const { return terms_.empty(); }
    bool operator==(const SymPoly& o) const { return terms_ == o.terms_; }

    friend SymPoly operator+(const SymPoly& a, const SymPoly& b) {
        SymPoly r = a;
        for (const auto& [m, c] : b.terms_) r.add(m, c);
        return r;
    }
    friend SymPoly operator-(const SymPoly& a, const SymPoly& b) {
        SymPoly r = a;
        for (const auto& [m, c] : b.terms_) r.add(m, -c);
        return r;
    }
    friend SymPoly operator*(const SymPoly& a, const SymPoly& b) {
        SymPoly r;
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add(add_exps(ma, mb), ca * cb);
        return r;
    }
    friend SymPoly operator*(long long s, const SymPoly& a) {
        SymPoly r;
        for (const auto& [m, c] : a.terms_) r.add(m, s * c);
        return r;
    }

  private:
    static std::uint64_t add_exps(std::uint64_t a, std::uint64_t b) {
        // exponents stay below 16 for the degrees used here
        for (int v = 0; v < 16; ++v) {
            const std::uint64_t ea = (a >> (4 * v)) & 0xF, eb = (b >> (4 * v)) & 0xF;
            if (ea + eb > 0xF) throw std::overflow_error("SymPoly exponent overflow");
        }
        return a + b;
    }
    void add(std::uint64_t m, long long c) {
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            if (c != 0) terms_[m] = c;
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }
    std::map<std::uint64_t, long long> terms_;
};

// determinant of a small matrix of polynomials, permutation expansion
inline SymPoly poly_det(const std::vector<std::vector<SymPoly>>& M) {
    const int n = static_cast<int>(M.size());
    if (n == 0) return SymPoly::constant(1);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    SymPoly det;
    do {
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)]) ++inv;
        SymPoly t = SymPoly::constant((inv & 1) ? -1 : 1);
        for (int i = 0; i < n; ++i)
            t = t * M[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                    perm[static_cast<std::size_t>(i)])];
        det = det + t;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

}  // namespace bethe
