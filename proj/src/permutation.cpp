#include "modgrok/permutation.hpp"

#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mg {

bool PermTriple::valid() const {
    auto ok = [](const std::vector<int>& s) {
        std::vector<char> seen(s.size(), 0);
        for (int v : s) {
            if (v < 0 || v >= int(s.size()) || seen[v]) return false;
            seen[v] = 1;
        }
        return true;
    };
    return !s1.empty() && s1.size() == s2.size() && s2.size() == s3.size() && ok(s1) && ok(s2) && ok(s3);
}

PermTriple identity_perm(int p) {
    PermTriple t;
    t.s1.resize(p);
    std::iota(t.s1.begin(), t.s1.end(), 0);
    t.s2 = t.s1;
    t.s3 = t.s1;
    return t;
}

std::vector<int> random_permutation(RngStream& rng, int p) {
    std::vector<int> s(p);
    std::iota(s.begin(), s.end(), 0);
    for (int i = p - 1; i > 0; --i)
        std::swap(s[i], s[rng.next_below(std::uint64_t(i) + 1)]);
    return s;
}

PermTriple random_perm_triple(RngStream& rng, int p) {
    PermTriple t;
    t.s1 = random_permutation(rng, p);
    t.s2 = random_permutation(rng, p);
    t.s3 = random_permutation(rng, p);
    return t;
}

PermTriple compose(const PermTriple& f, const PermTriple& g) {
    int p = f.p();
    if (g.p() != p) throw std::invalid_argument("compose: modulus mismatch");
    PermTriple r = identity_perm(p);
    for (int i = 0; i < p; ++i) {
        r.s1[i] = f.s1[g.s1[i]];
        r.s2[i] = f.s2[g.s2[i]];
        r.s3[i] = f.s3[g.s3[i]];
    }
    return r;
}

PermTriple inverse(const PermTriple& t) {
    int p = t.p();
    PermTriple r = identity_perm(p);
    for (int i = 0; i < p; ++i) {
        r.s1[t.s1[i]] = i;
        r.s2[t.s2[i]] = i;
        r.s3[t.s3[i]] = i;
    }
    return r;
}

}  // namespace mg
