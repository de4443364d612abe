#pragma once
// A triple of permutations of the residues [0,p): one for each input slot and
// one for the output slot. Acts on data points and, through the weight action
// in equivariance.hpp, on network parameters.

#include <vector>

#include "modgrok/rng.hpp"

namespace mg {

struct PermTriple {
    std::vector<int> s1, s2, s3;

    int p() const { return int(s1.size()); }
    bool valid() const;
};

PermTriple identity_perm(int p);
PermTriple random_perm_triple(RngStream& rng, int p);
// (f * g)(x) = f(g(x)), slotwise
PermTriple compose(const PermTriple& f, const PermTriple& g);
PermTriple inverse(const PermTriple& t);

std::vector<int> random_permutation(RngStream& rng, int p);

}  // namespace mg
