#pragma once
// Modular-addition populations. Two tasks over Z_p:
//   Regression:     points (a,b,c) with target p * 1(a+b = c mod p), N = p^3
//   Classification: points (a,b) with class label (a+b) mod p,       N = p^2
// Residues stay integers; one-hot vectors exist only inside the network code.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modgrok/permutation.hpp"

namespace mg {

enum class TaskKind { Regression, Classification };

struct DataPoint {
    std::int32_t a = 0;
    std::int32_t b = 0;
    std::int32_t c = 0;      // regression: output residue; classification: class label
    double label = 0.0;      // regression: p * 1(a+b=c); classification: = c
};

enum class Provenance { FullPopulation, Sampled };

struct ModAddDataset {
    int p = 0;
    TaskKind task = TaskKind::Regression;
    Provenance provenance = Provenance::FullPopulation;
    std::uint64_t sample_seed = 0;  // meaningful only when provenance == Sampled
    std::vector<DataPoint> points;

    std::size_t size() const { return points.size(); }
};

// All N points in lexicographic (a,b[,c]) order. Throws on p < 2.
ModAddDataset gen_full_population(int p, TaskKind task);

// n points uniformly without replacement (seeded Fisher-Yates over the
// population indices); the complement becomes the second dataset. Both keep
// the population's lexicographic order. Throws when n is out of [1, N].
std::pair<ModAddDataset, ModAddDataset> sample_split(const ModAddDataset& pop, std::size_t n,
                                                     std::uint64_t seed);

// (a,b,c) -> (s1 a, s2 b, s3 c); regression labels ride along unchanged,
// classification labels are relabeled through s3. Point order is preserved.
ModAddDataset apply_data_permutation(const ModAddDataset& ds, const PermTriple& t);

// CSV with header `a,b,c,label` (regression) or `a,b,label` (classification).
void save_csv(const ModAddDataset& ds, const std::string& path);
ModAddDataset load_csv(const std::string& path, int p);

const char* task_name(TaskKind t);
TaskKind task_from_name(const std::string& s);

}  // namespace mg
