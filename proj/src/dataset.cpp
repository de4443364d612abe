#include "modgrok/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mg {

ModAddDataset gen_full_population(int p, TaskKind task) {
    if (p < 2) throw std::invalid_argument("modulus must be at least 2");
    ModAddDataset ds;
    ds.p = p;
    ds.task = task;
    ds.provenance = Provenance::FullPopulation;
    if (task == TaskKind::Regression) {
        ds.points.reserve(std::size_t(p) * p * p);
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b)
                for (int c = 0; c < p; ++c)
                    ds.points.push_back({a, b, c, (a + b) % p == c ? double(p) : 0.0});
    } else {
        ds.points.reserve(std::size_t(p) * p);
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) {
                int c = (a + b) % p;
                ds.points.push_back({a, b, c, double(c)});
            }
    }
    return ds;
}

std::pair<ModAddDataset, ModAddDataset> sample_split(const ModAddDataset& pop, std::size_t n,
                                                     std::uint64_t seed) {
    std::size_t N = pop.size();
    if (n < 1 || n > N) throw std::invalid_argument("sample size out of range");
    std::vector<std::uint32_t> idx(N);
    std::iota(idx.begin(), idx.end(), 0u);
    RngStream rng = stream(seed, "sample_split");
    for (std::size_t i = N - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.next_below(i + 1)]);
    std::vector<char> in_train(N, 0);
    for (std::size_t i = 0; i < n; ++i) in_train[idx[i]] = 1;

    ModAddDataset train, test;
    train.p = test.p = pop.p;
    train.task = test.task = pop.task;
    train.provenance = test.provenance = Provenance::Sampled;
    train.sample_seed = test.sample_seed = seed;
    train.points.reserve(n);
    test.points.reserve(N - n);
    for (std::size_t i = 0; i < N; ++i)
        (in_train[i] ? train : test).points.push_back(pop.points[i]);
    return {std::move(train), std::move(test)};
}

ModAddDataset apply_data_permutation(const ModAddDataset& ds, const PermTriple& t) {
    if (t.p() != ds.p) throw std::invalid_argument("permutation modulus mismatch");
    ModAddDataset out = ds;
    for (DataPoint& pt : out.points) {
        pt.a = t.s1[pt.a];
        pt.b = t.s2[pt.b];
        pt.c = t.s3[pt.c];
        if (ds.task == TaskKind::Classification) pt.label = double(pt.c);
    }
    return out;
}

void save_csv(const ModAddDataset& ds, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    if (ds.task == TaskKind::Regression) {
        f << "a,b,c,label\n";
        for (const DataPoint& pt : ds.points)
            f << pt.a << ',' << pt.b << ',' << pt.c << ',' << std::int64_t(pt.label) << '\n';
    } else {
        f << "a,b,label\n";
        for (const DataPoint& pt : ds.points)
            f << pt.a << ',' << pt.b << ',' << pt.c << '\n';
    }
}

ModAddDataset load_csv(const std::string& path, int p) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty csv: " + path);
    ModAddDataset ds;
    ds.p = p;
    if (line == "a,b,c,label")
        ds.task = TaskKind::Regression;
    else if (line == "a,b,label")
        ds.task = TaskKind::Classification;
    else
        throw std::runtime_error("unrecognized csv header: " + line);
    ds.provenance = Provenance::Sampled;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        DataPoint pt;
        char comma;
        if (ds.task == TaskKind::Regression) {
            if (!(ss >> pt.a >> comma >> pt.b >> comma >> pt.c >> comma >> pt.label))
                throw std::runtime_error("bad csv row: " + line);
        } else {
            if (!(ss >> pt.a >> comma >> pt.b >> comma >> pt.c))
                throw std::runtime_error("bad csv row: " + line);
            pt.label = double(pt.c);
        }
        if (pt.a < 0 || pt.a >= p || pt.b < 0 || pt.b >= p || pt.c < 0 || pt.c >= p)
            throw std::runtime_error("residue out of range in row: " + line);
        ds.points.push_back(pt);
    }
    return ds;
}

const char* task_name(TaskKind t) {
    return t == TaskKind::Regression ? "regression" : "classification";
}

TaskKind task_from_name(const std::string& s) {
    if (s == "regression") return TaskKind::Regression;
    if (s == "classification") return TaskKind::Classification;
    throw std::invalid_argument("unknown task: " + s);
}

}  // namespace mg
