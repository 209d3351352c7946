#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "affscope/disclose.hpp"
#include "affscope/error.hpp"

namespace affscope::disclose {

std::string_view to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
    }
    return "average";
}

std::optional<Linkage> parse_linkage(std::string_view s) {
    for (auto l : {Linkage::single, Linkage::complete, Linkage::average}) {
        if (to_string(l) == s) return l;
    }
    return std::nullopt;
}

namespace {

constexpr double kRelTol = 1e-12;

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= kRelTol * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Candidate {
    double d = std::numeric_limits<double>::infinity();
    std::size_t lo = std::numeric_limits<std::size_t>::max();
    std::size_t hi = std::numeric_limits<std::size_t>::max();
};

// Strict ordering on (distance, smaller node id, larger node id).
bool better(const Candidate& a, const Candidate& b) {
    if (!nearly_equal(a.d, b.d)) return a.d < b.d;
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.hi < b.hi;
}

}  // namespace

ClusterTree hcluster(std::span<const SentenceVector> vectors, Linkage linkage) {
    const std::size_t n = vectors.size();
    if (n == 0) throw UsageError("hcluster: no vectors");

    ClusterTree tree;
    tree.leaves = n;
    if (n == 1) return tree;

    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[i * n + j] = dist[j * n + i] = euclidean(vectors[i], vectors[j]);
        }
    }
    auto at = [&](std::size_t i, std::size_t j) -> double& { return dist[i * n + j]; };

    std::vector<bool> active(n, true);
    std::vector<std::size_t> node(n);
    std::iota(node.begin(), node.end(), std::size_t{0});
    std::vector<std::size_t> size(n, 1);

    auto candidate = [&](std::size_t i, std::size_t j) {
        return Candidate{at(i, j), std::min(node[i], node[j]), std::max(node[i], node[j])};
    };

    // nearest[i]: best partner slot of slot i among active slots.
    std::vector<std::size_t> nearest(n, n);
    std::vector<Candidate> nearest_c(n);
    auto rescan = [&](std::size_t i) {
        nearest[i] = n;
        nearest_c[i] = Candidate{};
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !active[j]) continue;
            auto c = candidate(i, j);
            if (better(c, nearest_c[i])) {
                nearest_c[i] = c;
                nearest[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) rescan(i);

    tree.merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t a = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i] || nearest[i] == n) continue;
            if (a == n || better(nearest_c[i], nearest_c[a])) a = i;
        }
        std::size_t b = nearest[a];
        const double d = at(a, b);
        if (b < a) std::swap(a, b);

        const std::size_t merged_size = size[a] + size[b];
        tree.merges.push_back({std::min(node[a], node[b]), std::max(node[a], node[b]), d, merged_size});

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) continue;
            const double da = at(a, k);
            const double db = at(b, k);
            double v = 0.0;
            switch (linkage) {
                case Linkage::single: v = std::min(da, db); break;
                case Linkage::complete: v = std::max(da, db); break;
                case Linkage::average:
                    v = (static_cast<double>(size[a]) * da + static_cast<double>(size[b]) * db) /
                        static_cast<double>(merged_size);
                    break;
            }
            at(a, k) = at(k, a) = v;
        }
        active[b] = false;
        size[a] = merged_size;
        node[a] = n + step;

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k]) continue;
            if (k == a || nearest[k] == a || nearest[k] == b) {
                rescan(k);
            } else {
                // Other rows only gain a new candidate; their old distances are unchanged
                // except towards a, which was rewritten above.
                auto c = candidate(k, a);
                if (better(c, nearest_c[k])) {
                    nearest_c[k] = c;
                    nearest[k] = a;
                }
            }
        }
    }
    return tree;
}

std::vector<std::vector<std::size_t>> cut(const ClusterTree& tree, double threshold) {
    if (!(threshold >= 0.0)) throw UsageError("cut threshold must be >= 0");
    const std::size_t n = tree.leaves;
    std::vector<std::size_t> parent(n + tree.merges.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t k = 0; k < tree.merges.size(); ++k) {
        const auto& m = tree.merges[k];
        if (m.distance <= threshold) {
            parent[find(m.left)] = n + k;
            parent[find(m.right)] = n + k;
        }
    }
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> slot(parent.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const auto root = find(leaf);
        if (slot[root] == std::numeric_limits<std::size_t>::max()) {
            slot[root] = clusters.size();
            clusters.emplace_back();
        }
        clusters[slot[root]].push_back(leaf);
    }
    return clusters;
}

}  // namespace affscope::disclose
