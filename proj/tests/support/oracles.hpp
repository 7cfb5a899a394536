#pragma once

// Naive reference implementations for tests. They share no code with the
// library: plain nested loops over std::vector, recomputed from scratch.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

struct Points {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> x;  // row-major

    const double* row(std::size_t i) const { return x.data() + i * m; }
};

inline double sq(const double* a, const double* b, std::size_t m) {
    double s = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

struct Pair {
    double d;
    std::size_t i;
    std::size_t j;
};

// Exhaustive double loop; strict '>' keeps the first (lexicographically
// smallest) pair among equal squared distances.
inline Pair diameter(const Points& p) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < p.n; ++i) {
        for (std::size_t j = i + 1; j < p.n; ++j) {
            const double s = sq(p.row(i), p.row(j), p.m);
            if (s > best) {
                best = s;
                bi = i;
                bj = j;
            }
        }
    }
    return {std::sqrt(best), bi, bj};
}

// Farthest-first traversal by exhaustive rescan of all chosen centers.
inline std::vector<std::size_t> maximin(const Points& p, std::size_t k, std::size_t first,
                                        std::size_t second) {
    std::vector<std::size_t> chosen{first};
    if (k >= 2) chosen.push_back(second);
    while (chosen.size() < k) {
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t q = 0; q < p.n; ++q) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t c : chosen) nearest = std::min(nearest, sq(p.row(q), p.row(c), p.m));
            if (nearest > best) {
                best = nearest;
                arg = q;
            }
        }
        chosen.push_back(arg);
    }
    return chosen;
}

inline std::vector<std::uint32_t> assign(const Points& p, const std::vector<double>& centers, std::size_t k) {
    std::vector<std::uint32_t> labels(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double s = sq(p.row(i), centers.data() + c * p.m, p.m);
            if (s < best) {
                best = s;
                labels[i] = static_cast<std::uint32_t>(c);
            }
        }
    }
    return labels;
}

// Grouped means by direct summation in sample order, then empty-cluster
// re-seeding at the sample farthest from its own center (lowest cluster
// first, each seed sample used once).
inline std::vector<double> update(const Points& p, const std::vector<std::uint32_t>& labels, std::size_t k,
                                  std::vector<std::size_t>* counts_out = nullptr) {
    std::vector<double> centers(k * p.m, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> sum(p.m, 0.0);
        for (std::size_t i = 0; i < p.n; ++i) {
            if (labels[i] != c) continue;
            for (std::size_t d = 0; d < p.m; ++d) sum[d] += p.row(i)[d];
            ++counts[c];
        }
        if (counts[c] == 0) continue;
        for (std::size_t d = 0; d < p.m; ++d) centers[c * p.m + d] = sum[d] / static_cast<double>(counts[c]);
    }
    std::vector<bool> used(p.n, false);
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < p.n; ++i) {
            if (used[i]) continue;
            const double s = sq(p.row(i), centers.data() + labels[i] * p.m, p.m);
            if (s > best) {
                best = s;
                arg = i;
            }
        }
        used[arg] = true;
        for (std::size_t d = 0; d < p.m; ++d) centers[c * p.m + d] = p.row(arg)[d];
        --counts[labels[arg]];
        counts[c] = 1;
    }
    if (counts_out) *counts_out = counts;
    return centers;
}

inline double wcss(const Points& p, const std::vector<double>& centers, const std::vector<std::uint32_t>& labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) total += sq(p.row(i), centers.data() + labels[i] * p.m, p.m);
    return total;
}

struct Lloyd {
    std::vector<std::uint32_t> labels;
    std::vector<double> centers;
    std::size_t iterations = 0;
    bool converged = false;
};

// Diameter-seeded maximin init, then assign/update until the centers repeat
// bit for bit or max_iters rounds have run.
inline Lloyd lloyd(const Points& p, std::size_t k, std::size_t max_iters = 1000) {
    const Pair diam = diameter(p);
    const auto seeds = maximin(p, k, diam.i, diam.j);
    Lloyd out;
    out.centers.resize(k * p.m);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t d = 0; d < p.m; ++d) out.centers[c * p.m + d] = p.row(seeds[c])[d];
    }
    out.labels = assign(p, out.centers, k);
    for (;;) {
        std::vector<double> next = update(p, out.labels, k);
        ++out.iterations;
        const bool same = next == out.centers;
        out.centers = std::move(next);
        if (same) {
            out.converged = true;
            break;
        }
        if (out.iterations >= max_iters) break;
        out.labels = assign(p, out.centers, k);
    }
    return out;
}

inline Points uniform(std::size_t n, std::size_t m, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Points p{n, m, std::vector<double>(n * m)};
    for (double& v : p.x) v = u(rng);
    return p;
}

// Gaussian blobs around k_true centers in [-5, 5]^m.
inline Points blobs(std::size_t n, std::size_t m, std::size_t k_true, double spread, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::normal_distribution<double> g(0.0, spread);
    std::vector<double> centers(k_true * m);
    for (double& c : centers) c = u(rng);
    Points p{n, m, std::vector<double>(n * m)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = rng() % k_true;
        for (std::size_t d = 0; d < m; ++d) p.x[i * m + d] = centers[c * m + d] + g(rng);
    }
    return p;
}

}  // namespace oracle
