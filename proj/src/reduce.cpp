#include "kmeans/reduce.hpp"

#include <algorithm>
#include <cstring>
#include <string>

namespace kmeans {

namespace {

// Column tile of the pair scan is transposed so the inner loop runs over
// candidate partners (vectorizable) while each pair still accumulates its
// squared distance in dimension order, bit-identical to squared_distance().
constexpr std::size_t kTileBytes = 32 * 1024;
constexpr std::size_t kStrip = 16;

// Four-lane vector type. Lane-wise IEEE operations, so every lane performs
// the same operation sequence as the scalar code.
using Lanes = double __attribute__((vector_size(32)));

inline Lanes load(const double* p) {
    Lanes v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store(double* p, Lanes v) { std::memcpy(p, &v, sizeof v); }

inline Lanes broadcast(double x) { return Lanes{x, x, x, x}; }

std::size_t tile_width(std::size_t m) {
    std::size_t w = kTileBytes / (m * sizeof(double));
    w = std::clamp<std::size_t>(w, 16, 512);
    return w - w % kStrip;
}

}  // namespace

bool better_pair(const PartialMax& a, const PartialMax& b) noexcept {
    if (a.d_sq != b.d_sq) return a.d_sq > b.d_sq;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
}

void merge_into(PartialMax& acc, const PartialMax& other) noexcept {
    if (other.has_pair() && (!acc.has_pair() || better_pair(other, acc))) acc = other;
}

PartialMax max_pair_rows(const MatrixView& x, RowRange rows) {
    PartialMax best;
    const std::size_t n = x.rows;
    const std::size_t m = x.cols;
    rows.end = std::min(rows.end, n);
    if (rows.empty() || rows.begin + 1 >= n) return best;

    const std::size_t tile = tile_width(m);
    std::vector<double> soa(m * tile, 0.0);
    std::vector<double> acc(tile);
    const double* coords = x.data.data();

    for (std::size_t j0 = rows.begin + 1; j0 < n; j0 += tile) {
        const std::size_t j1 = std::min(n, j0 + tile);
        const std::size_t width = j1 - j0;
        for (std::size_t jj = 0; jj < width; ++jj) {
            const double* src = coords + (j0 + jj) * m;
            for (std::size_t d = 0; d < m; ++d) soa[d * tile + jj] = src[d];
        }
        const std::size_t i_end = std::min(rows.end, j1 - 1);
        for (std::size_t i = rows.begin; i < i_end; ++i) {
            const std::size_t off = (i + 1 > j0) ? i + 1 - j0 : 0;
            const double* xi = coords + i * m;
            double* a = acc.data();
            // Strips of kStrip partners keep their accumulators in registers.
            for (std::size_t s0 = off - off % kStrip; s0 < width; s0 += kStrip) {
                Lanes r0{}, r1{}, r2{}, r3{};
                for (std::size_t d = 0; d < m; ++d) {
                    const Lanes v = broadcast(xi[d]);
                    const double* col = soa.data() + d * tile + s0;
                    const Lanes t0 = v - load(col);
                    const Lanes t1 = v - load(col + 4);
                    const Lanes t2 = v - load(col + 8);
                    const Lanes t3 = v - load(col + 12);
                    r0 += t0 * t0;
                    r1 += t1 * t1;
                    r2 += t2 * t2;
                    r3 += t3 * t3;
                }
                store(a + s0, r0);
                store(a + s0 + 4, r1);
                store(a + s0 + 8, r2);
                store(a + s0 + 12, r3);
            }
            double row_max = a[off];
            for (std::size_t jj = off + 1; jj < width; ++jj) row_max = a[jj] > row_max ? a[jj] : row_max;
            if (row_max < best.d_sq) continue;
            std::size_t arg = off;
            while (a[arg] != row_max) ++arg;
            PartialMax cand{row_max, i, j0 + arg};
            merge_into(best, cand);
        }
    }
    return best;
}

std::size_t block_count(std::size_t n) noexcept {
    return (n + kReductionBlockRows - 1) / kReductionBlockRows;
}

RowRange blocks_starting_in(RowRange rows, std::size_t n) noexcept {
    rows.end = std::min(rows.end, n);
    if (rows.empty()) return {0, 0};
    const std::size_t first = (rows.begin + kReductionBlockRows - 1) / kReductionBlockRows;
    const std::size_t last = (rows.end + kReductionBlockRows - 1) / kReductionBlockRows;
    return {first, std::max(first, last)};
}

std::vector<PartialSums> block_sums(const MatrixView& x, std::span<const Label> labels,
                                    std::size_t k, RowRange blocks) {
    const std::size_t n = x.rows;
    const std::size_t m = x.cols;
    if (k == 0) throw Error(Errc::ContractViolation, "block_sums with k = 0");
    if (!labels.empty() && labels.size() != n) {
        throw Error(Errc::ContractViolation, "label buffer length differs from sample count");
    }
    if (labels.empty() && k != 1) {
        throw Error(Errc::ContractViolation, "cluster sums need labels when k > 1");
    }
    blocks.end = std::min(blocks.end, block_count(n));
    std::vector<PartialSums> out;
    if (blocks.empty()) return out;
    out.reserve(blocks.size());
    const double* coords = x.data.data();
    for (std::size_t b = blocks.begin; b < blocks.end; ++b) {
        PartialSums p;
        p.first_row = b * kReductionBlockRows;
        p.rows = std::min(kReductionBlockRows, n - p.first_row);
        p.k = k;
        p.m = m;
        p.sums.assign(k * m, 0.0);
        p.counts.assign(k, 0);
        for (std::size_t r = p.first_row; r < p.first_row + p.rows; ++r) {
            const Label c = labels.empty() ? 0 : labels[r];
            if (c >= k) {
                throw Error(Errc::ValidationFailure, "label " + std::to_string(c) + " at sample " +
                                                         std::to_string(r) + " is not below k");
            }
            double* dst = p.sums.data() + c * m;
            const double* src = coords + r * m;
            for (std::size_t d = 0; d < m; ++d) dst[d] += src[d];
            ++p.counts[c];
        }
        out.push_back(std::move(p));
    }
    return out;
}

ClusterTotals merge_in_block_order(std::vector<PartialSums> partials, std::size_t n) {
    if (partials.empty()) throw Error(Errc::ContractViolation, "no partial sums to merge");
    std::sort(partials.begin(), partials.end(),
              [](const PartialSums& a, const PartialSums& b) { return a.first_row < b.first_row; });
    ClusterTotals t;
    t.k = partials.front().k;
    t.m = partials.front().m;
    t.sums.assign(t.k * t.m, 0.0);
    t.counts.assign(t.k, 0);
    std::size_t expected = 0;
    for (const PartialSums& p : partials) {
        if (p.first_row != expected || p.k != t.k || p.m != t.m ||
            p.rows != std::min(kReductionBlockRows, n - p.first_row)) {
            throw Error(Errc::ContractViolation,
                        "partial sums do not tile the rows canonically at row " + std::to_string(expected));
        }
        for (std::size_t idx = 0; idx < t.sums.size(); ++idx) t.sums[idx] += p.sums[idx];
        for (std::size_t c = 0; c < t.k; ++c) t.counts[c] += p.counts[c];
        expected += p.rows;
    }
    if (expected != n) throw Error(Errc::ContractViolation, "partial sums stop short of n");
    return t;
}

}  // namespace kmeans
