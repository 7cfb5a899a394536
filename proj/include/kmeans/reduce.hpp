#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "kmeans/core.hpp"

namespace kmeans {

struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return end <= begin; }
    friend bool operator==(const RowRange&, const RowRange&) = default;
};

/// Best pair found by one worker or one device job. d_sq is the squared
/// distance; an empty scan is encoded as d_sq = -inf ("no pair").
struct PartialMax {
    static constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

    double d_sq = -std::numeric_limits<double>::infinity();
    std::size_t i = kNoIndex;
    std::size_t j = kNoIndex;

    bool has_pair() const noexcept { return i != kNoIndex; }
    friend bool operator==(const PartialMax&, const PartialMax&) = default;
};

/// True when a beats b: larger squared distance, then lexicographically
/// smaller (i, j).
bool better_pair(const PartialMax& a, const PartialMax& b) noexcept;

/// Merge is commutative and associative, so partials can arrive in any order.
void merge_into(PartialMax& acc, const PartialMax& other) noexcept;

/// Exhaustive scan of pairs (i, j) with i in rows and i < j < n.
PartialMax max_pair_rows(const MatrixView& x, RowRange rows);

/// Per-cluster sums for exactly one reduction block (or the tail block).
/// k == 1 gives plain coordinate sums.
struct PartialSums {
    std::size_t first_row = 0;
    std::size_t rows = 0;
    std::size_t k = 0;
    std::size_t m = 0;
    std::vector<double> sums;          // k x m
    std::vector<std::size_t> counts;   // k

    friend bool operator==(const PartialSums&, const PartialSums&) = default;
};

/// Index range of reduction blocks whose first row lies in rows.
RowRange blocks_starting_in(RowRange rows, std::size_t n) noexcept;
std::size_t block_count(std::size_t n) noexcept;

/// Sums over blocks [blocks.begin, blocks.end); labels may be empty when k == 1.
std::vector<PartialSums> block_sums(const MatrixView& x, std::span<const Label> labels,
                                    std::size_t k, RowRange blocks);

/// Totals of a complete, block-ordered set of partials.
struct ClusterTotals {
    std::size_t k = 0;
    std::size_t m = 0;
    std::vector<double> sums;
    std::vector<std::size_t> counts;
};

/// Adds partials in block order. Throws ContractViolation unless the partials
/// tile [0, n) exactly once (any input order is accepted; merge order is fixed).
ClusterTotals merge_in_block_order(std::vector<PartialSums> partials, std::size_t n);

}  // namespace kmeans
