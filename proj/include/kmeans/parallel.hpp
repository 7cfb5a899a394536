#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "kmeans/engine.hpp"
#include "kmeans/reduce.hpp"

namespace kmeans {

/// Contiguous near-equal row ranges, one per worker, covering [0, n).
struct ChunkPlan {
    std::size_t n_workers = 1;
    std::vector<RowRange> chunks;

    friend bool operator==(const ChunkPlan&, const ChunkPlan&) = default;
};

ChunkPlan plan_chunks(std::size_t n, std::size_t n_workers);

/// Runs body(w) for every chunk w concurrently (chunk 0 on the calling
/// thread) and joins. The first worker exception is rethrown after the join.
void fork_join(std::size_t workers, const std::function<void(std::size_t)>& body);

/// Rows worker w scans in the pair search: its chunk, or in balanced mode a
/// chunk of the first half plus the mirrored rows n-1-i of the second half.
std::vector<RowRange> diameter_worker_rows(const ChunkPlan& plan, std::size_t n, std::size_t w,
                                           bool balanced);

DiameterResult diameter_parallel(const Dataset& ds, const ChunkPlan& plan, bool balanced = false);

Centroid centroid_parallel(const Dataset& ds, const ChunkPlan& plan);

Assignment assign_parallel(const Dataset& ds, ClusterModel& model, const ChunkPlan& plan);

ClusterModel update_parallel(const Dataset& ds, const Assignment& assignment, std::size_t k,
                             const ChunkPlan& plan);

KmeansResult run_multi(const Dataset& ds, const KmeansConfig& config, std::size_t n_workers);

}  // namespace kmeans
