#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kmeans/core.hpp"
#include "kmeans/reduce.hpp"

namespace kmeans {

/// Farthest pair of the dataset; i < j.
struct DiameterResult {
    double d = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;

    friend bool operator==(const DiameterResult&, const DiameterResult&) = default;
};

enum class InitStrategy { MaximinDeterministic, RandomFarApart };

struct KmeansConfig {
    std::size_t k = 2;
    std::size_t max_iters = 1000;
    double tol = 0.0;
    std::uint64_t seed = 0;
    InitStrategy init = InitStrategy::MaximinDeterministic;
    Metric metric = Metric::Euclidean;

    // Sampled diameter: when > 0 and n exceeds kSampledDiameterMinRows, the
    // diameter is taken over an evenly strided subset holding at most this
    // many pairs. 0 keeps the exact O(n^2) scan.
    std::size_t diameter_pair_cap = 0;
    // Pair row i with row n-1-i when distributing diameter rows to workers.
    bool balanced_diameter = false;
    // Rows per device job (rounded up to a multiple of kReductionBlockRows).
    std::size_t device_job_rows = 65536;
    // Record WCSS after every assignment step (costs one extra pass per iteration).
    bool track_wcss = false;

    void validate(std::size_t n) const;
};

inline constexpr std::size_t kSampledDiameterMinRows = 100000;

/// Wall-clock milliseconds per phase of one run.
struct PhaseTimings {
    double diameter_ms = 0.0;
    double centroid_ms = 0.0;
    double init_ms = 0.0;
    std::vector<double> assign_ms;
    std::vector<double> update_ms;
    double total_ms = 0.0;

    double assign_total_ms() const;
    double update_total_ms() const;
};

struct KmeansResult {
    ClusterModel model;
    Assignment assignment;
    std::size_t iterations = 0;
    bool converged = false;
    DiameterResult diameter;
    Centroid global_centroid;

    PhaseTimings timings;
    std::vector<double> wcss_history;          // filled when config.track_wcss
    std::vector<std::string> fallback_events;  // e.g. device lost -> multi-worker
};

DiameterResult diameter(const Dataset& ds);

/// Strided row subset used by the sampled diameter mode.
std::vector<std::size_t> diameter_sample_rows(std::size_t n, std::size_t pair_cap);

ClusterModel init_centers(const Dataset& ds, const KmeansConfig& config,
                          const DiameterResult& diam, const Centroid& global_centroid);

Assignment assign_step(const Dataset& ds, ClusterModel& model);

ClusterModel update_step(const Dataset& ds, const Assignment& assignment, std::size_t k);

bool converged(const ClusterModel& prev, const ClusterModel& next, double tol);

KmeansResult run_single(const Dataset& ds, const KmeansConfig& config);

namespace detail {

/// Labels rows [begin, end) against the model (argmin squared distance, ties
/// to the lowest center index). Writes only labels[begin, end).
void assign_rows(const MatrixView& x, const MatrixView& centers, RowRange rows,
                 std::span<Label> labels);

/// Turns merged cluster totals into centers and repairs empty clusters.
ClusterModel finalize_update(const Dataset& ds, const Assignment& assignment,
                             const ClusterTotals& totals);

DiameterResult to_diameter(const PartialMax& best);

/// The phases a regime supplies; the iteration loop itself is shared so every
/// regime walks the same sequence of numeric operations.
struct RegimeOps {
    std::function<DiameterResult(const Dataset&)> diameter;
    std::function<Centroid(const Dataset&)> centroid;
    std::function<Assignment(const Dataset&, ClusterModel&)> assign;
    std::function<ClusterModel(const Dataset&, const Assignment&, std::size_t)> update;
};

KmeansResult lloyd(const Dataset& ds, const KmeansConfig& config, const RegimeOps& ops);

}  // namespace detail

}  // namespace kmeans
