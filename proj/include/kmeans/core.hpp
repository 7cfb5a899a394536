#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kmeans/error.hpp"

namespace kmeans {

using Label = std::uint32_t;

// Canonical accumulation granularity. Every coordinate sum in the library is
// computed as per-block sequential sums (rows in index order) which are then
// added in block order. Block boundaries depend only on the row index, so the
// result is independent of how rows are split across workers or devices.
inline constexpr std::size_t kReductionBlockRows = 4096;

// Non-owning row-major n x m view. All kernels operate on this.
struct MatrixView {
    std::span<const double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const double> row(std::size_t i) const { return data.subspan(i * cols, cols); }
};

/// Clustering input: n samples of m finite coordinates, stored row-major.
/// Immutable after construction.
class Dataset {
public:
    Dataset(std::size_t n, std::size_t m, std::vector<double> coords);

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return m_; }
    std::span<const double> coords() const noexcept { return coords_; }
    std::span<const double> row(std::size_t i) const { return {coords_.data() + i * m_, m_}; }
    MatrixView view() const noexcept { return {coords_, n_, m_}; }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<double> coords_;
};

/// A sample of a Dataset: its ordinal and a view of its coordinates.
struct Point {
    std::size_t index;
    std::span<const double> coords;
};

inline Point point_at(const Dataset& ds, std::size_t i) { return {i, ds.row(i)}; }

struct Centroid {
    std::vector<double> coords;

    std::size_t dim() const noexcept { return coords.size(); }
    friend bool operator==(const Centroid&, const Centroid&) = default;
};

/// K centers (flat, k x m) and per-cluster sample counts.
class ClusterModel {
public:
    ClusterModel() = default;
    ClusterModel(std::size_t k, std::size_t m);
    ClusterModel(std::size_t k, std::size_t m, std::vector<double> centers);

    std::size_t k() const noexcept { return k_; }
    std::size_t m() const noexcept { return m_; }

    std::span<const double> center(std::size_t c) const { return {centers_.data() + c * m_, m_}; }
    std::span<double> center(std::size_t c) { return {centers_.data() + c * m_, m_}; }
    std::span<const double> centers() const noexcept { return centers_; }
    std::span<double> centers() noexcept { return centers_; }
    MatrixView view() const noexcept { return {centers_, k_, m_}; }

    const std::vector<std::size_t>& counts() const noexcept { return counts_; }
    std::vector<std::size_t>& counts() noexcept { return counts_; }

    Centroid centroid(std::size_t c) const;

    friend bool operator==(const ClusterModel&, const ClusterModel&) = default;

private:
    std::size_t k_ = 0;
    std::size_t m_ = 0;
    std::vector<double> centers_;
    std::vector<std::size_t> counts_;
};

/// Per-sample cluster labels, each in [0, k).
class Assignment {
public:
    Assignment() = default;
    Assignment(std::vector<Label> labels, std::size_t k);

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t k() const noexcept { return k_; }
    std::span<const Label> labels() const noexcept { return labels_; }
    Label operator[](std::size_t i) const { return labels_[i]; }

    std::vector<std::size_t> histogram() const;

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<Label> labels_;
    std::size_t k_ = 0;
};

// Only Euclidean ships; the enum is the extension point for other metrics.
enum class Metric { Euclidean };

/// Sum of squared coordinate differences, accumulated in dimension order.
/// Every kernel in the library reproduces exactly this operation sequence.
inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
    }
    return acc;
}

double distance(std::span<const double> a, std::span<const double> b);

Centroid centroid_of(std::span<const std::span<const double>> points);
Centroid centroid_of(const Dataset& ds);

double wcss(const Dataset& ds, const ClusterModel& model, const Assignment& assignment);

}  // namespace kmeans
