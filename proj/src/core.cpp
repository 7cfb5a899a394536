#include "kmeans/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kmeans {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::ContractViolation: return "ContractViolation";
        case Errc::EmptyCluster: return "EmptyCluster";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::DegenerateData: return "DegenerateData";
        case Errc::CapacityExceeded: return "CapacityExceeded";
        case Errc::DeviceLost: return "DeviceLost";
        case Errc::UnknownTicket: return "UnknownTicket";
        case Errc::DoubleCollect: return "DoubleCollect";
        case Errc::ValidationFailure: return "ValidationFailure";
        case Errc::RegimeNotAllowed: return "RegimeNotAllowed";
        case Errc::DeviceUnavailable: return "DeviceUnavailable";
        case Errc::ParseError: return "ParseError";
        case Errc::NonFiniteValue: return "NonFiniteValue";
        case Errc::RaggedRows: return "RaggedRows";
    }
    return "Unknown";
}

Dataset::Dataset(std::size_t n, std::size_t m, std::vector<double> coords)
    : n_(n), m_(m), coords_(std::move(coords)) {
    if (n_ == 0 || m_ == 0) {
        throw Error(Errc::ContractViolation, "dataset needs n >= 1 and m >= 1");
    }
    if (coords_.size() != n_ * m_) {
        throw Error(Errc::ContractViolation, "coordinate count " + std::to_string(coords_.size()) +
                                                 " != n*m = " + std::to_string(n_ * m_));
    }
    for (std::size_t idx = 0; idx < coords_.size(); ++idx) {
        if (!std::isfinite(coords_[idx])) {
            throw Error(Errc::NonFiniteValue, "sample " + std::to_string(idx / m_) + ", feature " +
                                                  std::to_string(idx % m_));
        }
    }
}

ClusterModel::ClusterModel(std::size_t k, std::size_t m)
    : k_(k), m_(m), centers_(k * m, 0.0), counts_(k, 0) {}

ClusterModel::ClusterModel(std::size_t k, std::size_t m, std::vector<double> centers)
    : k_(k), m_(m), centers_(std::move(centers)), counts_(k, 0) {
    if (centers_.size() != k_ * m_) {
        throw Error(Errc::ContractViolation, "center buffer is not k*m");
    }
}

Centroid ClusterModel::centroid(std::size_t c) const {
    auto row = center(c);
    return Centroid{{row.begin(), row.end()}};
}

Assignment::Assignment(std::vector<Label> labels, std::size_t k)
    : labels_(std::move(labels)), k_(k) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] >= k_) {
            throw Error(Errc::ContractViolation,
                        "label " + std::to_string(labels_[i]) + " at sample " + std::to_string(i) +
                            " is not below k=" + std::to_string(k_));
        }
    }
}

std::vector<std::size_t> Assignment::histogram() const {
    std::vector<std::size_t> h(k_, 0);
    for (Label l : labels_) ++h[l];
    return h;
}

double distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(Errc::ContractViolation, "distance between vectors of dimension " +
                                                 std::to_string(a.size()) + " and " +
                                                 std::to_string(b.size()));
    }
    return std::sqrt(squared_distance(a, b));
}

Centroid centroid_of(std::span<const std::span<const double>> points) {
    if (points.empty()) {
        throw Error(Errc::EmptyCluster, "centroid of an empty collection");
    }
    const std::size_t m = points.front().size();
    for (const auto& p : points) {
        if (p.size() != m) throw Error(Errc::ContractViolation, "points of mixed dimension");
    }
    std::vector<double> total(m, 0.0);
    std::vector<double> block(m);
    for (std::size_t b0 = 0; b0 < points.size(); b0 += kReductionBlockRows) {
        const std::size_t b1 = std::min(points.size(), b0 + kReductionBlockRows);
        std::fill(block.begin(), block.end(), 0.0);
        for (std::size_t r = b0; r < b1; ++r) {
            for (std::size_t d = 0; d < m; ++d) block[d] += points[r][d];
        }
        for (std::size_t d = 0; d < m; ++d) total[d] += block[d];
    }
    const double count = static_cast<double>(points.size());
    for (double& v : total) v /= count;
    return Centroid{std::move(total)};
}

Centroid centroid_of(const Dataset& ds) {
    std::vector<std::span<const double>> rows;
    rows.reserve(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) rows.push_back(ds.row(i));
    return centroid_of(rows);
}

double wcss(const Dataset& ds, const ClusterModel& model, const Assignment& assignment) {
    if (assignment.size() != ds.n() || model.m() != ds.m() || assignment.k() != model.k()) {
        throw Error(Errc::ContractViolation, "wcss: dataset, model and assignment disagree in shape");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        total += squared_distance(ds.row(i), model.center(assignment[i]));
    }
    return total;
}

}  // namespace kmeans
