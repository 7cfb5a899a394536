#pragma once

#include <vector>

#include "kmeans/core.hpp"
#include "oracles.hpp"

namespace testing_support {

inline kmeans::Dataset to_dataset(const oracle::Points& p) { return kmeans::Dataset(p.n, p.m, p.x); }

inline oracle::Points to_points(const kmeans::Dataset& ds) {
    return {ds.n(), ds.m(), {ds.coords().begin(), ds.coords().end()}};
}

inline std::vector<double> centers_of(const kmeans::ClusterModel& model) {
    return {model.centers().begin(), model.centers().end()};
}

inline std::vector<kmeans::Label> labels_of(const kmeans::Assignment& a) {
    return {a.labels().begin(), a.labels().end()};
}

// The 4-point two-blob instance used throughout: {(0,0),(0,1),(10,0),(10,1)}.
inline kmeans::Dataset blob4() { return kmeans::Dataset(4, 2, {0, 0, 0, 1, 10, 0, 10, 1}); }

}  // namespace testing_support
