#include "kmeans/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace kmeans {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Farthest-first traversal from the already chosen centers. min_sq[p] holds
// the squared distance of sample p to its nearest chosen center.
void extend_maximin(const Dataset& ds, std::vector<std::size_t>& chosen,
                    std::vector<double>& min_sq, std::size_t k) {
    while (chosen.size() < k) {
        std::size_t next = 0;
        for (std::size_t p = 1; p < ds.n(); ++p) {
            if (min_sq[p] > min_sq[next]) next = p;
        }
        if (!(min_sq[next] > 0.0)) {
            throw Error(Errc::DegenerateData, "fewer than k=" + std::to_string(k) + " distinct samples");
        }
        chosen.push_back(next);
        const auto c = ds.row(next);
        for (std::size_t p = 0; p < ds.n(); ++p) {
            min_sq[p] = std::min(min_sq[p], squared_distance(ds.row(p), c));
        }
    }
}

void add_center(const Dataset& ds, std::size_t idx, std::vector<std::size_t>& chosen,
                std::vector<double>& min_sq) {
    chosen.push_back(idx);
    const auto c = ds.row(idx);
    for (std::size_t p = 0; p < ds.n(); ++p) {
        min_sq[p] = std::min(min_sq[p], squared_distance(ds.row(p), c));
    }
}

}  // namespace

void KmeansConfig::validate(std::size_t n) const {
    if (k < 1 || k > n) {
        throw Error(Errc::ContractViolation,
                    "k=" + std::to_string(k) + " must lie in [1, n=" + std::to_string(n) + "]");
    }
    if (max_iters < 1) throw Error(Errc::ContractViolation, "max_iters must be >= 1");
    if (!(tol >= 0.0) || !std::isfinite(tol)) {
        throw Error(Errc::ContractViolation, "tol must be finite and >= 0");
    }
    if (device_job_rows < 1) throw Error(Errc::ContractViolation, "device_job_rows must be >= 1");
    if (metric != Metric::Euclidean) throw Error(Errc::ContractViolation, "unsupported metric");
}

double PhaseTimings::assign_total_ms() const {
    return std::accumulate(assign_ms.begin(), assign_ms.end(), 0.0);
}

double PhaseTimings::update_total_ms() const {
    return std::accumulate(update_ms.begin(), update_ms.end(), 0.0);
}

DiameterResult detail::to_diameter(const PartialMax& best) {
    if (!best.has_pair()) throw Error(Errc::InsufficientData, "no sample pair to measure");
    return {std::sqrt(best.d_sq), best.i, best.j};
}

DiameterResult diameter(const Dataset& ds) {
    if (ds.n() < 2) throw Error(Errc::InsufficientData, "diameter needs at least 2 samples");
    return detail::to_diameter(max_pair_rows(ds.view(), {0, ds.n()}));
}

std::vector<std::size_t> diameter_sample_rows(std::size_t n, std::size_t pair_cap) {
    // Largest s with s(s-1)/2 <= pair_cap.
    auto s = static_cast<std::size_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(pair_cap))) / 2.0);
    while (s > 2 && s * (s - 1) / 2 > pair_cap) --s;
    s = std::clamp<std::size_t>(s, 2, n);
    std::vector<std::size_t> rows(s);
    for (std::size_t t = 0; t < s; ++t) {
        rows[t] = static_cast<std::size_t>((static_cast<unsigned __int128>(t) * n) / s);
    }
    return rows;
}

ClusterModel init_centers(const Dataset& ds, const KmeansConfig& config,
                          const DiameterResult& diam, const Centroid& /*global_centroid*/) {
    config.validate(ds.n());
    const std::size_t n = ds.n();
    const std::size_t k = config.k;
    if (diam.i >= n || diam.j >= n) throw Error(Errc::ContractViolation, "diameter pair out of range");

    std::vector<std::size_t> chosen;
    chosen.reserve(k);
    std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());

    if (k >= 2 && !(diam.d > 0.0)) {
        throw Error(Errc::DegenerateData, "all samples coincide; cannot place k >= 2 centers");
    }

    if (config.init == InitStrategy::MaximinDeterministic) {
        add_center(ds, diam.i, chosen, min_sq);
        if (k >= 2) add_center(ds, diam.j, chosen, min_sq);
        extend_maximin(ds, chosen, min_sq, k);
    } else {
        const double threshold = diam.d / (2.0 * static_cast<double>(k));
        const double threshold_sq = threshold * threshold;
        std::mt19937_64 rng(config.seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        const std::size_t max_rejections = 10 * n;
        std::size_t rejections = 0;
        while (chosen.size() < k && rejections <= max_rejections) {
            const std::size_t cand = pick(rng);
            if (chosen.empty() || min_sq[cand] > threshold_sq) {
                add_center(ds, cand, chosen, min_sq);
            } else {
                ++rejections;
            }
        }
        extend_maximin(ds, chosen, min_sq, k);
    }

    ClusterModel model(k, ds.m());
    for (std::size_t c = 0; c < k; ++c) {
        auto src = ds.row(chosen[c]);
        std::copy(src.begin(), src.end(), model.center(c).begin());
    }
    return model;
}

void detail::assign_rows(const MatrixView& x, const MatrixView& centers, RowRange rows,
                         std::span<Label> labels) {
    const std::size_t k = centers.rows;
    for (std::size_t i = rows.begin; i < rows.end; ++i) {
        const auto p = x.row(i);
        double best = std::numeric_limits<double>::infinity();
        Label label = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const double sq = squared_distance(p, centers.row(c));
            if (sq < best) {
                best = sq;
                label = static_cast<Label>(c);
            }
        }
        labels[i] = label;
    }
}

Assignment assign_step(const Dataset& ds, ClusterModel& model) {
    if (model.m() != ds.m() || model.k() == 0) {
        throw Error(Errc::ContractViolation, "model dimension does not match dataset");
    }
    std::vector<Label> labels(ds.n());
    detail::assign_rows(ds.view(), model.view(), {0, ds.n()}, labels);
    Assignment a(std::move(labels), model.k());
    model.counts() = a.histogram();
    return a;
}

ClusterModel detail::finalize_update(const Dataset& ds, const Assignment& assignment,
                                     const ClusterTotals& totals) {
    const std::size_t k = totals.k;
    const std::size_t m = totals.m;
    ClusterModel model(k, m);
    model.counts() = totals.counts;
    std::vector<std::size_t> empty;
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t count = totals.counts[c];
        if (count == 0) {
            empty.push_back(c);
            continue;
        }
        auto dst = model.center(c);
        const double denom = static_cast<double>(count);
        for (std::size_t d = 0; d < m; ++d) dst[d] = totals.sums[c * m + d] / denom;
    }
    if (empty.empty()) return model;

    // Re-seed each empty cluster, lowest index first, at the sample farthest
    // from its own center. A sample used as a seed moves to the new cluster.
    std::vector<double> dist_sq(ds.n());
    for (std::size_t s = 0; s < ds.n(); ++s) {
        dist_sq[s] = squared_distance(ds.row(s), model.center(assignment[s]));
    }
    for (std::size_t c : empty) {
        std::size_t far = 0;
        for (std::size_t s = 1; s < ds.n(); ++s) {
            if (dist_sq[s] > dist_sq[far]) far = s;
        }
        auto src = ds.row(far);
        std::copy(src.begin(), src.end(), model.center(c).begin());
        --model.counts()[assignment[far]];
        model.counts()[c] = 1;
        dist_sq[far] = -1.0;
    }
    return model;
}

ClusterModel update_step(const Dataset& ds, const Assignment& assignment, std::size_t k) {
    if (assignment.size() != ds.n() || assignment.k() != k) {
        throw Error(Errc::ContractViolation, "assignment does not match dataset / k");
    }
    const MatrixView x = ds.view();
    auto partials = block_sums(x, assignment.labels(), k, {0, block_count(ds.n())});
    return detail::finalize_update(ds, assignment, merge_in_block_order(std::move(partials), ds.n()));
}

bool converged(const ClusterModel& prev, const ClusterModel& next, double tol) {
    if (prev.k() != next.k() || prev.m() != next.m()) {
        throw Error(Errc::ContractViolation, "comparing models of different shape");
    }
    if (tol == 0.0) {
        const auto a = prev.centers();
        const auto b = next.centers();
        return a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0;
    }
    for (std::size_t c = 0; c < prev.k(); ++c) {
        if (distance(prev.center(c), next.center(c)) > tol) return false;
    }
    return true;
}

KmeansResult detail::lloyd(const Dataset& ds, const KmeansConfig& config, const RegimeOps& ops) {
    config.validate(ds.n());
    if (ds.n() < 2) throw Error(Errc::InsufficientData, "clustering needs at least 2 samples");
    const auto run_start = Clock::now();
    KmeansResult result;

    auto t = Clock::now();
    if (config.diameter_pair_cap > 0 && ds.n() > kSampledDiameterMinRows) {
        const auto rows = diameter_sample_rows(ds.n(), config.diameter_pair_cap);
        std::vector<double> sub;
        sub.reserve(rows.size() * ds.m());
        for (std::size_t r : rows) {
            auto src = ds.row(r);
            sub.insert(sub.end(), src.begin(), src.end());
        }
        const DiameterResult local = ops.diameter(Dataset(rows.size(), ds.m(), std::move(sub)));
        result.diameter = {local.d, rows[local.i], rows[local.j]};
    } else {
        result.diameter = ops.diameter(ds);
    }
    result.timings.diameter_ms = elapsed_ms(t);

    t = Clock::now();
    result.global_centroid = ops.centroid(ds);
    result.timings.centroid_ms = elapsed_ms(t);

    t = Clock::now();
    ClusterModel model = init_centers(ds, config, result.diameter, result.global_centroid);
    result.timings.init_ms = elapsed_ms(t);

    auto timed_assign = [&] {
        const auto start = Clock::now();
        Assignment a = ops.assign(ds, model);
        result.timings.assign_ms.push_back(elapsed_ms(start));
        if (config.track_wcss) result.wcss_history.push_back(wcss(ds, model, a));
        return a;
    };

    Assignment assignment = timed_assign();
    for (;;) {
        const auto start = Clock::now();
        ClusterModel next = ops.update(ds, assignment, config.k);
        result.timings.update_ms.push_back(elapsed_ms(start));
        ++result.iterations;
        // Convergence is judged by the coordinating worker alone.
        const bool done = converged(model, next, config.tol);
        model = std::move(next);
        if (done) {
            result.converged = true;
            break;
        }
        if (result.iterations >= config.max_iters) break;
        assignment = timed_assign();
    }

    result.model = std::move(model);
    result.assignment = std::move(assignment);
    result.timings.total_ms = elapsed_ms(run_start);
    return result;
}

KmeansResult run_single(const Dataset& ds, const KmeansConfig& config) {
    detail::RegimeOps ops;
    ops.diameter = [](const Dataset& d) { return diameter(d); };
    ops.centroid = [](const Dataset& d) {
        auto partials = block_sums(d.view(), {}, 1, {0, block_count(d.n())});
        const ClusterTotals totals = merge_in_block_order(std::move(partials), d.n());
        Centroid c{totals.sums};
        for (double& v : c.coords) v /= static_cast<double>(d.n());
        return c;
    };
    ops.assign = [](const Dataset& d, ClusterModel& model) { return assign_step(d, model); };
    ops.update = [](const Dataset& d, const Assignment& a, std::size_t k) { return update_step(d, a, k); };
    return detail::lloyd(ds, config, ops);
}

}  // namespace kmeans
