#include "kmeans/parallel.hpp"

#include <algorithm>
#include <iterator>

namespace kmeans {

ChunkPlan plan_chunks(std::size_t n, std::size_t n_workers) {
    if (n == 0 || n_workers == 0) throw Error(Errc::ContractViolation, "plan_chunks needs n, N >= 1");
    ChunkPlan plan;
    plan.n_workers = std::min(n, n_workers);
    const std::size_t base = n / plan.n_workers;
    const std::size_t extra = n % plan.n_workers;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < plan.n_workers; ++w) {
        const std::size_t size = base + (w < extra ? 1 : 0);
        plan.chunks.push_back({begin, begin + size});
        begin += size;
    }
    return plan;
}

void fork_join(std::size_t workers, const std::function<void(std::size_t)>& body) {
    if (workers == 0) return;
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    body(w);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        try {
            body(0);
        } catch (...) {
            errors[0] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

namespace {

void check_plan(const ChunkPlan& plan, std::size_t n) {
    if (plan.chunks.empty() || plan.chunks.front().begin != 0 || plan.chunks.back().end != n) {
        throw Error(Errc::ContractViolation, "chunk plan does not cover the dataset");
    }
}

}  // namespace

std::vector<RowRange> diameter_worker_rows(const ChunkPlan& plan, std::size_t n, std::size_t w,
                                           bool balanced) {
    if (!balanced) return {plan.chunks[w]};
    const std::size_t half = (n + 1) / 2;
    const ChunkPlan halves = plan_chunks(half, plan.n_workers);
    std::vector<RowRange> out;
    if (w >= halves.chunks.size()) return out;
    const RowRange front = halves.chunks[w];
    out.push_back(front);
    // Mirror of [a, b) is [n-b, n-a), restricted to the back half.
    RowRange back{std::max(half, n - front.end), n - front.begin};
    if (!back.empty()) out.push_back(back);
    return out;
}

DiameterResult diameter_parallel(const Dataset& ds, const ChunkPlan& plan, bool balanced) {
    if (ds.n() < 2) throw Error(Errc::InsufficientData, "diameter needs at least 2 samples");
    check_plan(plan, ds.n());
    std::vector<PartialMax> partials(plan.chunks.size());
    const MatrixView x = ds.view();
    fork_join(plan.chunks.size(), [&](std::size_t w) {
        for (RowRange rows : diameter_worker_rows(plan, ds.n(), w, balanced)) {
            merge_into(partials[w], max_pair_rows(x, rows));
        }
    });
    PartialMax best;
    for (const PartialMax& p : partials) merge_into(best, p);
    return detail::to_diameter(best);
}

namespace {

ClusterTotals chunked_sums(const Dataset& ds, std::span<const Label> labels, std::size_t k,
                           const ChunkPlan& plan) {
    check_plan(plan, ds.n());
    std::vector<std::vector<PartialSums>> per_worker(plan.chunks.size());
    const MatrixView x = ds.view();
    fork_join(plan.chunks.size(), [&](std::size_t w) {
        per_worker[w] = block_sums(x, labels, k, blocks_starting_in(plan.chunks[w], ds.n()));
    });
    std::vector<PartialSums> all;
    for (auto& v : per_worker) std::move(v.begin(), v.end(), std::back_inserter(all));
    return merge_in_block_order(std::move(all), ds.n());
}

}  // namespace

Centroid centroid_parallel(const Dataset& ds, const ChunkPlan& plan) {
    ClusterTotals totals = chunked_sums(ds, {}, 1, plan);
    Centroid c{std::move(totals.sums)};
    for (double& v : c.coords) v /= static_cast<double>(ds.n());
    return c;
}

Assignment assign_parallel(const Dataset& ds, ClusterModel& model, const ChunkPlan& plan) {
    if (model.m() != ds.m() || model.k() == 0) {
        throw Error(Errc::ContractViolation, "model dimension does not match dataset");
    }
    check_plan(plan, ds.n());
    std::vector<Label> labels(ds.n());
    const MatrixView x = ds.view();
    const MatrixView centers = model.view();
    fork_join(plan.chunks.size(), [&](std::size_t w) {
        detail::assign_rows(x, centers, plan.chunks[w], labels);
    });
    Assignment a(std::move(labels), model.k());
    model.counts() = a.histogram();
    return a;
}

ClusterModel update_parallel(const Dataset& ds, const Assignment& assignment, std::size_t k,
                             const ChunkPlan& plan) {
    if (assignment.size() != ds.n() || assignment.k() != k) {
        throw Error(Errc::ContractViolation, "assignment does not match dataset / k");
    }
    return detail::finalize_update(ds, assignment, chunked_sums(ds, assignment.labels(), k, plan));
}

KmeansResult run_multi(const Dataset& ds, const KmeansConfig& config, std::size_t n_workers) {
    if (n_workers < 1) throw Error(Errc::ContractViolation, "n_workers must be >= 1");
    const ChunkPlan plan = plan_chunks(ds.n(), n_workers);
    const bool balanced = config.balanced_diameter;
    detail::RegimeOps ops;
    ops.diameter = [n_workers, balanced](const Dataset& d) {
        return diameter_parallel(d, plan_chunks(d.n(), n_workers), balanced);
    };
    ops.centroid = [&plan](const Dataset& d) { return centroid_parallel(d, plan); };
    ops.assign = [&plan](const Dataset& d, ClusterModel& model) { return assign_parallel(d, model, plan); };
    ops.update = [&plan](const Dataset& d, const Assignment& a, std::size_t k) {
        return update_parallel(d, a, k, plan);
    };
    return detail::lloyd(ds, config, ops);
}

}  // namespace kmeans
