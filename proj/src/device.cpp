#include "kmeans/device.hpp"

#include <algorithm>
#include <iterator>
#include <limits>

#include "kmeans/parallel.hpp"

namespace kmeans {

std::string_view to_string(JobKind kind) {
    switch (kind) {
        case JobKind::MaxPairDistance: return "MaxPairDistance";
        case JobKind::CoordinateSum: return "CoordinateSum";
        case JobKind::ClusterSum: return "ClusterSum";
    }
    return "Unknown";
}

std::size_t DeviceJob::buffer_bytes() const noexcept {
    if (rows.empty()) return 0;
    if (kind == JobKind::MaxPairDistance) return (n() - rows.begin) * m * sizeof(double);
    std::size_t bytes = rows.size() * m * sizeof(double);
    if (kind == JobKind::ClusterSum) bytes += rows.size() * sizeof(Label);
    return bytes;
}

void validate_job(const DeviceJob& job, const DeviceCapability& cap) {
    if (job.m == 0 || job.coords.size() % job.m != 0) {
        throw Error(Errc::ContractViolation, "job coordinate buffer is not n x m");
    }
    const std::size_t n = job.n();
    if (job.rows.begin > job.rows.end || job.rows.end > n) {
        throw Error(Errc::ContractViolation, "job row range outside [0, n)");
    }
    if (job.kind != JobKind::MaxPairDistance) {
        const bool aligned_begin = job.rows.begin % kReductionBlockRows == 0;
        const bool aligned_end = job.rows.end % kReductionBlockRows == 0 || job.rows.end == n;
        if (!job.rows.empty() && !(aligned_begin && aligned_end)) {
            throw Error(Errc::ContractViolation, "sum jobs must cover whole reduction blocks");
        }
    }
    if (job.kind == JobKind::ClusterSum) {
        if (job.k == 0) throw Error(Errc::ContractViolation, "ClusterSum with k = 0");
        if (job.labels.size() != n) throw Error(Errc::ContractViolation, "label buffer is not length n");
    }
    if (job.buffer_bytes() > cap.max_buffer_bytes) {
        throw Error(Errc::CapacityExceeded, std::to_string(job.buffer_bytes()) + " bytes exceed device '" +
                                                cap.name + "' limit of " +
                                                std::to_string(cap.max_buffer_bytes));
    }
}

DeviceResult execute_on_host(const DeviceJob& job) {
    DeviceResult r;
    r.kind = job.kind;
    const MatrixView x{job.coords, job.n(), job.m};
    switch (job.kind) {
        case JobKind::MaxPairDistance:
            r.max_pair = max_pair_rows(x, job.rows);
            break;
        case JobKind::CoordinateSum:
            r.sums = block_sums(x, {}, 1, blocks_starting_in(job.rows, x.rows));
            break;
        case JobKind::ClusterSum:
            r.sums = block_sums(x, job.labels, job.k, blocks_starting_in(job.rows, x.rows));
            break;
    }
    return r;
}

ReferenceDevice::ReferenceDevice(DeviceCapability cap) : cap_(std::move(cap)) {}

DeviceCapability ReferenceDevice::default_capability() {
    return {"reference", std::numeric_limits<std::size_t>::max(), 65536};
}

Ticket ReferenceDevice::submit(const DeviceJob& job) {
    validate_job(job, cap_);
    std::lock_guard lock(mutex_);
    const Ticket t = next_ticket_++;
    pending_.emplace(t, job);
    return t;
}

DeviceResult ReferenceDevice::collect(Ticket ticket) {
    DeviceJob job;
    {
        std::lock_guard lock(mutex_);
        auto it = pending_.find(ticket);
        if (it == pending_.end()) {
            if (ticket >= 1 && ticket < next_ticket_) {
                throw Error(Errc::DoubleCollect, "ticket " + std::to_string(ticket) + " already collected");
            }
            throw Error(Errc::UnknownTicket, "ticket " + std::to_string(ticket) + " was never issued");
        }
        job = it->second;
        pending_.erase(it);
    }
    return execute_on_host(job);
}

std::size_t ReferenceDevice::outstanding() const {
    std::lock_guard lock(mutex_);
    return pending_.size();
}

std::unique_ptr<Device> make_device(std::string_view name) {
    if (name == "reference") return std::make_unique<ReferenceDevice>();
    if (name == "gpu") {
        throw Error(Errc::DeviceUnavailable, "no accelerator backend is compiled into this build");
    }
    throw Error(Errc::DeviceUnavailable, "unknown device '" + std::string(name) + "'");
}

bool device_available(std::string_view name) { return name == "reference"; }

namespace {

std::size_t aligned_job_rows(std::size_t requested) {
    const std::size_t blocks = std::max<std::size_t>(1, (requested + kReductionBlockRows - 1) / kReductionBlockRows);
    return blocks * kReductionBlockRows;
}

// Splits [begin, end) into pieces of at most `step` rows. Piece boundaries
// inherit the alignment of begin and step.
std::vector<RowRange> split_rows(RowRange rows, std::size_t step) {
    std::vector<RowRange> out;
    for (std::size_t b = rows.begin; b < rows.end; b += step) {
        out.push_back({b, std::min(rows.end, b + step)});
    }
    return out;
}

// Each worker submits all of its jobs before collecting any, so a device that
// runs asynchronously can overlap them.
std::vector<DeviceResult> submit_and_collect(Device& device, const std::vector<DeviceJob>& jobs) {
    std::vector<Ticket> tickets;
    tickets.reserve(jobs.size());
    for (const DeviceJob& job : jobs) tickets.push_back(device.submit(job));
    std::vector<DeviceResult> results;
    results.reserve(jobs.size());
    for (Ticket t : tickets) results.push_back(device.collect(t));
    return results;
}

class OffloadOps {
public:
    OffloadOps(Device& device, std::size_t n_workers, const KmeansConfig& config)
        : device_(device), n_workers_(n_workers), config_(config),
          job_rows_(aligned_job_rows(config.device_job_rows)) {}

    DiameterResult diameter(const Dataset& ds) const {
        if (ds.n() < 2) throw Error(Errc::InsufficientData, "diameter needs at least 2 samples");
        const ChunkPlan plan = plan_chunks(ds.n(), n_workers_);
        std::vector<PartialMax> partials(plan.chunks.size());
        fork_join(plan.chunks.size(), [&](std::size_t w) {
            std::vector<DeviceJob> jobs;
            for (RowRange rows : diameter_worker_rows(plan, ds.n(), w, config_.balanced_diameter)) {
                for (RowRange piece : split_rows(rows, job_rows_)) {
                    DeviceJob job;
                    job.kind = JobKind::MaxPairDistance;
                    job.rows = piece;
                    job.coords = ds.coords();
                    job.m = ds.m();
                    jobs.push_back(job);
                }
            }
            for (const DeviceResult& r : submit_and_collect(device_, jobs)) {
                merge_into(partials[w], r.max_pair);
            }
        });
        PartialMax best;
        for (const PartialMax& p : partials) merge_into(best, p);
        return detail::to_diameter(best);
    }

    ClusterTotals sums(const Dataset& ds, std::span<const Label> labels, std::size_t k) const {
        const ChunkPlan plan = plan_chunks(ds.n(), n_workers_);
        std::vector<std::vector<PartialSums>> per_worker(plan.chunks.size());
        fork_join(plan.chunks.size(), [&](std::size_t w) {
            const RowRange blocks = blocks_starting_in(plan.chunks[w], ds.n());
            const RowRange rows{blocks.begin * kReductionBlockRows,
                                std::min(ds.n(), blocks.end * kReductionBlockRows)};
            std::vector<DeviceJob> jobs;
            for (RowRange piece : split_rows(rows, job_rows_)) {
                DeviceJob job;
                job.kind = labels.empty() ? JobKind::CoordinateSum : JobKind::ClusterSum;
                job.rows = piece;
                job.coords = ds.coords();
                job.m = ds.m();
                job.labels = labels;
                job.k = k;
                jobs.push_back(job);
            }
            for (DeviceResult& r : submit_and_collect(device_, jobs)) {
                std::move(r.sums.begin(), r.sums.end(), std::back_inserter(per_worker[w]));
            }
        });
        std::vector<PartialSums> all;
        for (auto& v : per_worker) std::move(v.begin(), v.end(), std::back_inserter(all));
        return merge_in_block_order(std::move(all), ds.n());
    }

private:
    Device& device_;
    std::size_t n_workers_;
    const KmeansConfig& config_;
    std::size_t job_rows_;
};

}  // namespace

KmeansResult run_gpu(const Dataset& ds, const KmeansConfig& config, std::size_t n_workers,
                     Device& device) {
    if (n_workers < 1) throw Error(Errc::ContractViolation, "n_workers must be >= 1");
    const OffloadOps offload(device, n_workers, config);
    const ChunkPlan plan = plan_chunks(ds.n(), n_workers);

    detail::RegimeOps ops;
    ops.diameter = [&](const Dataset& d) { return offload.diameter(d); };
    ops.centroid = [&](const Dataset& d) {
        ClusterTotals totals = offload.sums(d, {}, 1);
        Centroid c{std::move(totals.sums)};
        for (double& v : c.coords) v /= static_cast<double>(d.n());
        return c;
    };
    // Assignment never goes to the device.
    ops.assign = [&](const Dataset& d, ClusterModel& model) { return assign_parallel(d, model, plan); };
    ops.update = [&](const Dataset& d, const Assignment& a, std::size_t k) {
        return detail::finalize_update(d, a, offload.sums(d, a.labels(), k));
    };

    try {
        KmeansResult result = detail::lloyd(ds, config, ops);
        if (device.outstanding() != 0) {
            throw Error(Errc::ContractViolation,
                        std::to_string(device.outstanding()) + " device tickets left uncollected");
        }
        return result;
    } catch (const Error& e) {
        if (e.code() != Errc::DeviceLost) throw;
        KmeansResult result = run_multi(ds, config, n_workers);
        result.fallback_events.push_back("device '" + device.capability().name +
                                         "' lost (" + e.what() + "); reran in multi-worker regime");
        return result;
    }
}

}  // namespace kmeans
