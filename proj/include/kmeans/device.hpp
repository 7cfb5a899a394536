#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kmeans/engine.hpp"
#include "kmeans/reduce.hpp"

namespace kmeans {

enum class JobKind { MaxPairDistance, CoordinateSum, ClusterSum };

std::string_view to_string(JobKind kind);

/// One offloaded reduction over a row range. Buffers are borrowed and must
/// outlive the matching collect().
struct DeviceJob {
    JobKind kind = JobKind::CoordinateSum;
    RowRange rows;
    std::span<const double> coords;  // full n x m, row-major
    std::size_t m = 0;
    std::span<const Label> labels;   // ClusterSum only
    std::size_t k = 1;               // ClusterSum only

    std::size_t n() const noexcept { return m == 0 ? 0 : coords.size() / m; }
    /// Bytes the device must read for this job.
    std::size_t buffer_bytes() const noexcept;
};

/// MaxPairDistance fills max_pair; the sum kinds fill one PartialSums per
/// reduction block of the job range (k == 1 for CoordinateSum).
struct DeviceResult {
    JobKind kind = JobKind::CoordinateSum;
    PartialMax max_pair;
    std::vector<PartialSums> sums;
};

struct DeviceCapability {
    std::string name;
    std::size_t max_buffer_bytes = 0;
    std::size_t preferred_chunk_rows = 0;
};

using Ticket = std::uint64_t;

/// Accelerator seam. submit() and collect() may be called concurrently from
/// several coordinating workers; each ticket is collected exactly once.
class Device {
public:
    virtual ~Device() = default;

    virtual const DeviceCapability& capability() const = 0;
    virtual Ticket submit(const DeviceJob& job) = 0;
    virtual DeviceResult collect(Ticket ticket) = 0;
    virtual std::size_t outstanding() const = 0;
};

/// Checks a job against its own buffers and a capability; throws
/// ContractViolation / ValidationFailure / CapacityExceeded.
void validate_job(const DeviceJob& job, const DeviceCapability& cap);

/// Executes jobs on the host with the library's own kernels, so results are
/// bit-identical to the multi-worker partials. Work runs lazily inside
/// collect(), on the collecting thread.
class ReferenceDevice final : public Device {
public:
    explicit ReferenceDevice(DeviceCapability cap = default_capability());

    static DeviceCapability default_capability();

    const DeviceCapability& capability() const override { return cap_; }
    Ticket submit(const DeviceJob& job) override;
    DeviceResult collect(Ticket ticket) override;
    std::size_t outstanding() const override;

private:
    DeviceCapability cap_;
    mutable std::mutex mutex_;
    std::unordered_map<Ticket, DeviceJob> pending_;
    Ticket next_ticket_ = 1;
};

/// Runs one job synchronously with the host kernels.
DeviceResult execute_on_host(const DeviceJob& job);

/// Device registry: "reference" always exists; "gpu" needs an accelerator
/// backend, which this build does not include (throws DeviceUnavailable).
std::unique_ptr<Device> make_device(std::string_view name);
bool device_available(std::string_view name);

/// Multi-worker regime with the diameter and all coordinate sums offloaded
/// to the device; assignment stays on host workers. Falls back to run_multi
/// on DeviceLost and records the event in the result.
KmeansResult run_gpu(const Dataset& ds, const KmeansConfig& config, std::size_t n_workers,
                     Device& device);

}  // namespace kmeans
