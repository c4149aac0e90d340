#pragma once

#include <atomic>
#include <cstddef>

namespace fracheat {

// Process-wide accounting for large array allocations (spatial boxes and
// transform workspaces). The cap comes from LATTICE_FRACHEAT_MEM_CAP_MB
// (default 2048) read once at first use. Requests that cannot fit throw
// BoxOverflow; small allocations below the tracking threshold are ignored.
class MemoryBudget {
public:
    static MemoryBudget& instance();

    std::size_t cap_bytes() const noexcept { return cap_; }
    std::size_t used_bytes() const noexcept { return used_.load(); }
    std::size_t free_bytes() const noexcept;

    // Allocations smaller than this are not tracked.
    static constexpr std::size_t tracking_threshold = std::size_t(1) << 20;

    class Reservation {
    public:
        Reservation() noexcept = default;
        Reservation(Reservation&& other) noexcept;
        Reservation& operator=(Reservation&& other) noexcept;
        Reservation(const Reservation&) = delete;
        Reservation& operator=(const Reservation&) = delete;
        ~Reservation();
        std::size_t bytes() const noexcept { return bytes_; }
        void release() noexcept;

    private:
        friend class MemoryBudget;
        explicit Reservation(std::size_t b) noexcept : bytes_(b) {}
        std::size_t bytes_ = 0;
    };

    // Reserves `bytes` against the cap; `what` names the consumer for the
    // BoxOverflow message.
    Reservation reserve(std::size_t bytes, const char* what);

private:
    MemoryBudget();
    std::atomic<std::size_t> used_{0};
    std::size_t cap_ = 0;
};

} // namespace fracheat
