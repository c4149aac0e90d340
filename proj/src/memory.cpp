#include "fracheat/memory.hpp"
#include "fracheat/errors.hpp"

#include <cstdlib>
#include <string>

namespace fracheat {

namespace {

std::size_t read_cap_mb() {
    const char* env = std::getenv("LATTICE_FRACHEAT_MEM_CAP_MB");
    if (env == nullptr || *env == '\0') return 2048;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || v <= 0) return 2048;
    return static_cast<std::size_t>(v);
}

} // namespace

MemoryBudget::MemoryBudget() : cap_(read_cap_mb() * (std::size_t(1) << 20)) {}

MemoryBudget& MemoryBudget::instance() {
    static MemoryBudget self;
    return self;
}

std::size_t MemoryBudget::free_bytes() const noexcept {
    std::size_t u = used_.load();
    return u >= cap_ ? 0 : cap_ - u;
}

MemoryBudget::Reservation MemoryBudget::reserve(std::size_t bytes, const char* what) {
    if (bytes < tracking_threshold) return Reservation(0);
    std::size_t prev = used_.load();
    for (;;) {
        if (prev + bytes > cap_) {
            throw BoxOverflow(std::string(what) + ": request of " +
                              std::to_string(bytes >> 20) + " MiB exceeds memory cap (" +
                              std::to_string(cap_ >> 20) + " MiB, " +
                              std::to_string((cap_ - std::min(prev, cap_)) >> 20) +
                              " MiB free); raise LATTICE_FRACHEAT_MEM_CAP_MB or shrink the box");
        }
        if (used_.compare_exchange_weak(prev, prev + bytes)) break;
    }
    return Reservation(bytes);
}

MemoryBudget::Reservation::Reservation(Reservation&& other) noexcept : bytes_(other.bytes_) {
    other.bytes_ = 0;
}

MemoryBudget::Reservation& MemoryBudget::Reservation::operator=(Reservation&& other) noexcept {
    if (this != &other) {
        release();
        bytes_ = other.bytes_;
        other.bytes_ = 0;
    }
    return *this;
}

MemoryBudget::Reservation::~Reservation() { release(); }

void MemoryBudget::Reservation::release() noexcept {
    if (bytes_ > 0) {
        MemoryBudget::instance().used_.fetch_sub(bytes_);
        bytes_ = 0;
    }
}

} // namespace fracheat
