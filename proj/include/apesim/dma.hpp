#pragma once

#include "errors.hpp"
#include "ratio.hpp"
#include "time.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace apesim {

// Converts a bit count into integer nanoseconds at an exact rational rate,
// carrying the remainder so long sequences accumulate no rounding drift.
class FractionalClock {
public:
    FractionalClock() : bits_per_ns_(Ratio{1}) {}
    explicit FractionalClock(Ratio bits_per_ns) : bits_per_ns_(bits_per_ns) {
        if (!(Ratio(0) < bits_per_ns)) throw ConfigError("rate must be positive");
    }

    // Time to move `bits`, consuming/banking the fractional remainder.
    SimTime advance(std::int64_t bits) {
        // ns = bits * den / num, tracked as a running fraction over num.
        const __int128 total = static_cast<__int128>(bits) * bits_per_ns_.den + carry_;
        const std::int64_t ns = static_cast<std::int64_t>(total / bits_per_ns_.num);
        carry_ = static_cast<std::int64_t>(total % bits_per_ns_.num);
        return SimTime{ns};
    }

    // Stateless variant: round to nearest, no carry involved.
    SimTime span_for(std::int64_t bits) const {
        const __int128 num = static_cast<__int128>(bits) * bits_per_ns_.den;
        return SimTime{static_cast<std::int64_t>((num + bits_per_ns_.num / 2) / bits_per_ns_.num)};
    }

    void reset() { carry_ = 0; }

private:
    Ratio bits_per_ns_;
    std::int64_t carry_ = 0;
};

// DMA engine configuration: `engines` is the number of outstanding-request
// slots (1 on the original card, 2 after the prefetchable command queue was
// added), completion_latency the system-dependent issue-to-first-data delay.
struct DmaConfig {
    int engines = 2;
    SimTime completion_latency{683}; // calibrated: L/(L+Tx) = 0.4 at the 4 KiB reference transaction
    int chunk_bytes = 4096;

    void validate() const {
        if (engines < 1) throw ConfigError("dma: engines must be >= 1");
        if (completion_latency < SimTime::zero()) throw ConfigError("dma: completion latency must be >= 0");
        if (chunk_bytes < 1) throw ConfigError("dma: chunk bytes must be >= 1");
    }
};

struct DmaTxn {
    SimTime issue;     // request enters a slot
    SimTime ready;     // completion returns, data available for the bus
    SimTime bus_start; // exclusive bus transfer begins
    SimTime bus_end;   // transfer done, slot freed
};

struct DmaTimeline {
    std::vector<DmaTxn> txns;
    SimTime total() const { return txns.empty() ? SimTime::zero() : txns.back().bus_end; }
};

// Pipelines n equal transactions through k outstanding-request slots. A slot
// is held from issue until its bus transfer completes; bus transfers are
// exclusive and FIFO in issue order.
inline DmaTimeline dma_schedule(int n, SimTime completion_latency, SimTime bus_transfer_time, int engines) {
    if (n < 0 || engines < 1) throw ConfigError("dma_schedule: need n >= 0 and engines >= 1");
    DmaTimeline tl;
    tl.txns.reserve(static_cast<std::size_t>(n));
    std::vector<SimTime> slot_free(static_cast<std::size_t>(engines), SimTime::zero());
    SimTime bus_free = SimTime::zero();
    for (int i = 0; i < n; ++i) {
        auto slot = std::min_element(slot_free.begin(), slot_free.end());
        DmaTxn t;
        t.issue = *slot;
        t.ready = t.issue + completion_latency;
        t.bus_start = std::max(t.ready, bus_free);
        t.bus_end = t.bus_start + bus_transfer_time;
        bus_free = t.bus_end;
        *slot = t.bus_end;
        tl.txns.push_back(t);
    }
    return tl;
}

// Byte-count front end: splits `bytes` into chunk-sized transactions moved at
// `bus_bytes_per_s` (already clamped by any endpoint read cap). Per-chunk bus
// times come from a fractional clock, so the aggregate matches the rate
// exactly.
inline DmaTimeline dma_schedule_bytes(std::int64_t bytes, const DmaConfig& cfg, Ratio bus_bytes_per_ns) {
    cfg.validate();
    if (bytes < 0) throw ConfigError("dma_schedule_bytes: negative size");
    const std::int64_t chunk = cfg.chunk_bytes;
    // A zero-byte transfer still issues one (empty) descriptor.
    const int n = bytes == 0 ? 1 : static_cast<int>((bytes + chunk - 1) / chunk);
    FractionalClock clock(bus_bytes_per_ns * Ratio(8)); // bits per ns
    DmaTimeline tl;
    tl.txns.reserve(static_cast<std::size_t>(n));
    std::vector<SimTime> slot_free(static_cast<std::size_t>(cfg.engines), SimTime::zero());
    SimTime bus_free = SimTime::zero();
    for (int i = 0; i < n; ++i) {
        const std::int64_t this_bytes = std::min<std::int64_t>(chunk, bytes - static_cast<std::int64_t>(i) * chunk);
        const SimTime tx = clock.advance(this_bytes * 8);
        auto slot = std::min_element(slot_free.begin(), slot_free.end());
        DmaTxn t;
        t.issue = *slot;
        t.ready = t.issue + cfg.completion_latency;
        t.bus_start = std::max(t.ready, bus_free);
        t.bus_end = t.bus_start + tx;
        bus_free = t.bus_end;
        *slot = t.bus_end;
        tl.txns.push_back(t);
    }
    return tl;
}

} // namespace apesim
