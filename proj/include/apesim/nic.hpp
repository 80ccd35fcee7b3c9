#pragma once

#include "calibration.hpp"
#include "channel.hpp"
#include "dma.hpp"
#include "hostbus.hpp"
#include "tlb.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace apesim {

// Per-transfer endpoint behaviour. GPU endpoints add a fixed small-message
// cost (applied once per transfer when either end is a GPU: the measured
// round-trip penalty depends on GPU involvement, not on how many ends are
// GPUs), read through the bus at a capped rate, and fall back to staging
// copies through host memory when peer-to-peer is off.
struct EndpointProfile {
    SimTime gpu_extra_small{1892};
    std::int64_t small_message_threshold_bytes = 8192;
    SimTime staging_fixed{4303};
    Ratio staging_copy_bytes_per_ns{32, 5}; // 6.4 GB/s
    Ratio gpu_read_cap_bytes_per_ns{3, 2};  // 1.5 GB/s
};

struct NicConfig {
    DmaConfig dma;
    TlbConfig tlb;
    HostBusProfile hostbus;
    SimTime injection_overhead{1500};
    SimTime delivery_overhead{3398};
    EndpointProfile endpoints;

    static NicConfig from_calibration(const CalibrationDefaults& c, HostBusProfile bus) {
        NicConfig n;
        n.dma.completion_latency = SimTime{c.dma_completion_latency_ns};
        n.dma.chunk_bytes = static_cast<int>(c.dma_chunk_bytes);
        n.tlb.entries = static_cast<int>(c.tlb_entries);
        n.tlb.page_bytes = static_cast<int>(c.tlb_page_bytes);
        n.tlb.hit_latency = SimTime{c.tlb_hit_latency_ns};
        n.tlb.miss_latency = SimTime{c.tlb_miss_latency_ns};
        n.hostbus = std::move(bus);
        n.injection_overhead = SimTime{c.nic_injection_overhead_ns};
        n.delivery_overhead = SimTime{c.nic_delivery_overhead_ns};
        n.endpoints.gpu_extra_small = SimTime{c.nic_gpu_extra_small_ns};
        n.endpoints.small_message_threshold_bytes = c.nic_small_message_threshold_bytes;
        n.endpoints.staging_fixed = SimTime{c.nic_staging_fixed_ns};
        n.endpoints.staging_copy_bytes_per_ns = Ratio{c.nic_staging_copy_bytes_per_s, 1000000000};
        n.endpoints.gpu_read_cap_bytes_per_ns = Ratio{c.nic_gpu_read_bandwidth_cap_bytes_per_s, 1000000000};
        return n;
    }
};

struct PutRequest {
    NodeId src = 0;
    NodeId dst = 0;
    MemKind src_kind = MemKind::host;
    MemKind dst_kind = MemKind::host;
    VAddr src_vaddr = 0;
    VAddr dst_vaddr = 0;
    std::int64_t bytes = 0;
    bool p2p = true;
};

// Consecutive critical-path segments; they sum exactly to the total latency.
struct PathBreakdown {
    SimTime staging_src;
    SimTime injection;
    SimTime gpu_penalty;
    SimTime dma;
    SimTime network;
    SimTime translation;
    SimTime delivery;
    SimTime staging_dst;
    SimTime total() const {
        return staging_src + injection + gpu_penalty + dma + network + translation + delivery + staging_dst;
    }
};

struct CompletionRecord {
    std::uint32_t message_id = 0;
    PutRequest request;
    SimTime start;
    SimTime complete;
    SimTime first_delivery; // first frame drained at the receiver
    SimTime last_delivery;  // last frame drained at the receiver
    PathBreakdown breakdown;
    bool delivered = false;
    bool protection_fault = false;
    std::vector<std::pair<std::uint64_t, PAddr>> page_translations; // recorded only when logging is on

    SimTime latency() const { return complete - start; }
};

struct NicStats {
    std::uint64_t frames_received = 0;
    std::uint64_t frames_forwarded = 0;
    std::uint64_t frames_delivered = 0;
    std::uint64_t protection_faults = 0;
    std::uint64_t bytes_delivered = 0;
};

// Per-node NIC: sender pipeline metadata lives with the in-flight message in
// the platform; the NIC itself owns the receive side (shared translate stage
// across the six incoming channels, page table, TLB, buffer occupancy).
class Nic {
public:
    using PiggybackHook = std::function<void(Direction, std::uint8_t, SimTime)>;
    using DrainedHook = std::function<void(const Frame&, SimTime, SimTime, bool)>; // frame, arrival, drained, faulted
    using TranslationHook =
        std::function<void(std::uint32_t, std::uint64_t, PAddr)>; // message, vpage, delivered paddr

    Nic(Engine& engine, NodeId id, TorusSpec spec, NicConfig cfg)
        : engine_(engine), id_(id), spec_(spec), cfg_(std::move(cfg)), tlb_(cfg_.tlb), pages_(cfg_.tlb.page_bytes) {}

    void set_out_channels(std::array<Channel*, 6> out) { out_ = out; }
    void set_piggyback_hook(PiggybackHook fn) { piggyback_hook_ = std::move(fn); }
    void set_drained_hook(DrainedHook fn) { drained_hook_ = std::move(fn); }
    void set_translation_hook(TranslationHook fn) { translation_hook_ = std::move(fn); }

    NodeId id() const { return id_; }
    const NicConfig& config() const { return cfg_; }
    Tlb& tlb() { return tlb_; }
    PageTable& pages() { return pages_; }
    const NicStats& stats() const { return stats_; }
    Channel* out(Direction d) { return out_[static_cast<int>(d)]; }

    void register_buffer(MemKind kind, VAddr base, std::uint64_t bytes) { pages_.register_region(kind, base, bytes); }

    // Entry point wired to the six incoming channels.
    void handle_arrival(Frame&& f, SimTime arrival, Direction from, Channel& via) {
        if (piggyback_hook_ && f.piggyback != 0) piggyback_hook_(from, f.piggyback, arrival);
        if (f.control) return; // register write only, nothing to buffer
        ++stats_.frames_received;
        if (f.dst != id_) {
            forward(std::move(f), via);
            return;
        }
        rx_occupancy_words_ += f.total_words(via.params());
        if (rx_occupancy_words_ * kWordBytes > 6 * via.params().buffer_bytes) {
            throw SimError("nic " + std::to_string(id_) + ": receive occupancy exceeds channel buffers");
        }
        rx_queue_.push_back(PendingRx{std::move(f), arrival, &via});
        if (!rx_busy_) process_next();
    }

    // Translation timing for one frame: one TLB access per page it touches.
    // Faulted frames still cost a lookup attempt.
    struct TranslateOutcome {
        SimTime latency;
        bool faulted = false;
        std::vector<std::pair<std::uint64_t, PAddr>> pages;
    };

    TranslateOutcome translate_frame(const Frame& f) {
        TranslateOutcome out{};
        const MemKind kind = static_cast<MemKind>(f.dst_kind_raw);
        const std::uint64_t page_bytes = static_cast<std::uint64_t>(cfg_.tlb.page_bytes);
        const VAddr base = f.dst_vaddr + static_cast<std::uint64_t>(f.frame_seq) * f.chunk_stride;
        const std::uint64_t span = f.payload_bytes == 0 ? 1 : f.payload_bytes;
        const std::uint64_t first = base / page_bytes;
        const std::uint64_t last = (base + span - 1) / page_bytes;
        for (std::uint64_t p = first; p <= last; ++p) {
            const VAddr vaddr = p * page_bytes;
            if (!pages_.registered(kind, vaddr)) {
                out.faulted = true;
                out.latency = out.latency + cfg_.tlb.hit_latency;
                return out;
            }
            const auto res = tlb_.access(kind, vaddr, pages_);
            out.latency = out.latency + res.latency;
            out.pages.emplace_back(p, res.paddr);
        }
        return out;
    }

private:
    struct PendingRx {
        Frame frame;
        SimTime arrival;
        Channel* via;
    };

    void forward(Frame&& f, Channel& via) {
        ++stats_.frames_forwarded;
        const Route r = route(id_, f.dst, spec_);
        // Store-and-forward switch: the frame leaves this node's buffer as soon
        // as it is queued on the next hop, which frees the incoming credits.
        via.on_receiver_drained(f.total_words(via.params()));
        if (r.empty()) return; // stray frame for a dead destination; drop
        Channel* next = out_[static_cast<int>(r.front())];
        if (next) next->submit(std::move(f));
    }

    void process_next() {
        if (rx_queue_.empty()) {
            rx_busy_ = false;
            return;
        }
        rx_busy_ = true;
        PendingRx item = std::move(rx_queue_.front());
        rx_queue_.pop_front();

        TranslateOutcome outcome = translate_frame(item.frame);
        const SimTime done = engine_.now() + outcome.latency;
        engine_.schedule(done, "nic." + std::to_string(id_), "rx-drain",
                         [this, item = std::move(item), outcome = std::move(outcome), done]() mutable {
                             finish_drain(item, outcome, done);
                             process_next();
                         });
    }

    void finish_drain(PendingRx& item, TranslateOutcome& outcome, SimTime done) {
        const int words = item.frame.total_words(item.via->params());
        rx_occupancy_words_ -= words;
        item.via->on_receiver_drained(words);
        if (outcome.faulted) {
            ++stats_.protection_faults;
        } else {
            ++stats_.frames_delivered;
            stats_.bytes_delivered += item.frame.payload_bytes;
            if (translation_hook_) {
                for (const auto& [vpage, paddr] : outcome.pages) {
                    translation_hook_(item.frame.message_id, vpage, paddr);
                }
            }
        }
        if (drained_hook_) drained_hook_(item.frame, item.arrival, done, outcome.faulted);
    }

    Engine& engine_;
    NodeId id_;
    TorusSpec spec_;
    NicConfig cfg_;
    Tlb tlb_;
    PageTable pages_;
    std::array<Channel*, 6> out_{};
    std::deque<PendingRx> rx_queue_;
    bool rx_busy_ = false;
    std::int64_t rx_occupancy_words_ = 0;
    NicStats stats_;
    PiggybackHook piggyback_hook_;
    DrainedHook drained_hook_;
    TranslationHook translation_hook_;
};

} // namespace apesim
