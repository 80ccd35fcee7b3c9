#pragma once

#include "lofamo.hpp"
#include "nic.hpp"
#include "rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace apesim {

struct PlatformConfig {
    TorusSpec torus{4, 4, 1};
    LinkProfile link = link_preset("apelink-operational");
    FramingParams framing{};
    SimTime hop_latency{600};
    NicConfig nic{};
    LofamoConfig lofamo{};
    bool lofamo_enabled = true;
    bool lofamo_phase_jitter = false;
    bool log_translations = false;
    std::uint64_t seed = 1;
    std::ostream* trace_stream = nullptr; // per-event trace lines when set

    static PlatformConfig from_calibration(const CalibrationDefaults& c) {
        PlatformConfig p;
        p.hop_latency = SimTime{c.link_hop_latency_ns};
        p.nic = NicConfig::from_calibration(c, hostbus_preset("gen2-x8"));
        p.lofamo = LofamoConfig::from_calibration(c);
        return p;
    }
};

// Builds synthetic frames for a transfer: sizes and delivery metadata only,
// payload bytes are not materialized (the timing model never reads them).
inline std::vector<Frame> frame_message_sized(NodeId dst, std::uint32_t message_id, std::int64_t bytes,
                                              const FramingParams& params, MemKind dst_kind, VAddr dst_vaddr) {
    const std::int64_t chunk = static_cast<std::int64_t>(params.max_payload_words) * kWordBytes;
    std::vector<Frame> frames;
    std::int64_t offset = 0;
    std::uint32_t seq = 0;
    do {
        const std::int64_t n = std::min(chunk, bytes - offset);
        Frame f;
        f.payload_bytes = static_cast<std::uint32_t>(n);
        f.dst = dst;
        f.message_id = message_id;
        f.frame_seq = seq++;
        f.last = (offset + n == bytes);
        f.dst_kind_raw = static_cast<std::uint8_t>(dst_kind);
        f.dst_vaddr = dst_vaddr;
        f.chunk_stride = static_cast<std::uint32_t>(chunk);
        frames.push_back(std::move(f));
        offset += n;
    } while (offset < bytes);
    return frames;
}

// The simulated machine: a torus of NIC-equipped nodes, six directed channels
// per node, and the fault-monitor layer on top. Owns all message bookkeeping
// so completion records carry an exact critical-path breakdown.
class Platform {
public:
    using CompletionFn = std::function<void(const CompletionRecord&)>;

    explicit Platform(PlatformConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.torus.validate();
        cfg_.framing.validate();
        cfg_.lofamo.validate();
        if (cfg_.trace_stream) engine_.set_trace_stream(cfg_.trace_stream);
        const int n = cfg_.torus.node_count();
        channels_.resize(static_cast<std::size_t>(n));
        for (NodeId node = 0; node < static_cast<NodeId>(n); ++node) {
            nics_.push_back(std::make_unique<Nic>(engine_, node, cfg_.torus, cfg_.nic));
            lofamo_nodes_.push_back(
                std::make_unique<LofamoNode>(engine_, node, cfg_.torus, cfg_.lofamo, master_, instr_));
        }
        for (NodeId node = 0; node < static_cast<NodeId>(n); ++node) {
            std::array<Channel*, 6> out{};
            for (const Direction d : all_directions) {
                const NodeId peer = neighbor(node, d, cfg_.torus);
                auto ch = std::make_unique<Channel>(engine_,
                                                    "ch." + std::to_string(node) + "." + to_string(d), node, peer, d,
                                                    cfg_.link, cfg_.framing, cfg_.hop_latency);
                out[static_cast<int>(d)] = ch.get();
                channels_[node].push_back(std::move(ch));
            }
            nics_[node]->set_out_channels(out);
            if (cfg_.lofamo_enabled) lofamo_nodes_[node]->set_out_channels(out);
        }
        for (NodeId node = 0; node < static_cast<NodeId>(n); ++node) {
            for (const Direction d : all_directions) {
                Channel* ch = channels_[node][static_cast<int>(d)].get();
                const NodeId peer = ch->peer();
                const Direction from = reverse(d);
                ch->set_delivery([this, peer, from, ch](Frame&& f, SimTime arrival) {
                    nics_[peer]->handle_arrival(std::move(f), arrival, from, *ch);
                });
            }
            nics_[node]->set_piggyback_hook([this, node](Direction from, std::uint8_t byte, SimTime at) {
                lofamo_nodes_[node]->on_piggyback(from, byte, at);
            });
            nics_[node]->set_drained_hook(
                [this, node](const Frame& f, SimTime arrival, SimTime drained, bool faulted) {
                    on_frame_drained(node, f, arrival, drained, faulted);
                });
            if (cfg_.log_translations) {
                nics_[node]->set_translation_hook([this](std::uint32_t msg, std::uint64_t vpage, PAddr paddr) {
                    translation_log_.emplace_back(msg, vpage, paddr);
                });
            }
        }
        if (cfg_.lofamo_enabled) {
            for (NodeId node = 0; node < static_cast<NodeId>(n); ++node) {
                SimTime jitter = SimTime::zero();
                if (cfg_.lofamo_phase_jitter) {
                    RngStream rng = make_stream(cfg_.seed, "lofamo.jitter", node);
                    const std::int64_t room = cfg_.lofamo.wd.ns - cfg_.lofamo.neighbor_poll_phase.ns;
                    jitter = SimTime{static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(room)))};
                }
                lofamo_nodes_[node]->start(jitter);
            }
        }
    }

    Engine& engine() { return engine_; }
    const PlatformConfig& config() const { return cfg_; }
    const TorusSpec& torus() const { return cfg_.torus; }
    Nic& nic(NodeId n) { return *nics_.at(n); }
    Channel& channel(NodeId n, Direction d) { return *channels_.at(n).at(static_cast<int>(d)); }
    LofamoNode& lofamo_node(NodeId n) { return *lofamo_nodes_.at(n); }
    MasterCollector& master() { return master_; }
    const LofamoInstrumentation& instrumentation() const { return instr_; }

    void register_buffer(NodeId node, MemKind kind, VAddr base, std::uint64_t bytes) {
        nics_.at(node)->register_buffer(kind, base, bytes);
    }
    void warm_tlb(NodeId node, MemKind kind, VAddr base, std::uint64_t bytes) {
        nics_.at(node)->tlb().warm(kind, base, bytes, nics_.at(node)->pages());
    }

    std::uint32_t rdma_put(const PutRequest& req, CompletionFn on_complete = {}) {
        if (req.src == req.dst) throw ConfigError("rdma_put: src == dst transfers are not modeled");
        if (static_cast<int>(req.src) >= cfg_.torus.node_count() ||
            static_cast<int>(req.dst) >= cfg_.torus.node_count()) {
            throw ConfigError("rdma_put: node id out of range");
        }
        if (req.bytes < 0) throw ConfigError("rdma_put: negative size");

        const std::uint32_t id = next_message_id_++;
        MessageState st;
        st.req = req;
        st.on_complete = std::move(on_complete);
        st.t0 = engine_.now();

        const EndpointProfile& ep = cfg_.nic.endpoints;
        const bool gpu_involved = req.src_kind == MemKind::gpu || req.dst_kind == MemKind::gpu;
        const bool small = req.bytes <= ep.small_message_threshold_bytes;
        st.gpu_penalty = (gpu_involved && small) ? ep.gpu_extra_small : SimTime::zero();

        SimTime staging_src = SimTime::zero();
        if (req.src_kind == MemKind::gpu && !req.p2p) {
            staging_src = ep.staging_fixed + copy_time(req.bytes, ep.staging_copy_bytes_per_ns);
        }
        st.m1 = st.t0 + staging_src;
        st.m2 = st.m1 + cfg_.nic.injection_overhead + st.gpu_penalty;

        // One bus transaction per frame; a peer-to-peer GPU source is read at
        // the capped GPU rate, a staged source already sits in host memory.
        Ratio bus = cfg_.nic.hostbus.bits_per_ns() / Ratio(8);
        if (req.src_kind == MemKind::gpu && req.p2p && ep.gpu_read_cap_bytes_per_ns < bus) {
            bus = ep.gpu_read_cap_bytes_per_ns;
        }
        DmaConfig dma = cfg_.nic.dma;
        dma.chunk_bytes = cfg_.framing.max_payload_words * kWordBytes;
        const DmaTimeline timeline = dma_schedule_bytes(req.bytes, dma, bus);
        st.m3 = st.m2 + timeline.total();

        std::vector<Frame> frames =
            frame_message_sized(req.dst, id, req.bytes, cfg_.framing, req.dst_kind, req.dst_vaddr);
        st.frames_expected = static_cast<std::uint32_t>(frames.size());
        inflight_.emplace(id, std::move(st));

        const Route r = route(req.src, req.dst, cfg_.torus);
        Channel* first = channels_[req.src][static_cast<int>(r.front())].get();
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const SimTime at = inflight_.at(id).m2 + timeline.txns.at(i).bus_end;
            engine_.schedule(at, "nic." + std::to_string(req.src), "frame-submit",
                             [first, f = std::move(frames[i])]() mutable { first->submit(std::move(f)); });
        }
        return id;
    }

    const CompletionRecord* completion(std::uint32_t id) const {
        const auto it = done_.find(id);
        return it == done_.end() ? nullptr : &it->second;
    }
    const std::map<std::uint32_t, CompletionRecord>& completions() const { return done_; }
    const std::vector<std::tuple<std::uint32_t, std::uint64_t, PAddr>>& translation_log() const {
        return translation_log_;
    }

    void inject_fault(const FaultEvent& f) {
        if (static_cast<int>(f.node) >= cfg_.torus.node_count()) throw ConfigError("fault: node out of range");
        engine_.schedule(f.at, "fault." + std::to_string(f.node), to_string(f.kind), [this, f] { apply_fault(f); });
    }

    std::uint64_t run_until(SimTime t) { return engine_.run_until(t); }
    std::uint64_t run_all() { return engine_.run_all(); }

private:
    struct MessageState {
        PutRequest req;
        CompletionFn on_complete;
        SimTime t0, m1, m2, m3;
        SimTime gpu_penalty;
        SimTime first_delivery, last_arrival, last_drain;
        std::uint32_t frames_expected = 0;
        std::uint32_t frames_done = 0;
        bool first_seen = false;
        bool faulted = false;
    };

    static SimTime copy_time(std::int64_t bytes, const Ratio& bytes_per_ns) {
        // ceil(bytes / rate)
        const __int128 num = static_cast<__int128>(bytes) * bytes_per_ns.den;
        return SimTime{static_cast<std::int64_t>((num + bytes_per_ns.num - 1) / bytes_per_ns.num)};
    }

    void on_frame_drained(NodeId node, const Frame& f, SimTime arrival, SimTime drained, bool faulted) {
        const auto it = inflight_.find(f.message_id);
        if (it == inflight_.end()) return; // frame injected outside the put API
        MessageState& st = it->second;
        if (node != st.req.dst) return;
        if (faulted) st.faulted = true;
        if (!st.first_seen) {
            st.first_seen = true;
            st.first_delivery = drained;
        }
        if (arrival > st.last_arrival) st.last_arrival = arrival;
        st.last_drain = drained;
        if (++st.frames_done == st.frames_expected) finish_message(it);
    }

    void finish_message(std::map<std::uint32_t, MessageState>::iterator it) {
        const std::uint32_t id = it->first;
        MessageState st = std::move(it->second);
        inflight_.erase(it);

        CompletionRecord rec;
        rec.message_id = id;
        rec.request = st.req;
        rec.start = st.t0;
        rec.first_delivery = st.first_delivery;
        rec.last_delivery = st.last_drain;

        if (st.faulted) {
            rec.protection_fault = true;
            rec.complete = st.last_drain;
            done_.emplace(id, rec);
            return;
        }

        const EndpointProfile& ep = cfg_.nic.endpoints;
        SimTime staging_dst = SimTime::zero();
        if (st.req.dst_kind == MemKind::gpu && !st.req.p2p) {
            staging_dst = ep.staging_fixed + copy_time(st.req.bytes, ep.staging_copy_bytes_per_ns);
        }

        rec.breakdown.staging_src = st.m1 - st.t0;
        rec.breakdown.injection = cfg_.nic.injection_overhead;
        rec.breakdown.gpu_penalty = st.gpu_penalty;
        rec.breakdown.dma = st.m3 - st.m2;
        rec.breakdown.network = st.last_arrival - st.m3;
        rec.breakdown.translation = st.last_drain - st.last_arrival;
        rec.breakdown.delivery = cfg_.nic.delivery_overhead;
        rec.breakdown.staging_dst = staging_dst;
        rec.delivered = true;
        rec.complete = st.last_drain + cfg_.nic.delivery_overhead + staging_dst;

        engine_.schedule(rec.complete, "nic." + std::to_string(st.req.dst), "msg-complete",
                         [this, rec, cb = std::move(st.on_complete)] {
                             done_.emplace(rec.message_id, rec);
                             if (cb) cb(rec);
                         });
    }

    void apply_fault(const FaultEvent& f) {
        LofamoNode& ln = *lofamo_nodes_.at(f.node);
        switch (f.kind) {
        case FaultEvent::Kind::host_crash:
            if (!ln.host_alive()) throw ConfigError("fault: host already dead on node " + std::to_string(f.node));
            ln.crash_host();
            break;
        case FaultEvent::Kind::nic_fail: {
            if (!ln.nic_alive()) throw ConfigError("fault: NIC already dead on node " + std::to_string(f.node));
            ln.fail_nic();
            for (const Direction d : all_directions) {
                channel(f.node, d).kill();
                channel(neighbor(f.node, d, cfg_.torus), reverse(d)).kill();
            }
            break;
        }
        case FaultEvent::Kind::link_fail: {
            Channel& fwd = channel(f.node, f.dir);
            Channel& back = channel(neighbor(f.node, f.dir, cfg_.torus), reverse(f.dir));
            if (!fwd.alive() && !back.alive()) {
                throw ConfigError("fault: link already dead at node " + std::to_string(f.node));
            }
            fwd.kill();
            back.kill();
            break;
        }
        }
    }

    PlatformConfig cfg_;
    Engine engine_;
    std::vector<std::unique_ptr<Nic>> nics_;
    std::vector<std::vector<std::unique_ptr<Channel>>> channels_;
    std::vector<std::unique_ptr<LofamoNode>> lofamo_nodes_;
    MasterCollector master_;
    LofamoInstrumentation instr_;
    std::map<std::uint32_t, MessageState> inflight_;
    std::map<std::uint32_t, CompletionRecord> done_;
    std::vector<std::tuple<std::uint32_t, std::uint64_t, PAddr>> translation_log_;
    std::uint32_t next_message_id_ = 1;
};

// Awareness reconstruction for an injected fault, matched against the master's
// first-arrival bookkeeping.
inline AwarenessTrace awareness_trace(const FaultEvent& f, Platform& p) {
    AwarenessTrace t;
    t.fault = f;
    const LofamoInstrumentation& instr = p.instrumentation();
    MasterCollector& master = p.master();
    switch (f.kind) {
    case FaultEvent::Kind::host_crash: {
        if (const auto it = instr.host_fault_local_detect.find(f.node); it != instr.host_fault_local_detect.end())
            t.t_local_detect = it->second;
        if (const auto it = instr.host_fault_neighbor_aware.find(f.node); it != instr.host_fault_neighbor_aware.end())
            t.t_neighbor_aware = it->second;
        t.t_master_aware = master.first_host_fault(f.node);
        break;
    }
    case FaultEvent::Kind::nic_fail: {
        if (const auto it = instr.nic_fault_local_detect.find(f.node); it != instr.nic_fault_local_detect.end()) {
            t.t_local_detect = it->second;
            t.t_neighbor_aware = it->second; // the host itself reports, no neighbour step
        }
        t.t_master_aware = master.first_nic_fault(f.node);
        break;
    }
    case FaultEvent::Kind::link_fail: {
        const LinkKey key = canonical_link(f.node, f.dir, neighbor(f.node, f.dir, p.torus()));
        if (const auto it = instr.link_silence_detect.find(key); it != instr.link_silence_detect.end()) {
            t.t_local_detect = it->second;
            t.t_neighbor_aware = it->second;
        }
        t.t_master_aware = master.first_link_silent(key);
        break;
    }
    }
    return t;
}

} // namespace apesim
