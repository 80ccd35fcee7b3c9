#pragma once

#include "config.hpp"
#include "metrics.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace apesim {

// ---------------------------------------------------------------------------
// Measurement drivers. Each uses a fresh platform so results depend only on
// (configuration, seed). Microbenchmarks run with the fault monitor off so the
// event queue drains; it costs nothing on the data plane either way.
// ---------------------------------------------------------------------------

inline constexpr VAddr kSrcBase = 0x100000;
inline constexpr VAddr kDstBase = 0x4000000;

inline PlatformConfig bench_platform(const ScenarioConfig& cfg, const CalibrationDefaults& calib) {
    PlatformConfig pc = cfg.platform_config(calib);
    pc.lofamo_enabled = false;
    return pc;
}

inline CompletionRecord measure_one_way(const PlatformConfig& base, NodeId src, NodeId dst, MemKind src_kind,
                                        MemKind dst_kind, bool p2p, std::int64_t bytes) {
    PlatformConfig pc = base;
    pc.lofamo_enabled = false;
    Platform p(pc);
    const std::uint64_t span = std::max<std::int64_t>(bytes, 1);
    p.register_buffer(src, src_kind, kSrcBase, span);
    p.register_buffer(dst, dst_kind, kDstBase, span);
    p.warm_tlb(dst, dst_kind, kDstBase, span);
    const std::uint32_t id = p.rdma_put(PutRequest{src, dst, src_kind, dst_kind, kSrcBase, kDstBase, bytes, p2p});
    p.run_all();
    const CompletionRecord* rec = p.completion(id);
    if (!rec) throw SimError("one-way transfer never completed");
    return *rec;
}

struct RoundtripResult {
    SimTime total;
    CompletionRecord leg1;
    CompletionRecord leg2;
};

// Ping-pong: the return transfer starts the instant the first completes.
inline RoundtripResult measure_roundtrip(const PlatformConfig& base, NodeId a, NodeId b, MemKind a_kind,
                                         MemKind b_kind, bool p2p, std::int64_t bytes) {
    PlatformConfig pc = base;
    pc.lofamo_enabled = false;
    Platform p(pc);
    const std::uint64_t span = std::max<std::int64_t>(bytes, 1);
    p.register_buffer(a, a_kind, kSrcBase, span);
    p.register_buffer(b, b_kind, kDstBase, span);
    p.register_buffer(b, b_kind, kSrcBase, span);
    p.register_buffer(a, a_kind, kDstBase, span);
    p.warm_tlb(b, b_kind, kDstBase, span);
    p.warm_tlb(a, a_kind, kDstBase, span);

    std::uint32_t id2 = 0;
    const std::uint32_t id1 =
        p.rdma_put(PutRequest{a, b, a_kind, b_kind, kSrcBase, kDstBase, bytes, p2p},
                   [&](const CompletionRecord&) {
                       id2 = p.rdma_put(PutRequest{b, a, b_kind, a_kind, kSrcBase, kDstBase, bytes, p2p});
                   });
    p.run_all();
    const CompletionRecord* r1 = p.completion(id1);
    const CompletionRecord* r2 = id2 ? p.completion(id2) : nullptr;
    if (!r1 || !r2) throw SimError("roundtrip never completed");
    return RoundtripResult{r2->complete - r1->start, *r1, *r2};
}

struct BandwidthResult {
    double total_bytes_per_s = 0;     // size / end-to-end latency
    double sustained_bytes_per_s = 0; // steady-state delivery rate
};

inline BandwidthResult measure_bandwidth(const PlatformConfig& base, NodeId src, NodeId dst, MemKind src_kind,
                                         MemKind dst_kind, bool p2p, std::int64_t bytes) {
    const CompletionRecord rec = measure_one_way(base, src, dst, src_kind, dst_kind, p2p, bytes);
    BandwidthResult out;
    out.total_bytes_per_s = static_cast<double>(bytes) / (static_cast<double>(rec.latency().ns) * 1e-9);
    const std::int64_t first_frame = std::min<std::int64_t>(bytes, base.framing.max_payload_words * kWordBytes);
    const SimTime window = rec.last_delivery - rec.first_delivery;
    if (window > SimTime::zero() && bytes > first_frame) {
        out.sustained_bytes_per_s =
            static_cast<double>(bytes - first_frame) / (static_cast<double>(window.ns) * 1e-9);
    } else {
        out.sustained_bytes_per_s = out.total_bytes_per_s;
    }
    return out;
}

// Pure channel saturation: back-to-back max frames against an instant sink.
inline double measure_channel_saturation(const LinkProfile& link, const FramingParams& framing, SimTime hop,
                                         SimTime duration) {
    Engine eng;
    Channel ch(eng, "ch.sat", 0, 1, Direction::xp, link, framing, hop);
    std::vector<SimTime> deliveries;
    std::uint64_t delivered_bytes = 0;
    const std::int64_t frame_payload = static_cast<std::int64_t>(framing.max_payload_words) * kWordBytes;
    ch.set_delivery([&](Frame&& f, SimTime at) {
        ch.on_receiver_drained(f.total_words(framing));
        deliveries.push_back(at);
        delivered_bytes += f.payload_bytes;
    });
    const double frame_time_ns = static_cast<double>(frame_payload) / goodput_bytes_per_s(link, framing) * 1e9;
    const int n_frames = static_cast<int>(static_cast<double>(duration.ns) / frame_time_ns) + 64;
    for (int i = 0; i < n_frames; ++i) {
        Frame f;
        f.payload_bytes = static_cast<std::uint32_t>(frame_payload);
        f.dst = 1;
        f.message_id = static_cast<std::uint32_t>(i);
        ch.submit(std::move(f));
    }
    eng.run_until(duration);
    if (deliveries.size() < 16) throw SimError("saturation run produced too few frames");
    // Steady-state window: skip the ramp, measure payload per unit time.
    const std::size_t lo = 8;
    const std::size_t hi = deliveries.size() - 1;
    const double span_ns = static_cast<double>((deliveries[hi] - deliveries[lo]).ns);
    const double payload = static_cast<double>(hi - lo) * static_cast<double>(frame_payload);
    return payload / (span_ns * 1e-9);
}

struct TlbAblationResult {
    double hit_bytes_per_s = 0;
    double miss_bytes_per_s = 0;
    double ratio = 0;
    double hit_rate_warm = 0;
    double hit_rate_cold = 0;
};

// Receive-path bandwidth with a fully-warm TLB versus a worst-case streaming
// pattern (three regions cycled through a cache that holds two), both fed at
// link rate through a real channel.
inline TlbAblationResult measure_tlb_ablation(const PlatformConfig& base) {
    const auto run_pass = [&](bool warm) {
        Engine eng;
        const TorusSpec spec{2, 1, 1};
        Channel ch(eng, "ch.tlb", 0, 1, Direction::xp, base.link, base.framing, base.hop_latency);
        Nic nic(eng, 1, spec, base.nic);
        ch.set_delivery([&](Frame&& f, SimTime at) { nic.handle_arrival(std::move(f), at, Direction::xm, ch); });

        const int page = base.nic.tlb.page_bytes;
        const std::int64_t frame_payload = static_cast<std::int64_t>(base.framing.max_payload_words) * kWordBytes;
        const std::uint64_t pages_per_region = static_cast<std::uint64_t>(base.nic.tlb.entries) / 2;
        const std::uint64_t region_bytes = pages_per_region * static_cast<std::uint64_t>(page);
        const VAddr bases[3] = {0x0, 0x40000000, 0x80000000};
        for (const VAddr b : bases) nic.register_buffer(MemKind::host, b, region_bytes);
        if (warm) nic.tlb().warm(MemKind::host, bases[0], region_bytes, nic.pages());

        std::vector<SimTime> drains;
        nic.set_drained_hook([&](const Frame&, SimTime, SimTime drained, bool) { drains.push_back(drained); });

        const int regions = warm ? 1 : 3;
        const int passes = warm ? 3 : 2;
        std::uint32_t msg = 0;
        for (int pass = 0; pass < passes; ++pass) {
            for (int r = 0; r < regions; ++r) {
                for (std::uint64_t pg = 0; pg < pages_per_region; pg += static_cast<std::uint64_t>(frame_payload / page)) {
                    Frame f;
                    f.payload_bytes = static_cast<std::uint32_t>(frame_payload);
                    f.dst = 1;
                    f.message_id = msg++;
                    f.dst_kind_raw = static_cast<std::uint8_t>(MemKind::host);
                    f.dst_vaddr = bases[r] + pg * static_cast<std::uint64_t>(page);
                    f.chunk_stride = static_cast<std::uint32_t>(frame_payload);
                    ch.submit(std::move(f));
                }
            }
        }
        nic.tlb().reset_stats(); // warm-up fills are not part of the measurement
        eng.run_all();

        if (drains.size() < 64) throw SimError("tlb ablation produced too few frames");
        const std::size_t lo = 16;
        const std::size_t hi = drains.size() - 1;
        const double span_s = static_cast<double>((drains[hi] - drains[lo]).ns) * 1e-9;
        const double bytes = static_cast<double>(hi - lo) * static_cast<double>(frame_payload);
        return std::pair<double, double>{bytes / span_s, nic.tlb().stats().hit_rate()};
    };

    TlbAblationResult out;
    const auto [bw_hit, rate_hit] = run_pass(true);
    const auto [bw_miss, rate_miss] = run_pass(false);
    out.hit_bytes_per_s = bw_hit;
    out.miss_bytes_per_s = bw_miss;
    out.ratio = bw_hit / bw_miss;
    out.hit_rate_warm = rate_hit;
    out.hit_rate_cold = rate_miss;
    return out;
}

struct TaPoint {
    std::int64_t wd_ms = 0;
    double mean_ta_ns = 0;
    double max_ta_ns = 0;
    int detected = 0;
    int injected = 0;
    std::vector<AwarenessTrace> traces;
};

// Monte Carlo time-to-awareness: host crashes at a uniformly random phase
// within the watchdog period on a uniformly random non-master node.
inline TaPoint measure_ta(const PlatformConfig& base, SimTime wd, int injections, std::uint64_t seed,
                          bool keep_traces = false) {
    TaPoint point;
    point.wd_ms = wd.ns / 1000000;
    point.injected = injections;
    double sum = 0;
    double max_ta = 0;
    RngStream rng = make_stream(seed, "fault.phase", static_cast<std::uint64_t>(wd.ns));
    for (int i = 0; i < injections; ++i) {
        PlatformConfig pc = base;
        pc.lofamo = base.lofamo.with_wd(wd);
        pc.lofamo_enabled = true;
        Platform p(pc);
        const int nodes = pc.torus.node_count();
        NodeId node = pc.lofamo.master;
        if (nodes > 1) {
            node = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(nodes)));
            if (node == pc.lofamo.master) node = static_cast<NodeId>((node + 1) % static_cast<NodeId>(nodes));
        }
        const SimTime at = 3 * wd + SimTime{static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(wd.ns)))};
        const FaultEvent fault{node, FaultEvent::Kind::host_crash, Direction::xp, at};
        p.inject_fault(fault);
        p.run_until(at + 4 * wd + SimTime::from_ms(2));
        AwarenessTrace t = awareness_trace(fault, p);
        if (t.detected()) {
            ++point.detected;
            const double ta = static_cast<double>(t.ta().ns);
            sum += ta;
            max_ta = std::max(max_ta, ta);
        }
        if (keep_traces) point.traces.push_back(t);
    }
    point.mean_ta_ns = point.detected ? sum / point.detected : 0;
    point.max_ta_ns = max_ta;
    return point;
}

// Simple least squares for the Ta-vs-WD sweep.
struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
};

inline LinearFit linear_fit(const std::vector<std::pair<double, double>>& xy) {
    const double n = static_cast<double>(xy.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : xy) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (const auto& [x, y] : xy) {
        const double pred = fit.slope * x + fit.intercept;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    fit.r_squared = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

struct WorkloadMessage {
    std::uint32_t id = 0;
    std::int64_t latency_ns = 0;
};

// Deterministic mixed RDMA workload, used to show the fault monitor adds zero
// data-plane cost: per-message latencies must match bit for bit with the
// monitor on and off.
inline std::vector<WorkloadMessage> run_mixed_workload(const PlatformConfig& base, std::uint64_t seed, int messages,
                                                       bool lofamo_on) {
    PlatformConfig pc = base;
    pc.lofamo_enabled = lofamo_on;
    Platform p(pc);
    const int nodes = pc.torus.node_count();
    const std::uint64_t region = 1 << 24;
    for (NodeId n = 0; n < static_cast<NodeId>(nodes); ++n) {
        p.register_buffer(n, MemKind::host, 0, region);
        p.register_buffer(n, MemKind::gpu, 0, region);
    }

    RngStream rng = make_stream(seed, "workload");
    SimTime at = SimTime::zero();
    std::vector<std::uint32_t> ids;
    const int page = pc.nic.tlb.page_bytes;
    for (int i = 0; i < messages; ++i) {
        PutRequest req;
        req.src = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(nodes)));
        req.dst = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(nodes)));
        if (req.dst == req.src) req.dst = static_cast<NodeId>((req.dst + 1) % static_cast<NodeId>(nodes));
        req.src_kind = rng.next_below(2) ? MemKind::gpu : MemKind::host;
        req.dst_kind = rng.next_below(2) ? MemKind::gpu : MemKind::host;
        req.bytes = static_cast<std::int64_t>(1) << (6 + rng.next_below(9)); // 64 B .. 16 KiB
        req.src_vaddr = 0;
        req.dst_vaddr = rng.next_below(region / static_cast<std::uint64_t>(page) / 2) *
                        static_cast<std::uint64_t>(page);
        req.p2p = true;
        at = at + SimTime{static_cast<std::int64_t>(rng.next_below(4000))};
        p.engine().schedule(at, "workload", "put", [&p, req, &ids] { ids.push_back(p.rdma_put(req)); });
    }
    p.run_until(at + SimTime::from_ms(100));

    std::vector<WorkloadMessage> out;
    out.reserve(ids.size());
    for (const std::uint32_t id : ids) {
        const CompletionRecord* rec = p.completion(id);
        if (!rec || !rec->delivered) throw SimError("workload message lost");
        out.push_back(WorkloadMessage{id, rec->latency().ns});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario dispatch
// ---------------------------------------------------------------------------

struct ScenarioResult {
    MetricsTable metrics;
    std::vector<AwarenessTrace> traces; // fault experiments only
    std::vector<std::int64_t> trace_wd_ms;
};

namespace detail {

inline std::string combo_params(MemKind src, MemKind dst, bool p2p, std::int64_t size) {
    return std::string("src_kind=") + to_string(src) + ";dst_kind=" + to_string(dst) +
           ";p2p=" + (p2p ? "true" : "false") + ";size=" + std::to_string(size);
}

inline std::vector<std::pair<MemKind, MemKind>> combos(const ScenarioConfig& cfg) {
    if (!cfg.all_combos) return {{cfg.src_kind, cfg.dst_kind}};
    return {{MemKind::host, MemKind::host},
            {MemKind::host, MemKind::gpu},
            {MemKind::gpu, MemKind::host},
            {MemKind::gpu, MemKind::gpu}};
}

} // namespace detail

inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const CalibrationDefaults& calib,
                                   std::ostream* trace = nullptr) {
    ScenarioResult result;
    MetricsTable& t = result.metrics;
    PlatformConfig pc = cfg.platform_config(calib);
    // Monte Carlo fault sweeps build thousands of platforms; event traces are
    // only wired up for the single-transfer experiment kinds.
    if (cfg.kind != ExperimentKind::fault) pc.trace_stream = trace;

    switch (cfg.kind) {
    case ExperimentKind::latency: {
        for (const std::int64_t size : cfg.sizes) {
            for (const auto& [sk, dk] : detail::combos(cfg)) {
                for (int rep = 0; rep < cfg.repetitions; ++rep) {
                    const CompletionRecord rec =
                        measure_one_way(pc, cfg.src, cfg.dst, sk, dk, cfg.p2p, size);
                    const std::string params = detail::combo_params(sk, dk, cfg.p2p, size) +
                                               ";rep=" + std::to_string(rep);
                    t.add("latency", params, "one_way_ns", rec.latency().ns, "ns");
                    t.add("latency", params, "injection_ns", rec.breakdown.injection.ns, "ns");
                    t.add("latency", params, "gpu_penalty_ns", rec.breakdown.gpu_penalty.ns, "ns");
                    t.add("latency", params, "dma_ns", rec.breakdown.dma.ns, "ns");
                    t.add("latency", params, "network_ns", rec.breakdown.network.ns, "ns");
                    t.add("latency", params, "translation_ns", rec.breakdown.translation.ns, "ns");
                    t.add("latency", params, "delivery_ns", rec.breakdown.delivery.ns, "ns");
                    t.add("latency", params, "staging_ns",
                          (rec.breakdown.staging_src + rec.breakdown.staging_dst).ns, "ns");
                }
                // The staged path is measured alongside whenever a GPU is
                // involved, so the comparison report always has both rows.
                if (cfg.p2p && (sk == MemKind::gpu || dk == MemKind::gpu)) {
                    const CompletionRecord rec = measure_one_way(pc, cfg.src, cfg.dst, sk, dk, false, size);
                    t.add("latency", detail::combo_params(sk, dk, false, size) + ";rep=0", "one_way_ns",
                          rec.latency().ns, "ns");
                }
            }
        }
        t.add("latency", "source=constant", "infiniband_one_way_ns", calib.infiniband_comparison_latency_ns, "ns");
        break;
    }
    case ExperimentKind::roundtrip: {
        for (const std::int64_t size : cfg.sizes) {
            for (const auto& [sk, dk] : detail::combos(cfg)) {
                const RoundtripResult rt = measure_roundtrip(pc, cfg.src, cfg.dst, sk, dk, cfg.p2p, size);
                t.add("roundtrip", detail::combo_params(sk, dk, cfg.p2p, size), "roundtrip_ns", rt.total.ns, "ns");
            }
        }
        break;
    }
    case ExperimentKind::bandwidth: {
        for (const std::int64_t size : cfg.sizes) {
            for (const auto& [sk, dk] : detail::combos(cfg)) {
                const BandwidthResult bw = measure_bandwidth(pc, cfg.src, cfg.dst, sk, dk, cfg.p2p, size);
                const std::string params = detail::combo_params(sk, dk, cfg.p2p, size);
                t.add("bandwidth", params, "sustained_Bps", bw.sustained_bytes_per_s, "B/s");
                t.add("bandwidth", params, "total_Bps", bw.total_bytes_per_s, "B/s");
            }
        }
        t.add("bandwidth", "source=model", "link_goodput_Bps", goodput_bytes_per_s(cfg.link, cfg.framing), "B/s");
        break;
    }
    case ExperimentKind::dma: {
        // Hand-checkable pipeline plus the calibrated asymptotic gain.
        const DmaTimeline k1 = dma_schedule(4, SimTime{3}, SimTime{2}, 1);
        const DmaTimeline k2 = dma_schedule(4, SimTime{3}, SimTime{2}, 2);
        t.add("dma", "case=n4_L3_T2;engines=1", "total", k1.total().ns, "unit");
        t.add("dma", "case=n4_L3_T2;engines=2", "total", k2.total().ns, "unit");
        t.add("dma", "case=n4_L3_T2", "reduction",
              1.0 - static_cast<double>(k2.total().ns) / static_cast<double>(k1.total().ns), "1");
        const SimTime L{calib.dma_completion_latency_ns};
        const Ratio bus = hostbus_preset(cfg.hostbus_preset_name).bits_per_ns() / Ratio(8);
        DmaConfig dc;
        dc.completion_latency = L;
        dc.chunk_bytes = static_cast<int>(calib.dma_chunk_bytes);
        const std::int64_t bytes = 256 * calib.dma_chunk_bytes;
        dc.engines = 1;
        const SimTime t1 = dma_schedule_bytes(bytes, dc, bus).total();
        dc.engines = 2;
        const SimTime t2 = dma_schedule_bytes(bytes, dc, bus).total();
        t.add("dma", "case=calibrated_n256;engines=1", "total_ns", t1.ns, "ns");
        t.add("dma", "case=calibrated_n256;engines=2", "total_ns", t2.ns, "ns");
        t.add("dma", "case=calibrated_n256", "gain",
              1.0 - static_cast<double>(t2.ns) / static_cast<double>(t1.ns), "1");
        break;
    }
    case ExperimentKind::tlb: {
        const TlbAblationResult r = measure_tlb_ablation(pc);
        t.add("tlb", "case=warm", "receive_Bps", r.hit_bytes_per_s, "B/s");
        t.add("tlb", "case=cold", "receive_Bps", r.miss_bytes_per_s, "B/s");
        t.add("tlb", "case=warm", "hit_rate", r.hit_rate_warm, "1");
        t.add("tlb", "case=cold", "hit_rate", r.hit_rate_cold, "1");
        t.add("tlb", "", "speedup_ratio", r.ratio, "1");
        break;
    }
    case ExperimentKind::fault: {
        if (!cfg.faults.empty()) {
            // Explicit injection schedule: one deterministic run, one trace row
            // per injected fault.
            PlatformConfig fpc = cfg.platform_config(calib);
            fpc.lofamo_enabled = true;
            Platform p(fpc);
            SimTime last = SimTime::zero();
            for (const FaultEvent& f : cfg.faults) {
                p.inject_fault(f);
                last = std::max(last, f.at);
            }
            p.run_until(last + 4 * fpc.lofamo.wd + SimTime::from_ms(2));
            const std::int64_t wd_ms = cfg.lofamo_wd.ns / 1000000;
            for (const FaultEvent& f : cfg.faults) {
                const AwarenessTrace tr = awareness_trace(f, p);
                const std::string params = std::string("kind=") + to_string(f.kind) +
                                           ";node=" + std::to_string(f.node);
                t.add("fault", params, "detected", static_cast<std::int64_t>(tr.detected() ? 1 : 0), "bool");
                if (tr.detected()) t.add("fault", params, "ta_ns", tr.ta().ns, "ns");
                result.traces.push_back(tr);
                result.trace_wd_ms.push_back(wd_ms);
            }
            t.add("fault", "", "health_entries",
                  static_cast<std::int64_t>(p.master().health().fault_entries()), "count");
            break;
        }
        for (const std::int64_t wd_ms : cfg.wd_sweep_ms) {
            const TaPoint point = measure_ta(pc, SimTime::from_ms(wd_ms), cfg.fault_injections, cfg.seed, true);
            const std::string params = "wd_ms=" + std::to_string(wd_ms);
            t.add("fault", params, "mean_ta_ns", point.mean_ta_ns, "ns");
            t.add("fault", params, "max_ta_ns", point.max_ta_ns, "ns");
            t.add("fault", params, "detected", static_cast<std::int64_t>(point.detected), "count");
            t.add("fault", params, "injected", static_cast<std::int64_t>(point.injected), "count");
            for (const AwarenessTrace& tr : point.traces) {
                result.traces.push_back(tr);
                result.trace_wd_ms.push_back(wd_ms);
            }
        }
        break;
    }
    case ExperimentKind::efficiency: {
        for (const std::int64_t size : cfg.sizes) {
            t.add("efficiency", "size=" + std::to_string(size), "efficiency", efficiency(size, cfg.framing), "1");
        }
        for (const std::string& preset : link_preset_names()) {
            t.add("efficiency", "preset=" + preset, "goodput_Bps",
                  goodput_bytes_per_s(link_preset(preset), cfg.framing), "B/s");
        }
        break;
    }
    }
    return result;
}

// Awareness-trace CSV, one row per injected fault.
inline void export_traces_csv(const std::vector<AwarenessTrace>& traces, const std::vector<std::int64_t>& wd_ms,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "wd_ms,node,kind,t_fault_ns,t_local_ns,t_master_ns,ta_ns\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const AwarenessTrace& t = traces[i];
        out << wd_ms.at(i) << ',' << t.fault.node << ',' << to_string(t.fault.kind) << ',' << t.fault.at.ns << ',';
        if (t.t_local_detect) out << t.t_local_detect->ns;
        out << ',';
        if (t.t_master_aware) out << t.t_master_aware->ns << ',' << t.ta().ns << '\n';
        else out << ",\n";
    }
}

// Side-by-side comparison of the P2P path, the staged path and the stored
// InfiniBand reference value (a reporting constant, never simulated).
inline std::string compare_report(const MetricsTable& table, const CalibrationDefaults& calib) {
    std::optional<double> p2p_ns, staged_ns;
    for (const MetricRow& r : table.rows()) {
        if (r.experiment != "latency" || r.metric != "one_way_ns") continue;
        if (r.params.find("gpu") == std::string::npos) continue;
        if (r.params.find("p2p=true") != std::string::npos && !p2p_ns) p2p_ns = std::stod(r.value);
        if (r.params.find("p2p=false") != std::string::npos && !staged_ns) staged_ns = std::stod(r.value);
    }
    std::ostringstream out;
    out << "small-message one-way latency\n";
    const auto row = [&](const char* name, std::optional<double> ns) {
        out << "  " << name << ": ";
        if (ns) out << format_double(*ns / 1000.0) << " us\n";
        else out << "absent\n";
    };
    row("GPU P2P       ", p2p_ns);
    row("GPU staged    ", staged_ns);
    out << "  InfiniBand ref: " << format_double(static_cast<double>(calib.infiniband_comparison_latency_ns) / 1000.0)
        << " us\n";
    if (p2p_ns && staged_ns && !(*p2p_ns < *staged_ns)) {
        throw SimError("comparison: P2P latency should undercut staging");
    }
    return out.str();
}

} // namespace apesim
