#include <apesim/experiments.hpp>

#include <catch2/catch.hpp>

#include <map>
#include <vector>

using namespace apesim;

namespace {

PlatformConfig default_platform() {
    return PlatformConfig::from_calibration(CalibrationDefaults{});
}

} // namespace

TEST_CASE("small GPU-to-GPU P2P transfer lands on 8.2 us") {
    const CompletionRecord rec = measure_one_way(default_platform(), 0, 1, MemKind::gpu, MemKind::gpu, true, 64);
    CHECK(static_cast<double>(rec.latency().ns) == Approx(8200.0).epsilon(0.05));
    CHECK(rec.latency().ns == 8200); // exact under default calibration
}

TEST_CASE("small GPU-to-GPU transfer through host staging lands on 16.8 us") {
    const CompletionRecord rec = measure_one_way(default_platform(), 0, 1, MemKind::gpu, MemKind::gpu, false, 64);
    CHECK(static_cast<double>(rec.latency().ns) == Approx(16800.0).epsilon(0.05));
    CHECK(rec.latency().ns == 16800);
}

TEST_CASE("path breakdown components sum exactly to the total") {
    for (const bool p2p : {true, false}) {
        for (const MemKind sk : {MemKind::host, MemKind::gpu}) {
            for (const MemKind dk : {MemKind::host, MemKind::gpu}) {
                for (const std::int64_t size : {0LL, 64LL, 4096LL, 100000LL}) {
                    const CompletionRecord rec = measure_one_way(default_platform(), 0, 1, sk, dk, p2p, size);
                    REQUIRE(rec.delivered);
                    REQUIRE(rec.breakdown.total() == rec.latency());
                }
            }
        }
    }
}

TEST_CASE("round trip is twice the one-way latency for a symmetric configuration") {
    const CompletionRecord one = measure_one_way(default_platform(), 0, 1, MemKind::host, MemKind::host, true, 64);
    const RoundtripResult rt = measure_roundtrip(default_platform(), 0, 1, MemKind::host, MemKind::host, true, 64);
    CHECK(rt.total == 2 * one.latency());
}

TEST_CASE("any GPU involvement raises the small-message round trip by about 30%") {
    const RoundtripResult hh = measure_roundtrip(default_platform(), 0, 1, MemKind::host, MemKind::host, true, 64);
    for (const auto& [sk, dk] : std::vector<std::pair<MemKind, MemKind>>{
             {MemKind::host, MemKind::gpu}, {MemKind::gpu, MemKind::host}, {MemKind::gpu, MemKind::gpu}}) {
        const RoundtripResult rt = measure_roundtrip(default_platform(), 0, 1, sk, dk, true, 64);
        const double ratio = static_cast<double>(rt.total.ns) / static_cast<double>(hh.total.ns);
        CHECK(ratio == Approx(1.30).margin(0.05));
    }
}

TEST_CASE("the GPU penalty does not apply to large messages") {
    const CompletionRecord hh = measure_one_way(default_platform(), 0, 1, MemKind::host, MemKind::host, true, 65536);
    const CompletionRecord gg = measure_one_way(default_platform(), 0, 1, MemKind::gpu, MemKind::gpu, true, 65536);
    CHECK(gg.breakdown.gpu_penalty == SimTime::zero());
    CHECK(hh.breakdown.gpu_penalty == SimTime::zero());
}

TEST_CASE("a long host-to-host transfer sustains the link goodput") {
    const PlatformConfig pc = default_platform();
    const BandwidthResult bw = measure_bandwidth(pc, 0, 1, MemKind::host, MemKind::host, true, 2 << 20);
    const double goodput = goodput_bytes_per_s(pc.link, pc.framing);
    CHECK(bw.sustained_bytes_per_s == Approx(goodput).epsilon(0.01));
}

TEST_CASE("GPU-outbound transfers cap at the GPU read bandwidth") {
    const PlatformConfig pc = default_platform();
    const BandwidthResult bw = measure_bandwidth(pc, 0, 1, MemKind::gpu, MemKind::host, true, 2 << 20);
    const double cap = pc.nic.endpoints.gpu_read_cap_bytes_per_ns.to_double() * 1e9;
    CHECK(bw.sustained_bytes_per_s == Approx(cap).epsilon(0.01));
    CHECK(bw.sustained_bytes_per_s < goodput_bytes_per_s(pc.link, pc.framing) * 0.75);
}

TEST_CASE("GPU write targets still reach the link limit") {
    const PlatformConfig pc = default_platform();
    const double goodput = goodput_bytes_per_s(pc.link, pc.framing);
    const BandwidthResult hg = measure_bandwidth(pc, 0, 1, MemKind::host, MemKind::gpu, true, 2 << 20);
    CHECK(hg.sustained_bytes_per_s == Approx(goodput).epsilon(0.01));
}

TEST_CASE("bandwidth is non-decreasing in message size") {
    const PlatformConfig pc = default_platform();
    double prev = 0;
    for (const std::int64_t size : {4096LL, 16384LL, 65536LL, 262144LL, 1048576LL}) {
        const BandwidthResult bw = measure_bandwidth(pc, 0, 1, MemKind::host, MemKind::host, true, size);
        CHECK(bw.total_bytes_per_s >= prev);
        prev = bw.total_bytes_per_s;
    }
}

TEST_CASE("staging always costs more than P2P while the copy cost is positive") {
    for (const std::int64_t size : {64LL, 4096LL, 65536LL, 1048576LL}) {
        const CompletionRecord p2p = measure_one_way(default_platform(), 0, 1, MemKind::gpu, MemKind::gpu, true, size);
        const CompletionRecord staged =
            measure_one_way(default_platform(), 0, 1, MemKind::gpu, MemKind::gpu, false, size);
        CHECK(staged.latency() > p2p.latency());
    }
}

TEST_CASE("multi-hop routes add per-hop latency") {
    const CompletionRecord one = measure_one_way(default_platform(), 0, 1, MemKind::host, MemKind::host, true, 64);
    const CompletionRecord two = measure_one_way(default_platform(), 0, 2, MemKind::host, MemKind::host, true, 64);
    CHECK(two.latency() > one.latency());
    // Store-and-forward: one extra hop costs serialization + hop latency.
    const std::int64_t extra = (two.latency() - one.latency()).ns;
    CHECK(extra >= 600);
    CHECK(extra <= 700);
}

TEST_CASE("an unregistered destination page is a protection fault counted at the receiver") {
    PlatformConfig pc = default_platform();
    pc.lofamo_enabled = false;
    Platform p(pc);
    p.register_buffer(0, MemKind::host, kSrcBase, 4096);
    // destination buffer never registered
    const std::uint32_t id =
        p.rdma_put(PutRequest{0, 1, MemKind::host, MemKind::host, kSrcBase, kDstBase, 64, true});
    p.run_all();
    const CompletionRecord* rec = p.completion(id);
    REQUIRE(rec != nullptr);
    CHECK(rec->protection_fault);
    CHECK_FALSE(rec->delivered);
    CHECK(p.nic(1).stats().protection_faults == 1);
    CHECK(p.nic(1).stats().frames_delivered == 0);
}

TEST_CASE("payloads land at the page-table translation no matter the TLB state") {
    PlatformConfig pc = default_platform();
    pc.lofamo_enabled = false;
    pc.log_translations = true;
    pc.nic.tlb.entries = 4; // tiny cache forces constant eviction
    Platform p(pc);
    const std::int64_t bytes = 64 * 4096;
    p.register_buffer(0, MemKind::host, kSrcBase, static_cast<std::uint64_t>(bytes));
    p.register_buffer(1, MemKind::host, kDstBase, static_cast<std::uint64_t>(bytes));
    const std::uint32_t id =
        p.rdma_put(PutRequest{0, 1, MemKind::host, MemKind::host, kSrcBase, kDstBase, bytes, true});
    p.run_all();
    REQUIRE(p.completion(id) != nullptr);
    REQUIRE(p.completion(id)->delivered);
    const PageTable& table = p.nic(1).pages();
    REQUIRE_FALSE(p.translation_log().empty());
    for (const auto& [msg, vpage, paddr] : p.translation_log()) {
        REQUIRE(paddr == *table.translate(MemKind::host, vpage * 4096));
    }
    // The tiny TLB missed constantly, yet every translation was exact.
    CHECK(p.nic(1).tlb().stats().misses > 0);
}

TEST_CASE("dual DMA engines never slow a transfer down") {
    PlatformConfig pc = default_platform();
    for (const std::int64_t size : {4096LL, 65536LL, 1048576LL}) {
        pc.nic.dma.engines = 1;
        const CompletionRecord k1 = measure_one_way(pc, 0, 1, MemKind::host, MemKind::host, true, size);
        pc.nic.dma.engines = 2;
        const CompletionRecord k2 = measure_one_way(pc, 0, 1, MemKind::host, MemKind::host, true, size);
        CHECK(k2.latency() <= k1.latency());
    }
}

TEST_CASE("receive bandwidth with a warm TLB beats the cold path 1.6 to 1") {
    const TlbAblationResult r = measure_tlb_ablation(default_platform());
    CHECK(r.hit_rate_warm == 1.0);
    CHECK(r.hit_rate_cold == 0.0);
    CHECK(r.ratio == Approx(1.60).margin(0.02));
}

TEST_CASE("a zero-byte put still completes through the full path") {
    const CompletionRecord rec = measure_one_way(default_platform(), 0, 1, MemKind::host, MemKind::host, true, 0);
    CHECK(rec.delivered);
    CHECK(rec.latency() > SimTime::zero());
}

TEST_CASE("local transfers are rejected as out of scope") {
    PlatformConfig pc = default_platform();
    pc.lofamo_enabled = false;
    Platform p(pc);
    CHECK_THROWS_AS(p.rdma_put(PutRequest{3, 3, MemKind::host, MemKind::host, 0, 0, 64, true}), ConfigError);
}
