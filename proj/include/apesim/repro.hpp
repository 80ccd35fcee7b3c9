#pragma once

#include "experiments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace apesim {

struct ReproResult {
    bool ok = true;
    std::vector<std::string> failures;
    std::vector<std::string> files;
    std::string comparison;

    void check(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            failures.push_back(what);
        }
    }
};

inline ScenarioConfig repro_scenario(ExperimentKind kind, std::uint64_t seed) {
    ScenarioConfig c;
    c.seed = seed;
    c.kind = kind;
    c.src = 0;
    c.dst = 1;
    switch (kind) {
    case ExperimentKind::roundtrip:
        c.all_combos = true;
        c.sizes = {64, 256, 1024, 4096, 16384, 65536};
        break;
    case ExperimentKind::latency:
        c.src_kind = MemKind::gpu;
        c.dst_kind = MemKind::gpu;
        c.sizes = {64, 256, 1024, 4096, 16384, 65536, 131072};
        break;
    case ExperimentKind::bandwidth:
        c.all_combos = true;
        c.sizes = {4096, 16384, 65536, 262144, 1048576, 2097152};
        break;
    case ExperimentKind::fault:
        c.wd_sweep_ms = {1, 10, 100, 500, 1000};
        c.fault_injections = 1000;
        break;
    default: break;
    }
    return c;
}

// Runs the four reference suites (round-trip combinations, P2P-vs-staging
// latency, bandwidth curves, time-to-awareness sweep), writes one CSV per
// suite and validates the calibrated fixed points.
inline ReproResult repro_paper(const std::string& outdir, std::uint64_t seed, const CalibrationDefaults& calib) {
    ReproResult res;
    std::filesystem::create_directories(outdir);
    const auto path = [&](const char* name) { return (std::filesystem::path(outdir) / name).string(); };

    // Fig. 3a: round-trip latency, all endpoint combinations.
    const ScenarioConfig rt_cfg = repro_scenario(ExperimentKind::roundtrip, seed);
    const ScenarioResult rt = run_scenario(rt_cfg, calib);
    export_csv(rt.metrics, path("fig3a_roundtrip.csv"));
    res.files.push_back(path("fig3a_roundtrip.csv"));

    const double rt_hh = rt.metrics.value_of("roundtrip", "roundtrip_ns", "src_kind=host;dst_kind=host;p2p=true;size=64");
    for (const char* combo : {"src_kind=host;dst_kind=gpu", "src_kind=gpu;dst_kind=host", "src_kind=gpu;dst_kind=gpu"}) {
        const double v = rt.metrics.value_of("roundtrip", "roundtrip_ns", std::string(combo) + ";p2p=true;size=64");
        const double ratio = v / rt_hh;
        res.check(ratio > 1.25 && ratio < 1.35,
                  std::string("roundtrip ratio for ") + combo + " = " + format_double(ratio) + ", want 1.30 +/- 0.05");
    }

    // Fig. 3b: GPU-to-GPU latency, P2P vs staged, with the InfiniBand constant.
    const ScenarioConfig lat_cfg = repro_scenario(ExperimentKind::latency, seed);
    const ScenarioResult lat = run_scenario(lat_cfg, calib);
    export_csv(lat.metrics, path("fig3b_latency.csv"));
    res.files.push_back(path("fig3b_latency.csv"));

    res.comparison = compare_report(lat.metrics, calib);
    const double p2p_us = lat.metrics.value_of("latency", "one_way_ns", "p2p=true;size=64") / 1000.0;
    const double staged_us = lat.metrics.value_of("latency", "one_way_ns", "p2p=false;size=64") / 1000.0;
    res.check(p2p_us > 8.2 * 0.95 && p2p_us < 8.2 * 1.05,
              "GPU-GPU P2P latency = " + format_double(p2p_us) + " us, want 8.2 +/- 5%");
    res.check(staged_us > 16.8 * 0.95 && staged_us < 16.8 * 1.05,
              "GPU-GPU staged latency = " + format_double(staged_us) + " us, want 16.8 +/- 5%");

    // Fig. 3c: bandwidth curves; everything except GPU-outbound reaches the
    // link limit, GPU-outbound saturates at the read cap.
    const ScenarioConfig bw_cfg = repro_scenario(ExperimentKind::bandwidth, seed);
    const ScenarioResult bw = run_scenario(bw_cfg, calib);
    export_csv(bw.metrics, path("fig3c_bandwidth.csv"));
    res.files.push_back(path("fig3c_bandwidth.csv"));

    const double goodput = bw.metrics.value_of("bandwidth", "link_goodput_Bps");
    const double plateau_hh = bw.metrics.value_of("bandwidth", "sustained_Bps",
                                                  "src_kind=host;dst_kind=host;p2p=true;size=2097152");
    res.check(plateau_hh > goodput * 0.99 && plateau_hh < goodput * 1.01,
              "host-host plateau = " + format_double(plateau_hh) + " B/s, want link goodput +/- 1%");
    const double plateau_gh = bw.metrics.value_of("bandwidth", "sustained_Bps",
                                                  "src_kind=gpu;dst_kind=host;p2p=true;size=2097152");
    const double cap = static_cast<double>(calib.nic_gpu_read_bandwidth_cap_bytes_per_s);
    res.check(plateau_gh > cap * 0.98 && plateau_gh < cap * 1.02,
              "gpu-host plateau = " + format_double(plateau_gh) + " B/s, want the GPU read cap +/- 2%");

    // Time to awareness vs watchdog period.
    const ScenarioConfig ta_cfg = repro_scenario(ExperimentKind::fault, seed);
    const ScenarioResult ta = run_scenario(ta_cfg, calib);
    export_csv(ta.metrics, path("ta_vs_wd.csv"));
    res.files.push_back(path("ta_vs_wd.csv"));
    export_traces_csv(ta.traces, ta.trace_wd_ms, path("ta_traces.csv"));
    res.files.push_back(path("ta_traces.csv"));

    const double ta500_s = ta.metrics.value_of("fault", "mean_ta_ns", "wd_ms=500") * 1e-9;
    res.check(ta500_s > 0.8 && ta500_s < 1.0,
              "mean Ta at WD=500ms = " + format_double(ta500_s) + " s, want 0.9 +/- 0.1");
    std::vector<std::pair<double, double>> xy;
    for (const std::int64_t wd : ta_cfg.wd_sweep_ms) {
        xy.emplace_back(static_cast<double>(wd), ta.metrics.value_of("fault", "mean_ta_ns",
                                                                     "wd_ms=" + std::to_string(wd)) / 1e6);
    }
    const LinearFit fit = linear_fit(xy);
    res.check(fit.r_squared >= 0.999, "Ta-vs-WD fit R^2 = " + format_double(fit.r_squared) + ", want >= 0.999");

    return res;
}

} // namespace apesim
