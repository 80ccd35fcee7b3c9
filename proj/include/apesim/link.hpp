#pragma once

#include "errors.hpp"
#include "ratio.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace apesim {

inline constexpr int kWordBits = 128; // 4 bonded lanes x 32-bit datapath
inline constexpr int kWordBytes = kWordBits / 8;

// Off-board channel rates. raw = lane_rate * lanes; the line encoding
// (8b/10b on the operational card, 64b/66b on the newer transceivers) scales
// raw bits down to data-layer bits before framing overheads apply.
struct LinkProfile {
    std::string name = "apelink-operational";
    Ratio lane_rate_gbps{7};
    int lanes = 4;
    Ratio encoding{8, 10};

    Ratio raw_bits_per_s() const { return lane_rate_gbps * Ratio(lanes) * Ratio(1000000000); }
    Ratio data_bits_per_s() const { return raw_bits_per_s() * encoding; }
    Ratio data_bits_per_ns() const { return lane_rate_gbps * Ratio(lanes) * encoding; }

    void validate() const {
        if (lanes < 1) throw ConfigError("link: lanes must be >= 1");
        if (!(Ratio(0) < encoding) || encoding > Ratio(1)) throw ConfigError("link: encoding must be in (0,1]");
        if (!(Ratio(0) < lane_rate_gbps)) throw ConfigError("link: lane rate must be positive");
    }
};

inline LinkProfile link_preset(const std::string& name) {
    if (name == "apelink-operational") return LinkProfile{name, Ratio{7}, 4, Ratio{8, 10}};
    if (name == "apelink-max") return LinkProfile{name, Ratio{17, 2}, 4, Ratio{8, 10}};
    if (name == "stratix5-measured") return LinkProfile{name, Ratio{113, 10}, 4, Ratio{64, 66}};
    if (name == "stratix5-target") return LinkProfile{name, Ratio{141, 10}, 4, Ratio{64, 66}};
    throw ConfigError("unknown link preset '" + name + "'");
}

inline const std::vector<std::string>& link_preset_names() {
    static const std::vector<std::string> names = {"apelink-operational", "apelink-max", "stratix5-measured",
                                                   "stratix5-target"};
    return names;
}

// Word-stuffing framing parameters. control_overhead_words is the total
// per-max-packet overhead K (header + footer + amortized transmission-control
// words); the default 3456/49 makes the steady-state efficiency land exactly
// on the measured 0.784 for full 256-word packets.
struct FramingParams {
    int header_words = 1;
    int footer_words = 1;
    Ratio control_overhead_words{3456, 49};
    int max_payload_words = 256;
    int buffer_bytes = 40960;

    int overhead_words() const { return header_words + footer_words; }
    int max_frame_words() const { return max_payload_words + overhead_words(); }
    int buffer_words() const { return buffer_bytes / kWordBytes; }

    void validate() const {
        if (header_words < 1 || footer_words < 1) throw ConfigError("framing: header/footer words must be >= 1");
        if (max_payload_words < 1) throw ConfigError("framing: max payload words must be >= 1");
        if (control_overhead_words < Ratio(overhead_words())) {
            throw ConfigError("framing: control overhead K must cover header+footer words");
        }
        if (buffer_bytes < max_frame_words() * kWordBytes) {
            throw ConfigError("framing: channel buffer must hold at least one max frame");
        }
    }
};

inline std::int64_t payload_words_for(std::int64_t payload_bytes) {
    return (payload_bytes + kWordBytes - 1) / kWordBytes;
}

// Steady-state transmission efficiency for packets carrying `payload_bytes`:
// the payload words of one packet against payload plus the per-packet overhead
// budget K. Payloads beyond one max packet split into max-size packets, so the
// value saturates at max_payload/(max_payload + K).
inline Ratio efficiency_exact(std::int64_t payload_bytes, const FramingParams& params) {
    if (payload_bytes < 1) throw ConfigError("efficiency: payload must be >= 1 byte");
    std::int64_t words = payload_words_for(payload_bytes);
    if (words > params.max_payload_words) words = params.max_payload_words;
    const Ratio p{words};
    return p / (p + params.control_overhead_words);
}

inline double efficiency(std::int64_t payload_bytes, const FramingParams& params) {
    return efficiency_exact(payload_bytes, params).to_double();
}

// Application-payload rate of a saturated channel: data-layer bits scaled by
// the asymptotic framing efficiency.
inline Ratio goodput_bytes_per_s_exact(const LinkProfile& profile, const FramingParams& params) {
    const Ratio eff = Ratio(params.max_payload_words) / (Ratio(params.max_payload_words) + params.control_overhead_words);
    return profile.data_bits_per_s() * eff / Ratio(8);
}

inline double goodput_bytes_per_s(const LinkProfile& profile, const FramingParams& params) {
    return goodput_bytes_per_s_exact(profile, params).to_double();
}

} // namespace apesim
