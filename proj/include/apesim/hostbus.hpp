#pragma once

#include "errors.hpp"
#include "ratio.hpp"

#include <string>

namespace apesim {

enum class PcieGen { gen2, gen3 };

// Host-bus profile. Raw bandwidth is lanes * transfer rate * line encoding:
// Gen2 uses 8b/10b, Gen3 128b/130b (which is where the x8 ~7.9 GB/s figure
// comes from).
struct HostBusProfile {
    std::string name = "gen2-x8";
    PcieGen gen = PcieGen::gen2;
    int lanes = 8;
    Ratio transfer_rate_gtps{5};
    Ratio encoding{8, 10};
    int max_payload_bytes = 256;

    Ratio bandwidth_bytes_per_s_exact() const {
        return transfer_rate_gtps * Ratio(lanes) * encoding * Ratio(1000000000) / Ratio(8);
    }
    double bandwidth_bytes_per_s() const { return bandwidth_bytes_per_s_exact().to_double(); }
    Ratio bits_per_ns() const { return transfer_rate_gtps * Ratio(lanes) * encoding; }

    void validate() const {
        if (lanes < 1) throw ConfigError("hostbus: lanes must be >= 1");
        if (!(Ratio(0) < encoding) || encoding > Ratio(1)) throw ConfigError("hostbus: encoding must be in (0,1]");
        if (!(Ratio(0) < transfer_rate_gtps)) throw ConfigError("hostbus: transfer rate must be positive");
        if (max_payload_bytes < 1) throw ConfigError("hostbus: max payload must be >= 1");
    }
};

inline HostBusProfile hostbus_preset(const std::string& name) {
    if (name == "gen2-x8") return HostBusProfile{name, PcieGen::gen2, 8, Ratio{5}, Ratio{8, 10}, 256};
    if (name == "gen3-x8") return HostBusProfile{name, PcieGen::gen3, 8, Ratio{8}, Ratio{128, 130}, 256};
    throw ConfigError("unknown host-bus preset '" + name + "'");
}

inline double host_bus_bandwidth(const HostBusProfile& profile) { return profile.bandwidth_bytes_per_s(); }

} // namespace apesim
