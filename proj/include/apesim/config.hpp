#pragma once

#include "calibration.hpp"
#include "errors.hpp"
#include "lofamo.hpp"
#include "platform.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace apesim {

namespace kv {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (const char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

// Exact decimal * unit parse: "1.25s" -> 1250000000 ns. Rejects anything that
// is not a plain decimal numeral.
inline std::int64_t parse_scaled_decimal(const std::string& text, std::int64_t unit, int line, const char* what) {
    const auto dot = text.find('.');
    const std::string ip = dot == std::string::npos ? text : text.substr(0, dot);
    const std::string fp = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (!all_digits(ip) || (dot != std::string::npos && !all_digits(fp))) {
        throw ConfigError("line " + std::to_string(line) + ": bad " + std::string(what) + " '" + text + "'");
    }
    std::int64_t value = std::stoll(ip) * unit;
    std::int64_t scale = unit;
    for (const char c : fp) {
        if (scale % 10 != 0) {
            throw ConfigError("line " + std::to_string(line) + ": " + what + " '" + text +
                              "' is finer than the base unit");
        }
        scale /= 10;
        value += (c - '0') * scale;
    }
    return value;
}

// Rational values accept "a/b", integers and exact decimals ("14.1" -> 141/10).
inline Ratio parse_ratio_text(const std::string& text, int line, const char* what) {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const std::string num = text.substr(0, slash);
        const std::string den = text.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) {
            throw ConfigError("line " + std::to_string(line) + ": bad " + std::string(what) + " '" + text + "'");
        }
        return Ratio(std::stoll(num), std::stoll(den));
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) {
        if (!all_digits(text)) {
            throw ConfigError("line " + std::to_string(line) + ": bad " + std::string(what) + " '" + text + "'");
        }
        return Ratio(std::stoll(text));
    }
    std::int64_t den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return Ratio(parse_scaled_decimal(text, den, line, what), den);
}

// Line-oriented `key = value` text with '#' comments.
class File {
public:
    static File parse(const std::string& text) {
        File f;
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
            if (f.entries_.contains(key)) {
                throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            }
            f.entries_[key] = Entry{value, line_no, false};
        }
        return f;
    }

    static File parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config '" + path + "'");
        std::ostringstream oss;
        oss << in.rdbuf();
        return parse(oss.str());
    }

    bool has(const std::string& key) const { return entries_.contains(key); }

    std::optional<std::string> get(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.consumed = true;
        return it->second.value;
    }

    int line_of(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    std::string require(const std::string& key) {
        auto v = get(key);
        if (!v) throw ConfigError("missing required key '" + key + "'");
        return *v;
    }

    std::int64_t get_int(const std::string& key, std::int64_t dflt) {
        const auto v = get(key);
        if (!v) return dflt;
        if (!all_digits(*v)) {
            throw ConfigError("line " + std::to_string(line_of(key)) + ": bad integer '" + *v + "'");
        }
        return std::stoll(*v);
    }

    bool get_bool(const std::string& key, bool dflt) {
        const auto v = get(key);
        if (!v) return dflt;
        if (*v == "true") return true;
        if (*v == "false") return false;
        throw ConfigError("line " + std::to_string(line_of(key)) + ": expected true/false, got '" + *v + "'");
    }

    // Times accept ns/us/ms/s suffixes and exact decimals.
    SimTime get_time(const std::string& key, SimTime dflt) {
        const auto v = get(key);
        if (!v) return dflt;
        return parse_time(*v, line_of(key));
    }

    static SimTime parse_time(const std::string& text, int line) {
        static const std::pair<const char*, std::int64_t> units[] = {
            {"ns", 1}, {"us", 1000}, {"ms", 1000000}, {"s", 1000000000}};
        for (const auto& [suffix, mult] : units) {
            const std::string sfx(suffix);
            if (text.size() > sfx.size() && text.ends_with(sfx)) {
                const std::string head = text.substr(0, text.size() - sfx.size());
                if (!head.empty() && (std::isdigit(static_cast<unsigned char>(head.back())) || head.back() == '.')) {
                    return SimTime{parse_scaled_decimal(head, mult, line, "time")};
                }
            }
        }
        return SimTime{parse_scaled_decimal(text, 1, line, "time")}; // bare integers are nanoseconds
    }

    // Sizes accept B/KiB/MiB/GiB suffixes; bare integers are bytes.
    std::int64_t get_bytes(const std::string& key, std::int64_t dflt) {
        const auto v = get(key);
        if (!v) return dflt;
        return parse_bytes(*v, line_of(key));
    }

    static std::int64_t parse_bytes(const std::string& text, int line) {
        static const std::pair<const char*, std::int64_t> units[] = {
            {"GiB", 1073741824}, {"MiB", 1048576}, {"KiB", 1024}, {"B", 1}};
        for (const auto& [suffix, mult] : units) {
            const std::string sfx(suffix);
            if (text.size() > sfx.size() && text.ends_with(sfx)) {
                return parse_scaled_decimal(text.substr(0, text.size() - sfx.size()), mult, line, "size");
            }
        }
        return parse_scaled_decimal(text, 1, line, "size");
    }

    Ratio get_ratio(const std::string& key, Ratio dflt) {
        const auto v = get(key);
        if (!v) return dflt;
        return parse_ratio_text(*v, line_of(key), "ratio");
    }

    std::vector<std::int64_t> get_int_list(const std::string& key, std::vector<std::int64_t> dflt) {
        const auto v = get(key);
        if (!v) return dflt;
        std::vector<std::int64_t> out;
        for (const std::string& item : split(*v, ',')) {
            if (item.empty()) continue;
            out.push_back(parse_bytes(item, line_of(key)));
        }
        if (out.empty()) throw ConfigError("line " + std::to_string(line_of(key)) + ": empty list");
        return out;
    }

    // Every key must belong to the schema; leftovers are an error.
    void reject_unknown() const {
        for (const auto& [key, entry] : entries_) {
            if (!entry.consumed) {
                throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
            }
        }
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
        bool consumed = false;
    };
    std::map<std::string, Entry> entries_;
};

} // namespace kv

enum class ExperimentKind { latency, roundtrip, bandwidth, dma, tlb, fault, efficiency };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::latency: return "latency";
    case ExperimentKind::roundtrip: return "roundtrip";
    case ExperimentKind::bandwidth: return "bandwidth";
    case ExperimentKind::dma: return "dma";
    case ExperimentKind::tlb: return "tlb";
    case ExperimentKind::fault: return "fault";
    case ExperimentKind::efficiency: return "efficiency";
    }
    return "?";
}

inline ExperimentKind experiment_kind_from(const std::string& s, int line) {
    for (const ExperimentKind k : {ExperimentKind::latency, ExperimentKind::roundtrip, ExperimentKind::bandwidth,
                                   ExperimentKind::dma, ExperimentKind::tlb, ExperimentKind::fault,
                                   ExperimentKind::efficiency}) {
        if (s == to_string(k)) return k;
    }
    throw ConfigError("line " + std::to_string(line) + ": unknown experiment kind '" + s + "'");
}

inline MemKind mem_kind_from(const std::string& s, int line) {
    if (s == "host") return MemKind::host;
    if (s == "gpu") return MemKind::gpu;
    throw ConfigError("line " + std::to_string(line) + ": memory kind must be host or gpu, got '" + s + "'");
}

// `host-crash:3:1.25s`, `nic-fail:2:800ms`, `link-fail:5:+x:1s`
inline FaultEvent parse_fault_spec(const std::string& text, int line) {
    const auto parts = kv::split(text, ':');
    FaultEvent f;
    const auto need = [&](std::size_t n) {
        if (parts.size() != n) throw ConfigError("line " + std::to_string(line) + ": bad fault spec '" + text + "'");
    };
    if (parts.empty()) throw ConfigError("line " + std::to_string(line) + ": empty fault spec");
    const std::string& kind = parts[0];
    try {
        if (kind == "host-crash") {
            need(3);
            f.kind = FaultEvent::Kind::host_crash;
            f.node = static_cast<NodeId>(std::stoul(parts[1]));
            f.at = kv::File::parse_time(parts[2], line);
        } else if (kind == "nic-fail") {
            need(3);
            f.kind = FaultEvent::Kind::nic_fail;
            f.node = static_cast<NodeId>(std::stoul(parts[1]));
            f.at = kv::File::parse_time(parts[2], line);
        } else if (kind == "link-fail") {
            need(4);
            f.kind = FaultEvent::Kind::link_fail;
            f.node = static_cast<NodeId>(std::stoul(parts[1]));
            f.dir = direction_from_string(parts[2]);
            f.at = kv::File::parse_time(parts[3], line);
        } else {
            throw ConfigError("line " + std::to_string(line) + ": unknown fault kind '" + kind + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": bad fault spec '" + text + "'");
    }
    return f;
}

struct ScenarioConfig {
    std::uint64_t seed = 0;
    TorusSpec torus{4, 4, 1};

    std::string link_preset_name = "apelink-operational";
    LinkProfile link = link_preset("apelink-operational");
    FramingParams framing{};

    std::string hostbus_preset_name = "gen2-x8";
    int dma_engines = 2;

    bool lofamo_enabled = true;
    SimTime lofamo_wd = SimTime::from_ms(500);
    NodeId master = 0;

    ExperimentKind kind = ExperimentKind::latency;
    std::vector<std::int64_t> sizes;
    MemKind src_kind = MemKind::host;
    MemKind dst_kind = MemKind::host;
    bool p2p = true;
    bool all_combos = false;
    int repetitions = 1;
    NodeId src = 0;
    NodeId dst = 1;
    std::vector<std::int64_t> wd_sweep_ms;
    int fault_injections = 1000;
    std::vector<FaultEvent> faults;

    static ScenarioConfig from_string(const std::string& text) {
        kv::File f = kv::File::parse(text);
        ScenarioConfig c;

        const std::string seed_text = f.require("seed"); // wall-clock seeding is not allowed
        if (!kv::all_digits(seed_text)) {
            throw ConfigError("line " + std::to_string(f.line_of("seed")) + ": bad seed '" + seed_text + "'");
        }
        c.seed = std::stoull(seed_text);

        c.torus.x = static_cast<int>(f.get_int("torus.x", 4));
        c.torus.y = static_cast<int>(f.get_int("torus.y", 4));
        c.torus.z = static_cast<int>(f.get_int("torus.z", 1));
        c.torus.validate();

        const bool custom_link =
            f.has("link.lane_rate_gbps") || f.has("link.lanes") || f.has("link.encoding");
        if (const auto preset = f.get("link.preset")) {
            if (custom_link) throw ConfigError("link.preset conflicts with explicit link.* fields");
            c.link_preset_name = *preset;
            c.link = link_preset(*preset); // throws on unknown preset
        } else if (custom_link) {
            c.link_preset_name.clear();
            c.link.name = "custom";
            c.link.lane_rate_gbps = f.get_ratio("link.lane_rate_gbps", Ratio{7});
            c.link.lanes = static_cast<int>(f.get_int("link.lanes", 4));
            c.link.encoding = f.get_ratio("link.encoding", Ratio{8, 10});
        }
        c.link.validate();

        c.framing.header_words = static_cast<int>(f.get_int("framing.header_words", 1));
        c.framing.footer_words = static_cast<int>(f.get_int("framing.footer_words", 1));
        c.framing.max_payload_words = static_cast<int>(f.get_int("framing.max_payload_words", 256));
        c.framing.control_overhead_words = f.get_ratio("framing.control_overhead_words", Ratio{3456, 49});
        c.framing.buffer_bytes = static_cast<int>(f.get_bytes("framing.buffer_bytes", 40960));
        c.framing.validate();

        c.hostbus_preset_name = f.get("hostbus.preset").value_or("gen2-x8");
        hostbus_preset(c.hostbus_preset_name).validate();
        c.dma_engines = static_cast<int>(f.get_int("nic.dma_engines", 2));
        if (c.dma_engines < 1) {
            throw ConfigError("line " + std::to_string(f.line_of("nic.dma_engines")) + ": dma engines must be >= 1");
        }

        c.lofamo_enabled = f.get_bool("lofamo.enabled", true);
        c.lofamo_wd = f.get_time("lofamo.wd", SimTime::from_ms(500));
        if (c.lofamo_wd <= SimTime::zero()) {
            throw ConfigError("line " + std::to_string(f.line_of("lofamo.wd")) + ": watchdog period must be positive");
        }
        c.master = static_cast<NodeId>(f.get_int("lofamo.master", 0));

        c.kind = experiment_kind_from(f.require("experiment.kind"), f.line_of("experiment.kind"));
        c.sizes = f.get_int_list("experiment.sizes", default_sizes(c.kind));
        if (!std::is_sorted(c.sizes.begin(), c.sizes.end())) {
            throw ConfigError("line " + std::to_string(f.line_of("experiment.sizes")) + ": sizes must be ascending");
        }
        for (const std::int64_t s : c.sizes) {
            if (s < 0) throw ConfigError("line " + std::to_string(f.line_of("experiment.sizes")) + ": negative size");
        }
        if (const auto v = f.get("experiment.src_kind")) c.src_kind = mem_kind_from(*v, f.line_of("experiment.src_kind"));
        if (const auto v = f.get("experiment.dst_kind")) c.dst_kind = mem_kind_from(*v, f.line_of("experiment.dst_kind"));
        c.p2p = f.get_bool("experiment.p2p", true);
        c.all_combos = f.get_bool("experiment.all_combos", false);
        c.repetitions = static_cast<int>(f.get_int("experiment.repetitions", 1));
        if (c.repetitions < 1) {
            throw ConfigError("line " + std::to_string(f.line_of("experiment.repetitions")) +
                              ": repetitions must be >= 1");
        }
        c.src = static_cast<NodeId>(f.get_int("experiment.src", 0));
        c.dst = static_cast<NodeId>(f.get_int("experiment.dst", 1));
        if (static_cast<int>(c.src) >= c.torus.node_count() || static_cast<int>(c.dst) >= c.torus.node_count()) {
            throw ConfigError("experiment src/dst out of range for the torus");
        }
        c.wd_sweep_ms = f.get_int_list("experiment.wd_sweep_ms", {1, 10, 100, 500, 1000});
        c.fault_injections = static_cast<int>(f.get_int("experiment.injections", 1000));
        if (c.fault_injections < 1) {
            throw ConfigError("line " + std::to_string(f.line_of("experiment.injections")) +
                              ": injections must be >= 1");
        }

        if (const auto v = f.get("fault.schedule")) {
            for (const std::string& item : kv::split(*v, ',')) {
                if (!item.empty()) c.faults.push_back(parse_fault_spec(item, f.line_of("fault.schedule")));
            }
        }

        f.reject_unknown();
        return c;
    }

    static ScenarioConfig load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config '" + path + "'");
        std::ostringstream oss;
        oss << in.rdbuf();
        return from_string(oss.str());
    }

    static std::vector<std::int64_t> default_sizes(ExperimentKind k) {
        switch (k) {
        case ExperimentKind::latency:
        case ExperimentKind::roundtrip: return {64};
        case ExperimentKind::bandwidth: return {4096, 32768, 262144, 1048576, 2097152};
        case ExperimentKind::efficiency: return {16, 256, 4096, 65536, 1048576};
        default: return {64};
        }
    }

    // Canonical echo: every effective key, sorted, base units. Parsing the
    // echo reproduces the same configuration (load -> normalize is a fixed
    // point).
    std::string normalize() const {
        std::map<std::string, std::string> out;
        out["seed"] = std::to_string(seed);
        out["torus.x"] = std::to_string(torus.x);
        out["torus.y"] = std::to_string(torus.y);
        out["torus.z"] = std::to_string(torus.z);
        if (!link_preset_name.empty()) {
            out["link.preset"] = link_preset_name;
        } else {
            out["link.lane_rate_gbps"] = link.lane_rate_gbps.str();
            out["link.lanes"] = std::to_string(link.lanes);
            out["link.encoding"] = link.encoding.str();
        }
        out["framing.header_words"] = std::to_string(framing.header_words);
        out["framing.footer_words"] = std::to_string(framing.footer_words);
        out["framing.max_payload_words"] = std::to_string(framing.max_payload_words);
        out["framing.control_overhead_words"] = framing.control_overhead_words.str();
        out["framing.buffer_bytes"] = std::to_string(framing.buffer_bytes);
        out["hostbus.preset"] = hostbus_preset_name;
        out["nic.dma_engines"] = std::to_string(dma_engines);
        out["lofamo.enabled"] = lofamo_enabled ? "true" : "false";
        out["lofamo.wd"] = std::to_string(lofamo_wd.ns) + "ns";
        out["lofamo.master"] = std::to_string(master);
        out["experiment.kind"] = to_string(kind);
        out["experiment.sizes"] = join(sizes);
        out["experiment.src_kind"] = to_string(src_kind);
        out["experiment.dst_kind"] = to_string(dst_kind);
        out["experiment.p2p"] = p2p ? "true" : "false";
        out["experiment.all_combos"] = all_combos ? "true" : "false";
        out["experiment.repetitions"] = std::to_string(repetitions);
        out["experiment.src"] = std::to_string(src);
        out["experiment.dst"] = std::to_string(dst);
        out["experiment.wd_sweep_ms"] = join(wd_sweep_ms);
        out["experiment.injections"] = std::to_string(fault_injections);
        if (!faults.empty()) {
            std::string items;
            for (const FaultEvent& fe : faults) {
                if (!items.empty()) items += ",";
                items += to_string(fe.kind);
                items += ":" + std::to_string(fe.node);
                if (fe.kind == FaultEvent::Kind::link_fail) items += std::string(":") + to_string(fe.dir);
                items += ":" + std::to_string(fe.at.ns) + "ns";
            }
            out["fault.schedule"] = items;
        }

        std::string text = "# normalized scenario\n";
        for (const auto& [key, value] : out) text += key + " = " + value + "\n";
        return text;
    }

    PlatformConfig platform_config(const CalibrationDefaults& calib) const {
        PlatformConfig p = PlatformConfig::from_calibration(calib);
        p.torus = torus;
        p.link = link;
        p.framing = framing;
        p.nic = NicConfig::from_calibration(calib, hostbus_preset(hostbus_preset_name));
        p.nic.dma.engines = dma_engines;
        p.lofamo = LofamoConfig::from_calibration(calib).with_wd(lofamo_wd);
        p.lofamo.master = master;
        p.lofamo_enabled = lofamo_enabled;
        p.seed = seed;
        return p;
    }

private:
    static std::string join(const std::vector<std::int64_t>& v) {
        std::string out;
        for (const std::int64_t x : v) {
            if (!out.empty()) out += ",";
            out += std::to_string(x);
        }
        return out;
    }
};

} // namespace apesim
