#pragma once

#include "calibration.hpp"
#include "channel.hpp"
#include "engine.hpp"
#include "topology.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace apesim {

enum class Status : std::uint8_t { ok, host_fault, nic_fault, link_fault, unknown };

inline const char* to_string(Status s) {
    switch (s) {
    case Status::ok: return "OK";
    case Status::host_fault: return "HOST_FAULT";
    case Status::nic_fault: return "NIC_FAULT";
    case Status::link_fault: return "LINK_FAULT";
    case Status::unknown: return "UNKNOWN";
    }
    return "?";
}

// Piggyback diagnostic byte values: the link refresh rides every departing
// frame, or an idle-channel control frame once per watchdog period.
inline constexpr std::uint8_t kDiagOk = 1;
inline constexpr std::uint8_t kDiagHostFault = 2;

struct LofamoConfig {
    SimTime wd = SimTime::from_ms(500);
    SimTime host_update_phase = SimTime::zero();
    SimTime nic_check_phase = SimTime::zero();
    SimTime neighbor_poll_phase = SimTime::from_ms(150);
    SimTime service_net_latency{10000};
    SimTime link_stale_threshold = SimTime::from_ms(750);
    NodeId master = 0;

    void validate() const {
        if (wd <= SimTime::zero()) throw ConfigError("lofamo: WD must be positive");
        if (host_update_phase >= wd || nic_check_phase >= wd || neighbor_poll_phase >= wd) {
            throw ConfigError("lofamo: phases must fall within the watchdog period");
        }
        if (service_net_latency < SimTime::zero()) throw ConfigError("lofamo: service latency must be >= 0");
    }

    static LofamoConfig from_calibration(const CalibrationDefaults& c) {
        LofamoConfig l;
        l.wd = SimTime::from_ms(c.lofamo_wd_ms);
        l.host_update_phase = SimTime{l.wd.ns * c.lofamo_host_update_phase_permil / 1000};
        l.nic_check_phase = SimTime{l.wd.ns * c.lofamo_nic_check_phase_permil / 1000};
        l.neighbor_poll_phase = SimTime{l.wd.ns * c.lofamo_neighbor_poll_phase_permil / 1000};
        l.service_net_latency = SimTime{c.lofamo_service_net_latency_ns};
        l.link_stale_threshold = SimTime{l.wd.ns * c.lofamo_link_stale_permil / 1000};
        return l;
    }

    LofamoConfig with_wd(SimTime new_wd) const {
        LofamoConfig l = *this;
        const auto scale = [&](SimTime t) { return SimTime{t.ns * new_wd.ns / wd.ns}; };
        l.host_update_phase = scale(host_update_phase);
        l.nic_check_phase = scale(nic_check_phase);
        l.neighbor_poll_phase = scale(neighbor_poll_phase);
        l.link_stale_threshold = scale(link_stale_threshold);
        l.wd = new_wd;
        return l;
    }
};

struct FaultEvent {
    enum class Kind { host_crash, nic_fail, link_fail };
    NodeId node = 0;
    Kind kind = Kind::host_crash;
    Direction dir = Direction::xp; // link_fail only
    SimTime at;
};

inline const char* to_string(FaultEvent::Kind k) {
    switch (k) {
    case FaultEvent::Kind::host_crash: return "host-crash";
    case FaultEvent::Kind::nic_fail: return "nic-fail";
    case FaultEvent::Kind::link_fail: return "link-fail";
    }
    return "?";
}

// Canonical identity of a bidirectional link: the representation anchored at
// the lower-numbered endpoint. Parallel links in size-2 dimensions stay
// distinct because the direction is part of the key.
struct LinkKey {
    NodeId node = 0;
    Direction dir = Direction::xp;
    bool operator<(const LinkKey& o) const {
        if (node != o.node) return node < o.node;
        return dir < o.dir;
    }
    bool operator==(const LinkKey&) const = default;
};

inline LinkKey canonical_link(NodeId observer, Direction toward, NodeId peer) {
    if (observer <= peer) return LinkKey{observer, toward};
    return LinkKey{peer, reverse(toward)};
}

struct Report {
    enum class Evidence { host_fault, nic_fault, link_silent };
    Evidence evidence = Evidence::host_fault;
    NodeId subject = 0;
    NodeId observer = 0;
    LinkKey link; // link_silent only
    SimTime detected_at;
    SimTime arrived_at;
};

struct NodeHealth {
    Status host = Status::ok;
    Status nic = Status::ok;
};

struct HealthMap {
    std::map<NodeId, NodeHealth> nodes;
    std::map<LinkKey, SimTime> link_faults;

    std::size_t fault_entries() const {
        std::size_t n = link_faults.size();
        for (const auto& [id, h] : nodes) {
            if (h.host != Status::ok) ++n;
            if (h.nic != Status::ok) ++n;
        }
        return n;
    }
};

// Master-side aggregation. Reports arrive over the always-up service network;
// duplicates collapse to the earliest arrival. A silent link whose endpoint
// NIC is known dead is explained by that NIC fault and produces no separate
// link entry.
class MasterCollector {
public:
    void receive(const Report& r) {
        reports_.push_back(r);
        switch (r.evidence) {
        case Report::Evidence::host_fault: remember(first_host_fault_, r.subject, r.arrived_at); break;
        case Report::Evidence::nic_fault: remember(first_nic_fault_, r.subject, r.arrived_at); break;
        case Report::Evidence::link_silent: remember(first_link_silent_, r.link, r.arrived_at); break;
        }
    }

    HealthMap health() const {
        HealthMap h;
        for (const auto& [node, t] : first_host_fault_) h.nodes[node].host = Status::host_fault;
        for (const auto& [node, t] : first_nic_fault_) h.nodes[node].nic = Status::nic_fault;
        for (const auto& [link, t] : first_link_silent_) {
            const NodeId a = link.node;
            // The other endpoint is whoever a reporter paired with this key;
            // a NIC fault at either end subsumes the silence.
            if (first_nic_fault_.contains(a)) continue;
            if (other_end_.contains(link) && first_nic_fault_.contains(other_end_.at(link))) continue;
            h.link_faults.emplace(link, t);
        }
        return h;
    }

    void note_link_peer(const LinkKey& link, NodeId other) { other_end_[link] = other; }

    std::optional<SimTime> first_host_fault(NodeId n) const { return lookup(first_host_fault_, n); }
    std::optional<SimTime> first_nic_fault(NodeId n) const { return lookup(first_nic_fault_, n); }
    std::optional<SimTime> first_link_silent(const LinkKey& k) const { return lookup(first_link_silent_, k); }
    const std::vector<Report>& reports() const { return reports_; }

private:
    template <typename M, typename K> static void remember(M& m, const K& k, SimTime t) {
        const auto it = m.find(k);
        if (it == m.end()) m.emplace(k, t);
    }
    template <typename M, typename K> static std::optional<SimTime> lookup(const M& m, const K& k) {
        const auto it = m.find(k);
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

    std::vector<Report> reports_;
    std::map<NodeId, SimTime> first_host_fault_;
    std::map<NodeId, SimTime> first_nic_fault_;
    std::map<LinkKey, SimTime> first_link_silent_;
    std::map<LinkKey, NodeId> other_end_;
};

struct LofamoInstrumentation {
    std::map<NodeId, SimTime> host_fault_local_detect;   // NIC noticed its own host silent
    std::map<NodeId, SimTime> host_fault_neighbor_aware; // first neighbour register update
    std::map<NodeId, SimTime> nic_fault_local_detect;    // host noticed its own NIC silent
    std::map<LinkKey, SimTime> link_silence_detect;      // first observer poll hit
};

// One node's share of the protocol: the host-side software component (updates
// its register, reads the NIC register, polls neighbour status) and the NIC
// hardware component (checks the host register, refreshes its own, emits
// diagnostics toward the six neighbours).
class LofamoNode {
public:
    struct NeighborEntry {
        Status status = Status::unknown;
        SimTime freshness = SimTime::zero();
        bool seen = false;
    };

    LofamoNode(Engine& engine, NodeId id, TorusSpec spec, LofamoConfig cfg, MasterCollector& master,
               LofamoInstrumentation& instr)
        : engine_(engine), id_(id), spec_(spec), cfg_(cfg), master_(&master), instr_(&instr) {
        cfg_.validate();
    }

    void set_out_channels(std::array<Channel*, 6> out) {
        out_ = out;
        for (const Direction d : all_directions) {
            if (Channel* ch = out_[static_cast<int>(d)]) {
                ch->set_piggyback_source([this] { return piggyback_status(); });
            }
        }
    }

    // `jitter` shifts all of this node's phases by a fixed per-node offset;
    // the schedule stays strictly periodic.
    void start(SimTime jitter = SimTime::zero()) {
        schedule_tick(cfg_.host_update_phase + jitter, "host-tick", [this] { return host_tick(); });
        schedule_tick(cfg_.nic_check_phase + jitter, "nic-tick", [this] { return nic_tick(); });
        schedule_tick(cfg_.neighbor_poll_phase + jitter, "poll-tick", [this] { return poll_tick(); });
    }

    bool host_alive() const { return host_alive_; }
    bool nic_alive() const { return nic_alive_; }
    void crash_host() { host_alive_ = false; }
    void fail_nic() { nic_alive_ = false; }
    bool host_fault_detected() const { return host_fault_detected_; }
    SimTime host_register_age() const { return engine_.now() - host_last_update_; }
    const NeighborEntry& neighbor_entry(Direction d) const { return neighbor_[static_cast<int>(d)]; }
    std::uint64_t host_updates() const { return host_updates_; }
    std::uint64_t nic_checks() const { return nic_checks_; }

    std::uint8_t piggyback_status() const { return host_fault_detected_ ? kDiagHostFault : kDiagOk; }

    // Wired from the NIC arrival path: every frame's diagnostic byte lands in
    // the watchdog register bank for the link it came in on.
    void on_piggyback(Direction from, std::uint8_t byte, SimTime at) {
        if (!nic_alive_) return;
        NeighborEntry& e = neighbor_[static_cast<int>(from)];
        e.freshness = at;
        e.seen = true;
        if (byte == kDiagHostFault) {
            if (e.status != Status::host_fault) {
                e.status = Status::host_fault;
                const NodeId subject = neighbor(id_, from, spec_);
                if (subject != id_ && !instr_->host_fault_neighbor_aware.contains(subject)) {
                    instr_->host_fault_neighbor_aware.emplace(subject, at);
                }
            }
        } else if (e.status == Status::unknown) {
            e.status = Status::ok;
        }
    }

private:
    // Each tick reschedules itself while its component lives; a crashed
    // component simply stops ticking.
    void schedule_tick(SimTime phase, const char* kind, std::function<bool()> body) {
        engine_.schedule(phase, "lofamo." + std::to_string(id_), kind,
                         [this, kind, body = std::move(body)] { rearm(kind, body); });
    }

    void rearm(const char* kind, const std::function<bool()>& body) {
        if (!body()) return;
        engine_.schedule_in(cfg_.wd, "lofamo." + std::to_string(id_), kind,
                            [this, kind, body] { rearm(kind, body); });
    }

    // Host software: refresh own register, watch the NIC's.
    bool host_tick() {
        if (!host_alive_) return false;
        host_last_update_ = engine_.now();
        ++host_updates_;
        if (engine_.now() - apenet_last_update_ > cfg_.wd && !nic_fault_reported_) {
            nic_fault_reported_ = true;
            instr_->nic_fault_local_detect.emplace(id_, engine_.now());
            send_report(Report{Report::Evidence::nic_fault, id_, id_, {}, engine_.now(), {}});
        }
        return true;
    }

    // NIC hardware: refresh own register, watch the host's, refresh links.
    bool nic_tick() {
        if (!nic_alive_) return false;
        apenet_last_update_ = engine_.now();
        ++nic_checks_;
        if (engine_.now() - host_last_update_ > cfg_.wd && !host_fault_detected_) {
            host_fault_detected_ = true;
            instr_->host_fault_local_detect.emplace(id_, engine_.now());
        }
        // Idle channels get a control frame; busy ones piggyback the status on
        // the next departing data frame at zero cost.
        for (const Direction d : all_directions) {
            Channel* ch = out_[static_cast<int>(d)];
            if (ch && ch->alive() && !ch->has_queued_data()) ch->send_control(piggyback_status());
        }
        return true;
    }

    // Host software: forward neighbour faults and link silence to the master.
    bool poll_tick() {
        if (!host_alive_ || !nic_alive_) return false;
        for (const Direction d : all_directions) {
            const NodeId peer = neighbor(id_, d, spec_);
            if (peer == id_) continue; // self-loop directions carry no neighbour state
            const int i = static_cast<int>(d);
            const NeighborEntry& e = neighbor_[i];
            if (e.status == Status::host_fault && !neighbor_fault_reported_[i]) {
                neighbor_fault_reported_[i] = true;
                send_report(Report{Report::Evidence::host_fault, peer, id_, {}, engine_.now(), {}});
            }
            const SimTime basis = e.seen ? e.freshness : SimTime::zero();
            if (engine_.now() - basis > cfg_.link_stale_threshold && !link_silence_reported_[i]) {
                link_silence_reported_[i] = true;
                const LinkKey key = canonical_link(id_, d, peer);
                master_->note_link_peer(key, key.node == id_ ? peer : id_);
                instr_->link_silence_detect.try_emplace(key, engine_.now());
                Report r{Report::Evidence::link_silent, peer, id_, key, engine_.now(), {}};
                send_report(r);
            }
        }
        return true;
    }

    void send_report(Report r) {
        engine_.schedule_in(cfg_.service_net_latency, "service-net", "fault-report", [this, r]() mutable {
            r.arrived_at = engine_.now();
            master_->receive(r);
        });
    }

    Engine& engine_;
    NodeId id_;
    TorusSpec spec_;
    LofamoConfig cfg_;
    MasterCollector* master_;
    LofamoInstrumentation* instr_;
    std::array<Channel*, 6> out_{};
    std::array<NeighborEntry, 6> neighbor_{};

    bool host_alive_ = true;
    bool nic_alive_ = true;
    bool host_fault_detected_ = false;
    bool nic_fault_reported_ = false;
    std::array<bool, 6> neighbor_fault_reported_{};
    std::array<bool, 6> link_silence_reported_{};
    SimTime host_last_update_ = SimTime::zero();
    SimTime apenet_last_update_ = SimTime::zero();
    std::uint64_t host_updates_ = 0;
    std::uint64_t nic_checks_ = 0;
};

struct AwarenessTrace {
    FaultEvent fault;
    std::optional<SimTime> t_local_detect;
    std::optional<SimTime> t_neighbor_aware;
    std::optional<SimTime> t_master_aware;
    bool detected() const { return t_master_aware.has_value(); }
    SimTime ta() const { return *t_master_aware - fault.at; }
};

} // namespace apesim
