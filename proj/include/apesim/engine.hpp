#pragma once

#include "errors.hpp"
#include "time.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace apesim {

using EventId = std::uint64_t;

// Single-threaded discrete-event engine. Events fire in (fire_at, seq) order;
// seq is a global insertion counter, so two events at the same instant are
// delivered in the order they were scheduled. Identical schedules replay
// identically, which makes whole-run traces byte-reproducible.
class Engine {
public:
    using TraceFn = std::function<void(SimTime, EventId, const std::string&, const std::string&)>;

    EventId schedule(SimTime fire_at, std::string target, std::string kind, std::function<void()> action) {
        if (fire_at < now_) {
            throw ConfigError("schedule: event for " + fire_at.str() + " is in the past (now=" + now_.str() + ")");
        }
        const EventId id = next_seq_++;
        queue_.push(Item{fire_at, id, std::move(target), std::move(kind), std::move(action)});
        ++scheduled_;
        return id;
    }

    EventId schedule_in(SimTime delay, std::string target, std::string kind, std::function<void()> action) {
        return schedule(now_ + delay, std::move(target), std::move(kind), std::move(action));
    }

    // Processes every event with fire_at <= t, then advances the clock to t.
    std::uint64_t run_until(SimTime t) {
        if (t < now_) throw ConfigError("run_until: target " + t.str() + " precedes now=" + now_.str());
        std::uint64_t n = 0;
        while (!queue_.empty() && queue_.top().fire_at <= t) {
            Item item = std::move(const_cast<Item&>(queue_.top()));
            queue_.pop();
            now_ = item.fire_at;
            if (trace_) trace_(item.fire_at, item.seq, item.target, item.kind);
            if (trace_out_) {
                (*trace_out_) << item.fire_at.ns << '\t' << item.seq << '\t' << item.target << '\t' << item.kind
                              << '\n';
            }
            item.action();
            ++processed_;
            ++n;
        }
        now_ = t;
        return n;
    }

    // Drains the queue completely.
    std::uint64_t run_all() {
        std::uint64_t n = 0;
        while (!queue_.empty()) {
            n += run_until(queue_.top().fire_at);
        }
        return n;
    }

    SimTime now() const { return now_; }
    std::uint64_t scheduled_count() const { return scheduled_; }
    std::uint64_t processed_count() const { return processed_; }
    std::uint64_t pending_count() const { return queue_.size(); }

    void set_trace(TraceFn fn) { trace_ = std::move(fn); }
    void set_trace_stream(std::ostream* out) { trace_out_ = out; }

private:
    struct Item {
        SimTime fire_at;
        EventId seq;
        std::string target;
        std::string kind;
        std::function<void()> action;
    };
    struct Later {
        bool operator()(const Item& a, const Item& b) const {
            if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Item, std::vector<Item>, Later> queue_;
    SimTime now_ = SimTime::zero();
    EventId next_seq_ = 0;
    std::uint64_t scheduled_ = 0;
    std::uint64_t processed_ = 0;
    TraceFn trace_;
    std::ostream* trace_out_ = nullptr;
};

} // namespace apesim
