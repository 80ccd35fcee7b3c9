#pragma once

#include "dma.hpp"
#include "engine.hpp"
#include "framing.hpp"
#include "link.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>

namespace apesim {

inline std::int64_t ceil_ns(const Ratio& r) {
    const std::int64_t q = r.num / r.den;
    return (r.num % r.den != 0 && r.num > 0) ? q + 1 : q;
}

// One directed APElink channel. Data frames serialize at the data-layer rate
// and each frame additionally occupies the wire for its share of
// transmission-control words, so a saturated channel converges exactly on the
// modeled goodput. Credits mirror the receiver's 40 KB buffer: a frame departs
// only when the peer has room for all its words.
//
// Control frames (diagnostics on an idle link) replace idle stuffing words and
// therefore occupy no channel time at all: data traffic never waits on them.
class Channel {
public:
    using DeliveryFn = std::function<void(Frame&&, SimTime)>;
    using PiggybackFn = std::function<std::uint8_t()>;

    Channel(Engine& engine, std::string name, NodeId owner, NodeId peer, Direction dir, const LinkProfile& profile,
            const FramingParams& params, SimTime hop_latency)
        : engine_(engine),
          name_(std::move(name)),
          owner_(owner),
          peer_(peer),
          dir_(dir),
          params_(params),
          hop_latency_(hop_latency),
          bits_per_ns_(profile.data_bits_per_ns()),
          credits_(params.buffer_words()) {
        params_.validate();
        profile.validate();
        // Per-frame control share beyond the physical header/footer words.
        gap_per_frame_ = (params_.control_overhead_words - Ratio(params_.overhead_words())) * Ratio(kWordBits) /
                         bits_per_ns_;
    }

    void set_delivery(DeliveryFn fn) { delivery_ = std::move(fn); }
    void set_piggyback_source(PiggybackFn fn) { piggyback_source_ = std::move(fn); }

    void submit(Frame f) {
        if (!alive_) {
            ++dropped_frames_;
            return;
        }
        queue_.push_back(std::move(f));
        try_depart();
    }

    // Diagnostic-only frame; rides the idle stuffing, zero occupancy.
    void send_control(std::uint8_t piggyback) {
        if (!alive_ || !delivery_) return;
        Frame f = make_control_frame(peer_, piggyback);
        const std::int64_t bits = static_cast<std::int64_t>(f.total_words(params_)) * kWordBits;
        const SimTime ser = FractionalClock(bits_per_ns_).span_for(bits);
        const SimTime arrival = engine_.now() + ser + hop_latency_;
        engine_.schedule(arrival, name_, "control-arrival", [this, f = std::move(f), arrival]() mutable {
            if (alive_) delivery_(std::move(f), arrival);
        });
    }

    // Receiver drained `words`; the credit grant rides the reverse channel.
    void on_receiver_drained(int words) {
        engine_.schedule_in(hop_latency_, name_, "credit-return", [this, words] {
            credits_ += words;
            if (credits_ > params_.buffer_words()) throw SimError(name_ + ": credit overflow");
            try_depart();
        });
    }

    void kill() {
        alive_ = false;
        dropped_frames_ += queue_.size();
        queue_.clear();
    }

    bool alive() const { return alive_; }
    int credits() const { return credits_; }
    std::size_t queued_frames() const { return queue_.size(); }
    bool has_queued_data() const { return !queue_.empty(); }
    NodeId owner() const { return owner_; }
    NodeId peer() const { return peer_; }
    Direction dir() const { return dir_; }
    const std::string& name() const { return name_; }
    SimTime hop_latency() const { return hop_latency_; }
    const FramingParams& params() const { return params_; }

    std::uint64_t departed_frames() const { return departed_frames_; }
    std::uint64_t departed_words() const { return departed_words_; }
    std::uint64_t arrived_words() const { return arrived_words_; }
    std::uint64_t dropped_frames() const { return dropped_frames_; }
    SimTime last_departure() const { return last_departure_; }

    Ratio serialization_exact(int words) const {
        return Ratio(static_cast<std::int64_t>(words) * kWordBits) / bits_per_ns_;
    }

private:
    void try_depart() {
        while (alive_ && !queue_.empty()) {
            const Ratio now_r{engine_.now().ns};
            if (busy_until_ > now_r) {
                schedule_free_event();
                return;
            }
            Frame& front = queue_.front();
            const int words = front.total_words(params_);
            if (credits_ < words) return; // wait for a credit grant
            depart(words);
        }
    }

    void depart(int words) {
        Frame f = std::move(queue_.front());
        queue_.pop_front();
        credits_ -= words;
        if (piggyback_source_) f.piggyback = piggyback_source_();

        // The exact timeline continues from the previous frame's end, so the
        // sub-nanosecond remainder is never lost even though events fire on
        // integer nanoseconds.
        const Ratio now_r{engine_.now().ns};
        const Ratio base = busy_until_ > now_r ? busy_until_ : now_r;
        const Ratio ser = serialization_exact(words);
        busy_until_ = base + ser + gap_per_frame_;

        ++departed_frames_;
        departed_words_ += static_cast<std::uint64_t>(words);
        last_departure_ = engine_.now();

        const SimTime arrival = SimTime{ceil_ns(base + ser)} + hop_latency_;
        engine_.schedule(arrival, name_, "frame-arrival", [this, f = std::move(f), words, arrival]() mutable {
            if (!alive_) {
                ++dropped_frames_;
                return;
            }
            arrived_words_ += static_cast<std::uint64_t>(words);
            if (delivery_) delivery_(std::move(f), arrival);
        });
    }

    void schedule_free_event() {
        if (free_event_pending_) return;
        free_event_pending_ = true;
        const SimTime at{ceil_ns(busy_until_)};
        engine_.schedule(at, name_, "tx-free", [this] {
            free_event_pending_ = false;
            try_depart();
        });
    }

    Engine& engine_;
    std::string name_;
    NodeId owner_;
    NodeId peer_;
    Direction dir_;
    FramingParams params_;
    SimTime hop_latency_;
    Ratio bits_per_ns_;
    Ratio gap_per_frame_;
    Ratio busy_until_{0};
    int credits_;
    bool alive_ = true;
    bool free_event_pending_ = false;
    std::deque<Frame> queue_;
    DeliveryFn delivery_;
    PiggybackFn piggyback_source_;

    std::uint64_t departed_frames_ = 0;
    std::uint64_t departed_words_ = 0;
    std::uint64_t arrived_words_ = 0;
    std::uint64_t dropped_frames_ = 0;
    SimTime last_departure_ = SimTime::zero();
};

} // namespace apesim
