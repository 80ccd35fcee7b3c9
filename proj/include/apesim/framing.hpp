#pragma once

#include "link.hpp"
#include "topology.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace apesim {

using Word = std::array<std::uint8_t, kWordBytes>;

// Wire layout, little-endian 128-bit words.
//   header : bits[0..31] payload byte length, bits[32..63] destination node,
//            bits[64..95] message id, bits[96..103] piggyback diagnostic byte,
//            remaining bits reserved zero.
//   footer : bits[0..31] frame sequence within the message, bit[32] last-frame,
//            bit[33] control-frame, bits[40..47] CRC state (0 = valid),
//            bits[64..127] end marker.
// Idle words (all ones) may be stuffed between frames; a header is never all
// ones because its reserved bits are zero.
inline constexpr std::uint64_t kEndMarker = 0xa9e1f007c0dec0deull;

inline Word idle_word() {
    Word w;
    w.fill(0xff);
    return w;
}

inline bool is_idle_word(const Word& w) {
    for (const std::uint8_t b : w) {
        if (b != 0xff) return false;
    }
    return true;
}

namespace detail {
inline void put_u32(Word& w, int offset, std::uint32_t v) {
    w[offset] = static_cast<std::uint8_t>(v);
    w[offset + 1] = static_cast<std::uint8_t>(v >> 8);
    w[offset + 2] = static_cast<std::uint8_t>(v >> 16);
    w[offset + 3] = static_cast<std::uint8_t>(v >> 24);
}
inline std::uint32_t get_u32(const Word& w, int offset) {
    return static_cast<std::uint32_t>(w[offset]) | (static_cast<std::uint32_t>(w[offset + 1]) << 8) |
           (static_cast<std::uint32_t>(w[offset + 2]) << 16) | (static_cast<std::uint32_t>(w[offset + 3]) << 24);
}
inline void put_u64(Word& w, int offset, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) w[offset + i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline std::uint64_t get_u64(const Word& w, int offset) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(w[offset + i]) << (8 * i);
    return v;
}
} // namespace detail

struct Frame {
    std::uint32_t payload_bytes = 0;
    NodeId dst = 0;
    std::uint32_t message_id = 0;
    std::uint8_t piggyback = 0;
    std::uint32_t frame_seq = 0;
    bool last = true;
    bool control = false;
    std::uint8_t crc_state = 0; // nonzero marks an injected corruption
    std::vector<std::uint8_t> payload;

    // Delivery metadata used by the simulation only; on the wire it would sit
    // in an extended header, so it is not part of the encoded words.
    std::uint8_t dst_kind_raw = 0;
    std::uint64_t dst_vaddr = 0;
    std::uint32_t chunk_stride = 0; // payload bytes per frame of this message

    int payload_words() const { return static_cast<int>(payload_words_for(payload_bytes)); }
    int total_words(const FramingParams& p) const { return payload_words() + p.overhead_words(); }
    int total_bytes(const FramingParams& p) const { return total_words(p) * kWordBytes; }

    void encode(std::vector<Word>& out) const {
        Word header{};
        detail::put_u32(header, 0, payload_bytes);
        detail::put_u32(header, 4, dst);
        detail::put_u32(header, 8, message_id);
        header[12] = piggyback;
        out.push_back(header);

        const int words = payload_words();
        for (int i = 0; i < words; ++i) {
            Word w{};
            const std::size_t offset = static_cast<std::size_t>(i) * kWordBytes;
            const std::size_t n = std::min<std::size_t>(kWordBytes, payload.size() - offset);
            std::memcpy(w.data(), payload.data() + offset, n);
            out.push_back(w);
        }

        Word footer{};
        detail::put_u32(footer, 0, frame_seq);
        footer[4] = static_cast<std::uint8_t>((last ? 1 : 0) | (control ? 2 : 0));
        footer[5] = crc_state;
        detail::put_u64(footer, 8, kEndMarker);
        out.push_back(footer);
    }

    std::vector<std::uint8_t> encode_bytes() const {
        std::vector<Word> words;
        encode(words);
        std::vector<std::uint8_t> bytes;
        bytes.reserve(words.size() * kWordBytes);
        for (const Word& w : words) bytes.insert(bytes.end(), w.begin(), w.end());
        return bytes;
    }
};

// Splits a message into frames of at most max_payload_words. The last payload
// word is zero-padded; the true byte length rides in each header. An empty
// message still produces one frame so the receiver sees it.
inline std::vector<Frame> frame_message(NodeId dst, std::uint32_t message_id, std::span<const std::uint8_t> bytes,
                                        const FramingParams& params, std::uint8_t piggyback = 0) {
    params.validate();
    const std::size_t chunk_bytes = static_cast<std::size_t>(params.max_payload_words) * kWordBytes;
    std::vector<Frame> frames;
    std::size_t offset = 0;
    std::uint32_t seq = 0;
    do {
        const std::size_t n = std::min(chunk_bytes, bytes.size() - offset);
        Frame f;
        f.payload_bytes = static_cast<std::uint32_t>(n);
        f.dst = dst;
        f.message_id = message_id;
        f.piggyback = piggyback;
        f.frame_seq = seq++;
        f.last = (offset + n == bytes.size());
        f.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                         bytes.begin() + static_cast<std::ptrdiff_t>(offset + n));
        frames.push_back(std::move(f));
        offset += n;
    } while (offset < bytes.size());
    return frames;
}

// Header+footer only; carries a diagnostic byte when the channel has no data
// traffic to piggyback on.
inline Frame make_control_frame(NodeId dst, std::uint8_t piggyback) {
    Frame f;
    f.dst = dst;
    f.piggyback = piggyback;
    f.control = true;
    return f;
}

struct FramingError {
    std::size_t word_offset = 0;
    std::string reason;
};

struct DeframedMessage {
    NodeId dst = 0;
    std::uint32_t message_id = 0;
    std::vector<std::uint8_t> bytes;
    std::vector<std::uint8_t> piggybacks; // one per frame of the message
};

struct Diagnostic {
    std::uint8_t piggyback = 0;
    bool from_control_frame = false;
};

// Incremental frame decoder. Accepts the stream at any byte granularity,
// skips idle stuffing, reassembles multi-frame messages by id and surfaces
// piggyback diagnostics to the fault-monitor layer.
class Deframer {
public:
    explicit Deframer(FramingParams params = {}) : params_(params) {}

    void push(std::span<const std::uint8_t> bytes) {
        for (const std::uint8_t b : bytes) {
            partial_[partial_fill_++] = b;
            if (partial_fill_ == kWordBytes) {
                partial_fill_ = 0;
                Word w;
                std::memcpy(w.data(), partial_.data(), kWordBytes);
                push_word(w);
            }
        }
    }

    void push_word(const Word& w) {
        switch (state_) {
        case State::expect_header:
            if (is_idle_word(w)) break;
            decode_header(w);
            break;
        case State::expect_payload:
            current_.payload.insert(current_.payload.end(), w.begin(), w.end());
            if (--payload_words_left_ == 0) {
                current_.payload.resize(current_.payload_bytes); // strip pad
                state_ = State::expect_footer;
            }
            break;
        case State::expect_footer:
            decode_footer(w);
            break;
        }
        ++word_offset_;
    }

    std::vector<DeframedMessage> take_messages() { return std::exchange(messages_, {}); }
    std::vector<Diagnostic> take_diagnostics() { return std::exchange(diagnostics_, {}); }
    std::vector<Frame> take_frames() { return std::exchange(frames_, {}); }
    const std::vector<FramingError>& errors() const { return errors_; }
    bool idle() const { return state_ == State::expect_header && partial_fill_ == 0 && pending_.empty(); }

private:
    enum class State { expect_header, expect_payload, expect_footer };

    void decode_header(const Word& w) {
        if (w[13] != 0 || w[14] != 0 || w[15] != 0) {
            fail("reserved header bits set");
            return;
        }
        current_ = Frame{};
        current_.payload_bytes = detail::get_u32(w, 0);
        current_.dst = detail::get_u32(w, 4);
        current_.message_id = detail::get_u32(w, 8);
        current_.piggyback = w[12];
        payload_words_left_ = current_.payload_words();
        state_ = payload_words_left_ > 0 ? State::expect_payload : State::expect_footer;
    }

    void decode_footer(const Word& w) {
        if (detail::get_u64(w, 8) != kEndMarker) {
            fail("bad end marker");
            return;
        }
        if (w[5] != 0) {
            fail("CRC check failed");
            return;
        }
        current_.frame_seq = detail::get_u32(w, 0);
        current_.last = (w[4] & 1) != 0;
        current_.control = (w[4] & 2) != 0;
        state_ = State::expect_header;
        deliver(current_);
    }

    void deliver(Frame& f) {
        if (f.piggyback != 0) diagnostics_.push_back(Diagnostic{f.piggyback, f.control});
        frames_.push_back(f);
        if (f.control) return;
        DeframedMessage& m = pending_[f.message_id];
        m.dst = f.dst;
        m.message_id = f.message_id;
        m.bytes.insert(m.bytes.end(), f.payload.begin(), f.payload.end());
        m.piggybacks.push_back(f.piggyback);
        if (f.last) {
            messages_.push_back(std::move(m));
            pending_.erase(f.message_id);
        }
    }

    void fail(std::string reason) {
        errors_.push_back(FramingError{word_offset_, std::move(reason)});
        state_ = State::expect_header; // resync at the next header/idle word
    }

    FramingParams params_;
    State state_ = State::expect_header;
    Frame current_;
    int payload_words_left_ = 0;
    std::size_t word_offset_ = 0;
    std::array<std::uint8_t, kWordBytes> partial_{};
    int partial_fill_ = 0;
    std::vector<DeframedMessage> messages_;
    std::vector<Diagnostic> diagnostics_;
    std::vector<Frame> frames_;
    std::vector<FramingError> errors_;
    std::map<std::uint32_t, DeframedMessage> pending_;
};

// One-shot codec helper for tests and tools.
inline std::vector<DeframedMessage> deframe(std::span<const std::uint8_t> bytes, const FramingParams& params = {}) {
    Deframer d(params);
    d.push(bytes);
    return d.take_messages();
}

} // namespace apesim
