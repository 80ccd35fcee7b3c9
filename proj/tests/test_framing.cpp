#include <apesim/framing.hpp>
#include <apesim/rng.hpp>

#include <catch2/catch.hpp>

#include <cstdio>
#include <fstream>
#include <vector>

using namespace apesim;

namespace {

std::vector<std::uint8_t> random_bytes(RngStream& rng, std::size_t n) {
    std::vector<std::uint8_t> v(n);
    for (auto& b : v) b = static_cast<std::uint8_t>(rng.next_below(256));
    return v;
}

std::vector<std::uint8_t> encode_all(const std::vector<Frame>& frames) {
    std::vector<std::uint8_t> bytes;
    for (const Frame& f : frames) {
        const auto fb = f.encode_bytes();
        bytes.insert(bytes.end(), fb.begin(), fb.end());
    }
    return bytes;
}

} // namespace

TEST_CASE("empty message still produces one frame with length zero") {
    const FramingParams params{};
    const auto frames = frame_message(3, 77, {}, params);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].payload_bytes == 0);
    CHECK(frames[0].last);
    CHECK(frames[0].total_words(params) == 2);

    const auto msgs = deframe(encode_all(frames), params);
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].bytes.empty());
    CHECK(msgs[0].message_id == 77);
}

TEST_CASE("a 16-byte message is one frame of three words") {
    const FramingParams params{};
    std::vector<std::uint8_t> msg(16, 0xab);
    const auto frames = frame_message(1, 1, msg, params);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].total_words(params) == 3);
}

TEST_CASE("an 8 KiB message splits into two frames with counted overhead") {
    const FramingParams params{};
    RngStream rng = make_stream(1, "framing8k");
    const auto msg = random_bytes(rng, 8192);
    const auto frames = frame_message(2, 9, msg, params);
    REQUIRE(frames.size() == 2);
    int total_words = 0;
    for (const Frame& f : frames) total_words += f.total_words(params);
    CHECK(total_words == 512 + 2 * params.overhead_words());
    CHECK(frames[0].frame_seq == 0);
    CHECK(frames[1].frame_seq == 1);
    CHECK_FALSE(frames[0].last);
    CHECK(frames[1].last);

    const auto msgs = deframe(encode_all(frames), params);
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0].bytes == msg);
}

TEST_CASE("deframe(frame(m)) == m for lengths 0..1024") {
    const FramingParams params{};
    RngStream rng = make_stream(2, "roundtrip");
    for (std::size_t len = 0; len <= 1024; ++len) {
        const auto msg = random_bytes(rng, len);
        const auto msgs = deframe(encode_all(frame_message(0, static_cast<std::uint32_t>(len), msg, params)), params);
        REQUIRE(msgs.size() == 1);
        REQUIRE(msgs[0].bytes == msg);
    }
}

TEST_CASE("idle stuffing between frames is transparent") {
    const FramingParams params{};
    RngStream rng = make_stream(3, "idle");
    const auto m1 = random_bytes(rng, 100);
    const auto m2 = random_bytes(rng, 5000);
    std::vector<Word> words;
    for (int i = 0; i < 4; ++i) words.push_back(idle_word());
    for (const Frame& f : frame_message(0, 1, m1, params)) f.encode(words);
    for (int i = 0; i < 3; ++i) words.push_back(idle_word());
    for (const Frame& f : frame_message(0, 2, m2, params)) f.encode(words);
    words.push_back(idle_word());

    Deframer d(params);
    for (const Word& w : words) d.push_word(w);
    const auto msgs = d.take_messages();
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].bytes == m1);
    CHECK(msgs[1].bytes == m2);
    CHECK(d.errors().empty());
}

TEST_CASE("random corpus with random read split points reconstructs exactly") {
    const FramingParams params{};
    RngStream rng = make_stream(4, "corpus");
    std::vector<std::vector<std::uint8_t>> originals;
    std::vector<std::uint8_t> stream;
    const int n_messages = 10000;
    for (int i = 0; i < n_messages; ++i) {
        const std::size_t len = rng.next_below(600);
        originals.push_back(random_bytes(rng, len));
        const auto bytes = encode_all(frame_message(0, static_cast<std::uint32_t>(i), originals.back(), params));
        stream.insert(stream.end(), bytes.begin(), bytes.end());
        if (rng.next_below(4) == 0) {
            const Word w = idle_word();
            stream.insert(stream.end(), w.begin(), w.end());
        }
    }

    Deframer d(params);
    std::size_t offset = 0;
    while (offset < stream.size()) {
        const std::size_t n = std::min<std::size_t>(1 + rng.next_below(97), stream.size() - offset);
        d.push(std::span<const std::uint8_t>(stream.data() + offset, n));
        offset += n;
    }
    const auto msgs = d.take_messages();
    REQUIRE(msgs.size() == originals.size());
    for (int i = 0; i < n_messages; ++i) {
        REQUIRE(msgs[static_cast<std::size_t>(i)].message_id == static_cast<std::uint32_t>(i));
        REQUIRE(msgs[static_cast<std::size_t>(i)].bytes == originals[static_cast<std::size_t>(i)]);
    }
    CHECK(d.errors().empty());
}

TEST_CASE("piggyback diagnostics surface to the monitor layer") {
    const FramingParams params{};
    std::vector<std::uint8_t> msg(32, 1);
    auto frames = frame_message(0, 5, msg, params, /*piggyback=*/2);
    auto control = make_control_frame(0, 2);
    std::vector<Word> words;
    frames[0].encode(words);
    control.encode(words);

    Deframer d(params);
    for (const Word& w : words) d.push_word(w);
    const auto diags = d.take_diagnostics();
    REQUIRE(diags.size() == 2);
    CHECK_FALSE(diags[0].from_control_frame);
    CHECK(diags[1].from_control_frame);
    CHECK(d.take_messages().size() == 1); // the control frame carries no message
}

TEST_CASE("corrupted footers are reported with their word offset and the stream resyncs") {
    const FramingParams params{};
    std::vector<std::uint8_t> msg(16, 7);
    auto frames = frame_message(0, 1, msg, params);
    std::vector<Word> words;
    frames[0].encode(words);
    words[2][8] = 0; // break the end marker of the footer (word offset 2)

    auto good = frame_message(0, 2, msg, params);
    good[0].encode(words);

    Deframer d(params);
    for (const Word& w : words) d.push_word(w);
    REQUIRE(d.errors().size() == 1);
    CHECK(d.errors()[0].word_offset == 2);
    const auto msgs = d.take_messages();
    REQUIRE(msgs.size() == 1); // the later frame still decodes
    CHECK(msgs[0].message_id == 2);
}

TEST_CASE("injected CRC flag is a detected corruption") {
    const FramingParams params{};
    std::vector<std::uint8_t> msg(16, 9);
    auto frames = frame_message(0, 1, msg, params);
    frames[0].crc_state = 1;
    std::vector<Word> words;
    frames[0].encode(words);
    Deframer d(params);
    for (const Word& w : words) d.push_word(w);
    REQUIRE(d.errors().size() == 1);
    CHECK(d.errors()[0].reason == "CRC check failed");
}

TEST_CASE("wire layout matches the golden fixture") {
    const FramingParams params{};
    // Fixed little-endian layout: length, destination, message id, piggyback.
    std::vector<std::uint8_t> payload = {0xde, 0xad, 0xbe, 0xef, 0x00, 0x11, 0x22, 0x33,
                                         0x44, 0x55, 0x66, 0x77, 0x88, 0x99, 0xaa, 0xbb, 0xcc};
    auto frames = frame_message(258, 0x01020304, payload, params, 0x2a);
    REQUIRE(frames.size() == 1);
    const auto bytes = frames[0].encode_bytes();

    const Word header = [&] {
        Word w{};
        std::copy_n(bytes.begin(), kWordBytes, w.begin());
        return w;
    }();
    CHECK(detail::get_u32(header, 0) == 17);         // payload byte length
    CHECK(detail::get_u32(header, 4) == 258);        // destination node
    CHECK(detail::get_u32(header, 8) == 0x01020304); // message id
    CHECK(header[12] == 0x2a);                       // piggyback byte
    CHECK(header[13] == 0);
    CHECK(header[14] == 0);
    CHECK(header[15] == 0);

    const std::string path = std::string(APESIM_TEST_DATA_DIR) + "/frame_golden.bin";
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::vector<std::uint8_t> golden((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(bytes == golden);
}
