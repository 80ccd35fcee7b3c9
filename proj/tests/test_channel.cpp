#include <apesim/channel.hpp>
#include <apesim/experiments.hpp>

#include <catch2/catch.hpp>

#include <vector>

using namespace apesim;

namespace {

Frame max_frame(const FramingParams& params, std::uint32_t id) {
    Frame f;
    f.payload_bytes = static_cast<std::uint32_t>(params.max_payload_words * kWordBytes);
    f.dst = 1;
    f.message_id = id;
    return f;
}

} // namespace

TEST_CASE("serialization time is physical bits over the data rate") {
    Engine eng;
    const LinkProfile link = link_preset("apelink-operational");
    Channel ch(eng, "ch", 0, 1, Direction::xp, link, FramingParams{}, SimTime{600});
    // 3 words = 48 bytes at the 2.8 GB/s data layer: ~17.1 ns.
    const Ratio ser = ch.serialization_exact(3);
    CHECK(ser == Ratio(120, 7));
    CHECK(ser.to_double() == Approx(48.0 / 2.8e9 * 1e9).epsilon(1e-12));
}

TEST_CASE("frames wait for credits and depart after a credit return") {
    Engine eng;
    FramingParams params{};
    params.buffer_bytes = params.max_frame_words() * kWordBytes; // room for exactly one frame
    Channel ch(eng, "ch", 0, 1, Direction::xp, link_preset("apelink-operational"), params, SimTime{600});

    std::vector<SimTime> arrivals;
    ch.set_delivery([&](Frame&&, SimTime at) { arrivals.push_back(at); });

    ch.submit(max_frame(params, 1));
    ch.submit(max_frame(params, 2));
    eng.run_until(SimTime::from_us(50));
    CHECK(ch.departed_frames() == 1); // zero credits left, second frame queued
    CHECK(ch.credits() == 0);
    REQUIRE(arrivals.size() == 1);

    ch.on_receiver_drained(params.max_frame_words());
    eng.run_until(SimTime::from_us(100));
    CHECK(ch.departed_frames() == 2);
    REQUIRE(arrivals.size() == 2);
    CHECK(arrivals[1] > arrivals[0]);
}

TEST_CASE("FIFO order and word conservation") {
    Engine eng;
    const FramingParams params{};
    Channel ch(eng, "ch", 0, 1, Direction::xp, link_preset("apelink-operational"), params, SimTime{600});
    std::vector<std::uint32_t> ids;
    ch.set_delivery([&](Frame&& f, SimTime) {
        ids.push_back(f.message_id);
        ch.on_receiver_drained(f.total_words(params));
    });
    for (std::uint32_t i = 0; i < 40; ++i) ch.submit(max_frame(params, i));
    eng.run_all();
    REQUIRE(ids.size() == 40);
    for (std::uint32_t i = 0; i < 40; ++i) CHECK(ids[i] == i);
    CHECK(ch.departed_words() == ch.arrived_words());
    CHECK(ch.credits() == params.buffer_words());
    CHECK(ch.dropped_frames() == 0);
}

TEST_CASE("buffer occupancy never exceeds the 40 KB channel buffer") {
    Engine eng;
    const FramingParams params{};
    Channel ch(eng, "ch", 0, 1, Direction::xp, link_preset("apelink-operational"), params, SimTime{600});
    std::int64_t occupancy_words = 0;
    std::vector<Frame> held;
    ch.set_delivery([&](Frame&& f, SimTime) {
        occupancy_words += f.total_words(params);
        REQUIRE(occupancy_words * kWordBytes <= params.buffer_bytes);
        held.push_back(std::move(f)); // receiver drains nothing: the sender must stall
    });
    for (std::uint32_t i = 0; i < 64; ++i) ch.submit(max_frame(params, i));
    eng.run_until(SimTime::from_ms(1));
    // 2560 words of credit hold nine 258-word frames.
    CHECK(held.size() == 9);
    CHECK(ch.credits() < params.max_frame_words());
}

TEST_CASE("a saturated channel converges on the modeled goodput") {
    const double measured = measure_channel_saturation(link_preset("apelink-operational"), FramingParams{},
                                                       SimTime{600}, SimTime::from_ms(1));
    const double expected = goodput_bytes_per_s(link_preset("apelink-operational"), FramingParams{});
    CHECK(measured == Approx(expected).epsilon(0.01));
}

TEST_CASE("control frames ride the idle words: data timing is untouched") {
    const FramingParams params{};
    const auto run = [&](bool with_control) {
        Engine eng;
        Channel ch(eng, "ch", 0, 1, Direction::xp, link_preset("apelink-operational"), params, SimTime{600});
        std::vector<SimTime> data_arrivals;
        ch.set_delivery([&](Frame&& f, SimTime at) {
            if (!f.control) {
                data_arrivals.push_back(at);
                ch.on_receiver_drained(f.total_words(params));
            }
        });
        for (std::uint32_t i = 0; i < 20; ++i) {
            ch.submit(max_frame(params, i));
            if (with_control) ch.send_control(kDiagOk);
        }
        if (with_control) ch.send_control(kDiagOk);
        eng.run_all();
        return data_arrivals;
    };
    CHECK(run(false) == run(true));
}

TEST_CASE("killed channels drop queued frames and in-flight arrivals") {
    Engine eng;
    const FramingParams params{};
    Channel ch(eng, "ch", 0, 1, Direction::xp, link_preset("apelink-operational"), params, SimTime{600});
    int delivered = 0;
    ch.set_delivery([&](Frame&&, SimTime) { ++delivered; });
    for (std::uint32_t i = 0; i < 4; ++i) ch.submit(max_frame(params, i));
    // First frame is on the wire; the rest sit in the queue.
    ch.kill();
    eng.run_all();
    CHECK(delivered == 0);
    CHECK(ch.dropped_frames() == 4);
    ch.submit(max_frame(params, 9));
    CHECK(ch.dropped_frames() == 5);
}
