#include <apesim/link.hpp>
#include <apesim/rng.hpp>

#include <catch2/catch.hpp>

using namespace apesim;

TEST_CASE("exact rational arithmetic") {
    CHECK(Ratio(8, 10) == Ratio(4, 5));
    CHECK((Ratio(1, 3) + Ratio(1, 6)) == Ratio(1, 2));
    CHECK((Ratio(3, 4) * Ratio(2, 3)) == Ratio(1, 2));
    CHECK(Ratio::parse("3456/49") == Ratio(3456, 49));
    CHECK(Ratio::parse("7").to_double() == 7.0);
    CHECK_THROWS(Ratio(1, 0));
}

TEST_CASE("link presets carry the deployed rates") {
    const LinkProfile op = link_preset("apelink-operational");
    CHECK(op.raw_bits_per_s() == Ratio(28000000000)); // 7.0 Gbps x 4 lanes
    CHECK(op.data_bits_per_s() == Ratio(22400000000));

    const LinkProfile mx = link_preset("apelink-max");
    CHECK(mx.raw_bits_per_s() == Ratio(34000000000)); // 8.5 Gbps x 4 lanes

    const LinkProfile s5 = link_preset("stratix5-measured");
    CHECK(s5.raw_bits_per_s() == Ratio(45200000000)); // 11.3 Gbps x 4 lanes
    CHECK(s5.encoding == Ratio(64, 66));

    const LinkProfile tgt = link_preset("stratix5-target");
    CHECK(tgt.raw_bits_per_s() == Ratio(56400000000)); // the 56 Gb/s class link

    CHECK_THROWS_AS(link_preset("no-such-preset"), ConfigError);
}

TEST_CASE("efficiency hits the measured value at full packets") {
    const FramingParams params{};
    // 64 KiB fills max-size packets exactly: the model value is exact.
    CHECK(efficiency_exact(65536, params) == Ratio(98, 125));
    CHECK(efficiency(65536, params) == Approx(0.784).margin(0.002));
    // The default K solves max/(max+K) = 0.784.
    const Ratio k = params.control_overhead_words;
    CHECK(Ratio(256) / (Ratio(256) + k) == Ratio(98, 125));
    CHECK(k.to_double() == Approx(70.53).margin(0.01));
}

TEST_CASE("one payload word against bare header+footer gives 1/3") {
    FramingParams p{};
    p.control_overhead_words = Ratio(2); // no control overhead beyond header+footer
    CHECK(efficiency_exact(16, p) == Ratio(1, 3));
    CHECK(efficiency_exact(1, p) == Ratio(1, 3)); // partial word still occupies one word
}

TEST_CASE("efficiency is monotone and saturates at max/(max+K)") {
    const FramingParams params{};
    RngStream rng = make_stream(11, "efficiency");
    const Ratio asymptote = Ratio(params.max_payload_words) /
                            (Ratio(params.max_payload_words) + params.control_overhead_words);
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t a = 1 + static_cast<std::int64_t>(rng.next_below(1 << 20));
        const std::int64_t b = 1 + static_cast<std::int64_t>(rng.next_below(1 << 20));
        const auto lo = efficiency_exact(std::min(a, b), params);
        const auto hi = efficiency_exact(std::max(a, b), params);
        REQUIRE(lo <= hi);
        REQUIRE(hi <= asymptote);
        REQUIRE(Ratio(0) < lo);
    }
    CHECK(efficiency_exact(16 * 1024 * 1024, params) == asymptote);
}

TEST_CASE("goodput of the operational preset reproduces the measured plateau") {
    const FramingParams params{};
    const double gp = goodput_bytes_per_s(link_preset("apelink-operational"), params);
    CHECK(gp == Approx(2.1952e9).epsilon(1e-9)); // 2.8 GB/s data layer x 0.784
    const double gp_max = goodput_bytes_per_s(link_preset("apelink-max"), params);
    CHECK(gp_max == Approx(2.6656e9).epsilon(1e-9)); // the ~2.6 GB/s sustained figure
}

TEST_CASE("identity limits: with encoding 1 and vanishing overhead goodput approaches the raw rate") {
    LinkProfile p{"ideal", Ratio{10}, 4, Ratio{1}};
    CHECK(p.data_bits_per_s() == p.raw_bits_per_s());
    FramingParams f{};
    f.control_overhead_words = Ratio(2); // bare header+footer
    f.max_payload_words = 1 << 20;
    f.buffer_bytes = (f.max_payload_words + 2) * kWordBytes;
    const double raw_bytes = p.raw_bits_per_s().to_double() / 8;
    CHECK(goodput_bytes_per_s(p, f) == Approx(raw_bytes).epsilon(1e-5));
    CHECK(goodput_bytes_per_s(p, f) < raw_bytes); // overhead never helps
}

TEST_CASE("framing parameter validation") {
    FramingParams p{};
    p.buffer_bytes = 100; // cannot hold one max frame
    CHECK_THROWS_AS(p.validate(), ConfigError);
    FramingParams q{};
    q.control_overhead_words = Ratio(1); // below header+footer
    CHECK_THROWS_AS(q.validate(), ConfigError);
}
