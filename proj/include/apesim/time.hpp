#pragma once

#include <cstdint>
#include <string>

namespace apesim {

// Simulated time as an integer nanosecond count. All configuration quantities
// (us latencies, ms watchdog periods, GB/s rates) convert exactly to this unit
// at load time so event ordering never depends on float rounding.
struct SimTime {
    std::int64_t ns = 0;

    constexpr SimTime() = default;
    constexpr explicit SimTime(std::int64_t v) : ns(v) {}

    static constexpr SimTime zero() { return SimTime{0}; }
    static constexpr SimTime from_us(std::int64_t us) { return SimTime{us * 1000}; }
    static constexpr SimTime from_ms(std::int64_t ms) { return SimTime{ms * 1000000}; }
    static constexpr SimTime from_s(std::int64_t s) { return SimTime{s * 1000000000}; }

    double to_us() const { return static_cast<double>(ns) / 1e3; }
    double to_ms() const { return static_cast<double>(ns) / 1e6; }
    double to_s() const { return static_cast<double>(ns) / 1e9; }

    std::string str() const { return std::to_string(ns) + "ns"; }

    constexpr bool operator==(const SimTime&) const = default;
    constexpr auto operator<=>(const SimTime&) const = default;
};

constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ns + b.ns}; }
constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.ns - b.ns}; }
constexpr SimTime operator*(SimTime a, std::int64_t k) { return SimTime{a.ns * k}; }
constexpr SimTime operator*(std::int64_t k, SimTime a) { return SimTime{a.ns * k}; }

} // namespace apesim
