#pragma once

#include "errors.hpp"
#include "time.hpp"

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>

namespace apesim {

using VAddr = std::uint64_t;
using PAddr = std::uint64_t;

enum class MemKind : std::uint8_t { host = 0, gpu = 1 };

inline const char* to_string(MemKind k) { return k == MemKind::host ? "host" : "gpu"; }

struct TlbConfig {
    int entries = 512;
    int page_bytes = 4096;
    SimTime hit_latency{50};
    SimTime miss_latency{2985}; // embedded-processor path, calibrated to the 1.6x hit/miss bandwidth ratio

    void validate() const {
        if (entries < 1) throw ConfigError("tlb: entries must be >= 1");
        if (page_bytes < 1 || (page_bytes & (page_bytes - 1)) != 0) {
            throw ConfigError("tlb: page size must be a positive power of two");
        }
    }
};

// Authoritative per-node virtual-to-physical map for registered buffers.
// Translation must come from here no matter what the TLB holds; the TLB only
// changes timing.
class PageTable {
public:
    explicit PageTable(int page_bytes = 4096) : page_bytes_(page_bytes) {}

    std::uint64_t page_of(VAddr vaddr) const { return vaddr / static_cast<std::uint64_t>(page_bytes_); }

    void register_region(MemKind kind, VAddr base, std::uint64_t bytes) {
        const std::uint64_t first = page_of(base);
        const std::uint64_t last = page_of(base + (bytes == 0 ? 0 : bytes - 1));
        for (std::uint64_t p = first; p <= last; ++p) {
            auto [it, inserted] = pages_.try_emplace(Key{kind, p}, next_ppage_);
            if (inserted) ++next_ppage_;
        }
    }

    std::optional<PAddr> translate(MemKind kind, VAddr vaddr) const {
        const auto it = pages_.find(Key{kind, page_of(vaddr)});
        if (it == pages_.end()) return std::nullopt;
        return it->second * static_cast<std::uint64_t>(page_bytes_) + vaddr % static_cast<std::uint64_t>(page_bytes_);
    }

    bool registered(MemKind kind, VAddr vaddr) const { return pages_.contains(Key{kind, page_of(vaddr)}); }
    int page_bytes() const { return page_bytes_; }

private:
    struct Key {
        MemKind kind;
        std::uint64_t vpage;
        bool operator<(const Key& o) const {
            if (kind != o.kind) return kind < o.kind;
            return vpage < o.vpage;
        }
    };
    int page_bytes_;
    std::map<Key, std::uint64_t> pages_;
    std::uint64_t next_ppage_ = 0x100000; // arbitrary physical base
};

struct TlbStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
    double hit_rate() const {
        const std::uint64_t total = hits + misses;
        return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
    }
};

// Page-translation cache with LRU replacement. A hit bypasses the slow
// embedded-processor path entirely; a miss pays miss_latency and installs the
// page.
class Tlb {
public:
    explicit Tlb(TlbConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    struct LookupResult {
        bool hit = false;
        PAddr paddr = 0;
        SimTime latency;
    };

    // Translation of a registered page; caller must check registration first
    // (an unregistered page is a protection fault, handled by the NIC).
    LookupResult access(MemKind kind, VAddr vaddr, const PageTable& table) {
        const auto paddr = table.translate(kind, vaddr);
        if (!paddr) throw SimError("tlb: access to unregistered page");
        const Key key{kind, table.page_of(vaddr)};
        const auto it = index_.find(key);
        if (it != index_.end()) {
            ++stats_.hits;
            lru_.splice(lru_.begin(), lru_, it->second);
            return LookupResult{true, *paddr, cfg_.hit_latency};
        }
        ++stats_.misses;
        fill(key);
        return LookupResult{false, *paddr, cfg_.miss_latency};
    }

    bool cached(MemKind kind, std::uint64_t vpage) const { return index_.contains(Key{kind, vpage}); }
    void warm(MemKind kind, VAddr base, std::uint64_t bytes, const PageTable& table) {
        const std::uint64_t first = table.page_of(base);
        const std::uint64_t last = table.page_of(base + (bytes == 0 ? 0 : bytes - 1));
        for (std::uint64_t p = first; p <= last; ++p) fill(Key{kind, p});
    }
    void flush() {
        lru_.clear();
        index_.clear();
    }

    const TlbStats& stats() const { return stats_; }
    void reset_stats() { stats_ = TlbStats{}; }
    int size() const { return static_cast<int>(lru_.size()); }
    const TlbConfig& config() const { return cfg_; }

private:
    struct Key {
        MemKind kind;
        std::uint64_t vpage;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<std::uint64_t>{}(k.vpage * 2 + static_cast<std::uint64_t>(k.kind));
        }
    };

    void fill(const Key& key) {
        if (index_.contains(key)) {
            lru_.splice(lru_.begin(), lru_, index_[key]);
            return;
        }
        if (static_cast<int>(lru_.size()) == cfg_.entries) {
            index_.erase(lru_.back());
            lru_.pop_back();
            ++stats_.evictions;
        }
        lru_.push_front(key);
        index_[key] = lru_.begin();
    }

    TlbConfig cfg_;
    std::list<Key> lru_; // front = most recent
    std::unordered_map<Key, std::list<Key>::iterator, KeyHash> index_;
    TlbStats stats_;
};

} // namespace apesim
