#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tiersim {

enum class TierId : int { Fast = 0, Slow = 1 };

inline const char* tier_name(TierId t) { return t == TierId::Fast ? "fast" : "slow"; }
inline TierId other_tier(TierId t) { return t == TierId::Fast ? TierId::Slow : TierId::Fast; }

template <typename T>
struct PerTier {
    T fast{};
    T slow{};

    T& operator[](TierId t) { return t == TierId::Fast ? fast : slow; }
    const T& operator[](TierId t) const { return t == TierId::Fast ? fast : slow; }
};

// Bytes offered to / serviced by a tier, split by access kind.
struct Traffic {
    std::uint64_t read_bytes = 0;
    std::uint64_t write_bytes = 0;

    std::uint64_t total() const { return read_bytes + write_bytes; }
    Traffic& operator+=(const Traffic& o) {
        read_bytes += o.read_bytes;
        write_bytes += o.write_bytes;
        return *this;
    }
};

using Pid = std::uint32_t;
using VPage = std::uint64_t;  // virtual page number
using PageId = std::uint64_t; // (pid, vpage) packed, canonical order == numeric order

inline constexpr int kVPageBits = 40;
inline constexpr std::uint64_t kVPageMask = (std::uint64_t(1) << kVPageBits) - 1;

inline PageId make_page_id(Pid pid, VPage vpage) {
    return (std::uint64_t(pid) << kVPageBits) | (vpage & kVPageMask);
}
inline Pid page_pid(PageId id) { return Pid(id >> kVPageBits); }
inline VPage page_vpage(PageId id) { return id & kVPageMask; }

inline constexpr std::uint64_t kPageBytes = 4096;
inline constexpr std::uint64_t kLineBytes = 64;
inline constexpr std::uint32_t kLinesPerPage = std::uint32_t(kPageBytes / kLineBytes);
inline constexpr double kMB = 1048576.0; // 1 MB/s == 2^20 bytes/s throughout

// Simulated time in milliseconds.
using SimMs = double;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};
struct RunError : std::runtime_error {
    explicit RunError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace tiersim
