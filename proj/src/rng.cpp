#include "metats/rng.hpp"

namespace metats {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kPhiloxW0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPhiloxW1 = 0xBB67AE8584CAA73BULL;

__extension__ using Uint128 = unsigned __int128;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
    const Uint128 product = static_cast<Uint128>(a) * b;
    lo = static_cast<std::uint64_t>(product);
    hi = static_cast<std::uint64_t>(product >> 64);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                        std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint64_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
        mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t run_id, std::uint64_t task_id,
                     std::uint64_t lane)
    : key_{master_seed, lane}, run_id_(run_id), task_id_(task_id) {}

RngStream::result_type RngStream::operator()() {
    const std::uint64_t word = counter_ & 3U;
    if (word == 0) {
        block_ = philox4x64({counter_ >> 2, run_id_, task_id_, 0}, key_);
    }
    ++counter_;
    return block_[word];
}

double RngStream::uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t run_id, std::uint64_t task_id,
                        Lane lane) {
    return RngStream(master_seed, run_id, task_id, static_cast<std::uint64_t>(lane));
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t run_id, std::uint64_t task_id,
                        std::uint64_t lane) {
    return RngStream(master_seed, run_id, task_id, lane);
}

std::uint64_t agent_lane(const char* label) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (const char* p = label; *p != '\0'; ++p) {
        hash ^= static_cast<unsigned char>(*p);
        hash *= 0x100000001B3ULL;
    }
    return hash | (1ULL << 63);
}

}  // namespace metats
