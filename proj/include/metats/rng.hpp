#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace metats {

/// Philox4x64-10 block function (Salmon et al., SC'11).
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

/// Stream purposes. Distinct lanes of the same (seed, run, task) are
/// independent streams; agent lanes are derived from the agent label.
enum class Lane : std::uint64_t {
    kGeneral = 0,
    kEnvironmentPrior = 1,
    kEnvironmentInstance = 2,
    kRewardNoise = 3,
};

/// Counter-based random stream keyed by (master_seed, lane) with the counter
/// block laid out as (block, run_id, task_id, 0). Output for any key depends
/// only on the key and the number of words drawn so far, so streams can be
/// created and consumed on any thread in any order.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream() = default;
    RngStream(std::uint64_t master_seed, std::uint64_t run_id, std::uint64_t task_id,
              std::uint64_t lane = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();

    std::uint64_t master_seed() const { return key_[0]; }
    std::uint64_t lane() const { return key_[1]; }
    std::uint64_t run_id() const { return run_id_; }
    std::uint64_t task_id() const { return task_id_; }
    /// Number of 64-bit words consumed so far.
    std::uint64_t counter() const { return counter_; }

    friend bool operator==(const RngStream& a, const RngStream& b) {
        return a.key_ == b.key_ && a.run_id_ == b.run_id_ && a.task_id_ == b.task_id_ &&
               a.counter_ == b.counter_;
    }

private:
    std::array<std::uint64_t, 2> key_{};
    std::uint64_t run_id_ = 0;
    std::uint64_t task_id_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 4> block_{};
};

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t run_id, std::uint64_t task_id,
                        Lane lane = Lane::kGeneral);
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t run_id, std::uint64_t task_id,
                        std::uint64_t lane);

/// Lane for an agent, from a 64-bit FNV-1a hash of its label with the top bit
/// set so it never collides with the reserved environment lanes.
std::uint64_t agent_lane(const char* label);

}  // namespace metats
