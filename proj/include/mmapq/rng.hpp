#pragma once

#include <cstdint>
#include <random>

namespace mmapq {

// splitmix64 step; used to derive independent child streams from one root
// seed so that replication r, stream s always sees the same sequence
// regardless of thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Child stream id (root, replication, stream) -> mt19937_64. Streams are
// separated so service, arrival-resource and departure-resource draws come
// from distinct generators.
class RngStream {
  public:
    RngStream(std::uint64_t root, std::uint64_t replication, std::uint64_t stream) {
        std::uint64_t s = root;
        splitmix64(s);
        s ^= 0x6a09e667f3bcc909ULL * (replication + 1);
        splitmix64(s);
        s ^= 0xbb67ae8584caa73bULL * (stream + 1);
        gen_.seed(splitmix64(s));
    }

    // uniform in (0, 1]; never returns 0 so -log(u) is finite
    double uniform() {
        const std::uint64_t bits = gen_() >> 11;  // 53 bits
        return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace mmapq
