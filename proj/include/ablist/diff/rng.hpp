#pragma once

#include <cstdint>
#include <initializer_list>

namespace ablist::diff {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream seed for (base, tags...). Every random consumer in the
/// pipeline derives its seed this way from the single run seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = mix64(base);
    for (auto t : tags) s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
    return s;
}

} // namespace ablist::diff
