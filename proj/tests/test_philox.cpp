#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "rwre/philox.hpp"

using namespace rwre;

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("step thresholds") {
  CHECK(step_threshold(1.0) == 0xFFFFFFFFu);
  CHECK(step_threshold(0.5) == 0x7FFFFFFFu);
  // exactly p * 2^32 words satisfy u <= threshold
  CHECK(static_cast<uint64_t>(step_threshold(0.25)) + 1 == (uint64_t{1} << 30));
  CHECK(step_threshold(1e-12) == 0u);
}

TEST_CASE("uniform conversions stay in range") {
  CHECK(unit_closed_open(0, 0) == 0.0);
  CHECK(unit_closed_open(0xffffffffu, 0xffffffffu) < 1.0);
  CHECK(unit_open_closed(0, 0) > 0.0);
  CHECK(unit_open_closed(0xffffffffu, 0xffffffffu) == 1.0);
}

TEST_CASE("derived seeds differ across indices") {
  std::set<uint64_t> seen;
  for (uint64_t a = 0; a < 50; ++a)
    for (uint64_t b = 0; b < 50; ++b) seen.insert(derive_seed(42, a, b));
  CHECK(seen.size() == 2500);
}

TEST_CASE("CounterRng below is in range and roughly uniform") {
  CounterRng rng(5, Stream::Aux);
  int counts[7] = {};
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}
