#include <doctest.h>

#include <set>
#include <stdexcept>

#include "dackrr/parallel.hpp"
#include "dackrr/random.hpp"

using namespace dackrr;

TEST_CASE("derived seeds differ across components") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t n : {256u, 512u})
    for (std::uint64_t m : {1u, 2u})
      for (std::uint64_t t = 0; t < 20; ++t) seen.insert(derive_seed({1, n, m, t}));
  CHECK(seen.size() == 80);
  CHECK(derive_seed({1, 2}) != derive_seed({2, 1}));
  CHECK(derive_seed({5, 6, 7}) == derive_seed({5, 6, 7}));
}

TEST_CASE("counter generator") {
  CounterRng a(9), b(9), c(10);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    CHECK(u == b.uniform01());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a() != c());
  double sum = 0.0;
  CounterRng d(1);
  for (int i = 0; i < 100000; ++i) sum += d.uniform01();
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("parallel_for covers every index and rethrows the first failure") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);

  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "17");
  }
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}
