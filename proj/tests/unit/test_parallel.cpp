#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdswitch/parallel.hpp"

using namespace qdswitch;

TEST_CASE("every index runs exactly once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) CHECK(h.load() == 1);
  parallel_for(0, [](std::size_t) { FAIL("body must not run"); });
}

TEST_CASE("slot results do not depend on the worker count") {
  auto run = [] {
    std::vector<double> out(257);
    parallel_for(out.size(), [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += 1.0 / (1.0 + k);
      out[i] = s;
    });
    return out;
  };
  setenv("QDSWITCH_WORKERS", "1", 1);
  CHECK(worker_count() == 1);
  const auto serial = run();
  setenv("QDSWITCH_WORKERS", "7", 1);
  CHECK(worker_count() == 7);
  const auto threaded = run();
  CHECK(serial == threaded);
  setenv("QDSWITCH_WORKERS", "zero", 1);
  CHECK(worker_count() >= 1);
  unsetenv("QDSWITCH_WORKERS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("the lowest failing index is rethrown") {
  setenv("QDSWITCH_WORKERS", "4", 1);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60 || i == 93) throw std::runtime_error("index " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "index 17");
  }
  unsetenv("QDSWITCH_WORKERS");
}
