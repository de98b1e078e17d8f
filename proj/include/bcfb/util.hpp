#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <mutex>
#include <thread>
#include <vector>

namespace bcfb {

// SplitMix64 step. Used to derive independent RNG streams from a master
// seed plus a path of counters; never used as the simulation generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Neumaier compensated summation. Accumulation is associative enough that
// reported results do not depend on chunking at 1e-9 precision; the harness
// additionally reduces in fixed order so outputs are bit-identical.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads and
// returns results indexed by i. Each unit must derive its own RNG stream;
// the output order is fixed, so reductions over it are deterministic.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::future<void>> futures;
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= n) return;
        i = next++;
      }
      out[i] = fn(i);
    }
  };
  unsigned launch = std::min<std::size_t>(workers, n);
  futures.reserve(launch);
  for (unsigned w = 0; w < launch; ++w)
    futures.push_back(std::async(std::launch::async, worker));
  for (auto& f : futures) f.get();
  return out;
}

}  // namespace bcfb
