#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tasksynth {

// Ordered JSON keeps insertion order, which is what makes line-delimited
// exports byte-stable across runs.
using json = nlohmann::ordered_json;

enum class Domain { Financial, Medical, Academic, Biological, General };
enum class Primitive { Retrieval, Processing };

std::string to_string(Domain d);
std::string to_string(Primitive p);
Domain domain_from_string(const std::string& s);
Primitive primitive_from_string(const std::string& s);

/// Base error for the whole library; `kind` is a stable machine-readable tag
/// (e.g. "DuplicateName", "ParseError") and what() carries the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// ---- deterministic RNG helpers ----
// A self-contained splitmix64 generator so sampling is bit-identical across
// standard library implementations.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t bounded(std::uint64_t n);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Derives an independent stream for (seed, index), e.g. one per cycle.
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index);

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(v[i - 1], v[j]);
  }
}

// ---- string helpers ----

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
/// Collapse runs of whitespace to single spaces, trim, casefold.
std::string normalize_answer(std::string_view s);
std::uint64_t fnv1a(std::string_view s);

}  // namespace tasksynth
