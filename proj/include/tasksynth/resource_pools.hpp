#pragma once

#include <map>
#include <string>
#include <vector>

#include "tasksynth/common.hpp"
#include "tasksynth/tool_registry.hpp"

namespace tasksynth {

struct SeedConcept {
  std::string text;
  Domain domain = Domain::General;
  std::string source;
  int count = 1;  // duplicate occurrences seen at load time
};

struct Exemplar {
  std::string query_text;
  std::string source_benchmark;
  int count = 1;  // duplicate occurrences seen at load time
};

/// Immutable after load; indexable by domain.
class SeedPool {
 public:
  static SeedPool load(const std::string& path);
  static SeedPool from_records(const std::vector<SeedConcept>& records);

  std::size_t size() const { return seeds_.size(); }
  const std::vector<SeedConcept>& seeds() const { return seeds_; }
  std::map<Domain, std::size_t> domain_counts() const;
  const SeedConcept& draw(Rng& rng) const;

 private:
  std::vector<SeedConcept> seeds_;
};

class ExemplarPool {
 public:
  static ExemplarPool load(const std::string& path);
  static ExemplarPool from_records(const std::vector<Exemplar>& records);

  std::size_t size() const { return exemplars_.size(); }
  const std::vector<Exemplar>& exemplars() const { return exemplars_; }
  /// `n` distinct exemplars drawn uniformly without replacement.
  std::vector<Exemplar> draw(std::size_t n, Rng& rng) const;

 private:
  std::vector<Exemplar> exemplars_;
};

struct SamplingBounds {
  std::size_t toolset_lo = 15;
  std::size_t toolset_hi = 50;
  std::size_t exemplars_lo = 3;
  std::size_t exemplars_hi = 5;
};

struct SynthesisConfig {
  SeedConcept seed;
  std::vector<std::string> toolset;  // ordered; order is part of the value
  std::vector<Exemplar> exemplars;
  std::uint64_t rng_seed = 0;
  std::string cycle_id;
};

/// Sampling order is fixed (seed, toolset, exemplars) so the three pools stay
/// decoupled under a shared rng stream.
SynthesisConfig sample_config(const SeedPool& seeds, const ExemplarPool& exemplars,
                              const Registry& registry, const SamplingBounds& bounds,
                              Rng& rng);

}  // namespace tasksynth
