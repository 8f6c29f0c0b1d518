#include "tasksynth/resource_pools.hpp"

#include <fstream>
#include <map>

namespace tasksynth {

namespace {

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ParseError", "cannot open '" + path + "'");
  std::vector<json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw Error("ParseError", path + ":" + std::to_string(lineno) + ": invalid JSON");
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace

SeedPool SeedPool::from_records(const std::vector<SeedConcept>& records) {
  SeedPool pool;
  std::map<std::string, std::size_t> by_text;
  for (const auto& r : records) {
    if (r.text.empty()) throw Error("ParseError", "seed with empty text");
    auto it = by_text.find(r.text);
    if (it != by_text.end()) {
      pool.seeds_[it->second].count += 1;
    } else {
      by_text[r.text] = pool.seeds_.size();
      pool.seeds_.push_back(r);
    }
  }
  if (pool.seeds_.empty()) throw Error("EmptyPool", "seed pool is empty");
  return pool;
}

SeedPool SeedPool::load(const std::string& path) {
  std::vector<SeedConcept> records;
  int lineno = 0;
  for (const auto& j : read_jsonl(path)) {
    ++lineno;
    SeedConcept s;
    try {
      s.text = j.at("text").get<std::string>();
      s.domain = domain_from_string(j.at("domain").get<std::string>());
      s.source = j.value("source", "");
    } catch (const nlohmann::json::exception& e) {
      throw Error("ParseError", path + " record " + std::to_string(lineno) + ": " + e.what());
    }
    if (s.text.empty())
      throw Error("ParseError", path + " record " + std::to_string(lineno) + ": blank seed text");
    records.push_back(std::move(s));
  }
  if (records.empty()) throw Error("EmptyPool", path + " holds no seeds");
  return from_records(records);
}

std::map<Domain, std::size_t> SeedPool::domain_counts() const {
  std::map<Domain, std::size_t> out;
  for (const auto& s : seeds_) out[s.domain] += 1;
  return out;
}

const SeedConcept& SeedPool::draw(Rng& rng) const {
  return seeds_[static_cast<std::size_t>(rng.bounded(seeds_.size()))];
}

ExemplarPool ExemplarPool::from_records(const std::vector<Exemplar>& records) {
  ExemplarPool pool;
  std::map<std::string, std::size_t> by_text;
  for (const auto& r : records) {
    if (r.query_text.empty()) throw Error("ParseError", "exemplar with empty query_text");
    auto it = by_text.find(r.query_text);
    if (it != by_text.end()) {
      pool.exemplars_[it->second].count += 1;
    } else {
      by_text[r.query_text] = pool.exemplars_.size();
      pool.exemplars_.push_back(r);
    }
  }
  if (pool.exemplars_.empty()) throw Error("EmptyPool", "exemplar pool is empty");
  return pool;
}

ExemplarPool ExemplarPool::load(const std::string& path) {
  std::vector<Exemplar> records;
  int lineno = 0;
  for (const auto& j : read_jsonl(path)) {
    ++lineno;
    Exemplar e;
    try {
      e.query_text = j.at("query_text").get<std::string>();
      e.source_benchmark = j.value("source_benchmark", "");
    } catch (const nlohmann::json::exception& ex) {
      throw Error("ParseError", path + " record " + std::to_string(lineno) + ": " + ex.what());
    }
    if (e.query_text.empty())
      throw Error("ParseError",
                  path + " record " + std::to_string(lineno) + ": blank exemplar query");
    records.push_back(std::move(e));
  }
  if (records.empty()) throw Error("EmptyPool", path + " holds no exemplars");
  return from_records(records);
}

std::vector<Exemplar> ExemplarPool::draw(std::size_t n, Rng& rng) const {
  if (n > exemplars_.size())
    throw Error("EmptyPool", "cannot draw " + std::to_string(n) + " exemplars from a pool of " +
                                 std::to_string(exemplars_.size()));
  std::vector<std::size_t> idx(exemplars_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.bounded(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<Exemplar> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(exemplars_[idx[i]]);
  return out;
}

SynthesisConfig sample_config(const SeedPool& seeds, const ExemplarPool& exemplars,
                              const Registry& registry, const SamplingBounds& bounds,
                              Rng& rng) {
  if (seeds.size() == 0 || exemplars.size() == 0)
    throw Error("EmptyPool", "pools must be non-empty");
  SynthesisConfig cfg;
  cfg.seed = seeds.draw(rng);
  cfg.toolset = sample_toolset(registry, cfg.seed.domain, bounds.toolset_lo,
                               bounds.toolset_hi, rng);
  std::size_t e_hi = std::min(bounds.exemplars_hi, exemplars.size());
  std::size_t e_lo = std::min(bounds.exemplars_lo, e_hi);
  std::size_t n = e_lo + static_cast<std::size_t>(rng.bounded(e_hi - e_lo + 1));
  cfg.exemplars = exemplars.draw(n, rng);
  return cfg;
}

}  // namespace tasksynth
