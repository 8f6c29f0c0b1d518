#include "tasksynth/common.hpp"

#include <algorithm>
#include <cctype>

namespace tasksynth {

std::string to_string(Domain d) {
  switch (d) {
    case Domain::Financial: return "Financial";
    case Domain::Medical: return "Medical";
    case Domain::Academic: return "Academic";
    case Domain::Biological: return "Biological";
    case Domain::General: return "General";
  }
  return "General";
}

std::string to_string(Primitive p) {
  return p == Primitive::Retrieval ? "Retrieval" : "Processing";
}

Domain domain_from_string(const std::string& s) {
  if (s == "Financial") return Domain::Financial;
  if (s == "Medical") return Domain::Medical;
  if (s == "Academic") return Domain::Academic;
  if (s == "Biological") return Domain::Biological;
  if (s == "General") return Domain::General;
  throw Error("ParseError", "unknown domain '" + s + "'");
}

Primitive primitive_from_string(const std::string& s) {
  if (s == "Retrieval") return Primitive::Retrieval;
  if (s == "Processing") return Primitive::Processing;
  throw Error("ParseError", "unknown primitive '" + s + "'");
}

std::uint64_t Rng::bounded(std::uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t r = next();
    if (r >= threshold) return r % n;
  }
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) {
  Rng mix(global_seed ^ (0xa0761d6478bd642fULL * (index + 1)));
  mix.next();
  return mix.next();
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string normalize_answer(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace tasksynth
