#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sharpcq/relational.hpp"

namespace sharpcq {

struct CorpusInstance {
  std::string id;
  Query query;
  Database db;
};

struct CorpusShape {
  std::size_t max_atoms = 8;
  std::size_t max_vars = 10;
  std::size_t max_arity = 3;
  std::size_t max_domain = 6;
  std::size_t min_tuples = 30;
  std::size_t max_tuples = 60;  // capped by domain^arity
};

// Deterministic for a given seed on every platform: draws are taken modulo
// from a raw mt19937_64 stream, never through distribution objects.
std::vector<CorpusInstance> generate_corpus(std::uint64_t seed, std::size_t n, const CorpusShape& shape = {});

// Writes <id>.cq and <id>.facts per instance.
void write_corpus(const std::vector<CorpusInstance>& corpus, const std::filesystem::path& dir);

}  // namespace sharpcq
