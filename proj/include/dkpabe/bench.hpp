#pragma once

// Operation-count benchmark. Every algorithm is run once over N authorities
// with n attributes each and its counted group operations are compared with
// two predictions: the published cost table and the counts that follow from
// the construction as implemented.

#include <cstdint>
#include <string>
#include <vector>

#include "dkpabe/groups.hpp"
#include "dkpabe/rng.hpp"

namespace dkpabe::bench {

struct Row {
  std::string operation;  // authority_setup, keygen, encrypt, decrypt, ciphertext
  std::string backend;
  std::uint64_t N = 0, n = 0, depth = 0;
  std::string metric;  // multiplications, exponentiations, pairings, source_elements, bytes
  std::uint64_t measured = 0;
  std::uint64_t table = 0;
  std::uint64_t corrected = 0;
  double seconds = 0;  // wall time of the whole operation

  // "match", "deviation" (measured == corrected != table) or "unexpected".
  std::string status() const;
};

struct Config {
  std::uint64_t N = 2;
  std::uint64_t n = 3;
  // Access-tree depth of each key share: depth 1 is AND over the n leaves,
  // each extra level nests the remaining leaves one AND deeper. 1 <= depth <= n.
  std::uint64_t depth = 1;
};

// Published cost table for the scheme.
OpCounts table_authority_setup(std::uint64_t N, std::uint64_t n);
OpCounts table_keygen(std::uint64_t N, std::uint64_t n);
OpCounts table_encrypt(std::uint64_t N, std::uint64_t n);
OpCounts table_decrypt(std::uint64_t N, std::uint64_t n);
std::uint64_t table_ciphertext_source_elements(std::uint64_t N, std::uint64_t n);

// What the implemented construction performs.
OpCounts corrected_authority_setup(std::uint64_t N, std::uint64_t n);
OpCounts corrected_keygen(std::uint64_t N, std::uint64_t n);
OpCounts corrected_encrypt(std::uint64_t N, std::uint64_t n);
OpCounts corrected_decrypt(std::uint64_t N, std::uint64_t n, std::uint64_t depth);
std::uint64_t corrected_ciphertext_source_elements(std::uint64_t N, std::uint64_t n);

std::vector<Row> run(GroupContext& ctx, const Config& config, Rng& rng);

std::string to_csv(const std::vector<Row>& rows, bool header = true);
std::string to_json(const std::vector<Row>& rows);

}  // namespace dkpabe::bench
