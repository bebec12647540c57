#pragma once

// Pre-provisioned entitlement table of an authority, keyed by the
// fingerprint of a user's enrollment commitment. JSON on disk:
//
//   {"authority": "hospital", "grants": [
//      {"fingerprint": "<hex>", "attributes": ["doctor", "cardio"],
//       "tree": "<hex of the tree encoding>", "policy": "AND(hospital:doctor, hospital:cardio)"}]}
//
// "policy" is informational when "tree" is present and parsed otherwise.

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dkpabe/access.hpp"
#include "dkpabe/kpabe.hpp"

namespace dkpabe {

struct GrantRow {
  std::string fingerprint;
  std::vector<std::string> attributes;  // leaf attribute names, sorted
  AccessTree tree = AccessTree::leaf({1, 1});
};

class GrantTable {
 public:
  explicit GrantTable(AuthorityPublicKey pk) : pk_(std::move(pk)) {}

  // MalformedInput for bad JSON or rows; ForeignLeaf for trees over other
  // authorities; UnknownAttribute for names not in the public key.
  static GrantTable parse(std::string_view json, const AuthorityPublicKey& pk);
  static GrantTable load(const std::string& path, const AuthorityPublicKey& pk);
  std::string dump() const;
  void save(const std::string& path) const;

  // Replaces any row with the same fingerprint.
  void put(const std::string& fingerprint, const AccessTree& tree);
  std::optional<AccessTree> find(std::string_view fingerprint) const;
  const std::vector<GrantRow>& rows() const { return rows_; }

 private:
  GrantRow make_row(const std::string& fingerprint, const AccessTree& tree) const;

  AuthorityPublicKey pk_;
  std::vector<GrantRow> rows_;
};

// A grant table file that is re-read when its modification time changes, so
// rows added while the service runs take effect. Thread-safe.
class GrantFile {
 public:
  GrantFile(std::string path, AuthorityPublicKey pk);
  std::optional<AccessTree> find(std::string_view fingerprint);

 private:
  std::string path_;
  AuthorityPublicKey pk_;
  std::mutex mu_;
  std::filesystem::file_time_type stamp_{};
  GrantTable table_;
};

}  // namespace dkpabe
