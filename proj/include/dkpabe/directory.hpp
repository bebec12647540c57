#pragma once

// Name lookups over a set of authority public keys. An authority is named by
// its name or its decimal id.

#include <map>
#include <string_view>
#include <vector>

#include "dkpabe/access.hpp"
#include "dkpabe/kpabe.hpp"

namespace dkpabe {

class Directory {
 public:
  explicit Directory(std::vector<AuthorityPublicKey> pks);

  // UnknownAttribute for unknown authorities or attributes.
  const AuthorityPublicKey& authority(std::string_view name_or_id) const;
  const AuthorityPublicKey& authority(std::uint32_t id) const;
  AttributeId resolve(std::string_view authority, std::string_view attribute) const;
  std::string name(const AttributeId& a) const;

  AttributeResolver resolver() const;
  AttributeNamer namer() const;

  // "k:name,k:name,..." grouped by authority.
  std::map<std::uint32_t, AttributeSet> parse_attribute_list(std::string_view text) const;

  const std::vector<AuthorityPublicKey>& keys() const { return pks_; }

 private:
  std::vector<AuthorityPublicKey> pks_;
};

}  // namespace dkpabe
