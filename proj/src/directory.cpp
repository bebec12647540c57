#include "dkpabe/directory.hpp"

#include <charconv>
#include <set>
#include <string>

#include "dkpabe/error.hpp"

namespace dkpabe {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Directory::Directory(std::vector<AuthorityPublicKey> pks) : pks_(std::move(pks)) {
  std::set<std::uint32_t> ids;
  std::set<std::string> names;
  for (const auto& pk : pks_) {
    if (!ids.insert(pk.id).second) fail(ErrorCode::kInvalidArgument, "authority id " + std::to_string(pk.id) + " twice");
    if (!names.insert(pk.name).second) fail(ErrorCode::kInvalidArgument, "authority name " + pk.name + " twice");
  }
}

const AuthorityPublicKey& Directory::authority(std::uint32_t id) const {
  for (const auto& pk : pks_) {
    if (pk.id == id) return pk;
  }
  fail(ErrorCode::kUnknownAttribute, "no public key for authority " + std::to_string(id));
}

const AuthorityPublicKey& Directory::authority(std::string_view name_or_id) const {
  for (const auto& pk : pks_) {
    if (pk.name == name_or_id) return pk;
  }
  std::uint32_t id = 0;
  auto [p, ec] = std::from_chars(name_or_id.data(), name_or_id.data() + name_or_id.size(), id);
  if (ec == std::errc() && p == name_or_id.data() + name_or_id.size()) return authority(id);
  fail(ErrorCode::kUnknownAttribute, "no public key for authority '" + std::string(name_or_id) + "'");
}

AttributeId Directory::resolve(std::string_view authority_name, std::string_view attribute) const {
  return authority(authority_name).attribute(attribute);
}

std::string Directory::name(const AttributeId& a) const {
  const auto& pk = authority(a.authority);
  return pk.name + ":" + pk.attribute_name(a.attribute);
}

AttributeResolver Directory::resolver() const {
  return [this](std::string_view k, std::string_view j) { return resolve(k, j); };
}

AttributeNamer Directory::namer() const {
  return [this](const AttributeId& a) { return name(a); };
}

std::map<std::uint32_t, AttributeSet> Directory::parse_attribute_list(std::string_view text) const {
  std::map<std::uint32_t, AttributeSet> out;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      fail(ErrorCode::kInvalidArgument, "attribute '" + std::string(item) + "' is not authority:name");
    }
    auto a = resolve(trim(item.substr(0, colon)), trim(item.substr(colon + 1)));
    out[a.authority].insert(a);
  }
  if (out.empty()) fail(ErrorCode::kEmptyAuthoritySet, "no attributes given");
  return out;
}

}  // namespace dkpabe
