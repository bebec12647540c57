#include "dkpabe/grants.hpp"

#include <json.hpp>

#include <algorithm>

#include "dkpabe/codec.hpp"
#include "dkpabe/error.hpp"

namespace dkpabe {
namespace {

using nlohmann::json;

bool is_fingerprint(std::string_view s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

}  // namespace

GrantRow GrantTable::make_row(const std::string& fingerprint, const AccessTree& tree) const {
  if (!is_fingerprint(fingerprint)) fail(ErrorCode::kMalformedInput, "fingerprint must be 64 lowercase hex digits");
  GrantRow row{fingerprint, {}, tree};
  for (const auto& a : tree.attributes()) {
    if (!pk_.owns(a)) fail(ErrorCode::kForeignLeaf, "leaf " + to_string(a) + " is not an attribute of " + pk_.name);
    row.attributes.push_back(pk_.attribute_name(a.attribute));
  }
  std::sort(row.attributes.begin(), row.attributes.end());
  return row;
}

GrantTable GrantTable::parse(std::string_view text, const AuthorityPublicKey& pk) {
  GrantTable table(pk);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformedInput, std::string("grant table: ") + e.what());
  }
  try {
    if (doc.contains("authority") && doc.at("authority").get<std::string>() != pk.name) {
      fail(ErrorCode::kMalformedInput, "grant table belongs to authority " + doc.at("authority").get<std::string>());
    }
    AttributeResolver resolve = [&](std::string_view k, std::string_view j) {
      if (k != pk.name && k != std::to_string(pk.id)) fail(ErrorCode::kForeignLeaf, "policy names authority " + std::string(k));
      return pk.attribute(j);
    };
    for (const auto& g : doc.value("grants", json::array())) {
      auto fp = g.at("fingerprint").get<std::string>();
      std::optional<AccessTree> tree;
      if (g.contains("tree")) {
        tree = AccessTree::decode(from_hex(g.at("tree").get<std::string>()));
      } else {
        tree = parse_policy(g.at("policy").get<std::string>(), resolve);
      }
      auto row = table.make_row(fp, *tree);
      if (g.contains("attributes")) {
        auto listed = g.at("attributes").get<std::vector<std::string>>();
        std::sort(listed.begin(), listed.end());
        if (listed != row.attributes) fail(ErrorCode::kMalformedInput, "row " + fp + ": attribute list does not match tree");
      }
      if (table.find(fp)) fail(ErrorCode::kMalformedInput, "fingerprint " + fp + " listed twice");
      table.rows_.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kMalformedInput, std::string("grant table: ") + e.what());
  }
  return table;
}

GrantTable GrantTable::load(const std::string& path, const AuthorityPublicKey& pk) {
  auto bytes = codec::read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), pk);
}

std::string GrantTable::dump() const {
  json rows = json::array();
  AttributeNamer name = [&](const AttributeId& a) { return pk_.name + ":" + pk_.attribute_name(a.attribute); };
  for (const auto& r : rows_) {
    rows.push_back({{"fingerprint", r.fingerprint},
                    {"attributes", r.attributes},
                    {"tree", to_hex(r.tree.encode())},
                    {"policy", format_policy(r.tree, name)}});
  }
  json doc = {{"authority", pk_.name}, {"grants", rows}};
  return doc.dump(2) + "\n";
}

void GrantTable::save(const std::string& path) const {
  auto text = dump();
  codec::write_file(path, as_bytes(text));
}

void GrantTable::put(const std::string& fingerprint, const AccessTree& tree) {
  auto row = make_row(fingerprint, tree);
  for (auto& r : rows_) {
    if (r.fingerprint == fingerprint) {
      r = std::move(row);
      return;
    }
  }
  rows_.push_back(std::move(row));
}

std::optional<AccessTree> GrantTable::find(std::string_view fingerprint) const {
  for (const auto& r : rows_) {
    if (r.fingerprint == fingerprint) return r.tree;
  }
  return std::nullopt;
}

GrantFile::GrantFile(std::string path, AuthorityPublicKey pk)
    : path_(std::move(path)), pk_(std::move(pk)), table_(GrantTable::load(path_, pk_)) {
  std::error_code ec;
  stamp_ = std::filesystem::last_write_time(path_, ec);
}

std::optional<AccessTree> GrantFile::find(std::string_view fingerprint) {
  std::lock_guard lock(mu_);
  std::error_code ec;
  auto stamp = std::filesystem::last_write_time(path_, ec);
  if (!ec && stamp != stamp_) {
    // A half-written or broken file keeps the previous table in force.
    try {
      table_ = GrantTable::load(path_, pk_);
      stamp_ = stamp;
    } catch (const Error&) {
    }
  }
  return table_.find(fingerprint);
}

}  // namespace dkpabe
