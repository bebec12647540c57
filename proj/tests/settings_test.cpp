#include <gtest/gtest.h>

#include <functional>
#include <map>

#include "dkpabe/config.hpp"
#include "dkpabe/error.hpp"
#include "dkpabe/grants.hpp"
#include "test_support.hpp"

namespace dkpabe {
namespace {

using dkpabe::testing::transparent_params;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

config::Getenv fake_env(std::map<std::string, std::string> vars) {
  auto shared = std::make_shared<std::map<std::string, std::string>>(std::move(vars));
  return [shared](const char* name) -> const char* {
    auto it = shared->find(name);
    return it == shared->end() ? nullptr : it->second.c_str();
  };
}

TEST(Config, FlagsBeatEnvBeatFile) {
  auto file = config::from_json(R"({"params": "f.params", "listen": "f:1", "grants": "f.json", "log_level": "warn"})");
  auto env = config::from_env(fake_env({{"DKPABE_LISTEN", "e:2"}, {"DKPABE_GRANTS", "e.json"}, {"DKPABE_HOME", ""}}));
  config::Settings flags;
  flags.grants = "x.json";
  auto s = config::overlay(config::overlay(file, env), flags);
  EXPECT_EQ(s.params, "f.params");
  EXPECT_EQ(s.listen, "e:2");
  EXPECT_EQ(s.grants, "x.json");
  EXPECT_EQ(s.log_level, "warn");
  EXPECT_FALSE(s.home.has_value());  // empty variables count as unset
  EXPECT_FALSE(s.authority_key.has_value());
}

TEST(Config, HomeDirectory) {
  config::Settings s;
  EXPECT_EQ(config::in_home(s, fake_env({{"HOME", "/home/q"}}), "params.dkp"), "/home/q/.dkpabe/params.dkp");
  s.home = "/srv/abe";
  EXPECT_EQ(config::in_home(s, fake_env({}), "k"), "/srv/abe/k");
}

TEST(Config, Rejections) {
  EXPECT_EQ(code_of([] { config::from_json("{"); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([] { config::from_json("[]"); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([] { config::from_json(R"({"paramz": "x"})"); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([] { config::from_json(R"({"params": 3})"); }), ErrorCode::kMalformedInput);
}

struct GrantFixture {
  GroupContext ctx{transparent_params()};
  DeterministicRng rng{8};
  AuthorityKeyPair kp = authority_setup(ctx, 4, "lab", {"tech", "chief", "night"}, rng);
  std::string fp = std::string(64, 'a');
};

TEST(Grants, RoundTripAndReplace) {
  GrantFixture f;
  GrantTable t(f.kp.pk);
  auto tree = AccessTree::any_of({AccessTree::leaf({4, 2}), AccessTree::leaf({4, 1})});
  t.put(f.fp, tree);
  t.put(std::string(64, 'b'), AccessTree::leaf({4, 3}));
  auto back = GrantTable::parse(t.dump(), f.kp.pk);
  ASSERT_EQ(back.rows().size(), 2u);
  EXPECT_EQ(back.find(f.fp), tree);
  EXPECT_EQ(back.rows()[0].attributes, (std::vector<std::string>{"chief", "tech"}));
  EXPECT_FALSE(back.find(std::string(64, 'c')).has_value());
  back.put(f.fp, AccessTree::leaf({4, 1}));
  EXPECT_EQ(back.rows().size(), 2u);
  EXPECT_EQ(back.find(f.fp), AccessTree::leaf({4, 1}));
}

TEST(Grants, PolicyOnlyRows) {
  GrantFixture f;
  auto t = GrantTable::parse(R"({"grants": [{"fingerprint": ")" + f.fp +
                                 R"j(", "policy": "THRESH(2; lab:tech, lab:chief, lab:night)"}]})j",
                             f.kp.pk);
  auto tree = t.find(f.fp);
  ASSERT_TRUE(tree);
  EXPECT_EQ(tree->node(0).threshold, 2u);
}

TEST(Grants, Rejections) {
  GrantFixture f;
  GrantTable t(f.kp.pk);
  EXPECT_EQ(code_of([&] { t.put("ABC", AccessTree::leaf({4, 1})); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([&] { t.put(f.fp, AccessTree::leaf({5, 1})); }), ErrorCode::kForeignLeaf);
  EXPECT_EQ(code_of([&] { t.put(f.fp, AccessTree::leaf({4, 9})); }), ErrorCode::kForeignLeaf);

  auto row = [&](const std::string& body) { return R"({"grants": [{"fingerprint": ")" + f.fp + "\", " + body + "}]}"; };
  EXPECT_EQ(code_of([&] { GrantTable::parse(row(R"("policy": "lab:nobody")"), f.kp.pk); }),
            ErrorCode::kUnknownAttribute);
  EXPECT_EQ(code_of([&] { GrantTable::parse(row(R"("policy": "other:tech")"), f.kp.pk); }), ErrorCode::kForeignLeaf);
  EXPECT_EQ(code_of([&] { GrantTable::parse(row(R"("policy": "lab:tech", "attributes": ["chief"])"), f.kp.pk); }),
            ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([&] { GrantTable::parse(R"({"authority": "zoo", "grants": []})", f.kp.pk); }),
            ErrorCode::kMalformedInput);
  std::string twice = R"({"grants": [{"fingerprint": ")" + f.fp + R"(", "policy": "lab:tech"}, {"fingerprint": ")" +
                      f.fp + R"(", "policy": "lab:chief"}]})";
  EXPECT_EQ(code_of([&] { GrantTable::parse(twice, f.kp.pk); }), ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([&] { GrantTable::parse("nonsense", f.kp.pk); }), ErrorCode::kMalformedInput);
}

}  // namespace
}  // namespace dkpabe
