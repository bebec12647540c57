#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dkpabe/codec.hpp"
#include "dkpabe/rng.hpp"
#include "subprocess.hpp"

namespace dkpabe {
namespace {

namespace fs = std::filesystem;
using testing::run;
using testing::run_capture;

const std::string kCli = DKPABE_CLI_PATH;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dkpabe-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string at(const std::string& f) const { return (dir_ / f).string(); }

  std::vector<std::string> cmd(std::vector<std::string> args) const {
    std::vector<std::string> v = {kCli, "--params", at("params"), "--log-level", "warn"};
    v.insert(v.end(), args.begin(), args.end());
    return v;
  }

  int dk(std::vector<std::string> args) { return run(cmd(std::move(args)), at("stderr.log")); }

  std::string stderr_text() const {
    std::ifstream in(at("stderr.log"));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  // One transparent authority with a granted enrollment for "carol".
  void provision() {
    ASSERT_EQ(dk({"setup-global", "--backend", "transparent"}), 0);
    ASSERT_EQ(dk({"authority-init", "--id", "1", "--name", "lab", "--attributes", "staff,admin", "--key",
                  at("lab.key"), "--public", at("lab.pub")}),
              0);
    ASSERT_EQ(dk({"authority-init", "--id", "2", "--name", "city", "--attributes", "resident", "--key",
                  at("city.key"), "--public", at("city.pub")}),
              0);
    ASSERT_EQ(dk({"user-enroll", "--gid", "carol", "--public", at("lab.pub"), "--out", at("carol.lab.enr")}), 0);
    ASSERT_EQ(dk({"grant", "--public", at("lab.pub"), "--grants", at("lab.grants"), "--enrollment",
                  at("carol.lab.enr"), "--policy", "OR(lab:staff, lab:admin)"}),
              0);
  }

  fs::path dir_;
};

TEST_F(Cli, NoArgumentsIsUsageError) {
  EXPECT_EQ(run({kCli}, at("stderr.log")), 2);
  EXPECT_EQ(run({kCli, "no-such-command"}, at("stderr.log")), 2);
  EXPECT_EQ(run({kCli, "--help"}), 0);
}

TEST_F(Cli, UnknownBackendIsUsageError) { EXPECT_EQ(dk({"setup-global", "--backend", "rsa"}), 2); }

TEST_F(Cli, FullFlowTransparent) {
  provision();
  auto server = testing::spawn(
      cmd({"authority-serve", "--key", at("lab.key"), "--grants", at("lab.grants"), "--listen", "127.0.0.1:0"}), true,
      at("stderr.log"));
  auto line = testing::read_line(server, std::chrono::seconds(10));
  ASSERT_EQ(line.rfind("listening on ", 0), 0u) << line;
  auto endpoint = line.substr(13);

  EXPECT_EQ(dk({"fetch-public-key", "--endpoint", endpoint, "--out", at("lab.fetched.pub")}), 0);
  EXPECT_EQ(codec::read_file(at("lab.fetched.pub")), codec::read_file(at("lab.pub")));
  ASSERT_EQ(dk({"request-keys", "--gid", "carol", "--endpoint", endpoint, "--public", at("lab.pub"), "--enrollment",
                at("carol.lab.enr"), "--out", at("carol.lab.share")}),
            0);
  EXPECT_EQ(testing::stop(server), 0);
  EXPECT_EQ(fs::status(at("carol.lab.share")).permissions() & fs::perms::all,
            fs::perms::owner_read | fs::perms::owner_write);

  DeterministicRng rng(1);
  auto plain = rng.bytes(200000);
  codec::write_file(at("m.bin"), plain);
  ASSERT_EQ(dk({"encrypt", "--public", at("lab.pub"), "--attrs", "lab:admin", "--in", at("m.bin"), "--out",
                at("m.enc")}),
            0);
  ASSERT_EQ(dk({"decrypt", "--share", at("carol.lab.share"), "--in", at("m.enc"), "--out", at("m.out")}), 0);
  EXPECT_EQ(codec::read_file(at("m.out")), plain);

  auto [rc, out] = run_capture(cmd({"inspect", at("m.enc")}), at("stderr.log"));
  EXPECT_EQ(rc, 0);
  EXPECT_NE(out.find("role: ciphertext"), std::string::npos) << out;
  auto [rc2, out2] = run_capture(cmd({"inspect", at("carol.lab.share")}), at("stderr.log"));
  EXPECT_EQ(rc2, 0);
  EXPECT_NE(out2.find("policy: OR(1.1, 1.2)"), std::string::npos) << out2;
}

TEST_F(Cli, UngrantedUserIsRefused) {
  provision();
  ASSERT_EQ(dk({"user-enroll", "--gid", "dave", "--public", at("lab.pub"), "--out", at("dave.lab.enr")}), 0);
  auto server = testing::spawn(
      cmd({"authority-serve", "--key", at("lab.key"), "--grants", at("lab.grants"), "--listen", "127.0.0.1:0"}), true,
      at("stderr.log"));
  auto line = testing::read_line(server, std::chrono::seconds(10));
  ASSERT_EQ(line.rfind("listening on ", 0), 0u);
  EXPECT_EQ(dk({"request-keys", "--gid", "dave", "--endpoint", line.substr(13), "--public", at("lab.pub"),
                "--enrollment", at("dave.lab.enr"), "--out", at("dave.lab.share")}),
            3);
  EXPECT_FALSE(fs::exists(at("dave.lab.share")));
  EXPECT_EQ(testing::stop(server, SIGINT), 0);
}

TEST_F(Cli, MissingShareAndPolicyFailures) {
  provision();
  ASSERT_EQ(dk({"user-enroll", "--gid", "erin", "--public", at("lab.pub"), "--out", at("erin.lab.enr")}), 0);
  ASSERT_EQ(dk({"grant", "--public", at("lab.pub"), "--grants", at("lab.grants"), "--enrollment",
                at("erin.lab.enr"), "--policy", "AND(lab:staff, lab:admin)"}),
            0);
  auto server = testing::spawn(
      cmd({"authority-serve", "--key", at("lab.key"), "--grants", at("lab.grants"), "--listen", "127.0.0.1:0"}), true,
      at("stderr.log"));
  auto line = testing::read_line(server, std::chrono::seconds(10));
  ASSERT_EQ(line.rfind("listening on ", 0), 0u);
  for (std::string user : {"carol", "erin"}) {
    ASSERT_EQ(dk({"request-keys", "--gid", user, "--endpoint", line.substr(13), "--public", at("lab.pub"),
                  "--enrollment", at(user + ".lab.enr"), "--out", at(user + ".lab.share")}),
              0);
  }
  testing::stop(server);
  codec::write_file(at("m.bin"), Bytes{1, 2, 3});

  ASSERT_EQ(dk({"encrypt", "--public", at("lab.pub"), "--public", at("city.pub"), "--attrs",
                "lab:staff,city:resident", "--in", at("m.bin"), "--out", at("two.enc")}),
            0);
  EXPECT_EQ(dk({"decrypt", "--share", at("carol.lab.share"), "--in", at("two.enc"), "--out", at("two.out")}), 3);
  EXPECT_NE(stderr_text().find("MissingShare"), std::string::npos) << stderr_text();
  EXPECT_FALSE(fs::exists(at("two.out")));
  EXPECT_FALSE(fs::exists(at("two.out.partial")));

  ASSERT_EQ(dk({"encrypt", "--public", at("lab.pub"), "--attrs", "lab:staff", "--in", at("m.bin"), "--out",
                at("staff.enc")}),
            0);
  EXPECT_EQ(dk({"decrypt", "--share", at("erin.lab.share"), "--in", at("staff.enc"), "--out", at("staff.out")}), 3);
  EXPECT_NE(stderr_text().find("PolicyUnsatisfied"), std::string::npos);
  EXPECT_FALSE(fs::exists(at("staff.out")));
  EXPECT_EQ(dk({"decrypt", "--share", at("carol.lab.share"), "--in", at("staff.enc"), "--out", at("staff.out")}), 0);

  EXPECT_EQ(dk({"encrypt", "--public", at("lab.pub"), "--attrs", "lab:janitor", "--in", at("m.bin"), "--out",
                at("bad.enc")}),
            3);
  EXPECT_NE(stderr_text().find("UnknownAttribute"), std::string::npos);
}

TEST_F(Cli, MissingFilesAreIoErrors) {
  ASSERT_EQ(dk({"setup-global", "--backend", "transparent"}), 0);
  EXPECT_EQ(dk({"decrypt", "--share", at("absent.share"), "--in", at("absent.enc"), "--out", at("x")}), 4);
  EXPECT_EQ(dk({"inspect", at("absent")}), 4);
  EXPECT_EQ(run({kCli, "--params", at("absent.params"), "user-enroll", "--gid", "x", "--public", at("p"), "--out",
                 at("e")},
                at("stderr.log")),
            4);
}

TEST_F(Cli, CorruptInputIsRejected) {
  ASSERT_EQ(dk({"setup-global", "--backend", "transparent"}), 0);
  codec::write_file(at("junk"), Bytes(100, 0x42));
  EXPECT_EQ(dk({"inspect", at("junk")}), 3);
  EXPECT_NE(stderr_text().find("BadMagic"), std::string::npos);
}

TEST_F(Cli, SettingsPrecedence) {
  auto setup = [&](std::vector<std::string> pre) {
    std::vector<std::string> v = {kCli};
    v.insert(v.end(), pre.begin(), pre.end());
    v.insert(v.end(), {"setup-global", "--backend", "transparent"});
    return run(v, at("stderr.log"));
  };
  {
    std::ofstream(at("cfg.json")) << R"({"params": ")" << at("from-config") << R"("})";
  }
  ASSERT_EQ(setup({"--config", at("cfg.json")}), 0);
  EXPECT_TRUE(fs::exists(at("from-config")));

  ::setenv("DKPABE_PARAMS", at("from-env").c_str(), 1);
  EXPECT_EQ(setup({"--config", at("cfg.json")}), 0);
  EXPECT_EQ(setup({"--config", at("cfg.json"), "--params", at("from-flag")}), 0);
  ::unsetenv("DKPABE_PARAMS");
  EXPECT_TRUE(fs::exists(at("from-env")));
  EXPECT_TRUE(fs::exists(at("from-flag")));

  EXPECT_EQ(setup({"--home", at("home")}), 0);
  EXPECT_TRUE(fs::exists(at("home/params.dkp")));

  {
    std::ofstream(at("bad.json")) << R"({"parms": "x"})";
  }
  EXPECT_EQ(setup({"--config", at("bad.json")}), 3);
  EXPECT_NE(stderr_text().find("unknown config key"), std::string::npos);
}

TEST_F(Cli, BenchFormats) {
  auto [rc, csv] = run_capture({kCli, "bench", "-N", "2", "-n", "3", "--backend", "transparent"}, at("stderr.log"));
  EXPECT_EQ(rc, 0);
  EXPECT_EQ(csv.rfind("operation,backend,N,n,depth,metric,measured,table,corrected,status,seconds\n", 0), 0u);
  EXPECT_NE(csv.find("encrypt,transparent,2,3,1,exponentiations,11,11,11,match"), std::string::npos) << csv;
  auto [rc2, json] = run_capture(
      {kCli, "bench", "-N", "1", "-n", "2", "--depth", "2", "--format", "json", "--backend", "transparent"},
      at("stderr.log"));
  EXPECT_EQ(rc2, 0);
  EXPECT_EQ(json.front(), '[');
  EXPECT_NE(json.find("\"operation\": \"decrypt\""), std::string::npos) << json;
  EXPECT_EQ(run({kCli, "bench", "-n", "2", "--depth", "3"}, at("stderr.log")), 2);
}

}  // namespace
}  // namespace dkpabe
