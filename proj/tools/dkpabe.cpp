// dkpabe: command-line front end for setup, key issuing, file encryption,
// benchmarking and key-store inspection.
//
// Exit codes: 0 success, 2 usage, 3 cryptographic or protocol failure, 4 I/O.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "dkpabe/bench.hpp"
#include "dkpabe/codec.hpp"
#include "dkpabe/config.hpp"
#include "dkpabe/directory.hpp"
#include "dkpabe/error.hpp"
#include "dkpabe/grants.hpp"
#include "dkpabe/hybrid.hpp"
#include "dkpabe/issuing.hpp"
#include "dkpabe/kpabe.hpp"
#include "dkpabe/service.hpp"

using namespace dkpabe;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCrypto = 3;
constexpr int kExitIo = 4;

const config::Getenv kGetenv = [](const char* name) { return std::getenv(name); };

std::atomic<AuthorityService*> g_service{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_service.load()) s->stop();
}

struct Globals {
  std::string config_file;
  config::Settings flags;
  config::Settings resolved;
};

std::string require(const std::optional<std::string>& v, const char* what) {
  if (!v || v->empty()) fail(ErrorCode::kInvalidArgument, std::string("no ") + what + " given");
  return *v;
}

std::string params_path(const config::Settings& s) {
  return s.params ? *s.params : config::in_home(s, kGetenv, "params.dkp");
}

std::shared_ptr<const GlobalParams> load_params(const config::Settings& s) {
  return std::make_shared<const GlobalParams>(codec::load_params(codec::read_file(params_path(s))));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(sep, start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

std::vector<AuthorityPublicKey> load_public_keys(const GroupDescriptor& g, const std::vector<std::string>& paths) {
  std::vector<AuthorityPublicKey> pks;
  for (const auto& p : paths) pks.push_back(codec::load_public_key(g, codec::read_file(p)));
  return pks;
}

void print_public_key(const AuthorityPublicKey& pk) {
  std::cout << "authority " << pk.id << " \"" << pk.name << "\", " << pk.attribute_count() << " attributes:";
  for (const auto& a : pk.attribute_names) std::cout << ' ' << a;
  std::cout << '\n';
}

int inspect(const std::string& path) {
  auto bytes = codec::read_file(path);
  auto h = codec::read_header(bytes);
  std::size_t entry = codec::kHeaderSize + h.payload_length + codec::kChecksumSize;
  if (bytes.size() < entry) fail(ErrorCode::kTruncatedInput, "key-store entry");
  ByteView head(bytes.data(), entry);
  auto e = codec::unwrap(h.role == codec::Role::kCiphertext ? head : ByteView(bytes));
  std::cout << "role: " << codec::to_string(h.role) << "\nversion: " << h.version
            << "\nbackend: " << (h.backend == Backend::kCurve ? "curve (BLS12-381)" : "transparent (insecure)")
            << "\npayload: " << h.payload_length << " bytes\n";
  if (h.role == codec::Role::kGlobalParams) {
    auto params = codec::decode_params(e.payload);
    if (params.group.backend() == Backend::kTransparent) std::cout << "modulus: " << params.group.transparent_modulus() << '\n';
    return 0;
  }
  ByteReader r(e.payload);
  std::optional<GroupDescriptor> g;
  if (h.role == codec::Role::kCiphertext) {
    std::cout << "label: " << r.str() << '\n';
    auto kem = r.blob();
    ByteReader kr(kem);
    g = GroupDescriptor::read_from(kr);
    ByteReader again(kem);
    auto ct = codec::read_ciphertext(again, *g);
    std::cout << "authorities:";
    for (const auto& [k, attrs] : ct.attributes) {
      std::cout << ' ' << k << "{";
      bool first = true;
      for (const auto& a : attrs) {
        std::cout << (first ? "" : ",") << a.attribute;
        first = false;
      }
      std::cout << '}';
    }
    std::cout << "\nsource elements: " << ct.source_element_count() << '\n';
    std::cout << "body: " << (bytes.size() - entry) << " bytes\n";
    return 0;
  }
  g = GroupDescriptor::read_from(r);
  switch (h.role) {
    case codec::Role::kAuthorityPublicKey:
      print_public_key(codec::decode_public_key(*g, e.payload));
      break;
    case codec::Role::kAuthoritySecretKey: {
      auto kp = codec::decode_key_pair(*g, e.payload);
      print_public_key(kp.pk);
      kp.sk.wipe();
      std::cout << "secret key material present\n";
      break;
    }
    case codec::Role::kUserShare: {
      auto share = codec::decode_share(*g, e.payload);
      AttributeNamer name = [](const AttributeId& a) { return to_string(a); };
      std::cout << "authority: " << share.authority << "\npolicy: " << format_policy(share.tree, name)
                << "\nleaf keys: " << share.Dj.size() << '\n';
      break;
    }
    case codec::Role::kEnrollment: {
      auto en = codec::decode_enrollment(*g, e.payload);
      std::cout << "authority: " << en.authority
                << "\nfingerprint: " << issuing::commitment_fingerprint(*g, en.enrollment.com) << '\n';
      break;
    }
    default:
      break;
  }
  return 0;
}

void setup_logging(const config::Settings& s) {
  auto logger = spdlog::stderr_color_mt("dkpabe");
  spdlog::set_default_logger(logger);
  spdlog::set_level(s.log_level ? spdlog::level::from_str(*s.log_level) : spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized multi-authority KP-ABE with blind key issuing"};
  app.require_subcommand(1);
  Globals gl;
  app.add_option("--config", gl.config_file, "JSON settings file");
  app.add_option("--params", gl.flags.params, "global parameters file [DKPABE_PARAMS]");
  app.add_option("--home", gl.flags.home, "default directory for key files [DKPABE_HOME]");
  app.add_option("--log-level", gl.flags.log_level, "trace, debug, info, warn, error [DKPABE_LOG_LEVEL]");

  // setup-global
  auto* setup = app.add_subcommand("setup-global", "write the global parameters");
  std::string backend = "curve";
  std::uint64_t prime = GroupDescriptor::kDefaultTransparentPrime;
  setup->add_option("--backend", backend, "curve or transparent")->check(CLI::IsMember({"curve", "transparent"}));
  setup->add_option("--prime", prime, "group order of the transparent backend");

  // authority-init
  auto* ainit = app.add_subcommand("authority-init", "create an authority key pair");
  std::uint32_t aid = 0;
  std::string aname, attrs_text, pub_out;
  ainit->add_option("--id", aid, "authority id")->required()->check(CLI::PositiveNumber);
  ainit->add_option("--name", aname, "authority name")->required();
  ainit->add_option("--attributes", attrs_text, "comma-separated attribute names")->required();
  ainit->add_option("--key,--authority-key", gl.flags.authority_key, "secret key output [DKPABE_AUTHORITY_KEY]");
  ainit->add_option("--public", pub_out, "public key output")->required();

  // user-enroll
  auto* enroll = app.add_subcommand("user-enroll", "make a reusable commitment to the GID for one authority");
  std::string gid, pub_in, enroll_path;
  enroll->add_option("--gid", gid, "global identifier")->required();
  enroll->add_option("--public", pub_in, "authority public key")->required();
  enroll->add_option("--out", enroll_path, "enrollment output")->required();

  // grant
  auto* grant = app.add_subcommand("grant", "add or replace a grant-table row");
  std::string fingerprint, policy, grant_enrollment;
  grant->add_option("--public", pub_in, "authority public key")->required();
  grant->add_option("--grants", gl.flags.grants, "grant table [DKPABE_GRANTS]");
  auto* fp_opt = grant->add_option("--fingerprint", fingerprint, "commitment fingerprint");
  grant->add_option("--enrollment", grant_enrollment, "read the fingerprint from an enrollment file")->excludes(fp_opt);
  grant->add_option("--policy", policy, "access policy, e.g. AND(hospital:doctor, hospital:cardio)")->required();

  // authority-serve
  auto* serve = app.add_subcommand("authority-serve", "run the key service");
  serve->add_option("--key,--authority-key", gl.flags.authority_key, "authority secret key [DKPABE_AUTHORITY_KEY]");
  serve->add_option("--grants", gl.flags.grants, "grant table [DKPABE_GRANTS]");
  serve->add_option("--listen,--serve", gl.flags.listen, "host:port, port 0 for any [DKPABE_LISTEN]");

  // fetch-public-key
  auto* fetch = app.add_subcommand("fetch-public-key", "download an authority public key");
  std::string endpoint_text, out_path;
  fetch->add_option("--endpoint", endpoint_text, "host:port")->required();
  fetch->add_option("--out", out_path, "public key output")->required();

  // request-keys
  auto* req = app.add_subcommand("request-keys", "obtain a key share through blind issuing");
  std::string share_out;
  req->add_option("--gid", gid, "global identifier")->required();
  req->add_option("--endpoint", endpoint_text, "authority host:port")->required();
  req->add_option("--public", pub_in, "authority public key")->required();
  req->add_option("--enrollment", enroll_path, "enrollment for this authority")->required();
  req->add_option("--out", share_out, "key share output")->required();

  // encrypt
  auto* enc = app.add_subcommand("encrypt", "encrypt a file under attribute sets");
  std::vector<std::string> pub_files;
  std::string in_path;
  enc->add_option("--public", pub_files, "authority public keys")->required();
  enc->add_option("--attrs,--attributes", attrs_text, "authority:attribute,...")->required();
  enc->add_option("--in", in_path, "plaintext")->required();
  enc->add_option("--out", out_path, "ciphertext")->required();

  // decrypt
  auto* dec = app.add_subcommand("decrypt", "decrypt a file with key shares");
  std::vector<std::string> share_files;
  dec->add_option("--share", share_files, "key shares, one per authority")->required();
  dec->add_option("--in", in_path, "ciphertext")->required();
  dec->add_option("--out", out_path, "plaintext")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "count group operations against the cost table");
  bench::Config bc;
  std::string format = "csv";
  std::uint64_t seed = 1;
  bench_cmd->add_option("-N", bc.N, "authorities")->check(CLI::PositiveNumber);
  bench_cmd->add_option("-n", bc.n, "attributes per authority")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--depth", bc.depth, "access-tree depth")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  bench_cmd->add_option("--seed", seed, "deterministic seed");
  bench_cmd->add_option("--backend", backend, "curve or transparent")->check(CLI::IsMember({"curve", "transparent"}));

  // inspect
  auto* insp = app.add_subcommand("inspect", "describe a key-store or ciphertext file");
  insp->add_option("file", in_path, "file to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    config::Settings file;
    if (!gl.config_file.empty()) file = config::from_file(gl.config_file);
    gl.resolved = config::overlay(config::overlay(file, config::from_env(kGetenv)), gl.flags);
    const auto& s = gl.resolved;
    setup_logging(s);

    if (*setup) {
      auto params = global_setup(128, backend == "curve" ? Backend::kCurve : Backend::kTransparent, prime);
      auto path = params_path(s);
      std::filesystem::create_directories(std::filesystem::absolute(path).parent_path());
      codec::write_file(path, codec::store(params));
      std::cout << "wrote " << path << '\n';
      return 0;
    }
    if (*insp) return inspect(in_path);
    if (*bench_cmd) {
      auto params = std::make_shared<const GlobalParams>(
          global_setup(128, backend == "curve" ? Backend::kCurve : Backend::kTransparent));
      GroupContext ctx(params);
      DeterministicRng rng(seed);
      auto rows = bench::run(ctx, bc, rng);
      std::cout << (format == "json" ? bench::to_json(rows) : bench::to_csv(rows));
      return 0;
    }

    auto params = load_params(s);
    const auto& g = params->group;
    GroupContext ctx(params);
    SystemRng rng;

    if (*ainit) {
      auto key_path = s.authority_key ? *s.authority_key : config::in_home(s, kGetenv, aname + ".key");
      auto kp = authority_setup(ctx, aid, aname, split(attrs_text, ','), rng);
      codec::write_file(key_path, codec::store(g, kp), true);
      codec::write_file(pub_out, codec::store(g, kp.pk));
      kp.sk.wipe();
      std::cout << "wrote " << key_path << " and " << pub_out << '\n';
      return 0;
    }
    if (*enroll) {
      auto pk = codec::load_public_key(g, codec::read_file(pub_in));
      auto u = derive_uid(g, gid);
      codec::StoredEnrollment en{pk.id, issuing::enroll(ctx, u, rng)};
      codec::write_file(enroll_path, codec::store(g, en), true);
      u.wipe();
      en.enrollment.blinder.wipe();
      std::cout << issuing::commitment_fingerprint(g, en.enrollment.com) << '\n';
      return 0;
    }
    if (*grant) {
      auto pk = codec::load_public_key(g, codec::read_file(pub_in));
      auto grants_path = require(s.grants, "grant table (--grants)");
      if (!grant_enrollment.empty()) {
        auto en = codec::load_enrollment(g, codec::read_file(grant_enrollment));
        fingerprint = issuing::commitment_fingerprint(g, en.enrollment.com);
      }
      if (fingerprint.empty()) fail(ErrorCode::kInvalidArgument, "need --fingerprint or --enrollment");
      GrantTable table(pk);
      if (std::filesystem::exists(grants_path)) table = GrantTable::load(grants_path, pk);
      Directory dir({pk});
      table.put(fingerprint, parse_policy(policy, dir.resolver()));
      table.save(grants_path);
      std::cout << "granted " << fingerprint.substr(0, 16) << "... in " << grants_path << '\n';
      return 0;
    }
    if (*serve) {
      auto kp = codec::load_key_pair(g, codec::read_file(require(s.authority_key, "authority key (--key)")));
      auto grants = std::make_shared<GrantFile>(require(s.grants, "grant table (--grants)"), kp.pk);
      ServiceOptions opts;
      opts.listen = wire::parse_endpoint(s.listen ? *s.listen : "127.0.0.1:0");
      AuthorityService service(
          params, std::move(kp), [grants](std::string_view fp) { return grants->find(fp); }, opts);
      g_service.store(&service);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << wire::to_string({opts.listen.host, service.port()}) << std::endl;
      service.run();
      g_service.store(nullptr);
      auto st = service.stats();
      spdlog::info("stopped: {} issued, {} refused, {} dropped", st.issued, st.refused, st.dropped);
      return 0;
    }
    if (*fetch) {
      auto pk = fetch_public_key(g, wire::parse_endpoint(endpoint_text));
      codec::write_file(out_path, codec::store(g, pk));
      print_public_key(pk);
      return 0;
    }
    if (*req) {
      auto pk = codec::load_public_key(g, codec::read_file(pub_in));
      auto en = codec::load_enrollment(g, codec::read_file(enroll_path));
      if (en.authority != pk.id) fail(ErrorCode::kInvalidArgument, "enrollment is for another authority");
      issuing::UserOptions uo;
      uo.enrollment = en.enrollment;
      auto share = request_keys(ctx, pk, gid, wire::parse_endpoint(endpoint_text), rng, std::move(uo));
      codec::write_file(share_out, codec::store(g, share), true);
      std::cout << "wrote " << share_out << '\n';
      return 0;
    }
    if (*enc) {
      Directory dir(load_public_keys(g, pub_files));
      auto sets = dir.parse_attribute_list(attrs_text);
      std::vector<AuthorityPublicKey> used;
      for (const auto& [k, _] : sets) used.push_back(dir.authority(k));
      hybrid::encrypt_file(ctx, used, sets, in_path, out_path, rng);
      return 0;
    }
    if (*dec) {
      std::map<std::uint32_t, UserKeyShare> shares;
      for (const auto& p : share_files) {
        auto share = codec::load_share(g, codec::read_file(p));
        auto k = share.authority;
        if (!shares.emplace(k, std::move(share)).second) {
          fail(ErrorCode::kInvalidArgument, "two shares for authority " + std::to_string(k));
        }
      }
      hybrid::decrypt_file(ctx, shares, in_path, out_path);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "dkpabe: " << e.what() << '\n';
    if (e.code() == ErrorCode::kIo) return kExitIo;
    if (e.code() == ErrorCode::kInvalidArgument) return kExitUsage;
    return kExitCrypto;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "dkpabe: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "dkpabe: " << e.what() << '\n';
    return kExitCrypto;
  }
  return 0;
}
