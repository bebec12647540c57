#include "dkpabe/bench.hpp"

#include <json.hpp>

#include <chrono>
#include <map>
#include <sstream>

#include "dkpabe/codec.hpp"
#include "dkpabe/error.hpp"
#include "dkpabe/kpabe.hpp"

namespace dkpabe::bench {
namespace {

using Clock = std::chrono::steady_clock;

// AND over all leaves, nested so the tree has the requested depth.
AccessTree chain(std::uint32_t k, std::uint32_t first, std::uint32_t last, std::uint64_t depth) {
  if (depth <= 1 || first == last) {
    std::vector<AccessTree> leaves;
    for (std::uint32_t j = first; j <= last; ++j) leaves.push_back(AccessTree::leaf({k, j}));
    return leaves.size() == 1 ? leaves.front() : AccessTree::all_of(std::move(leaves));
  }
  return AccessTree::all_of({AccessTree::leaf({k, first}), chain(k, first + 1, last, depth - 1)});
}

void add(std::vector<Row>& rows, const Row& base, const OpCounts& measured, const OpCounts& table,
         const OpCounts& corrected) {
  Row r = base;
  r.metric = "multiplications";
  r.measured = measured.multiplications;
  r.table = table.multiplications;
  r.corrected = corrected.multiplications;
  rows.push_back(r);
  r.metric = "exponentiations";
  r.measured = measured.exponentiations;
  r.table = table.exponentiations;
  r.corrected = corrected.exponentiations;
  rows.push_back(r);
  r.metric = "pairings";
  r.measured = measured.pairings;
  r.table = table.pairings;
  r.corrected = corrected.pairings;
  rows.push_back(r);
}

}  // namespace

std::string Row::status() const {
  if (measured == table) return "match";
  if (measured == corrected) return "deviation";
  return "unexpected";
}

OpCounts table_authority_setup(std::uint64_t N, std::uint64_t n) { return {0, n * N + 2 * N, 0}; }
OpCounts table_keygen(std::uint64_t N, std::uint64_t n) { return {5 * N + 2 * n * N, 4 * N + n * N, 0}; }
OpCounts table_encrypt(std::uint64_t N, std::uint64_t n) { return {2 * N - 1, 1 + 2 * N + n * N, 0}; }
OpCounts table_decrypt(std::uint64_t N, std::uint64_t n) { return {1 + N + n * N, n * N, 1 + N + n * N}; }
std::uint64_t table_ciphertext_source_elements(std::uint64_t N, std::uint64_t n) {
  (void)N;
  return 2 + n * N;
}

OpCounts corrected_authority_setup(std::uint64_t N, std::uint64_t n) { return {0, (n + 2) * N, 0}; }
OpCounts corrected_keygen(std::uint64_t N, std::uint64_t n) { return {2 * N, (4 + n) * N, 0}; }
OpCounts corrected_encrypt(std::uint64_t N, std::uint64_t n) { return {N, 1 + 2 * N + n * N, 0}; }
OpCounts corrected_decrypt(std::uint64_t N, std::uint64_t n, std::uint64_t depth) {
  // Every non-root gate adds one Lagrange exponentiation.
  return {2 * N + n * N, (n + depth - 1) * N, 2 * N + n * N};
}
std::uint64_t corrected_ciphertext_source_elements(std::uint64_t N, std::uint64_t n) { return 1 + N + n * N; }

std::vector<Row> run(GroupContext& ctx, const Config& c, Rng& rng) {
  if (c.N == 0 || c.n == 0) fail(ErrorCode::kInvalidArgument, "N and n must be positive");
  if (c.depth == 0 || c.depth > c.n) fail(ErrorCode::kInvalidArgument, "depth must be in 1..n");
  const auto& g = ctx.group();
  Row base;
  base.backend = g.backend() == Backend::kCurve ? "curve" : "transparent";
  base.N = c.N;
  base.n = c.n;
  base.depth = c.depth;
  std::vector<Row> rows;

  auto timed = [&](auto&& fn) {
    ctx.reset_counters();
    auto t0 = Clock::now();
    fn();
    double s = std::chrono::duration<double>(Clock::now() - t0).count();
    return std::pair{ctx.counters_snapshot(), s};
  };

  std::vector<AuthorityKeyPair> kps;
  std::vector<AuthorityPublicKey> pks;
  auto [setup_ops, setup_s] = timed([&] {
    for (std::uint32_t k = 1; k <= c.N; ++k) kps.push_back(authority_setup(ctx, k, static_cast<std::uint32_t>(c.n), rng));
  });
  for (const auto& kp : kps) pks.push_back(kp.pk);
  base.operation = "authority_setup";
  base.seconds = setup_s;
  add(rows, base, setup_ops, table_authority_setup(c.N, c.n), corrected_authority_setup(c.N, c.n));

  auto u = derive_uid(g, "bench-user");
  std::map<std::uint32_t, UserKeyShare> shares;
  auto [kg_ops, kg_s] = timed([&] {
    for (const auto& kp : kps) {
      auto tree = chain(kp.pk.id, 1, static_cast<std::uint32_t>(c.n), c.depth);
      shares.emplace(kp.pk.id, keygen(ctx, kp.sk, u, tree, rng));
    }
  });
  base.operation = "keygen";
  base.seconds = kg_s;
  add(rows, base, kg_ops, table_keygen(c.N, c.n), corrected_keygen(c.N, c.n));

  std::map<std::uint32_t, AttributeSet> sets;
  for (const auto& [k, share] : shares) sets[k] = share.tree.attributes();
  auto m = ctx.exp(ctx.params().egg, g.random_nonzero_scalar(rng));
  ctx.reset_counters();
  Ciphertext ct;
  auto [enc_ops, enc_s] = timed([&] { ct = encrypt(ctx, pks, sets, m, rng); });
  base.operation = "encrypt";
  base.seconds = enc_s;
  add(rows, base, enc_ops, table_encrypt(c.N, c.n), corrected_encrypt(c.N, c.n));

  TargetElement out;
  auto [dec_ops, dec_s] = timed([&] { out = decrypt(ctx, shares, ct); });
  if (!(out == m)) fail(ErrorCode::kInvalidArgument, "benchmark decryption returned the wrong message");
  base.operation = "decrypt";
  base.seconds = dec_s;
  add(rows, base, dec_ops, table_decrypt(c.N, c.n), corrected_decrypt(c.N, c.n, c.depth));

  // Sizes of one encoded source and target element.
  const std::uint64_t src = g.encode(ct.C2).size();
  const std::uint64_t tgt = g.encode(ct.C1).size();
  ByteWriter w;
  codec::write_ciphertext(w, g, ct);
  Row len = base;
  len.operation = "ciphertext";
  len.seconds = 0;
  len.metric = "source_elements";
  len.measured = ct.source_element_count();
  len.table = table_ciphertext_source_elements(c.N, c.n);
  len.corrected = corrected_ciphertext_source_elements(c.N, c.n);
  rows.push_back(len);
  len.metric = "element_bytes";
  len.measured = ct.source_element_count() * src + tgt;
  len.table = len.table * src + tgt;
  len.corrected = len.corrected * src + tgt;
  rows.push_back(len);
  len.metric = "encoded_bytes";  // with attribute lists and framing; no prediction
  len.measured = w.bytes().size();
  len.table = len.measured;
  len.corrected = len.measured;
  rows.push_back(len);

  for (auto& kp : kps) kp.sk.wipe();
  return rows;
}

std::string to_csv(const std::vector<Row>& rows, bool header) {
  std::ostringstream out;
  if (header) out << "operation,backend,N,n,depth,metric,measured,table,corrected,status,seconds\n";
  for (const auto& r : rows) {
    out << r.operation << ',' << r.backend << ',' << r.N << ',' << r.n << ',' << r.depth << ',' << r.metric << ','
        << r.measured << ',' << r.table << ',' << r.corrected << ',' << r.status() << ',' << r.seconds << '\n';
  }
  return out.str();
}

std::string to_json(const std::vector<Row>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"operation", r.operation}, {"backend", r.backend}, {"N", r.N}, {"n", r.n},
                   {"depth", r.depth}, {"metric", r.metric}, {"measured", r.measured}, {"table", r.table},
                   {"corrected", r.corrected}, {"status", r.status()}, {"seconds", r.seconds}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace dkpabe::bench
