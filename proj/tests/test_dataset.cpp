#include <gtest/gtest.h>

#include <cmath>

#include "aura/dataset.hpp"
#include "aura/error.hpp"
#include "test_util.hpp"

using namespace aura;
using aura::test::TempDir;

namespace {

MosPair pair_of(MosTriple before, MosTriple after) { return {before, after}; }

ClipRecord scored(const std::string& id, std::vector<float> emb, MosPair p, const std::string& model = "a") {
  ClipRecord r;
  r.clip_id = id;
  r.embedding = std::move(emb);
  r.scores[model] = p;
  return r;
}

std::string manifest_line(const std::string& id, double ovrl_before = 3.0,
                          const std::string& label = "") {
  std::string s = "{\"clip_id\": \"" + id + "\", ";
  s += label.empty() ? "\"noise_label\": null, " : "\"noise_label\": \"" + label + "\", ";
  s += "\"scores\": {\"a\": {\"before\": [3.0, 3.0, " + std::to_string(ovrl_before) +
       "], \"after\": [3.5, 3.5, 3.5]}, \"b\": {\"before\": [3, 3, 3], \"after\": [2.5, 2.5, 2.5]}}}\n";
  return s;
}

void write_block(const std::filesystem::path& p, std::uint32_t count, std::uint32_t dim) {
  EmbeddingBlock b{count, dim, std::vector<float>(std::size_t{count} * dim)};
  for (std::size_t i = 0; i < b.values.size(); ++i) b.values[i] = static_cast<float>(i) * 0.5f;
  write_embeddings(p, b);
}

}  // namespace

TEST(Dmos, IdentityIsZero) {
  const auto r = scored("x", {0.f}, pair_of({3, 3, 3}, {3, 3, 3}));
  EXPECT_EQ(dmos(r, "a"), (DmosTriple{0, 0, 0}));
}

TEST(Dmos, DirectSubtraction) {
  const auto r = scored("x", {0.f}, pair_of({3, 3, 2.5}, {3, 3, 3.2}));
  EXPECT_NEAR(dmos(r, "a").ovrl, 0.7, 1e-12);
}

TEST(Dmos, HandTriple) {
  const auto r = scored("x", {0.f}, pair_of({3.0, 2.0, 2.5}, {2.8, 4.1, 3.0}));
  const auto d = dmos(r, "a");
  EXPECT_NEAR(d.sig, -0.2, 1e-12);
  EXPECT_NEAR(d.bak, 2.1, 1e-12);
  EXPECT_NEAR(d.ovrl, 0.5, 1e-12);
  EXPECT_EQ(d[Channel::kBak], d.bak);
}

TEST(Dmos, UnknownModelThrows) {
  const auto r = scored("x", {0.f}, pair_of({3, 3, 3}, {3, 3, 3}));
  EXPECT_THROW(dmos(r, "zzz"), InvalidInput);
}

TEST(DmosMatrix, SingleCell) {
  ClipCollection c(1, {"a"}, {scored("x", {0.f}, pair_of({3, 3, 3.0}, {3, 3, 3.18}))});
  const Matrix m = dmos_matrix(c, Channel::kOvrl);
  ASSERT_EQ(m.rows(), 1u);
  ASSERT_EQ(m.cols(), 1u);
  EXPECT_NEAR(m(0, 0), 0.18, 1e-12);
}

TEST(DmosMatrix, EqualScoresGiveZeros) {
  std::vector<ClipRecord> recs;
  for (int i = 0; i < 3; ++i) {
    ClipRecord r = scored("c" + std::to_string(i), {0.f}, pair_of({4, 4, 4}, {4, 4, 4}), "a");
    r.scores["b"] = pair_of({4, 4, 4}, {4, 4, 4});
    recs.push_back(r);
  }
  ClipCollection c(1, {"a", "b"}, recs);
  const Matrix m = dmos_matrix(c, Channel::kSig);
  for (double v : m.values()) EXPECT_EQ(v, 0.0);
}

TEST(DmosMatrix, MatchesComponentwiseDmos) {
  ClipRecord r0 = scored("c0", {0.f}, pair_of({3, 2, 2.5}, {2.8, 4.1, 3.0}), "a");
  r0.scores["b"] = pair_of({1, 1, 1}, {5, 5, 5});
  ClipRecord r1 = scored("c1", {1.f}, pair_of({2, 2, 2}, {1.5, 2.5, 3.5}), "a");
  r1.scores["b"] = pair_of({4, 4, 4.5}, {3, 3, 1.25});
  ClipCollection c(1, {"a", "b"}, {r0, r1});
  for (auto ch : {Channel::kSig, Channel::kBak, Channel::kOvrl}) {
    const Matrix m = dmos_matrix(c, ch);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_EQ(m(i, j), dmos(c[i], c.model_ids()[j])[ch]);
      }
    }
  }
}

TEST(DmosMatrix, MissingCellNamed) {
  ClipRecord r0 = scored("c0", {0.f}, pair_of({3, 3, 3}, {3, 3, 3}), "a");
  ClipCollection c(1, {"a", "b"}, {r0});
  try {
    dmos_matrix(c, Channel::kOvrl);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("missing score cell"), std::string::npos);
  }
}

TEST(Collection, RejectsInvariantViolations) {
  const auto ok = pair_of({3, 3, 3}, {3, 3, 3});
  EXPECT_THROW(ClipCollection(2, {"a"}, {scored("x", {0.f}, ok)}), InvalidInput);  // dim
  EXPECT_THROW(ClipCollection(1, {"a"}, {scored("x", {0.f}, ok), scored("x", {1.f}, ok)}),
               InvalidInput);  // duplicate id
  EXPECT_THROW(ClipCollection(1, {"a"}, {scored("x", {NAN}, ok)}), InvalidInput);
  EXPECT_THROW(ClipCollection(1, {"a"}, {scored("x", {0.f}, ok, "other")}), InvalidInput);
  EXPECT_THROW(ClipCollection(1, {"a"}, {scored("x", {0.f}, pair_of({3, 3, 5.7}, {3, 3, 3}))}),
               InvalidInput);
  EXPECT_THROW(ClipCollection(1, {"a"}, {scored("x", {0.f}, pair_of({3, 3, 3}, {0.5, 3, 3}))}),
               InvalidInput);
}

TEST(Collection, BoundaryMosAccepted) {
  ClipCollection c(1, {"a"}, {scored("x", {0.f}, pair_of({1, 1, 1}, {5, 5, 5}))});
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.find("x"), 0u);
  EXPECT_FALSE(c.find("y").has_value());
}

TEST(Channels, ParseAndPrint) {
  for (auto ch : {Channel::kSig, Channel::kBak, Channel::kOvrl}) {
    EXPECT_EQ(parse_channel(to_string(ch)), ch);
  }
  EXPECT_EQ(parse_channel("OVRL"), Channel::kOvrl);
  EXPECT_THROW(parse_channel("loud"), InvalidInput);
}

TEST(Embeddings, RoundTripIsExact) {
  TempDir dir;
  EmbeddingBlock b{3, 4, {1.5f, -2.f, 0.f, 1e-7f, 3.f, 4.f, 5.f, 6.f, 7.f, 8.f, 9.f, -1e20f}};
  write_embeddings(dir / "e.bin", b);
  const auto back = read_embeddings(dir / "e.bin");
  EXPECT_EQ(back.count, 3u);
  EXPECT_EQ(back.dim, 4u);
  EXPECT_EQ(back.values, b.values);
  EXPECT_EQ(std::filesystem::file_size(dir / "e.bin"), 16u + 12u * 4u);
}

TEST(Embeddings, BadMagic) {
  TempDir dir;
  aura::test::write_file(dir / "e.bin", std::string("NOTMAGIC\x01\0\0\0\x01\0\0\0\0\0\0\0", 20));
  try {
    read_embeddings(dir / "e.bin");
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
}

TEST(Embeddings, TruncatedAndTrailing) {
  TempDir dir;
  write_block(dir / "e.bin", 2, 3);
  const auto bytes = aura::test::read_file(dir / "e.bin");
  aura::test::write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 1));
  aura::test::write_file(dir / "long.bin", bytes + "x");
  EXPECT_THROW(read_embeddings(dir / "short.bin"), InvalidInput);
  EXPECT_THROW(read_embeddings(dir / "long.bin"), InvalidInput);
}

TEST(Load, ThreeRowsDim128) {
  TempDir dir;
  aura::test::write_file(dir / "m.jsonl",
                         manifest_line("a") + manifest_line("b", 3.0, "babble") + "\n" + manifest_line("c"));
  write_block(dir / "e.bin", 3, 128);
  const auto c = load_collection(dir / "m.jsonl", dir / "e.bin");
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.dim(), 128u);
  EXPECT_EQ(c.model_ids(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c[1].noise_label, "babble");
  EXPECT_FALSE(c[0].noise_label.has_value());
  EXPECT_FLOAT_EQ(c[1].embedding[0], 64.f);
  EXPECT_NEAR(dmos(c[2], "b").ovrl, -0.5, 1e-12);
}

TEST(Load, RowCountMismatch) {
  TempDir dir;
  aura::test::write_file(dir / "m.jsonl", manifest_line("a") + manifest_line("b") + manifest_line("c"));
  write_block(dir / "e.bin", 2, 128);
  try {
    load_collection(dir / "m.jsonl", dir / "e.bin");
    FAIL();
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row-count mismatch"), std::string::npos);
    EXPECT_NE(msg.find("3"), std::string::npos);
    EXPECT_NE(msg.find("2"), std::string::npos);
  }
}

TEST(Load, MosOutOfRangeNamesClip) {
  TempDir dir;
  aura::test::write_file(dir / "m.jsonl", manifest_line("fine") + manifest_line("noisy-17", 5.7));
  write_block(dir / "e.bin", 2, 4);
  try {
    load_collection(dir / "m.jsonl", dir / "e.bin");
    FAIL();
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("MOS out of range"), std::string::npos);
    EXPECT_NE(msg.find("noisy-17"), std::string::npos);
  }
}

TEST(Load, ExpectedDimEnforced) {
  TempDir dir;
  aura::test::write_file(dir / "m.jsonl", manifest_line("a"));
  write_block(dir / "e.bin", 1, 8);
  EXPECT_NO_THROW(load_collection(dir / "m.jsonl", dir / "e.bin", {8}));
  EXPECT_THROW(load_collection(dir / "m.jsonl", dir / "e.bin", {16}), InvalidInput);
}

TEST(Load, MalformedManifestLines) {
  TempDir dir;
  write_block(dir / "e.bin", 1, 2);
  for (const std::string bad :
       {"{not json}\n", "{\"noise_label\": null}\n", "{\"clip_id\": \"a\", \"scores\": []}\n",
        "{\"clip_id\": \"a\", \"scores\": {\"m\": {\"before\": [3, 3]}}}\n",
        "{\"clip_id\": \"a\", \"noise_label\": 5}\n"}) {
    aura::test::write_file(dir / "m.jsonl", bad);
    EXPECT_THROW(load_collection(dir / "m.jsonl", dir / "e.bin"), InvalidInput) << bad;
  }
}

TEST(Load, MissingFiles) {
  TempDir dir;
  EXPECT_THROW(load_collection(dir / "nope.jsonl", dir / "nope.bin"), InvalidInput);
}

TEST(Load, WriteThenReadRoundTrip) {
  TempDir dir;
  std::vector<ClipRecord> recs;
  for (int i = 0; i < 5; ++i) {
    ClipRecord r = scored("clip-" + std::to_string(i), {0.25f * i, -1.f * i, 3.f},
                          pair_of({1.0 + 0.5 * i, 2.25, 3.125}, {4.5, 1.0 + 0.25 * i, 2.0}), "zeta");
    r.scores["alpha"] = pair_of({2, 2, 2}, {3, 3, 3});
    if (i % 2) r.noise_label = "cat-" + std::to_string(i);
    recs.push_back(r);
  }
  ClipCollection c(3, {"zeta", "alpha"}, recs);
  write_collection(c, dir / "m.jsonl", dir / "e.bin");
  const auto back = load_collection(dir / "m.jsonl", dir / "e.bin");
  EXPECT_EQ(back.records(), c.records());
  EXPECT_EQ(back.model_ids(), c.model_ids());
}

TEST(Load, PointsMatrix) {
  ClipCollection c(2, {"a"}, {scored("x", {1.f, 2.f}, pair_of({3, 3, 3}, {3, 3, 3})),
                              scored("y", {3.f, 4.f}, pair_of({3, 3, 3}, {3, 3, 3}))});
  const Matrix p = c.points();
  EXPECT_EQ(p(1, 0), 3.0);
  EXPECT_EQ(p(0, 1), 2.0);
}
