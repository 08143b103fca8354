//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <map>
#include <set>

#include "differ/smiles.hpp"
#include "helpers.hpp"

using namespace differ;
using namespace differ::smiles;

TEST_CASE("lexer: two-letter elements are single tokens") {
  auto toks = lex("CCl");
  REQUIRE(toks.size() == 2);
  CHECK(toks[0].text == "C");
  CHECK(toks[1].text == "Cl");
}

TEST_CASE("lexer: benzene is 8 tokens") {
  auto toks = lex("c1ccccc1");
  CHECK(toks.size() == 8);
}

TEST_CASE("lexer: bracket atom is one token") {
  auto toks = lex("[NH3+]");
  REQUIRE(toks.size() == 1);
  CHECK(toks[0].text == "[NH3+]");
}

TEST_CASE("lexer: surface forms concatenate back to the input") {
  for (const std::string s :
       {"CC(=O)OC1=CC=CC=C1C(=O)O", "[13CH4]", "C%12CCCCC%12",
        "F/C=C\\F", "c1ccc2ccccc2c1", "[Na+].[Cl-]"}) {
    std::string joined;
    for (const auto& t : lex(s)) joined += t.text;
    CHECK(joined == s);
  }
}

TEST_CASE("lexer: errors carry byte offsets") {
  try {
    lex("CC?C");
    FAIL("expected LexError");
  } catch (const LexError& e) {
    CHECK(e.offset == 2);
  }
  CHECK_THROWS_AS(lex("C[NH"), LexError);
  CHECK_THROWS_AS(lex(""), LexError);
}

TEST_CASE("parse: cyclopropane has 3 atoms and 3 bonds") {
  auto g = parse("C1CC1");
  CHECK(g.atoms.size() == 3);
  CHECK(g.bonds.size() == 3);
}

TEST_CASE("parse: acetic acid") {
  auto g = parse("CC(=O)O");
  REQUIRE(g.atoms.size() == 4);
  int doubles = 0;
  for (const auto& b : g.bonds) doubles += b.order == BondOrder::Double;
  CHECK(doubles == 1);
  CHECK(g.bonds.size() == 3);
}

TEST_CASE("parse: unclosed ring is an error") {
  CHECK_THROWS_AS(parse("C1CC"), ParseError);
  CHECK_THROWS_AS(parse("C(C"), ParseError);
  CHECK_THROWS_AS(parse("CC)C"), ParseError);
  CHECK_THROWS_AS(parse("C="), ParseError);
}

TEST_CASE("parse: dots make disconnected components") {
  auto g = parse("CCO.CC");
  CHECK(g.components().size() == 2);
}

TEST_CASE("parse: bracket features survive") {
  auto g = parse("[13C@H2+:5]");
  REQUIRE(g.atoms.size() == 1);
  const auto& a = g.atoms[0];
  CHECK(a.isotope == 13);
  CHECK(a.element == "C");
  CHECK(a.chirality == Chirality::Ccw);
  CHECK(a.explicit_h == 2);
  CHECK(a.formal_charge == 1);
  CHECK(a.atom_map == 5);
}

TEST_CASE("implicit hydrogen counts for 20 hand-listed molecules") {
  // (smiles, total H over all heavy atoms)
  const std::vector<std::pair<std::string, int>> cases = {
      {"C", 4},           {"CC", 6},         {"C=C", 4},
      {"C#C", 2},         {"CO", 4},         {"C=O", 2},
      {"CN", 5},          {"C#N", 1},        {"CCl", 3},
      {"O", 2},           {"N", 3},          {"CS", 4},
      {"c1ccccc1", 6},    {"c1ccncc1", 5},   {"CC(=O)O", 4},
      {"CC(=O)N", 5},     {"C1CC1", 6},      {"C1CCCCC1", 12},
      {"CC(C)C", 10},     {"ClC(Cl)Cl", 1}};
  for (const auto& [s, expected] : cases) {
    auto g = parse(s);
    int total = 0;
    for (std::size_t i = 0; i < g.atoms.size(); ++i)
      total += hydrogen_count(g, static_cast<int>(i));
    INFO("molecule ", s);
    CHECK(total == expected);
  }
}

TEST_CASE("write: chain reversal from the far root") {
  auto g = parse("CCO");
  CHECK(write(g, 2) == "OCC");
}

TEST_CASE("write: every root round-trips to an isomorphic graph") {
  for (const std::string s :
       {"CC(=O)OC", "c1ccccc1O", "C1CC1CC(N)C=O", "FC(F)(F)c1ccccc1",
        "CC(C)(C)OC(=O)N", "[NH3+]CC([O-])=O"}) {
    auto g = parse(s);
    for (std::size_t r = 0; r < g.atoms.size(); ++r) {
      auto back = parse(write(g, static_cast<int>(r)));
      INFO("molecule ", s, " root ", r);
      CHECK(testutil::isomorphic(g, back));
    }
  }
}

TEST_CASE("benzene written from all 6 atoms canonicalizes identically") {
  auto g = parse("c1ccccc1");
  std::set<std::string> canons;
  for (int r = 0; r < 6; ++r) canons.insert(canonical(parse(write(g, r))));
  CHECK(canons.size() == 1);
}

TEST_CASE("random_rooted is deterministic given the seed") {
  auto g = parse("CC(N)C(=O)O");
  Rng a(123), b(123);
  CHECK(random_rooted(g, a) == random_rooted(g, b));
  auto single = parse("C");
  Rng c(7);
  CHECK(random_rooted(single, c) == "C");
}

TEST_CASE("random_rooted picks roots uniformly") {
  auto g = parse("CCOCCN");  // 6-atom asymmetric chain
  Rng rng(99);
  std::map<std::string, int> firsts;
  for (int i = 0; i < 1000; ++i) {
    auto s = random_rooted(g, rng);
    firsts[s.substr(0, 1)]++;
  }
  // roots 0/1,3/4 produce C..., 2 produces O..., 5 produces N...
  CHECK(firsts["O"] / 1000.0 == doctest::Approx(1.0 / 6).epsilon(0.35));
  CHECK(firsts["N"] / 1000.0 == doctest::Approx(1.0 / 6).epsilon(0.35));
  CHECK(firsts["C"] / 1000.0 == doctest::Approx(4.0 / 6).epsilon(0.2));
}

TEST_CASE("canonical: relabeling invariance") {
  Rng rng(4);
  for (const std::string s :
       {"CCO", "CC(=O)OC1CCCCC1", "c1ccc2ccccc2c1", "N#Cc1ccccc1Br"}) {
    auto g = parse(s);
    const auto canon = canonical(g);
    std::vector<int> perm(g.atoms.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    for (int trial = 0; trial < 10; ++trial) {
      for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
      CHECK(canonical(testutil::permute(g, perm)) == canon);
    }
  }
}

TEST_CASE("canonical: OCC equals CCO and is idempotent") {
  CHECK(canonical(parse("OCC")) == canonical(parse("CCO")));
  for (const std::string s : {"CC(N)C(=O)O", "c1ccccc1", "CC.OCC"}) {
    auto c = canonical(parse(s));
    CHECK(canonical(parse(c)) == c);
  }
}

TEST_CASE("canonical: multi-component ordering is set-like") {
  CHECK(canonical(parse("CCO.CC")) == canonical(parse("CC.OCC")));
}

TEST_CASE("canonical: 50 random rootings per molecule collapse to one string") {
  Rng rng(17);
  for (const std::string s :
       {"CC(C)CC1=CC=C(C=C1)C(C)C(=O)O", "c1ccc(cc1)C(=O)NC", "ClCC(Br)CO"}) {
    auto g = parse(s);
    const auto canon = canonical(g);
    for (int i = 0; i < 50; ++i) {
      auto rooted = random_rooted(g, rng);
      CHECK(canonical(parse(rooted)) == canon);
    }
  }
}

TEST_CASE("strip_atom_maps clears maps and nothing else") {
  auto g = parse("[CH3:1][OH:2]");
  auto stripped = strip_atom_maps(g);
  CHECK(stripped.atoms[0].atom_map == 0);
  CHECK(stripped.atoms[1].atom_map == 0);
  CHECK(stripped.atoms[0].element == "C");
  // equal to parse("CO") up to explicit-H bookkeeping
  CHECK(canonical(stripped) == canonical(parse("CO")));
  // unmapped graph unchanged
  auto plain = parse("CCO");
  auto plain2 = strip_atom_maps(plain);
  CHECK(testutil::isomorphic(plain, plain2));
  // commutation
  auto mapped = parse("[CH2:3]=[CH:4]C");
  CHECK(canonical(strip_atom_maps(mapped)) == canonical(mapped));
}

TEST_CASE("root_align: identity reaction gives identical strings") {
  auto p = parse("[CH3:1][CH2:2][OH:3]");
  auto r = parse("[CH3:1][CH2:2][OH:3]");
  for (int root = 0; root < 3; ++root) {
    auto [ps, rs] = root_align(p, r, root);
    CHECK(ps == rs);
  }
}

TEST_CASE("root_align: matching component comes first, maps stripped") {
  auto p = parse("[CH3:1][C:2](=[O:3])[O:4][CH3:5]");
  auto r = parse("[CH3:5][OH:6].[CH3:1][C:2](=[O:3])[OH:4]");
  auto [ps, rs] = root_align(p, r, 4);  // root at the methyl of the ester O-CH3
  CHECK(ps.find(':') == std::string::npos);
  CHECK(rs.find(':') == std::string::npos);
  // reactant string must start with the alcohol methyl
  CHECK(rs.substr(0, 2) == "CO");
  CHECK(ps.substr(0, 2) == "CO");
}

TEST_CASE("root_align: unmapped root or missing map is an error") {
  auto p = parse("C[CH2:2]O");
  auto r = parse("[CH2:2]=C");
  CHECK_THROWS_AS(root_align(p, r, 0), AlignError);
  auto r2 = parse("CC");
  CHECK_THROWS_AS(root_align(p, r2, 1), AlignError);
}

TEST_CASE("root_align: aligned pairs share longer prefixes than canonical pairs") {
  // 20 hand-mapped reaction pairs (ester/amide cleavage style)
  const std::vector<std::pair<std::string, std::string>> reactions = {
      {"[CH3:1][C:2](=[O:3])[O:4][CH3:5]", "[CH3:1][C:2](=[O:3])O.[OH:4][CH3:5]"},
      {"[CH3:1][C:2](=[O:3])[NH:4][CH3:5]", "[CH3:1][C:2](=[O:3])O.[NH2:4][CH3:5]"},
      {"[CH3:1][CH2:2][O:3][C:4](=[O:5])[CH3:6]", "[CH3:1][CH2:2][OH:3].[C:4](=[O:5])(O)[CH3:6]"},
      {"[CH3:1][NH:2][CH3:3]", "[CH3:1]Br.[NH2:2][CH3:3]"},
      {"[CH3:1][CH2:2][NH:3][CH2:4][CH3:5]", "[CH3:1][CH2:2]Br.[NH2:3][CH2:4][CH3:5]"},
      {"[CH3:1][O:2][C:3](=[O:4])[CH2:5][CH3:6]", "[CH3:1][OH:2].[C:3](=[O:4])(O)[CH2:5][CH3:6]"},
      {"[CH3:1][C:2](=[O:3])[O:4][CH2:5][CH3:6]", "[CH3:1][C:2](=[O:3])O.[OH:4][CH2:5][CH3:6]"},
      {"[CH3:1][CH2:2][C:3](=[O:4])[NH:5][CH3:6]", "[CH3:1][CH2:2][C:3](=[O:4])O.[NH2:5][CH3:6]"},
      {"[CH2:1]([CH3:2])[NH:3][CH3:4]", "[CH2:1]([CH3:2])Br.[NH2:3][CH3:4]"},
      {"[CH3:1][C:2](=[O:3])[O:4][CH:5]([CH3:6])[CH3:7]",
       "[CH3:1][C:2](=[O:3])O.[OH:4][CH:5]([CH3:6])[CH3:7]"},
      {"[CH3:1][O:2][C:3](=[O:4])[CH3:5]", "[CH3:1][OH:2].[C:3](=[O:4])(O)[CH3:5]"},
      {"[NH2:1][CH2:2][CH2:3][OH:4]", "[NH2:1][CH2:2][CH2:3]Br.[OH2:4]"},
      {"[CH3:1][S:2][CH3:3]", "[CH3:1]Br.[SH:2][CH3:3]"},
      {"[CH3:1][CH2:2][O:3][CH2:4][CH3:5]", "[CH3:1][CH2:2][OH:3].Br[CH2:4][CH3:5]"},
      {"[CH3:1][C:2](=[O:3])[NH:4][CH2:5][CH3:6]", "[CH3:1][C:2](=[O:3])O.[NH2:4][CH2:5][CH3:6]"},
      {"[CH3:1][CH2:2][C:3](=[O:4])[O:5][CH3:6]", "[CH3:1][CH2:2][C:3](=[O:4])O.[OH:5][CH3:6]"},
      {"[CH3:1][NH:2][CH2:3][CH3:4]", "[CH3:1]Br.[NH2:2][CH2:3][CH3:4]"},
      {"[CH3:1][O:2][CH3:3]", "[CH3:1][OH:2].Br[CH3:3]"},
      {"[CH3:1][C:2](=[O:3])[O:4][CH2:5][CH2:6][CH3:7]",
       "[CH3:1][C:2](=[O:3])O.[OH:4][CH2:5][CH2:6][CH3:7]"},
      {"[CH2:1]=[CH:2][C:3](=[O:4])[O:5][CH3:6]", "[CH2:1]=[CH:2][C:3](=[O:4])O.[OH:5][CH3:6]"}};
  auto common_prefix = [](const std::string& a, const std::string& b) {
    std::size_t i = 0;
    while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
    return i;
  };
  // For every admissible product root, the aligned reactant string should
  // overlap the rooted product more than the fixed canonical reactant string
  // does on average.
  double aligned_total = 0, canon_total = 0;
  int n = 0;
  for (const auto& [ps, rs] : reactions) {
    auto p = parse(ps);
    auto r = parse(rs);
    const std::string canon_r = canonical(strip_atom_maps(r));
    for (std::size_t root = 0; root < p.atoms.size(); ++root) {
      if (p.atoms[root].atom_map == 0) continue;
      auto [ap, ar] = root_align(p, r, static_cast<int>(root));
      aligned_total += static_cast<double>(common_prefix(ap, ar));
      canon_total += static_cast<double>(common_prefix(ap, canon_r));
      ++n;
    }
  }
  CHECK(aligned_total / n > canon_total / n);
}

TEST_CASE("stereo markers survive a round trip") {
  auto g = parse("F/C=C\\F");
  int up = 0, down = 0;
  for (const auto& b : g.bonds) {
    up += b.stereo == BondStereo::Up;
    down += b.stereo == BondStereo::Down;
  }
  CHECK(up == 1);
  CHECK(down == 1);
  auto back = parse(write(g, 0));
  CHECK(testutil::isomorphic(g, back));
}
