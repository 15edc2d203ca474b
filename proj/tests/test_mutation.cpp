#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "mutinv/mutation.hpp"

using namespace mutinv;

namespace {

const std::vector<MutationOperator> kAllOps = {
    MutationOperator::ABS, MutationOperator::AOR, MutationOperator::LCR,
    MutationOperator::ROR, MutationOperator::UOI};

// Independent oracle: regenerate every single-edit variant by recursive
// source-to-source rewriting, dedup by canonical text. Used to cross-check
// enumerate_sites/apply without touching their code paths.
struct BruteForce {
  std::set<std::string> variants;

  void run(const Program& p, const std::vector<MutationOperator>& ops) {
    for (std::size_t id = 0; id < p.nodes.size(); ++id) {
      const Node& n = p.nodes[id];
      const bool numeric = n.kind == NodeKind::Num || n.kind == NodeKind::Var ||
                           n.kind == NodeKind::Arith ||
                           n.kind == NodeKind::Neg || n.kind == NodeKind::Abs;
      auto enabled = [&ops](MutationOperator op) {
        for (auto o : ops)
          if (o == op) return true;
        return false;
      };
      if (numeric && enabled(MutationOperator::ABS))
        add_wrapped(p, static_cast<int>(id), NodeKind::Abs);
      if (numeric && enabled(MutationOperator::UOI))
        add_wrapped(p, static_cast<int>(id), NodeKind::Neg);
      if (n.kind == NodeKind::Arith && enabled(MutationOperator::AOR))
        for (char c : {'+', '-', '*', '/'})
          if (c != n.arith) add_edited(p, static_cast<int>(id), [c](Node& m) {
            m.arith = c;
          });
      if (n.kind == NodeKind::Rel && enabled(MutationOperator::ROR))
        for (RelOp r : {RelOp::Gt, RelOp::Ge, RelOp::Lt, RelOp::Le, RelOp::Eq,
                        RelOp::Ne})
          if (r != n.rel) add_edited(p, static_cast<int>(id), [r](Node& m) {
            m.rel = r;
          });
      if (n.kind == NodeKind::Logic && enabled(MutationOperator::LCR))
        add_edited(p, static_cast<int>(id), [](Node& m) {
          m.logic = m.logic == LogicOp::And ? LogicOp::Or : LogicOp::And;
        });
    }
  }

  template <class Edit>
  void add_edited(const Program& p, int id, Edit edit) {
    Program q = p;
    edit(q.nodes[id]);
    variants.insert(pretty_print(q));
  }

  void add_wrapped(const Program& p, int id, NodeKind wrapper_kind) {
    Program q = p;
    Node wrapper;
    wrapper.kind = wrapper_kind;
    wrapper.kids.push_back(id);
    const int wid = static_cast<int>(q.nodes.size());
    q.nodes.push_back(wrapper);
    for (auto& node : q.nodes)
      if (&node != &q.nodes[wid])
        for (int& k : node.kids)
          if (k == id) k = wid;
    variants.insert(pretty_print(q));
  }
};

std::set<std::string> generated_texts(const Program& p,
                                      const std::vector<MutationOperator>& ops) {
  const MutantBatch batch = generate_mutants(p, ops, 1u << 20, 1);
  std::set<std::string> out;
  for (const auto& m : batch.mutants) out.insert(pretty_print(m.program));
  return out;
}

}  // namespace

TEST_CASE("enumerate_sites: a + b yields one AOR site with 3 replacements") {
  const Program p = parse("x := a + b;");
  int aor = 0;
  for (const auto& s : enumerate_sites(p))
    if (s.op == MutationOperator::AOR) {
      ++aor;
      CHECK(s.replacements.size() == 3);
      CHECK(s.original == "+");
    }
  CHECK(aor == 1);
}

TEST_CASE("enumerate_sites: relational guard") {
  const Program p = parse("if L1 > 800 then x := 1; end");
  int ror = 0, abs_sites = 0, uoi_sites = 0;
  for (const auto& s : enumerate_sites(p)) {
    if (s.op == MutationOperator::ROR) {
      ++ror;
      CHECK(s.replacements.size() == 5);
    }
    if (s.op == MutationOperator::ABS) ++abs_sites;
    if (s.op == MutationOperator::UOI) ++uoi_sites;
  }
  CHECK(ror == 1);
  CHECK(abs_sites == 3);  // L1, 800, and the literal 1
  CHECK(uoi_sites == 3);
}

TEST_CASE("enumerate_sites: literal-only program") {
  const Program p = parse("P1 := 1;");
  const auto sites = enumerate_sites(p);
  REQUIRE(sites.size() == 2);
  for (const auto& s : sites)
    CHECK((s.op == MutationOperator::ABS || s.op == MutationOperator::UOI));
}

TEST_CASE("apply: AOR and ROR token replacement") {
  {
    const Program p = parse("x := a + b;");
    for (const auto& s : enumerate_sites(p))
      if (s.op == MutationOperator::AOR) {
        const Mutant m = apply(p, s, "-");
        CHECK(pretty_print(m.program) == "x := a - b;\n");
      }
  }
  {
    const Program p = parse("if L1 > 800 then x := 1; end");
    for (const auto& s : enumerate_sites(p))
      if (s.op == MutationOperator::ROR) {
        const Mutant m = apply(p, s, "<=");
        CHECK(pretty_print(m.program).find("L1 <= 800") != std::string::npos);
      }
  }
}

TEST_CASE("apply: errors on stale sites and illegal replacements") {
  const Program p = parse("x := a + b;");
  const auto sites = enumerate_sites(p);
  MutationSite stale = sites[0];
  stale.node_id = 999;
  CHECK_THROWS_AS(apply(p, stale, stale.replacements[0]),
                  std::invalid_argument);
  for (const auto& s : sites)
    if (s.op == MutationOperator::AOR)
      CHECK_THROWS_AS(apply(p, s, "+"), std::invalid_argument);
}

TEST_CASE("single-edit law: AST diff has exactly one edited node") {
  const Program p = parse(
      "if L1 > 800 and L2 < 100 then x := a + b * 2; else x := -a; end");
  const MutantBatch batch = generate_mutants(p, kAllOps, 1u << 20, 3);
  for (const Mutant& m : batch.mutants) {
    CHECK_FALSE(structurally_equal(p, m.program));
    if (m.op == MutationOperator::ABS || m.op == MutationOperator::UOI) {
      CHECK(m.program.nodes.size() == p.nodes.size() + 1);
      // All original nodes are untouched except one parent pointer.
      int changed = 0;
      for (std::size_t i = 0; i < p.nodes.size(); ++i)
        if (p.nodes[i].kids != m.program.nodes[i].kids) ++changed;
      CHECK(changed == 1);
    } else {
      CHECK(m.program.nodes.size() == p.nodes.size());
      int changed = 0;
      for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        const Node& a = p.nodes[i];
        const Node& b = m.program.nodes[i];
        if (a.arith != b.arith || a.rel != b.rel || a.logic != b.logic)
          ++changed;
        CHECK(a.kids == b.kids);
      }
      CHECK(changed == 1);
    }
  }
}

TEST_CASE("generate_mutants: determinism and sampling") {
  const Program p = parse(
      "if L1 > 800 and L2 < 100 then x := a + b * 2; else x := -a; end");
  const MutantBatch a = generate_mutants(p, kAllOps, 10, 42);
  const MutantBatch b = generate_mutants(p, kAllOps, 10, 42);
  REQUIRE(a.mutants.size() == 10);
  CHECK_FALSE(a.exhausted);
  for (std::size_t i = 0; i < a.mutants.size(); ++i) {
    CHECK(a.mutants[i].id == b.mutants[i].id);
    CHECK(structurally_equal(a.mutants[i].program, b.mutants[i].program));
  }
  const MutantBatch c = generate_mutants(p, kAllOps, 10, 43);
  bool any_difference = false;
  for (std::size_t i = 0; i < c.mutants.size(); ++i)
    if (!structurally_equal(a.mutants[i].program, c.mutants[i].program))
      any_difference = true;
  CHECK(any_difference);
}

TEST_CASE("generate_mutants: AOR universe of x := a + b; has 3 members") {
  const Program p = parse("x := a + b;");
  const MutantBatch batch =
      generate_mutants(p, {MutationOperator::AOR}, 1u << 20, 1);
  CHECK(batch.mutants.size() == 3);
  CHECK(batch.exhausted);
}

TEST_CASE("generate_mutants: limit over universe returns all with warning") {
  const Program p = parse("P1 := 1;");
  const MutantBatch batch = generate_mutants(p, kAllOps, 100, 1);
  CHECK(batch.exhausted);
  CHECK(batch.mutants.size() == 2);  // abs(1) and -1
}

TEST_CASE("count law against the brute-force enumerator") {
  const char* corpus[] = {
      "P1 := 1;",
      "x := a + b;",
      "x := a * b - c;",
      "if L1 > 800 then P1 := 0; end",
      "if L1 > 800 and L2 < 100 then P1 := 0; else P1 := 1; end",
      "x := -a; y := abs(x);",
      "if not (L1 >= 5) or L2 = 3 then x := a / b; end",
      "x := 1; if L1 <> 2 then x := x + 1; end",
  };
  for (const char* text : corpus) {
    const Program p = parse(text);
    BruteForce oracle;
    oracle.run(p, kAllOps);
    CHECK(generated_texts(p, kAllOps) == oracle.variants);
    // Restricted operator subsets must agree too.
    BruteForce aor_only;
    aor_only.run(p, {MutationOperator::AOR});
    CHECK(generated_texts(p, {MutationOperator::AOR}) == aor_only.variants);
  }
}

TEST_CASE("validity preservation: mutants still validate") {
  const Program p = parse(
      "if L1 > 800 and L2 < 100 then P1 := 0; else P1 := L1 / 2; end");
  DeclaredNames decl;
  decl.sensors = {"L1", "L2"};
  decl.actuators = {"P1"};
  REQUIRE(validate(p, decl).empty());
  const MutantBatch batch = generate_mutants(p, kAllOps, 1u << 20, 1);
  for (const Mutant& m : batch.mutants)
    CHECK(validate(m.program, decl).empty());
}
