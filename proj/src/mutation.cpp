#include "mutinv/mutation.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mutinv/rng.hpp"

namespace mutinv {

const char* mutation_operator_name(MutationOperator op) {
  switch (op) {
    case MutationOperator::ABS: return "ABS";
    case MutationOperator::AOR: return "AOR";
    case MutationOperator::LCR: return "LCR";
    case MutationOperator::ROR: return "ROR";
    case MutationOperator::UOI: return "UOI";
  }
  return "?";
}

MutationOperator mutation_operator_from_name(const std::string& name) {
  if (name == "ABS") return MutationOperator::ABS;
  if (name == "AOR") return MutationOperator::AOR;
  if (name == "LCR") return MutationOperator::LCR;
  if (name == "ROR") return MutationOperator::ROR;
  if (name == "UOI") return MutationOperator::UOI;
  throw std::invalid_argument("unknown mutation operator: " + name);
}

namespace {

bool is_numeric_expr(const Node& n) {
  switch (n.kind) {
    case NodeKind::Num:
    case NodeKind::Var:
    case NodeKind::Arith:
    case NodeKind::Neg:
    case NodeKind::Abs:
      return true;
    default:
      return false;
  }
}

const char kArithOps[4] = {'+', '-', '*', '/'};
const RelOp kRelOps[6] = {RelOp::Gt, RelOp::Ge, RelOp::Lt,
                          RelOp::Le, RelOp::Eq, RelOp::Ne};

RelOp rel_from_token(const std::string& tok) {
  for (RelOp r : kRelOps)
    if (tok == rel_op_token(r)) return r;
  throw std::invalid_argument("bad relational token: " + tok);
}

int find_parent(const Program& p, int node_id) {
  for (std::size_t i = 0; i < p.nodes.size(); ++i)
    for (int k : p.nodes[i].kids)
      if (k == node_id) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::vector<MutationSite> enumerate_sites(const Program& p) {
  std::vector<MutationSite> sites;
  for (std::size_t id = 0; id < p.nodes.size(); ++id) {
    const Node& n = p.nodes[id];
    if (is_numeric_expr(n)) {
      sites.push_back({static_cast<int>(id), MutationOperator::ABS, "", {"abs"}});
    }
    if (n.kind == NodeKind::Arith) {
      MutationSite s{static_cast<int>(id), MutationOperator::AOR,
                     std::string(1, n.arith), {}};
      for (char c : kArithOps)
        if (c != n.arith) s.replacements.emplace_back(1, c);
      sites.push_back(std::move(s));
    }
    if (n.kind == NodeKind::Logic) {
      sites.push_back({static_cast<int>(id), MutationOperator::LCR,
                       logic_op_token(n.logic),
                       {n.logic == LogicOp::And ? "or" : "and"}});
    }
    if (n.kind == NodeKind::Rel) {
      MutationSite s{static_cast<int>(id), MutationOperator::ROR,
                     rel_op_token(n.rel), {}};
      for (RelOp r : kRelOps)
        if (r != n.rel) s.replacements.emplace_back(rel_op_token(r));
      sites.push_back(std::move(s));
    }
    if (is_numeric_expr(n)) {
      sites.push_back({static_cast<int>(id), MutationOperator::UOI, "", {"-"}});
    }
  }
  return sites;
}

Mutant apply(const Program& p, const MutationSite& site,
             const std::string& replacement) {
  if (site.node_id < 0 || site.node_id >= static_cast<int>(p.nodes.size()))
    throw std::invalid_argument("stale mutation site: node id absent");
  if (std::find(site.replacements.begin(), site.replacements.end(),
                replacement) == site.replacements.end())
    throw std::invalid_argument("illegal replacement '" + replacement + "'");

  Mutant m;
  m.base_hash = structural_hash(p);
  m.op = site.op;
  m.node_id = site.node_id;
  m.original = site.original;
  m.replacement = replacement;
  m.program = p;

  Node& target = m.program.nodes[site.node_id];
  switch (site.op) {
    case MutationOperator::AOR:
      target.arith = replacement[0];
      break;
    case MutationOperator::ROR:
      target.rel = rel_from_token(replacement);
      break;
    case MutationOperator::LCR:
      target.logic = replacement == "and" ? LogicOp::And : LogicOp::Or;
      break;
    case MutationOperator::ABS:
    case MutationOperator::UOI: {
      const int parent = find_parent(m.program, site.node_id);
      if (parent < 0)
        throw std::invalid_argument("cannot wrap a top-level statement");
      Node wrapper;
      wrapper.kind =
          site.op == MutationOperator::ABS ? NodeKind::Abs : NodeKind::Neg;
      wrapper.kids.push_back(site.node_id);
      wrapper.line = target.line;
      wrapper.col = target.col;
      const int wrapper_id = static_cast<int>(m.program.nodes.size());
      m.program.nodes.push_back(std::move(wrapper));
      for (int& k : m.program.nodes[parent].kids)
        if (k == site.node_id) k = wrapper_id;
      // The mutated node is the inserted wrapper: coverage of the wrapper
      // tells whether the mutation was exercised.
      m.node_id = wrapper_id;
      m.original = "";
      m.replacement = site.op == MutationOperator::ABS ? "abs(_)" : "-(_)";
      break;
    }
  }
  return m;
}

MutantBatch generate_mutants(const Program& p,
                             const std::vector<MutationOperator>& ops,
                             std::size_t limit, std::uint64_t seed) {
  if (limit < 1) throw std::invalid_argument("limit must be >= 1");

  std::vector<Mutant> universe;
  std::unordered_map<std::size_t, std::vector<std::size_t>> seen;
  for (const MutationSite& site : enumerate_sites(p)) {
    if (std::find(ops.begin(), ops.end(), site.op) == ops.end()) continue;
    for (const std::string& rep : site.replacements) {
      Mutant m = apply(p, site, rep);
      const std::size_t h = structural_hash(m.program);
      bool dup = false;
      for (std::size_t idx : seen[h])
        if (structurally_equal(universe[idx].program, m.program)) {
          dup = true;
          break;
        }
      if (dup) continue;
      seen[h].push_back(universe.size());
      universe.push_back(std::move(m));
    }
  }

  MutantBatch batch;
  std::vector<std::size_t> order(universe.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SeededRng rng(seed);
  rng.shuffle(order);

  if (limit >= universe.size()) {
    batch.exhausted = limit > universe.size();
    // Whole universe: keep enumeration order for readability.
    batch.mutants = std::move(universe);
  } else {
    order.resize(limit);
    for (std::size_t i : order) batch.mutants.push_back(std::move(universe[i]));
  }
  for (std::size_t i = 0; i < batch.mutants.size(); ++i) {
    std::ostringstream name;
    name << "M";
    if (i + 1 < 10) name << '0';
    name << (i + 1);
    batch.mutants[i].id = name.str();
  }
  return batch;
}

nlohmann::json mutant_manifest_entry(const Mutant& m, const Program& base) {
  auto split_lines = [](const std::string& s) {
    std::vector<std::string> lines;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
  };
  const auto base_lines = split_lines(pretty_print(base));
  const auto mut_lines = split_lines(pretty_print(m.program));

  nlohmann::json diff = nlohmann::json::array();
  const std::size_t n = std::max(base_lines.size(), mut_lines.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string b = i < base_lines.size() ? base_lines[i] : "";
    const std::string u = i < mut_lines.size() ? mut_lines[i] : "";
    if (b != u)
      diff.push_back({{"line", i + 1}, {"base", b}, {"mutant", u}});
  }

  nlohmann::json j;
  j["id"] = m.id;
  j["operator"] = mutation_operator_name(m.op);
  j["node_id"] = m.node_id;
  j["original"] = m.original;
  j["replacement"] = m.replacement;
  j["diff"] = diff;
  return j;
}

}  // namespace mutinv
