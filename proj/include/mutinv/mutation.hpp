#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mutinv/dsl.hpp"

namespace mutinv {

// The five sufficient mutation operators.
enum class MutationOperator { ABS, AOR, LCR, ROR, UOI };

const char* mutation_operator_name(MutationOperator op);
MutationOperator mutation_operator_from_name(const std::string& name);

struct MutationSite {
  int node_id = -1;
  MutationOperator op{};
  std::string original;                   // token at the site ("+" , ">", ...)
  std::vector<std::string> replacements;  // never contains the original
};

struct Mutant {
  std::string id;
  std::size_t base_hash = 0;  // structural hash of the base program
  MutationOperator op{};
  int node_id = -1;
  std::string original;
  std::string replacement;
  Program program;
};

// Deterministic, complete site enumeration in node-id order:
// arithmetic nodes -> AOR (3 replacements), relational -> ROR (5),
// logical connectors -> LCR (1), every numeric-valued subexpression ->
// ABS (wrap in abs) and UOI (wrap in unary minus).
std::vector<MutationSite> enumerate_sites(const Program& p);

// Applies one replacement at one site. Untouched node ids are preserved;
// ABS/UOI insert a wrapper node with a fresh id at the end of the arena.
Mutant apply(const Program& p, const MutationSite& site,
             const std::string& replacement);

struct MutantBatch {
  std::vector<Mutant> mutants;
  bool exhausted = false;  // limit exceeded the (deduplicated) universe
};

// Full universe restricted to `ops`, structurally deduplicated, then sampled
// without replacement under `seed`. Mutant ids are "M01", "M02", ...
MutantBatch generate_mutants(const Program& p,
                             const std::vector<MutationOperator>& ops,
                             std::size_t limit, std::uint64_t seed);

// Manifest entry: id, operator, node id, tokens, and a line-level source diff
// against the pretty-printed base.
nlohmann::json mutant_manifest_entry(const Mutant& m, const Program& base);

}  // namespace mutinv
