#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

#include "wfa/automata.hpp"
#include "wfa/convex_opt.hpp"
#include "wfa/harness.hpp"
#include "wfa/hankel.hpp"

namespace wfa::io {

using Json = nlohmann::json;

/// A WA or Pnfa document: `type` is "wa" or "pnfa"; matrices are arrays of rows.
struct AutomatonDocument {
  std::variant<WeightedAutomaton, Pnfa> value;
  std::optional<std::uint64_t> seed;
};

Json to_json(const WeightedAutomaton& wa, std::optional<std::uint64_t> seed = std::nullopt);
Json to_json(const Pnfa& p, std::optional<std::uint64_t> seed = std::nullopt);
AutomatonDocument automaton_from_json(const Json& j);

/// Loads a Pnfa document; rejects plain WA documents.
Pnfa pnfa_from_json(const Json& j);
/// Loads either kind; a Pnfa is embedded as its weighted automaton.
WeightedAutomaton wa_from_json(const Json& j);

/// `prefixes`, `suffixes` as arrays of symbol arrays; with blocks also `H`,
/// `H_a` (row-major nested arrays) and an `estimator` tag ("exact" when the
/// blocks came from an automaton).
Json to_json(const Basis& basis);
Json to_json(const Basis& basis, const HankelBlocks& blocks);
Basis basis_from_json(const Json& j);
/// Requires the block fields.
HankelBlocks blocks_from_json(const Json& j);

Json to_json(const CoSolution& sol, const Basis& basis);

/// One string per line, symbols as space-separated non-negative integers;
/// an empty line is the empty string.
void write_sample(std::ostream& out, const StringSample& sample);
/// Alphabet size is max symbol + 1 unless given.
StringSample read_sample(std::istream& in, std::optional<int> alphabet_size = std::nullopt);

ExperimentConfig experiment_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
StringSample read_sample_file(const std::string& path, std::optional<int> alphabet_size = std::nullopt);
void write_sample_file(const std::string& path, const StringSample& sample);

/// FNV-1a digest of a document's compact dump, 16 hex digits.
std::string digest(const Json& j);

}  // namespace wfa::io
