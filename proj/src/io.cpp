#include "wfa/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace wfa::io {

namespace {

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json words_json(const std::vector<Word>& words) {
  Json a = Json::array();
  for (const auto& w : words) a.push_back(w);
  return a;
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw InputError(std::string("JSON document is missing field '") + name + "'");
  }
  return j.at(name);
}

double number(const Json& j) {
  if (!j.is_number()) throw InputError("expected a number in JSON document");
  return j.get<double>();
}

Vector vector_from(const Json& j, Index expected) {
  if (!j.is_array()) throw InputError("expected a JSON array for a vector");
  if (expected >= 0 && static_cast<Index>(j.size()) != expected) {
    throw InputError("vector length " + std::to_string(j.size()) + " differs from expected " +
                     std::to_string(expected));
  }
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i]);
  return v;
}

Matrix matrix_from(const Json& j, Index rows, Index cols) {
  if (!j.is_array()) throw InputError("expected a JSON array of rows for a matrix");
  if (rows >= 0 && static_cast<Index>(j.size()) != rows) {
    throw InputError("matrix has " + std::to_string(j.size()) + " rows, expected " +
                     std::to_string(rows));
  }
  const Index r = static_cast<Index>(j.size());
  const Index c = cols >= 0 ? cols : (r ? static_cast<Index>(j[0].size()) : 0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != c) {
      throw InputError("matrix row " + std::to_string(i) + " has the wrong length");
    }
    for (Index k = 0; k < c; ++k) m(i, k) = number(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

std::vector<Matrix> matrices_from(const Json& j, int count, Index n) {
  if (!j.is_array() || static_cast<int>(j.size()) != count) {
    throw InputError("expected " + std::to_string(count) + " matrices");
  }
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(count));
  for (const auto& m : j) out.push_back(matrix_from(m, n, n));
  return out;
}

std::vector<Word> words_from(const Json& j) {
  if (!j.is_array()) throw InputError("expected an array of symbol arrays");
  std::vector<Word> out;
  for (const auto& w : j) {
    if (!w.is_array()) throw InputError("expected a symbol array");
    Word x;
    for (const auto& a : w) {
      if (!a.is_number_integer() || a.get<long long>() < 0) {
        throw InputError("symbols must be non-negative integers");
      }
      x.push_back(a.get<Symbol>());
    }
    out.push_back(std::move(x));
  }
  return out;
}

void put_seed(Json& j, std::optional<std::uint64_t> seed) {
  if (seed) j["seed"] = *seed;
}

std::vector<double> grid_from(const Json& j) {
  std::vector<double> g;
  if (j.is_array()) {
    for (const auto& x : j) g.push_back(number(x));
  } else {
    g.push_back(number(j));
  }
  return g;
}

}  // namespace

Json to_json(const WeightedAutomaton& wa, std::optional<std::uint64_t> seed) {
  Json j;
  j["type"] = "wa";
  j["alphabet_size"] = wa.alphabet_size();
  j["n_states"] = wa.n_states();
  j["alpha1"] = vector_json(wa.alpha1());
  j["alpha_inf"] = vector_json(wa.alpha_inf());
  Json ops = Json::array();
  for (const auto& a : wa.ops()) ops.push_back(matrix_json(a));
  j["ops"] = std::move(ops);
  put_seed(j, seed);
  return j;
}

Json to_json(const Pnfa& p, std::optional<std::uint64_t> seed) {
  Json j;
  j["type"] = "pnfa";
  j["alphabet_size"] = p.alphabet_size();
  j["n_states"] = p.n_states();
  j["initial"] = vector_json(p.initial());
  j["stop"] = vector_json(p.stop());
  Json trans = Json::array();
  for (const auto& a : p.trans()) trans.push_back(matrix_json(a));
  j["trans"] = std::move(trans);
  put_seed(j, seed);
  return j;
}

AutomatonDocument automaton_from_json(const Json& j) {
  const std::string type = field(j, "type").get<std::string>();
  const int m = field(j, "alphabet_size").get<int>();
  const int n = field(j, "n_states").get<int>();
  if (m < 1 || n < 1) throw InputError("alphabet_size and n_states must be >= 1");
  std::optional<std::uint64_t> seed;
  if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  if (type == "wa") {
    return {WeightedAutomaton(vector_from(field(j, "alpha1"), n), vector_from(field(j, "alpha_inf"), n),
                              matrices_from(field(j, "ops"), m, n)),
            seed};
  }
  if (type == "pnfa") {
    return {Pnfa(vector_from(field(j, "initial"), n), matrices_from(field(j, "trans"), m, n),
                 vector_from(field(j, "stop"), n)),
            seed};
  }
  throw InputError("unknown automaton type '" + type + "' (expected wa|pnfa)");
}

Pnfa pnfa_from_json(const Json& j) {
  auto doc = automaton_from_json(j);
  if (auto* p = std::get_if<Pnfa>(&doc.value)) return std::move(*p);
  throw InputError("expected a pnfa document, got a weighted automaton");
}

WeightedAutomaton wa_from_json(const Json& j) {
  auto doc = automaton_from_json(j);
  if (auto* p = std::get_if<Pnfa>(&doc.value)) return pnfa_to_wa(*p);
  return std::get<WeightedAutomaton>(std::move(doc.value));
}

Json to_json(const Basis& basis) {
  Json j;
  j["prefixes"] = words_json(basis.prefixes());
  j["suffixes"] = words_json(basis.suffixes());
  return j;
}

Json to_json(const Basis& basis, const HankelBlocks& blocks) {
  Json j = to_json(basis);
  j["estimator"] = blocks.estimator ? to_string(*blocks.estimator) : std::string("exact");
  j["H"] = matrix_json(blocks.H);
  Json ha = Json::array();
  for (const auto& h : blocks.H_a) ha.push_back(matrix_json(h));
  j["H_a"] = std::move(ha);
  return j;
}

Basis basis_from_json(const Json& j) {
  return Basis(words_from(field(j, "prefixes")), words_from(field(j, "suffixes")));
}

HankelBlocks blocks_from_json(const Json& j) {
  const Basis basis = basis_from_json(j);
  HankelBlocks b;
  b.H = matrix_from(field(j, "H"), basis.n_prefixes(), basis.n_suffixes());
  const Json& ha = field(j, "H_a");
  if (!ha.is_array() || ha.empty()) throw InputError("H_a must be a nonempty array");
  for (const auto& h : ha) b.H_a.push_back(matrix_from(h, basis.n_prefixes(), basis.n_suffixes()));
  b.lambda_row = basis.lambda_row();
  b.lambda_col = basis.lambda_col();
  const std::string tag = j.value("estimator", std::string("exact"));
  if (tag != "exact") b.estimator = parse_estimator(tag);
  b.validate();
  return b;
}

Json to_json(const CoSolution& sol, const Basis& basis) {
  Json j;
  j["tau"] = sol.tau;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["objective_trace"] = sol.objective_trace;
  j["B_sigma"] = matrix_json(sol.B_sigma);
  j["basis_digest"] = basis.digest();
  return j;
}

void write_sample(std::ostream& out, const StringSample& sample) {
  for (const auto& x : sample.strings) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) out << ' ';
      out << x[i];
    }
    out << '\n';
  }
}

StringSample read_sample(std::istream& in, std::optional<int> alphabet_size) {
  StringSample s;
  std::string line;
  int max_symbol = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    Word w;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      long long v = -1;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || v < 0 || v > (1LL << 30)) {
        throw InputError("sample line " + std::to_string(line_no) + ": bad symbol '" + tok + "'");
      }
      w.push_back(static_cast<Symbol>(v));
      max_symbol = std::max(max_symbol, static_cast<int>(v));
    }
    s.strings.push_back(std::move(w));
  }
  s.alphabet_size = alphabet_size.value_or(std::max(max_symbol + 1, 1));
  s.validate();
  return s;
}

ExperimentConfig experiment_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{1});
    c.trials = j.value("trials", 1);
    c.max_length = j.value("L", 8);
    c.validation_size = j.value("validation_size", std::size_t{0});
    c.record_timing = j.value("record_timing", false);
    c.estimator = parse_estimator(j.value("estimator", std::string("word")));
    for (const auto& n : field(j, "sample_sizes")) c.sample_sizes.push_back(n.get<std::size_t>());

    const Json& t = field(j, "target");
    const std::string source = t.value("source", std::string("random"));
    if (source == "load") {
      c.target.source = TargetSpec::Source::load;
      c.target.path = field(t, "path").get<std::string>();
    } else if (source == "random") {
      c.target.source = TargetSpec::Source::random;
      c.target.n_states = t.value("n_states", 5);
      c.target.alphabet_size = t.value("alphabet_size", 3);
      c.target.concentration = t.value("concentration", 1.0);
      c.target.seed = t.value("seed", std::uint64_t{1});
      c.target.per_trial = t.value("per_trial", true);
      if (t.contains("sigma_min")) {
        const Json& r = t.at("sigma_min");
        if (!r.is_array() || r.size() != 2) throw InputError("sigma_min must be [low, high]");
        c.target.sigma_min_range = std::make_pair(number(r[0]), number(r[1]));
      }
    } else {
      throw InputError("target source must be random|load");
    }

    if (j.contains("basis")) {
      const Json& b = j.at("basis");
      const std::string mode = b.value("mode", std::string("length-k"));
      if (mode == "length-k") {
        c.basis.mode = BasisSpec::Mode::length_k;
      } else if (mode == "random") {
        c.basis.mode = BasisSpec::Mode::random;
      } else if (mode == "frequency") {
        c.basis.mode = BasisSpec::Mode::frequency;
      } else {
        throw InputError("basis mode must be length-k|random|frequency");
      }
      c.basis.k = b.value("k", 1);
      c.basis.max_len = b.value("max_len", 4);
      c.basis.dim = b.value("dim", 10);
    }

    for (const auto& l : field(j, "learners")) {
      LearnerSpec spec;
      spec.kind = parse_learner(field(l, "method").get<std::string>());
      const char* grid_key = spec.kind == LearnerKind::co ? "tau" : "n";
      if (l.contains(grid_key)) spec.grid = grid_from(l.at(grid_key));
      spec.tau_relative = l.value("tau_relative", false);
      spec.max_iter = l.value("max_iter", 0);
      spec.rel_tol = l.value("rel_tol", 0.0);
      c.learners.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

StringSample read_sample_file(const std::string& path, std::optional<int> alphabet_size) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_sample(in, alphabet_size);
}

void write_sample_file(const std::string& path, const StringSample& sample) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_sample(out, sample);
}

std::string digest(const Json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wfa::io
