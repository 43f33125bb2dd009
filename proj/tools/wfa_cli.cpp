// Command-line front end: target generation, sampling, basis selection,
// learning, evaluation and the experiment drivers.
//
// Exit codes: 0 success, 2 input error, 3 numeric error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wfa/automata.hpp"
#include "wfa/convex_opt.hpp"
#include "wfa/em.hpp"
#include "wfa/hankel.hpp"
#include "wfa/harness.hpp"
#include "wfa/io.hpp"
#include "wfa/spectral.hpp"

namespace {

constexpr int kInputError = 2;
constexpr int kNumericError = 3;

using wfa::io::Json;

void emit_json(const std::string& path, const Json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    wfa::io::write_json_file(path, j);
  }
}

template <class Writer>
void emit_text(const std::string& path, Writer&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
  } else {
    std::ofstream out(path);
    if (!out) throw wfa::InputError("cannot write '" + path + "'");
    write(out);
  }
}

std::optional<int> opt_alphabet(int m) { return m > 0 ? std::optional<int>(m) : std::nullopt; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn weighted automata from strings through Hankel sub-blocks"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress numerical warnings");

  // gen-target
  auto* gen = app.add_subcommand("gen-target", "Write a random PNFA target as JSON");
  int gen_states = 5, gen_alphabet = 3;
  double gen_conc = 1.0;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--states,-n", gen_states, "Number of states")->check(CLI::PositiveNumber);
  gen->add_option("--alphabet,-m", gen_alphabet, "Alphabet size")->check(CLI::PositiveNumber);
  gen->add_option("--concentration", gen_conc, "Symmetric Dirichlet concentration");
  gen->add_option("--seed", gen_seed, "Random seed")->required();
  gen->add_option("--out,-o", gen_out, "Output path (default stdout)");

  // sample
  auto* samp = app.add_subcommand("sample", "Draw strings from a PNFA target");
  std::string samp_target, samp_out;
  std::size_t samp_count = 1000;
  std::uint64_t samp_seed = 1;
  samp->add_option("--target,-t", samp_target, "PNFA JSON")->required();
  samp->add_option("--count,-N", samp_count, "Number of strings");
  samp->add_option("--seed", samp_seed, "Random seed")->required();
  samp->add_option("--out,-o", samp_out, "Output sample file (default stdout)");

  // basis
  auto* bas = app.add_subcommand("basis", "Choose prefixes and suffixes");
  std::string bas_mode = "length-k", bas_sample, bas_out, bas_estimator;
  int bas_k = 1, bas_alphabet = 0, bas_max_len = 4, bas_dim = 10;
  std::uint64_t bas_seed = 1;
  bas->add_option("--mode", bas_mode, "length-k|random|frequency")
      ->check(CLI::IsMember({"length-k", "random", "frequency"}));
  bas->add_option("--k", bas_k, "Maximum string length for length-k");
  bas->add_option("--alphabet,-m", bas_alphabet, "Alphabet size (length-k without a sample)");
  bas->add_option("--sample,-s", bas_sample, "Sample file (random, frequency, or blocks)");
  bas->add_option("--max-len", bas_max_len, "Longest substring for frequency mode");
  bas->add_option("--dim", bas_dim, "Basis size per side for frequency mode");
  bas->add_option("--seed", bas_seed, "Random seed");
  bas->add_option("--estimator", bas_estimator, "Also write empirical blocks: word|prefix|substring");
  bas->add_option("--out,-o", bas_out, "Output path (default stdout)");

  // learn
  auto* lrn = app.add_subcommand("learn", "Learn a weighted automaton from a sample");
  std::string lrn_method = "svd", lrn_sample, lrn_basis, lrn_estimator = "word", lrn_out,
              lrn_solution_out;
  int lrn_n = 0, lrn_alphabet = 0, lrn_k = 1, lrn_max_iter = 0;
  double lrn_tau = 1.0, lrn_tol = 0.0;
  std::uint64_t lrn_seed = 1;
  lrn->add_option("--method", lrn_method, "svd|co|em")->check(CLI::IsMember({"svd", "co", "em"}));
  lrn->add_option("--sample,-s", lrn_sample, "Sample file")->required();
  lrn->add_option("--basis,-b", lrn_basis, "Basis JSON (default: length-k with --k)");
  lrn->add_option("--k", lrn_k, "Length bound of the default basis");
  lrn->add_option("--alphabet,-m", lrn_alphabet, "Alphabet size (default: max symbol + 1)");
  lrn->add_option("--n", lrn_n, "Number of states (svd, em)");
  lrn->add_option("--tau", lrn_tau, "Regularization weight (co)");
  lrn->add_option("--estimator", lrn_estimator, "word|prefix|substring")
      ->check(CLI::IsMember({"word", "prefix", "substring"}));
  lrn->add_option("--max-iter", lrn_max_iter, "Iteration cap (co, em)");
  lrn->add_option("--tol", lrn_tol, "Relative-change tolerance (co, em)");
  lrn->add_option("--seed", lrn_seed, "Initialization seed (em)");
  lrn->add_option("--solution-out", lrn_solution_out, "CO solution JSON path");
  lrn->add_option("--out,-o", lrn_out, "Output WA JSON (default stdout)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Truncated L1 error of a model against a target");
  std::string ev_target, ev_model;
  int ev_len = 8;
  ev->add_option("--target,-t", ev_target, "PNFA JSON")->required();
  ev->add_option("--model", ev_model, "WA or PNFA JSON")->required();
  ev->add_option("--L", ev_len, "Length bound")->check(CLI::NonNegativeNumber);

  // curve
  auto* cur = app.add_subcommand("curve", "Run a learning-curve experiment");
  std::string cur_config, cur_out, cur_summary;
  bool cur_timing = false;
  cur->add_option("--config,-c", cur_config, "Experiment JSON")->required();
  cur->add_option("--out,-o", cur_out, "CSV path (default stdout)");
  cur->add_option("--summary", cur_summary, "Also write median best-model errors as CSV");
  cur->add_flag("--timing", cur_timing, "Fill the wall_time_s column (output no longer reproducible)");

  // basis-success
  auto* bs = app.add_subcommand("basis-success", "Success rate of random bases");
  std::string bs_target, bs_out;
  std::vector<std::size_t> bs_sizes{50, 500, 5000};
  int bs_trials = 50;
  std::uint64_t bs_seed = 1;
  bs->add_option("--target,-t", bs_target, "PNFA JSON")->required();
  bs->add_option("--N", bs_sizes, "Sample sizes")->delimiter(',');
  bs->add_option("--trials", bs_trials, "Trials per sample size")->check(CLI::PositiveNumber);
  bs->add_option("--seed", bs_seed, "Random seed");
  bs->add_option("--out,-o", bs_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }
  wfa::set_warnings_enabled(!quiet);

  try {
    if (*gen) {
      wfa::Rng rng(gen_seed);
      const auto p = wfa::random_pnfa(gen_states, gen_alphabet, rng, gen_conc);
      emit_json(gen_out, wfa::io::to_json(p, gen_seed));
    } else if (*samp) {
      const auto p = wfa::io::pnfa_from_json(wfa::io::read_json_file(samp_target));
      wfa::Rng rng(samp_seed);
      const auto s = wfa::sample_strings(p, samp_count, rng);
      emit_text(samp_out, [&](std::ostream& o) { wfa::io::write_sample(o, s); });
    } else if (*bas) {
      std::optional<wfa::StringSample> sample;
      if (!bas_sample.empty()) {
        sample = wfa::io::read_sample_file(bas_sample, opt_alphabet(bas_alphabet));
      }
      wfa::Rng rng(bas_seed);
      auto need_sample = [&]() -> const wfa::StringSample& {
        if (!sample) throw wfa::InputError("--mode " + bas_mode + " needs --sample");
        return *sample;
      };
      const wfa::Basis basis = [&] {
        if (bas_mode == "random") return wfa::random_basis(need_sample(), rng);
        if (bas_mode == "frequency") {
          return wfa::frequency_basis(need_sample(), bas_max_len, bas_dim, rng);
        }
        const int m = bas_alphabet > 0 ? bas_alphabet : (sample ? sample->alphabet_size : 0);
        if (m < 1) throw wfa::InputError("length-k basis needs --alphabet or --sample");
        return wfa::length_k_basis(wfa::Alphabet(m), bas_k);
      }();
      if (!bas_estimator.empty()) {
        const auto blocks =
            wfa::empirical_blocks(need_sample(), basis, wfa::parse_estimator(bas_estimator));
        emit_json(bas_out, wfa::io::to_json(basis, blocks));
      } else {
        emit_json(bas_out, wfa::io::to_json(basis));
      }
    } else if (*lrn) {
      const auto sample = wfa::io::read_sample_file(lrn_sample, opt_alphabet(lrn_alphabet));
      if (lrn_method == "em") {
        wfa::EmConfig ec;
        ec.n_states = lrn_n > 0 ? lrn_n : 1;
        ec.seed = lrn_seed;
        if (lrn_max_iter > 0) ec.max_iter = lrn_max_iter;
        if (lrn_tol > 0) ec.rel_tol = lrn_tol;
        const auto fit = wfa::em_fit(sample, ec);
        emit_json(lrn_out, wfa::io::to_json(fit.model, lrn_seed));
      } else {
        const wfa::Basis basis = lrn_basis.empty()
                                     ? wfa::length_k_basis(wfa::Alphabet(sample.alphabet_size), lrn_k)
                                     : wfa::io::basis_from_json(wfa::io::read_json_file(lrn_basis));
        const auto blocks =
            wfa::empirical_blocks(sample, basis, wfa::parse_estimator(lrn_estimator));
        if (lrn_method == "svd") {
          if (lrn_n < 1) throw wfa::InputError("--method svd needs --n >= 1");
          emit_json(lrn_out, wfa::io::to_json(wfa::svd_learn(blocks, lrn_n)));
        } else {
          wfa::CoConfig cc;
          cc.tau = lrn_tau;
          if (lrn_max_iter > 0) cc.max_iter = lrn_max_iter;
          if (lrn_tol > 0) cc.rel_tol = lrn_tol;
          const auto sol = wfa::solve_co(blocks, cc);
          if (!lrn_solution_out.empty()) {
            wfa::io::write_json_file(lrn_solution_out, wfa::io::to_json(sol, basis));
          }
          emit_json(lrn_out, wfa::io::to_json(wfa::extract_wa_co(blocks, sol.B_sigma)));
        }
      }
    } else if (*ev) {
      const auto target = wfa::io::pnfa_from_json(wfa::io::read_json_file(ev_target));
      const auto model = wfa::io::wa_from_json(wfa::io::read_json_file(ev_model));
      const auto r = wfa::l1_error(target, model, ev_len);
      Json j;
      j["l1_error"] = r.error;
      j["tail_mass"] = r.tail_mass;
      j["L"] = ev_len;
      std::cout << j.dump() << '\n';
    } else if (*cur) {
      auto config = wfa::io::experiment_from_json(wfa::io::read_json_file(cur_config));
      if (cur_timing) config.record_timing = true;
      const auto records = wfa::run_learning_curve(config);
      emit_text(cur_out, [&](std::ostream& o) { wfa::write_csv(o, records); });
      if (!cur_summary.empty()) {
        emit_text(cur_summary, [&](std::ostream& o) {
          o << "learner,sample_size,median_best_l1,trials\n";
          for (const auto& row : wfa::summarize_curve(records)) {
            o << wfa::to_string(row.learner) << ',' << row.sample_size << ','
              << row.median_best_l1 << ',' << row.trials << '\n';
          }
        });
      }
    } else if (*bs) {
      const auto target = wfa::io::pnfa_from_json(wfa::io::read_json_file(bs_target));
      const auto rows = wfa::basis_success_experiment(target, bs_sizes, bs_trials, bs_seed);
      emit_text(bs_out, [&](std::ostream& o) { wfa::write_success_csv(o, rows); });
    }
  } catch (const wfa::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const wfa::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  }
  return 0;
}
