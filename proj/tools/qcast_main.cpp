#include <CLI11.hpp>

#include <qcast/io.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

// Command-line front end: fidelity reports, broadcaster construction,
// variational searches, and noncommutativity sweeps over the JSON/CSV
// formats of the library. Exit codes: 0 success, 1 numerical or optimizer
// configuration failure, 2 malformed input, 3 noncommuting inputs where
// commutation is a precondition.
namespace {

struct FidelityArgs {
  std::string state0;
  std::string state1;
  std::string out;
  double tol_psd = 1e-10;
  double rank_tol = 1e-10;
  std::string format = "json";
};

struct BuildArgs {
  std::string state0;
  std::string state1;
  std::string out;
  double tol_psd = 1e-10;
  double tol_chain = 1e-8;
  std::string format = "json";
};

struct SearchArgs {
  std::string state0;
  std::string state1;
  std::string config;
  std::string out;
  double tol_psd = 1e-10;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string format = "json";
};

struct SweepArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string format = "csv";
};

void print_value(const char* name, double value) {
  std::cout.precision(17);
  std::cout << name << ' ' << value << '\n';
}

void print_flag(const char* name, bool value) {
  std::cout << name << ' ' << (value ? 1 : 0) << '\n';
}

int run_fidelity(const FidelityArgs& args) {
  const auto rho0 = qcast::io::state_from_json(qcast::io::load_json(args.state0), args.tol_psd);
  const auto rho1 = qcast::io::state_from_json(qcast::io::load_json(args.state1), args.tol_psd);
  const double f = qcast::fidelity(rho0, rho1);
  const auto witness = qcast::optimal_povm(rho0, rho1, args.rank_tol);
  const double overlap = qcast::povm_overlap(rho0, rho1, witness.povm);
  const double difference = std::abs(f - overlap);
  print_value("fidelity", f);
  print_value("povm_overlap", overlap);
  print_value("difference", difference);
  if (!args.out.empty()) {
    const auto optimality = qcast::check_povm_optimality(rho0, rho1, witness.povm);
    qcast::io::write_json(args.out,
                          qcast::io::json{{"fidelity", f},
                                          {"povm_overlap", overlap},
                                          {"difference", difference},
                                          {"povm", qcast::io::povm_to_json(witness.povm)},
                                          {"optimality",
                                           qcast::io::optimality_report_to_json(optimality)}});
  }
  return 0;
}

int run_broadcast_build(const BuildArgs& args) {
  const auto rho0 = qcast::io::state_from_json(qcast::io::load_json(args.state0), args.tol_psd);
  const auto rho1 = qcast::io::state_from_json(qcast::io::load_json(args.state1), args.tol_psd);
  const auto channel = qcast::commuting_broadcaster(rho0, rho1, args.tol_chain);
  qcast::io::write_json(args.out, qcast::io::channel_to_json(channel));
  for (int s = 0; s < 2; ++s) {
    const auto& rho = s == 0 ? rho0 : rho1;
    const auto parts =
        qcast::marginals(qcast::apply_channel(channel, rho), channel.dim_a(), channel.dim_b());
    const double err = std::max((parts.on_a.matrix() - rho.matrix()).norm(),
                                (parts.on_b.matrix() - rho.matrix()).norm());
    print_value(s == 0 ? "marginal_error_rho0" : "marginal_error_rho1", err);
  }
  return 0;
}

int run_search(const SearchArgs& args) {
  const auto rho0 = qcast::io::state_from_json(qcast::io::load_json(args.state0), args.tol_psd);
  const auto rho1 = qcast::io::state_from_json(qcast::io::load_json(args.state1), args.tol_psd);
  auto cfg = qcast::io::search_config_from_json(qcast::io::load_json(args.config));
  if (args.seed_given) {
    cfg.seed = args.seed;
  }
  const auto result = qcast::search_broadcast(rho0, rho1, cfg);
  qcast::io::write_json(args.out, qcast::io::search_result_to_json(result));
  print_value("quality", result.quality);
  print_flag("certified", result.certified);
  print_value("f_in", result.chain.f_in);
  print_value("f_joint", result.chain.f_joint);
  print_value("f_a", result.chain.f_a);
  print_value("f_b", result.chain.f_b);
  print_value("equality_gap", result.chain.equality_gap);
  print_flag("channel_consistent", result.chain.channel_consistent);
  return 0;
}

int run_sweep(const SweepArgs& args) {
  qcast::io::SweepConfig cfg;
  if (!args.config.empty()) {
    cfg = qcast::io::sweep_config_from_json(qcast::io::load_json(args.config));
  }
  if (args.seed_given) {
    cfg.search.seed = args.seed;
  }
  const auto rows = qcast::sweep_noncommutativity(cfg.angles, cfg.purity, cfg.search);
  qcast::io::write_text_atomic(args.out, qcast::io::sweep_csv(rows));
  std::cout << "rows " << rows.size() << '\n';
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for mixed-state fidelity, optimal POVMs, and broadcasting"};
  app.require_subcommand(1);

  FidelityArgs fid;
  auto* fidelity = app.add_subcommand(
      "fidelity", "Fidelity, optimal POVM overlap, and their difference for two states");
  fidelity->add_option("state0", fid.state0, "state JSON file")->required();
  fidelity->add_option("state1", fid.state1, "state JSON file")->required();
  fidelity->add_option("--out", fid.out, "write a JSON report with per-element residuals");
  fidelity->add_option("--tol-psd", fid.tol_psd, "state validation tolerance");
  fidelity->add_option("--rank-tol", fid.rank_tol, "support rank cutoff");
  fidelity->add_option("--format", fid.format)->check(CLI::IsMember({"json"}));

  BuildArgs build;
  auto* broadcast = app.add_subcommand(
      "broadcast-build", "Construct the broadcasting channel of a commuting pair");
  broadcast->add_option("state0", build.state0, "state JSON file")->required();
  broadcast->add_option("state1", build.state1, "state JSON file")->required();
  broadcast->add_option("--out", build.out, "channel JSON output path")->required();
  broadcast->add_option("--tol-psd", build.tol_psd, "state validation tolerance");
  broadcast->add_option("--tol-chain", build.tol_chain, "commutation tolerance");
  broadcast->add_option("--format", build.format)->check(CLI::IsMember({"json"}));

  SearchArgs search;
  auto* searcher = app.add_subcommand(
      "search", "Variational search for a broadcasting channel of a state pair");
  searcher->add_option("state0", search.state0, "state JSON file")->required();
  searcher->add_option("state1", search.state1, "state JSON file")->required();
  searcher->add_option("--config", search.config, "search config JSON")->required();
  searcher->add_option("--out", search.out, "result JSON output path")->required();
  searcher->add_option("--tol-psd", search.tol_psd, "state validation tolerance");
  auto* search_seed = searcher->add_option("--seed", search.seed, "override the config seed");
  searcher->add_option("--format", search.format)->check(CLI::IsMember({"json"}));

  SweepArgs sweep;
  auto* sweeper = app.add_subcommand(
      "sweep", "Sweep a qubit pair from commuting to maximally noncommuting");
  sweeper->add_option("--config", sweep.config, "sweep config JSON (defaults when omitted)");
  sweeper->add_option("--out", sweep.out, "CSV output path")->required();
  auto* sweep_seed = sweeper->add_option("--seed", sweep.seed, "override the config seed");
  sweeper->add_option("--format", sweep.format)->check(CLI::IsMember({"csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  search.seed_given = search_seed->count() > 0;
  sweep.seed_given = sweep_seed->count() > 0;
  if (app.got_subcommand(fidelity)) return run_fidelity(fid);
  if (app.got_subcommand(broadcast)) return run_broadcast_build(build);
  if (app.got_subcommand(searcher)) return run_search(search);
  return run_sweep(sweep);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const qcast::NotCommuting& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const qcast::ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const qcast::NotTracePreserving& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const qcast::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
