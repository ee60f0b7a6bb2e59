// kacgraze: runs one grazing-limit experiment and writes its CSV table.
//
//   kacgraze grazing-levy --config configs/grazing_levy.json --out levy.csv
//
// Exit status: 0 success, 2 precondition gate refused the datum, 3 an asserted property
// failed, 1 any other error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "kacgraze/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
};

kacgraze::ExperimentConfig load_config(const std::string& subcommand, const Options& opt) {
  nlohmann::json j = nlohmann::json::object();
  if (!opt.config.empty()) {
    std::ifstream in(opt.config);
    if (!in) throw kacgraze::DomainError("cannot open config " + opt.config);
    j = nlohmann::json::parse(in);
  }
  const auto wanted = kacgraze::canonical_experiment(subcommand);
  if (j.contains("experiment") &&
      kacgraze::canonical_experiment(j.at("experiment").get<std::string>()) != wanted)
    throw kacgraze::DomainError("config is for experiment '" +
                                j.at("experiment").get<std::string>() + "', not " + subcommand);
  j["experiment"] = wanted;
  auto cfg = kacgraze::config_from_json(j);
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.threads = opt.threads;
  return cfg;
}

int run(const std::string& subcommand, const Options& opt) {
  const auto cfg = load_config(subcommand, opt);
  const auto result = kacgraze::run_experiment(cfg);

  if (opt.out.empty() || opt.out == "-") {
    kacgraze::write_csv(std::cout, result);
  } else {
    std::ofstream csv(opt.out);
    if (!csv) throw kacgraze::DomainError("cannot write " + opt.out);
    kacgraze::write_csv(csv, result);
    nlohmann::json meta = {{"config", kacgraze::config_to_json(cfg)},
                           {"passed", result.passed()},
                           {"failures", result.failures}};
    std::ofstream(opt.out + ".json") << meta.dump(2) << '\n';
  }
  for (const auto& f : result.failures) std::cerr << "tolerance failure: " << f << '\n';
  return result.passed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grazing-collision limits of the inelastic Kac equation"};
  app.require_subcommand(1);
  Options opt;
  std::string chosen;
  for (const char* name : {"grazing-levy", "grazing-drift", "fp-longtime", "attract", "dsmc-check"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "JSON experiment configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Base seed for random streams");
    sub->add_option("--out", opt.out, "CSV output path ('-' for stdout)");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->callback([&chosen, name] { chosen = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    return run(chosen, opt);
  } catch (const kacgraze::PreconditionGateError& e) {
    std::cerr << "precondition gate: " << e.what() << '\n';
    return 2;
  } catch (const kacgraze::ToleranceError& e) {
    std::cerr << "tolerance failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
