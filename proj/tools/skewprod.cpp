// skewprod <subcommand> --config <file> [--seed N] [--outdir D] [--workers W]
// skewprod replay --report <outdir>/report.json [--outdir D]

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "skewprod/config.hpp"
#include "skewprod/report.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::filesystem::filesystem_error("cannot read config", path, std::make_error_code(std::errc::io_error));
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string outdir;
  std::optional<unsigned> workers;
  std::string report;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Step skew products of interval diffeomorphisms over the Bernoulli shift"};
  app.require_subcommand(1);
  Options opt;

  for (const auto& name : skewprod::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", opt.config, "configuration file")->required();
    sub->add_option("--seed", opt.seed, "override base.seed");
    sub->add_option("--outdir", opt.outdir, "override output.dir");
    sub->add_option("--workers", opt.workers, "worker threads (default: $SKEWPROD_WORKERS or all cores)");
  }
  auto* replay = app.add_subcommand("replay", "rerun the configuration stored in a report.json");
  replay->add_option("--report", opt.report, "report.json of an earlier run")->required();
  replay->add_option("--outdir", opt.outdir, "write to this directory instead");

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    skewprod::RunOutcome outcome;
    if (command == "replay") {
      outcome = skewprod::replay(opt.report, opt.outdir);
    } else {
      skewprod::RunConfig cfg = skewprod::parse_config(slurp(opt.config));
      if (opt.seed) cfg.seed = *opt.seed;
      if (!opt.outdir.empty()) cfg.outdir = opt.outdir;
      if (opt.workers) cfg.workers = *opt.workers;
      outcome = skewprod::run(cfg, command);
    }
    for (const auto& f : outcome.files) std::cout << (outcome.outdir / f).string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << skewprod::error_record(e) << '\n';
    return 1;
  }
}
