// Command-line front end: run, sweep-gamma, compare-ars, validate-config.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 training abort.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsgd/config.hpp"
#include "dsgd/harness.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitAbort = 2;

// Turns leftover `--section.key=value` arguments into config overrides.
void apply_overrides(dsgd::RunConfig& config, const std::vector<std::string>& extras) {
  for (const auto& arg : extras) {
    const auto eq = arg.find('=');
    if (arg.rfind("--", 0) != 0 || eq == std::string::npos) {
      throw dsgd::ConfigError("unrecognized argument '" + arg + "' (overrides take the form --section.key=value)");
    }
    dsgd::set_config_value(config, arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
}

std::vector<double> parse_gammas(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) {
      dsgd::RunConfig scratch;
      dsgd::set_config_value(scratch, "schedule.initial", item);  // reuse the strict number parser
      out.push_back(scratch.schedule.initial);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized SGD simulator with averaging-rate scheduling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string gammas_text;
  bool print_config = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "INI config file; keys not set fall back to the desk preset");
    sub->allow_extras();
    sub->footer("Any config key can be overridden as --section.key=value, e.g. --schedule.initial=0.2");
  };
  auto* run = app.add_subcommand("run", "Train once per configured seed and summarize consensus-model accuracy");
  auto* sweep = app.add_subcommand("sweep-gamma", "Constant averaging-rate sweep");
  auto* compare = app.add_subcommand("compare-ars", "Constant gamma = 1 versus the configured schedule");
  auto* check = app.add_subcommand("validate-config", "Resolve and validate a config without training");
  for (auto* sub : {run, sweep, compare, check}) add_common(sub);
  sweep->add_option("--gammas", gammas_text, "Comma-separated averaging rates (default 0.1,...,1.0)");
  check->add_flag("--print", print_config, "Print the resolved config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  dsgd::RunConfig config;
  try {
    config = config_path.empty() ? dsgd::desk_preset() : dsgd::load_config(config_path);
    apply_overrides(config, active->remaining());
    const auto dir = dsgd::resolve_output(config);

    if (active == check) {
      config.output = dir.string();
      dsgd::prepare(config);
      if (print_config) std::cout << dsgd::serialize_config(config);
      (print_config ? std::cerr : std::cout) << "config ok\n";
      return 0;
    }
    if (active == run) {
      const auto summary = dsgd::run_experiment(config, dir);
      for (const auto& r : summary.runs) {
        std::printf("seed %llu  test_acc_consensus %s\n", static_cast<unsigned long long>(r.seed),
                    dsgd::format_real(r.result.final_accuracy).c_str());
      }
      std::printf("mean %s  std %s  (population std over %zu seeds)\n", dsgd::format_real(summary.mean_accuracy).c_str(),
                  dsgd::format_real(summary.std_accuracy).c_str(), summary.runs.size());
      std::printf("wrote %s\n", (dir / "summary.csv").string().c_str());
      return 0;
    }
    if (active == sweep) {
      const auto gammas = gammas_text.empty() ? dsgd::default_gamma_grid() : parse_gammas(gammas_text);
      const auto rows = dsgd::sweep_gamma(config, gammas, dir, std::cerr);
      for (const auto& r : rows) {
        std::printf("gamma %-6s mean %s  std %s\n", dsgd::format_real(r.gamma).c_str(),
                    dsgd::format_real(r.mean_accuracy).c_str(), dsgd::format_real(r.std_accuracy).c_str());
      }
      std::printf("wrote %s\n", (dir / "sweep_gamma.csv").string().c_str());
      return 0;
    }
    const auto cmp = dsgd::compare_ars(config, dir);
    std::printf("without ARS  mean %s  std %s\n", dsgd::format_real(cmp.without_ars.mean_accuracy).c_str(),
                dsgd::format_real(cmp.without_ars.std_accuracy).c_str());
    std::printf("with ARS     mean %s  std %s\n", dsgd::format_real(cmp.with_ars.mean_accuracy).c_str(),
                dsgd::format_real(cmp.with_ars.std_accuracy).c_str());
    std::printf("wrote %s\n", (dir / "compare_ars.csv").string().c_str());
    return 0;
  } catch (const dsgd::SeedAbort& e) {
    std::fprintf(stderr, "training aborted: %s\n", e.what());
    return kExitAbort;
  } catch (const dsgd::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
}
