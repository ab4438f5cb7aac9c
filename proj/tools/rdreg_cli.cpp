// Command-line front end: synth, run, verify, sweep.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdreg/scenario/config.hpp"
#include "rdreg/scenario/run.hpp"
#include "rdreg/synthesis/certificate.hpp"

namespace fs = std::filesystem;
using namespace rdreg;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInfeasible = 2;
constexpr int kConfigError = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<std::size_t> grid;
};

ScenarioConfig load_with_overrides(const fs::path& path, const Overrides& o) {
  ScenarioConfig cfg = load_config(path);
  if (o.seed) cfg.lmi_seed = *o.seed;
  if (o.dt) cfg.dt = *o.dt;
  if (o.grid) cfg.grid = *o.grid;
  cfg.validate();
  return cfg;
}

std::string g17(double v) { return detail::num17(v); }

void print_certificate_summary(const GainCertificate& c) {
  std::cout << "N = " << c.order << "\n";
  std::cout << "K =";
  for (double k : c.K.data()) std::cout << ' ' << g17(k);
  std::cout << "\nL =";
  for (double l : c.L.data()) std::cout << ' ' << g17(l);
  std::cout << "\nlambda_max(Phi) = " << g17(c.phi_margin) << "\nobserver margin = " << g17(c.observer_margin)
            << '\n';
}

int report(const std::string& what, const std::exception& e, int code) {
  std::cerr << what << ": " << e.what() << '\n';
  return code;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::string where = e.line() > 0 ? " (line " + std::to_string(e.line()) + ")" : "";
    std::cerr << "config error" << where << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const InfeasibleError& e) {
    return report("infeasible", e, kInfeasible);
  } catch (const SynthesisError& e) {
    return report("synthesis failed", e, kInfeasible);
  } catch (const std::exception& e) {
    return report("error", e, kFailure);
  }
}

int cmd_synth(const fs::path& config, const fs::path& out, const Overrides& o) {
  return guarded([&] {
    const ScenarioConfig cfg = load_with_overrides(config, o);
    const GainCertificate cert = synthesize(cfg.model(), cfg.synthesis());
    print_certificate_summary(cert);
    if (!out.empty()) {
      fs::create_directories(out);
      write_text_file(out / "certificate.txt", certificate_text(cert));
    }
    if (!cert.feasible()) {
      std::cerr << "infeasible: " << margin_report(cert) << '\n';
      return kInfeasible;
    }
    return kOk;
  });
}

int cmd_run(const fs::path& config, const fs::path& out, const Overrides& o) {
  return guarded([&] {
    const ScenarioConfig cfg = load_with_overrides(config, o);
    const fs::path dir = out.empty() ? fs::path("results") / cfg.name : out;
    const ScenarioResult r = run_scenario(cfg, dir);
    print_certificate_summary(r.certificate);
    std::cout << to_json(r.metrics).dump(2) << '\n';
    std::cout << "outputs written to " << dir.string() << '\n';
    return kOk;
  });
}

int cmd_verify(const fs::path& cert_path) {
  return guarded([&] {
    std::ifstream in(cert_path);
    if (!in) throw ConfigError(0, "cannot open certificate '" + cert_path.string() + "'");
    const GainCertificate c = read_certificate(in);
    const VerifyReport r = verify(c);
    if (!r.symmetric) {
      std::cout << "FAIL: P1, S, R or Q is not symmetric\n";
      return kInfeasible;
    }
    std::cout << "lambda_max(Phi) = " << g17(r.phi_margin) << '\n'
              << "observer margin = " << g17(r.observer_margin) << '\n'
              << "min eig P1 = " << g17(r.min_eig_P1) << ", S = " << g17(r.min_eig_S) << ", R = " << g17(r.min_eig_R)
              << ", Q = " << g17(r.min_eig_Q) << '\n'
              << (r.pass ? "PASS" : "FAIL") << '\n';
    return r.pass ? kOk : kInfeasible;
  });
}

int cmd_sweep(const fs::path& dir, const fs::path& out, const Overrides& o) {
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".cfg") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::cerr << "config error: no .cfg files in " << dir.string() << '\n';
    return kConfigError;
  }
  const fs::path root = out.empty() ? fs::path("results") : out;
  std::vector<std::future<int>> jobs;
  for (const auto& c : configs)
    jobs.push_back(std::async(std::launch::async, [&, c] {
      return guarded([&] {
        const ScenarioConfig cfg = load_with_overrides(c, o);
        const ScenarioResult r = run_scenario(cfg, root / c.stem());
        (void)r;
        return kOk;
      });
    }));
  int worst = kOk;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const int code = jobs[i].get();
    std::cout << configs[i].filename().string() << ": " << (code == kOk ? "ok" : "failed (" + std::to_string(code) + ")")
              << '\n';
    worst = std::max(worst, code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Output regulation of a delayed reaction-diffusion plant: synthesis, simulation, verification"};
  app.require_subcommand(1);

  fs::path config, out, cert, dir;
  Overrides o;
  auto add_overrides = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--seed", o.seed, "LMI search seed");
    sub->add_option("--dt", o.dt, "Time step override");
    sub->add_option("--grid", o.grid, "Spatial intervals override (even, >= 20)");
  };

  CLI::App* synth = app.add_subcommand("synth", "Design and certify gains");
  synth->add_option("--config", config, "Scenario file")->required();
  add_overrides(synth);

  CLI::App* run = app.add_subcommand("run", "Synthesize, certify and simulate a scenario");
  run->add_option("--config", config, "Scenario file")->required();
  add_overrides(run);

  CLI::App* verify_cmd = app.add_subcommand("verify", "Re-check a serialized certificate");
  verify_cmd->add_option("certificate", cert, "Certificate file")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Run every .cfg file in a directory concurrently");
  sweep->add_option("directory", dir, "Directory of scenario files")->required();
  add_overrides(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (*synth) return cmd_synth(config, out, o);
  if (*run) return cmd_run(config, out, o);
  if (*verify_cmd) return cmd_verify(cert);
  if (*sweep) return cmd_sweep(dir, out, o);
  return kFailure;
}
